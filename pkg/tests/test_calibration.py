import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamsum.calibration import CalibrationConfig, check, edit_distance, extract_keywords, load_stopwords
from lamsum.corpus import Corpus
from lamsum.synthetic import make_corpus, perturb


def naive_levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


REWRITE_POSTS = [
    "In a train some people were staring me continuously. It was very uncomfortable.",
    "We were going to metro station, a biker started following us. When we shouted, he rode away.",
    "Some boy do dirty comments on me and my religion.",
    "A man touched me inappropriately in a crowded bus near the market.",
    "Group of boys passed lewd remarks while I was walking home at night.",
]


@pytest.fixture
def rewrite_posts():
    return Corpus.from_texts(REWRITE_POSTS)


@pytest.mark.parametrize(
    "a,b,expected",
    [("abc", "abc", 0), ("kitten", "sitting", 3), ("", "abc", 3), ("abc", "", 3), ("flaw", "lawn", 2)],
)
def test_edit_distance_examples(a, b, expected):
    assert edit_distance(a, b) == expected
    assert naive_levenshtein(a, b) == expected


@settings(max_examples=200)
@given(st.text(max_size=30), st.text(max_size=30))
def test_edit_distance_matches_oracle(a, b):
    assert edit_distance(a, b) == naive_levenshtein(a, b)


@given(st.text(max_size=20), st.text(max_size=20), st.text(max_size=20))
def test_edit_distance_metric_axioms(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert edit_distance(a, a) == 0
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


def test_edit_distance_is_case_sensitive():
    assert edit_distance("Train", "train") == 1


def test_keywords_stopword_filter():
    assert extract_keywords("the man was staring at me") == {"man", "staring"}


def test_keywords_empty_and_stopwords_only():
    assert extract_keywords("") == set()
    assert extract_keywords("the was at me and of") == set()


def test_keywords_min_length():
    assert extract_keywords("ox cart", min_length=3) == {"cart"}
    assert extract_keywords("ox cart", min_length=2) == {"ox", "cart"}


def test_stopword_file(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# custom\nMan\n\nstaring\n")
    words = load_stopwords(path)
    assert words == {"man", "staring"}
    assert extract_keywords("the man was staring", stopwords=words) == {"the", "was"}


def test_epsilon_bounds():
    with pytest.raises(ValueError):
        CalibrationConfig(epsilon=0)
    with pytest.raises(ValueError):
        CalibrationConfig(epsilon=1.5)
    CalibrationConfig(epsilon=1.0)


def test_exact_match(rewrite_posts):
    [res] = check([REWRITE_POSTS[3]], rewrite_posts, range(5))
    assert (res.matched_id, res.method, res.score) == (3, "exact", 0)


def test_exact_match_ignores_whitespace_runs(rewrite_posts):
    line = REWRITE_POSTS[1].replace(" ", "   ")
    assert check([line], rewrite_posts, range(5))[0].method == "exact"


def test_rewrite_posts_reorder_fixture(rewrite_posts):
    [res] = check(["Some people were staring me continuously in a train."], rewrite_posts, range(5))
    assert res.matched_id == 0


@pytest.mark.parametrize(
    "line,expected",
    [
        ("A biker followed us and rode away when we shouted.", 1),
        ("Boys made dirty comments about my religion.", 2),
    ],
)
def test_rewrite_posts_other_rewrites(rewrite_posts, line, expected):
    assert check([line], rewrite_posts, range(5))[0].matched_id == expected


def test_slice_restriction(rewrite_posts):
    # the true source (unit 0) is outside the searched slice
    [res] = check([REWRITE_POSTS[0]], rewrite_posts, [2, 3, 4])
    assert res.matched_id in (2, 3, 4)


def test_keyword_tie_prefers_lower_id():
    corpus = Corpus.from_texts(["zebra lion", "lion zebra tiger", "zebra lion eagle"])
    # far from every unit by edit distance; units 1 and 2 both share two keywords
    line = "zebra " * 10 + "lion " * 10
    [res] = check([line], corpus, [2, 1, 0], CalibrationConfig(epsilon=0.05))
    assert res.method == "keyword"
    assert res.matched_id == 0  # unit 0 also shares two keywords and has the lowest id


def test_no_keywords_falls_back_to_edit_distance(rewrite_posts, caplog):
    [res] = check(["?? !! ..."], rewrite_posts, range(5), CalibrationConfig(epsilon=0.01))
    assert res.method == "edit_distance"
    assert 0 <= res.matched_id < 5
    assert "matched no unit" in caplog.text


def test_totality_and_order(rewrite_posts):
    lines = ["", "xyz", REWRITE_POSTS[4], "random words here", REWRITE_POSTS[2]]
    results = check(lines, rewrite_posts, range(5))
    assert len(results) == len(lines)
    assert results[2].matched_id == 4 and results[4].matched_id == 2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.text(max_size=80), max_size=10))
def test_totality_property(lines):
    corpus = make_corpus(15, seed=4)
    ids = list(range(3, 12))
    results = check(lines, corpus, ids)
    assert len(results) == len(lines)
    assert all(r.matched_id in ids for r in results)


def test_idempotent_on_clean_input():
    corpus = make_corpus(50, seed=9)
    ids = list(range(50))
    results = check(corpus.texts(ids), corpus, ids)
    assert [r.matched_id for r in results] == ids
    assert {r.method for r in results} == {"exact"}


def test_perturbation_recovery_monte_carlo():
    corpus = make_corpus(200, seed=21)
    rng = random.Random(5)
    misses = 0
    for _ in range(1000):
        start = rng.randrange(0, 100)
        ids = list(range(start, start + 100))
        target = rng.choice(ids)
        line = perturb(corpus[target].text, rng.uniform(0.0, 0.1), rng)
        [res] = check([line], corpus, ids)
        misses += res.matched_id != target
    assert misses == 0


def test_custom_keyword_extractor():
    calls = []

    def tagger(text):
        calls.append(text)
        return {w for w in text.lower().split() if w.startswith("z")}

    corpus = Corpus.from_texts(["zoo keeper", "apple pie"])
    cfg = CalibrationConfig(epsilon=0.01, keyword_extractor=tagger)
    [res] = check(["a zoo far far away with nothing else"], corpus, [0, 1], cfg)
    assert res.method == "keyword" and res.matched_id == 0
    assert calls
