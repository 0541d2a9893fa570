import json

import pytest

from lamsum.corpus import Corpus
from lamsum.synthetic import make_corpus


@pytest.fixture
def small_corpus():
    return make_corpus(30, seed=3)


@pytest.fixture
def corpus_625():
    return make_corpus(625, seed=11)


@pytest.fixture
def jsonl_file(tmp_path):
    def write(records, name="posts.jsonl"):
        path = tmp_path / name
        path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
        return path

    return write


@pytest.fixture
def tiny_corpus():
    return Corpus.from_texts(["alpha one", "beta two", "gamma three", "delta four"])
