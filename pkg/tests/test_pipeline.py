import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamsum.backends import AuthError, FunctionBackend, LlmClient, MockBackend
from lamsum.config import ConfigError, PipelineConfig
from lamsum.corpus import Corpus
from lamsum.pipeline import (
    ChunkTrace,
    ConvergenceError,
    PipelineError,
    _merge,
    level_sizes,
    run_level,
    summarize,
    summarize_vanilla,
)
from lamsum.synthetic import make_corpus


def id_corpus(n):
    return Corpus.from_texts([f"report {i} from the district" for i in range(n)])


def lowest_ids_backend():
    def fn(sentences, size, request):
        ordered = sorted(sentences, key=lambda s: int(re.search(r"report (\d+)", s).group(1)))
        return ordered if size is None else ordered[:size]

    return FunctionBackend(fn, "lowest-ids")


def manual_level_sizes(n, k, s, q):
    # hand simulation of the level loop, written independently of plan_chunks
    sizes = [n]
    while n > k:
        if n <= q:
            n = k
        else:
            full, rest = divmod(n, s)
            n = full * q + (rest if rest <= q else q)
        sizes.append(n)
    return sizes


def test_config_validation():
    assert PipelineConfig(k=10, s=30).q == 10
    with pytest.raises(ConfigError, match="q: must be >= k"):
        PipelineConfig(k=10, q=5, s=30)
    with pytest.raises(ConfigError, match="s: must be > q"):
        PipelineConfig(k=10, s=10)
    with pytest.raises(ConfigError, match="m:"):
        PipelineConfig(k=10, s=30, m=0)
    with pytest.raises(ConfigError, match="voting_rule"):
        PipelineConfig(voting_rule="approval")
    with pytest.raises(ConfigError, match="mode"):
        PipelineConfig(mode="abstractive")


def test_625_converges_in_four_levels(corpus_625):
    sel = summarize(corpus_625, PipelineConfig(k=50, s=100, q=50, m=3))
    assert sel.n_levels == 4
    assert [len(lv.input_ids) for lv in sel.levels] + [len(sel.unit_ids)] == [625, 325, 175, 100, 50]


def test_corpus_equal_to_k_needs_no_calls():
    corpus = make_corpus(50, seed=1)
    backend = MockBackend("first-q")
    client = LlmClient(backend)
    sel = summarize(corpus, PipelineConfig(k=50, s=100), client)
    assert sel.unit_ids == list(range(50))
    assert sel.n_levels == 0 and client.n_calls == 0
    assert summarize_vanilla(corpus, PipelineConfig(k=50, s=100)).unit_ids == list(range(50))


def test_120_units_two_levels():
    sel = summarize(make_corpus(120, seed=2), PipelineConfig(k=50, s=100, q=50))
    level0 = sel.levels[0]
    assert [c.passthrough for c in level0.per_chunk] == [False, True]
    assert len(level0.output_ids) == 70
    assert sel.n_levels == 2


def test_corpus_smaller_than_k():
    with pytest.raises(ValueError, match="fewer than k"):
        summarize(make_corpus(10, seed=1), PipelineConfig(k=20, s=40))


def test_run_level_passthrough():
    corpus = make_corpus(25, seed=1)
    trace = run_level(corpus, list(range(25)), PipelineConfig(k=50, s=100), 0, LlmClient(MockBackend()))
    assert trace.output_ids == list(range(25))
    assert trace.per_chunk[0].passthrough


def test_run_level_lowest_ids():
    corpus = id_corpus(100)
    units = list(range(99, -1, -1))
    trace = run_level(corpus, units, PipelineConfig(k=50, s=100, m=3), 0, LlmClient(lowest_ids_backend()))
    assert sorted(trace.output_ids) == list(range(50))


def test_run_level_chunk_plus_passthrough():
    corpus = make_corpus(150, seed=4)
    trace = run_level(corpus, list(range(150)), PipelineConfig(k=50, s=100, q=50), 0, LlmClient(MockBackend()))
    assert len(trace.output_ids) == 100
    assert trace.output_ids[50:] == list(range(100, 150))
    assert [c.passthrough for c in trace.per_chunk] == [False, True]


def test_vanilla_first_q_keeps_original_order():
    corpus = make_corpus(100, seed=6)
    sel = summarize_vanilla(corpus, PipelineConfig(k=50, s=100))
    assert sel.unit_ids == list(range(50))
    assert sel.config_snapshot["mode"] == "vanilla"


def test_vanilla_deterministic():
    corpus = make_corpus(300, seed=6)
    config = PipelineConfig(k=20, s=60, seed=3)
    a = json.dumps(summarize_vanilla(corpus, config).manifest(include_timing=False))
    b = json.dumps(summarize_vanilla(corpus, config).manifest(include_timing=False))
    assert a == b


@pytest.mark.parametrize("rule", ["plurality", "pav_sequential", "borda"])
def test_lamsum_deterministic(rule):
    corpus = make_corpus(260, seed=7)
    config = PipelineConfig(k=20, s=50, m=3, voting_rule=rule, seed=42)
    a = summarize(corpus, config, MockBackend("random-q", seed=1))
    b = summarize(corpus, config, MockBackend("random-q", seed=1))
    assert a.manifest(include_timing=False) == b.manifest(include_timing=False)


def test_parallel_run_matches_sequential():
    corpus = make_corpus(260, seed=7)
    seq = summarize(corpus, PipelineConfig(k=20, s=50, m=4, seed=9), MockBackend("random-q"))
    par = summarize(corpus, PipelineConfig(k=20, s=50, m=4, seed=9, max_workers=4), MockBackend("random-q"))
    assert seq.unit_ids == par.unit_ids
    assert [lv.as_dict() for lv in seq.levels] == [lv.as_dict() for lv in par.levels]


def test_subset_chain_and_shrink():
    corpus = make_corpus(700, seed=8)
    sel = summarize(corpus, PipelineConfig(k=30, s=80, q=40, m=3, seed=1), MockBackend("random-q"))
    for lv in sel.levels:
        assert set(lv.output_ids) <= set(lv.input_ids)
        assert len(set(lv.output_ids)) == len(lv.output_ids)
        assert len(lv.output_ids) < len(lv.input_ids)
        assert len(lv.input_ids) >= 30
    assert len(sel.unit_ids) == 30 == len(set(sel.unit_ids))


def test_level_sizes_match_run():
    corpus = make_corpus(431, seed=3)
    for q in (20, 35):
        sel = summarize(corpus, PipelineConfig(k=20, s=50, q=q))
        assert [len(lv.input_ids) for lv in sel.levels] + [20] == level_sizes(431, 20, 50, q)


@settings(max_examples=300, deadline=None)
@given(
    st.integers(1, 60).flatmap(
        lambda k: st.tuples(st.just(k), st.integers(k, k + 60)).flatmap(
            lambda kq: st.tuples(st.just(kq[0]), st.just(kq[1]), st.integers(kq[1] + 1, kq[1] + 80), st.integers(kq[0], 5000))
        )
    )
)
def test_termination_property(params):
    k, q, s, n = params
    sizes = level_sizes(n, k, s, q)
    assert sizes == manual_level_sizes(n, k, s, q)
    assert sizes[-1] == k
    assert all(a > b for a, b in zip(sizes, sizes[1:]))


def test_termination_sweep_q_equals_k():
    for n in range(50, 5001):
        sizes = level_sizes(n, 50, 100, 50)
        assert sizes[-1] == 50 and len(sizes) - 1 <= 64


def test_convergence_guard():
    corpus = make_corpus(625, seed=1)
    with pytest.raises(ConvergenceError, match="no convergence"):
        summarize(corpus, PipelineConfig(k=50, s=100, q=90, max_levels=10))


def test_backend_failure_carries_context():
    def fn(sentences, size, request):
        raise AuthError("key revoked")

    with pytest.raises(PipelineError) as info:
        summarize(make_corpus(120, seed=1), PipelineConfig(k=10, s=50), FunctionBackend(fn))
    assert info.value.level == 0 and info.value.chunk_index == 0
    assert info.value.code == "auth_error"


def test_merge_drops_duplicates_and_backfills():
    a = ChunkTrace(0, 3, False, 2, [1, 2], {"runner_up_order": [3]})
    b = ChunkTrace(3, 6, False, 2, [2, 5], {"runner_up_order": [6, 4]})
    assert _merge([a, b]) == [1, 2, 5, 6]
    assert b.diagnostics["merge_backfill"] == [6]


def test_merge_without_spares_is_shorter():
    a = ChunkTrace(0, 2, False, 2, [1, 2], {"runner_up_order": []})
    b = ChunkTrace(2, 4, False, 1, [2], {})
    assert _merge([a, b]) == [1, 2]


def test_manifest_contents(corpus_625):
    sel = summarize(corpus_625, PipelineConfig(k=50, s=100, seed=5))
    manifest = sel.manifest()
    assert manifest["config"]["seed"] == 5 and manifest["config"]["backend"] == "mock:first-q"
    assert manifest["level_sizes"] == [625, 325, 175, 100, 50]
    assert manifest["counters"]["api_calls"] == 3 * (6 + 3 + 2 + 1)
    chunk = manifest["levels"][0]["chunks"][0]
    assert len(chunk["diagnostics"]["ballots"]) == 3
    assert "prompt_sha256" in chunk["diagnostics"]["ballots"][0]
    json.dumps(manifest)
