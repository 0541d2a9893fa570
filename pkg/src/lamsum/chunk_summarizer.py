"""Summarize one chunk: shuffle, prompt, calibrate, vote."""

from __future__ import annotations

import hashlib
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .backends import LlmClient
from .calibration import check
from .chunker import Chunk
from .config import PipelineConfig
from .corpus import Corpus
from .prompts import build_prompt, parse_response
from .voting import ballot_kind, dedupe, elect, pad_ranking

SEED_MASK = 2**64 - 1


@dataclass(frozen=True)
class ShuffleVariant:
    shuffle_index: int
    permutation: tuple[int, ...]
    seeded_from: tuple[int, int, int, int]


@dataclass
class LlmBallot:
    shuffle_index: int
    kind: str
    raw_lines: list[str]
    calibrated_ids: list[int]
    methods: list[str] = field(default_factory=list)
    response: str = ""
    prompt_sha256: str = ""


@dataclass
class ChunkResult:
    winners: list[int]
    diagnostics: dict


def shuffle_permutation(width: int, seed: int, level: int, chunk_index: int, shuffle_index: int) -> tuple[int, ...]:
    """Counter-based permutation keyed by the full (seed, level, chunk, shuffle) tuple."""
    key = np.random.SeedSequence([seed & SEED_MASK, level, chunk_index, shuffle_index])
    rng = np.random.Generator(np.random.Philox(key))
    return tuple(int(i) for i in rng.permutation(width))


def make_variants(chunk: Chunk, m: int, seed: int) -> list[ShuffleVariant]:
    if m < 1:
        raise ValueError("m must be >= 1")
    out = []
    for i in range(1, m + 1):
        origin = (seed & SEED_MASK, chunk.level, chunk.index, i)
        out.append(ShuffleVariant(i, shuffle_permutation(chunk.width, *origin), origin))
    return out


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def repair_approval(ids: Sequence[int], unit_ids: Sequence[int], size: int) -> list[int]:
    """Deduplicate, truncate to ``size``, backfill with unselected units in chunk order."""
    picked = dedupe(ids)[:size]
    if len(picked) < size:
        have = set(picked)
        picked += [u for u in unit_ids if u not in have][: size - len(picked)]
    return picked


def _ballot(
    corpus: Corpus,
    unit_ids: list[int],
    order: Sequence[int],
    shuffle_index: int,
    kind: str,
    size: int,
    config: PipelineConfig,
    client: LlmClient,
) -> LlmBallot:
    texts = [corpus[unit_ids[p]].text for p in order]
    request = build_prompt(
        texts,
        size,
        kind,
        context_budget_tokens=config.context_budget_tokens,
        max_output_tokens=config.max_output_tokens,
    )
    response = client.complete(request)
    lines = parse_response(response)
    results = check(lines, corpus, unit_ids, config.calibration)
    ids = [r.matched_id for r in results]
    if kind == "approval":
        calibrated = repair_approval(ids, unit_ids, size)
    else:
        calibrated = pad_ranking(ids, unit_ids)
    return LlmBallot(
        shuffle_index, kind, lines, calibrated, [r.method for r in results], response, _sha256(request.prompt_text)
    )


def _ballot_record(b: LlmBallot) -> dict:
    methods = {}
    for m in b.methods:
        methods[m] = methods.get(m, 0) + 1
    return {
        "shuffle_index": b.shuffle_index,
        "kind": b.kind,
        "prompt_sha256": b.prompt_sha256,
        "response": b.response,
        "calibrated_ids": b.calibrated_ids,
        "calibration_methods": methods,
    }


def _run_all(fn, items, executor: Executor | None) -> list:
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def summarize_chunk(
    corpus: Corpus,
    unit_ids: Sequence[int],
    chunk: Chunk,
    config: PipelineConfig,
    client: LlmClient,
    target: int,
    executor: Executor | None = None,
) -> ChunkResult:
    """Elect ``target`` winners from ``m`` shuffled LLM summaries of the chunk.

    ``unit_ids`` are the corpus ids inside the chunk, in level order.
    Any failed call fails the whole chunk; no partial elections are held.
    """
    unit_ids = list(unit_ids)
    if not 0 <= target <= len(unit_ids):
        raise ValueError(f"target {target} exceeds chunk width {len(unit_ids)}")
    if target == len(unit_ids):
        return ChunkResult(list(unit_ids), {"forced": True, "ballots": []})

    kind = ballot_kind(config.voting_rule)
    variants = make_variants(chunk, config.m, config.seed)
    ballots = _run_all(
        lambda v: _ballot(corpus, unit_ids, v.permutation, v.shuffle_index, kind, target, config, client),
        variants,
        executor,
    )
    candidates = sorted(unit_ids)
    outcome = elect(config.voting_rule, candidates, [b.calibrated_ids for b in ballots], target)
    position = {u: p for p, u in enumerate(unit_ids)}
    won = set(outcome.winners)
    return ChunkResult(
        list(outcome.winners),
        {
            "rule": outcome.rule,
            "ballots": [_ballot_record(b) for b in ballots],
            "scores": {str(c): outcome.scores[c] for c in candidates},
            "tie_events": outcome.tie_events,
            "committee_score": outcome.committee_score,
            "winner_positions": [position[w] for w in outcome.winners],
            "runner_up_order": [c for c in outcome.ranked_candidates(candidates) if c not in won],
        },
    )


def summarize_chunk_vanilla(
    corpus: Corpus,
    unit_ids: Sequence[int],
    chunk: Chunk,
    config: PipelineConfig,
    client: LlmClient,
    target: int,
) -> ChunkResult:
    """One unshuffled approval call plus calibration; no voting."""
    unit_ids = list(unit_ids)
    if target == len(unit_ids):
        return ChunkResult(list(unit_ids), {"forced": True, "ballots": []})
    ballot = _ballot(corpus, unit_ids, range(len(unit_ids)), 0, "approval", target, config, client)
    winners = ballot.calibrated_ids
    position = {u: p for p, u in enumerate(unit_ids)}
    chosen = set(winners)
    return ChunkResult(
        winners,
        {
            "rule": "none",
            "ballots": [_ballot_record(ballot)],
            "winner_positions": [position[w] for w in winners],
            "runner_up_order": [u for u in unit_ids if u not in chosen],
        },
    )
