"""Multi-level summarization loop.

Each level cuts the current unit list into chunks of ``s`` units. Chunks
wider than ``q`` are summarized down to ``q`` units; narrower chunks pass
through untouched. Levels repeat until exactly ``k`` units remain. Once
the whole level fits within ``q`` units (so every chunk would pass
through), the single remaining chunk is summarized straight to ``k``.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .backends import Backend, BackendError, LlmClient, make_backend
from .chunk_summarizer import summarize_chunk, summarize_chunk_vanilla
from .chunker import plan_chunks
from .config import PipelineConfig
from .corpus import Corpus

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


class PipelineError(RuntimeError):
    """A backend failure, annotated with the level and chunk it happened in."""

    def __init__(self, message: str, level: int, chunk_index: int, cause: BackendError):
        super().__init__(f"level {level}, chunk {chunk_index}: {message}")
        self.level = level
        self.chunk_index = chunk_index
        self.cause = cause
        self.code = getattr(cause, "code", "backend_error")


@dataclass
class ChunkTrace:
    start: int
    end: int
    passthrough: bool
    target: int
    winners: list[int]
    diagnostics: dict = field(default_factory=dict)


@dataclass
class LevelTrace:
    level: int
    input_ids: list[int]
    output_ids: list[int]
    per_chunk: list[ChunkTrace]

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "n_input": len(self.input_ids),
            "n_output": len(self.output_ids),
            "input_ids": self.input_ids,
            "output_ids": self.output_ids,
            "chunks": [vars(c) for c in self.per_chunk],
        }


@dataclass
class SummarySelection:
    unit_ids: list[int]
    levels: list[LevelTrace]
    config_snapshot: dict
    counters: dict = field(default_factory=dict)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def manifest(self, include_timing: bool = True) -> dict:
        counters = dict(self.counters)
        if not include_timing:
            counters.pop("wall_clock_seconds", None)
        return {
            "config": self.config_snapshot,
            "summary_ids": self.unit_ids,
            "n_levels": self.n_levels,
            "level_sizes": [len(lv.input_ids) for lv in self.levels] + [len(self.unit_ids)],
            "counters": counters,
            "levels": [lv.as_dict() for lv in self.levels],
        }


def level_sizes(n: int, k: int, s: int, q: int) -> list[int]:
    """Unit counts per level assuming every summarized chunk yields its full target."""
    sizes = [n]
    while n > k:
        if n <= q:
            n = k
        else:
            n = sum(c.width if c.width <= q else q for c in plan_chunks(n, s).chunks)
        sizes.append(n)
    return sizes


def _merge(results: list[ChunkTrace]) -> list[int]:
    # chunks hold disjoint ids, so a repeat can only come from a misbehaving
    # summarizer; drop it and backfill from that chunk's runner-ups
    seen: set[int] = set()
    out: list[int] = []
    for trace in results:
        kept = [w for w in trace.winners if w not in seen]
        seen.update(kept)
        missing = len(trace.winners) - len(kept)
        if missing:
            spare = [u for u in trace.diagnostics.get("runner_up_order", []) if u not in seen][:missing]
            seen.update(spare)
            kept += spare
            trace.diagnostics["merge_backfill"] = spare
        out.extend(kept)
    return out


def run_level(
    corpus: Corpus,
    units: list[int],
    config: PipelineConfig,
    level: int,
    client: LlmClient,
    executor: ThreadPoolExecutor | None = None,
) -> LevelTrace:
    if not units:
        raise ValueError("run_level needs at least one unit")
    final = len(units) <= config.q
    plan = plan_chunks(len(units), config.s, level)
    summarize = summarize_chunk_vanilla if config.mode == "vanilla" else summarize_chunk

    def one(chunk) -> ChunkTrace:
        ids = units[chunk.start:chunk.end]
        target = config.k if final else config.q
        if chunk.width <= target:
            return ChunkTrace(chunk.start, chunk.end, True, chunk.width, list(ids))
        try:
            if config.mode == "vanilla":
                res = summarize(corpus, ids, chunk, config, client, target)
            else:
                res = summarize(corpus, ids, chunk, config, client, target, executor)
        except BackendError as exc:
            raise PipelineError(str(exc), level, chunk.index, exc) from exc
        return ChunkTrace(chunk.start, chunk.end, False, target, list(res.winners), res.diagnostics)

    # chunk-level work runs inline; the executor parallelizes the m shuffle calls
    traces = [one(c) for c in plan.chunks]
    return LevelTrace(level, list(units), _merge(traces), traces)


def summarize(
    corpus: Corpus,
    config: PipelineConfig,
    backend: Backend | LlmClient | None = None,
) -> SummarySelection:
    """Run levels until ``config.k`` units remain; returns the winners with full traces."""
    if corpus.N < config.k:
        raise ValueError(f"corpus has {corpus.N} units, fewer than k={config.k}")
    if backend is None:
        backend = make_backend(config.backend, seed=config.seed)
    client = backend if isinstance(backend, LlmClient) else LlmClient(backend, max_in_flight=config.max_workers)
    calls_before = client.n_calls
    started = time.perf_counter()

    units = list(range(corpus.N))
    levels: list[LevelTrace] = []
    executor = ThreadPoolExecutor(config.max_workers) if config.max_workers > 1 else None
    try:
        while len(units) > config.k:
            if len(levels) >= config.max_levels:
                raise ConvergenceError(
                    f"no convergence after {config.max_levels} levels; sizes "
                    f"{[len(lv.input_ids) for lv in levels]}"
                )
            trace = run_level(corpus, units, config, len(levels), client, executor)
            logger.info("level %d: %d -> %d units", trace.level, len(units), len(trace.output_ids))
            if len(trace.output_ids) >= len(units):
                raise ConvergenceError(f"level {trace.level} did not shrink ({len(units)} units)")
            levels.append(trace)
            units = trace.output_ids
    finally:
        if executor is not None:
            executor.shutdown()

    if len(units) != config.k:
        raise ConvergenceError(f"finished with {len(units)} units instead of k={config.k}")
    snapshot = config.snapshot()
    snapshot["backend"] = getattr(client.backend, "name", config.backend)
    return SummarySelection(
        units,
        levels,
        snapshot,
        {
            "api_calls": client.n_calls - calls_before,
            "retries": client.n_retries,
            "wall_clock_seconds": round(time.perf_counter() - started, 6),
        },
    )


def summarize_vanilla(
    corpus: Corpus,
    config: PipelineConfig,
    backend: Backend | LlmClient | None = None,
) -> SummarySelection:
    """Same level loop with one unshuffled call per chunk and no voting."""
    return summarize(corpus, replace(config, mode="vanilla"), backend)
