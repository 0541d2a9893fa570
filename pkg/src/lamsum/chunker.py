"""Positional partition of a level's unit list into fixed-size chunks."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Chunk:
    level: int
    start: int
    end: int
    index: int = 0

    @property
    def width(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class ChunkPlan:
    s: int
    chunks: tuple[Chunk, ...]

    @property
    def n_chunks(self) -> int:
        return len(self.chunks)

    def widths(self) -> list[int]:
        return [c.width for c in self.chunks]


def plan_chunks(input_length: int, s: int, level: int = 0) -> ChunkPlan:
    """Split ``range(input_length)`` into ``ceil(input_length / s)`` slices.

    Every slice has width ``s`` except the last, which takes the remainder.
    """
    if input_length < 1:
        raise ValueError(f"input_length must be >= 1, got {input_length}")
    if s < 1:
        raise ValueError(f"chunk size s must be >= 1, got {s}")
    n_chunks = math.ceil(input_length / s)
    chunks = []
    for i in range(n_chunks):
        start = i * s
        end = input_length if i == n_chunks - 1 else (i + 1) * s
        chunks.append(Chunk(level=level, start=start, end=end, index=i))
    return ChunkPlan(s=s, chunks=tuple(chunks))
