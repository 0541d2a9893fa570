"""Snap LLM-emitted lines back onto genuine corpus units.

A line is resolved in three stages: verbatim match, closest unit by
normalized Levenshtein distance, and finally the unit sharing the most
content keywords. The search is always restricted to the chunk that was
shown to the model, so every result is a real unit of that chunk.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein
from rapidfuzz.process import cdist

from .corpus import Corpus

logger = logging.getLogger(__name__)

DEFAULT_STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can could did do does doing down during
    each few for from further had has have having he her here hers herself him
    himself his how i if in into is it its itself just me more most my myself no nor
    not now of off on once only or other our ours ourselves out over own same she
    should so some such than that the their theirs them themselves then there these
    they this those through to too under until up very was we were what when where
    which while who whom why will with would you your yours yourself yourselves
    also get got let lot many much one ones really still thing things us via yet
    """.split()
)

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)
_WS_RE = re.compile(r"\s+")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One word per line; blank lines and ``#`` comments are skipped."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@dataclass(frozen=True)
class CalibrationConfig:
    epsilon: float = 0.5
    keyword_min_length: int = 3
    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    # drop-in replacement for the stopword filter, e.g. a POS tagger
    keyword_extractor: Callable[[str], set[str]] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.keyword_min_length < 1:
            raise ValueError("keyword_min_length must be >= 1")


@dataclass(frozen=True)
class CalibrationResult:
    matched_id: int
    method: str  # "exact" | "edit_distance" | "keyword"
    score: float


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs (character level, case-sensitive)."""
    return Levenshtein.distance(a, b)


def collapse_whitespace(text: str) -> str:
    return _WS_RE.sub(" ", unicodedata.normalize("NFC", text)).strip()


def extract_keywords(
    text: str,
    min_length: int = 3,
    stopwords: Iterable[str] = DEFAULT_STOPWORDS,
) -> set[str]:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return {
        tok
        for tok in _TOKEN_RE.findall(text.lower())
        if len(tok) >= min_length and tok not in stop
    }


@lru_cache(maxsize=65536)
def _cached_keywords(text: str, min_length: int, stopwords: frozenset[str]) -> frozenset[str]:
    return frozenset(extract_keywords(text, min_length, stopwords))


def _keywords(text: str, config: CalibrationConfig) -> frozenset[str]:
    if config.keyword_extractor is not None:
        return frozenset(config.keyword_extractor(text))
    return _cached_keywords(text, config.keyword_min_length, config.stopwords)


def check(
    raw_lines: Sequence[str],
    corpus: Corpus,
    unit_ids: Sequence[int],
    config: CalibrationConfig | None = None,
) -> list[CalibrationResult]:
    """Resolve each line to one unit among ``unit_ids``.

    Always returns exactly one result per input line, in input order.
    """
    config = config or CalibrationConfig()
    unit_ids = list(unit_ids)
    if not unit_ids:
        raise ValueError("check needs a non-empty candidate slice")
    texts = [collapse_whitespace(corpus[i].text) for i in unit_ids]
    exact = {}
    for uid, text in zip(unit_ids, texts):
        exact.setdefault(text, uid)
    lengths = np.array([len(t) for t in texts], dtype=float)

    results = []
    for line in raw_lines:
        x = collapse_whitespace(line)
        if x in exact:
            results.append(CalibrationResult(exact[x], "exact", 0))
            continue

        dists = cdist([x], texts, scorer=Levenshtein.distance, workers=1)[0]
        denom = np.maximum(np.maximum(lengths, len(x)), 1.0)
        norm = dists / denom
        tied = np.flatnonzero(norm == norm.min())
        best = int(min(tied, key=lambda p: unit_ids[p]))
        if norm[best] < config.epsilon:
            results.append(CalibrationResult(unit_ids[best], "edit_distance", int(dists[best])))
            continue

        line_kw = _keywords(x, config)
        max_count, max_pos = 0, -1
        for pos, uid in enumerate(unit_ids):
            count = len(line_kw & _keywords(texts[pos], config))
            if count > max_count or (count == max_count and count > 0 and uid < unit_ids[max_pos]):
                max_count, max_pos = count, pos
        if max_pos >= 0:
            results.append(CalibrationResult(unit_ids[max_pos], "keyword", max_count))
        else:
            logger.warning("line matched no unit by keyword; using closest edit distance: %.60r", x)
            results.append(CalibrationResult(unit_ids[best], "edit_distance", int(dists[best])))
    return results
