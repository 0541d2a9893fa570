from __future__ import annotations

import numbers
from typing import Any

import numpy as np

from .corpus import Corpus, CorpusError


def check_positive_int(value: Any, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_corpus(X: Any, categories: Any = None) -> Corpus:
    """Coerce a Corpus, a sequence of strings, a 1-d array or a one-column frame."""
    if isinstance(X, Corpus):
        return X
    if hasattr(X, "to_numpy"):
        X = X.to_numpy()
    arr = np.asarray(X, dtype=object)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d collection of texts, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("empty input: at least one text is required")
    for i, t in enumerate(arr):
        if not isinstance(t, str):
            raise TypeError(f"element {i} is {type(t).__name__}, expected str")
    try:
        return Corpus.from_texts(list(arr), categories)
    except CorpusError as exc:
        raise ValueError(str(exc)) from exc
