"""Synthetic post collections and misbehaving backends for offline runs."""

from __future__ import annotations

import hashlib
import random

from .backends import FunctionBackend
from .corpus import Corpus

CATEGORIES = tuple(f"PC{i}" for i in range(1, 15))
_FILLER = "the a was at me in on and to of it my".split()
_SYLLABLES = "ka ri mo tu sen pal dor vik lu ne sha gor bim tel ruz fa qo hin ja pre".split()


def vocabulary(size: int = 3000, seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    words: set[str] = set()
    while len(words) < size:
        words.add("".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4))))
    return sorted(words)


def make_corpus(n: int, seed: int = 0, min_words: int = 8, max_words: int = 40) -> Corpus:
    """``n`` distinct random posts with one or two category tags each."""
    rng = random.Random(seed)
    vocab = vocabulary(seed=seed)
    texts, cats, seen = [], [], set()
    while len(texts) < n:
        words = [
            rng.choice(_FILLER) if rng.random() < 0.25 else rng.choice(vocab)
            for _ in range(rng.randint(min_words, max_words))
        ]
        text = " ".join(words).capitalize() + "."
        if text in seen:
            continue
        seen.add(text)
        texts.append(text)
        cats.append(rng.sample(CATEGORIES, rng.choice((1, 1, 2))))
    return Corpus.from_texts(texts, cats)


def _rng_for(sentences, seed: int) -> random.Random:
    digest = hashlib.sha256(("\n".join(sentences) + f"\x00{seed}").encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def perturb(text: str, rate: float, rng: random.Random) -> str:
    """Apply about ``rate * len(text)`` random character edits."""
    chars = list(text)
    n_edits = max(1, int(rate * len(chars)))
    alphabet = "abcdefghijklmnopqrstuvwxyz "
    for _ in range(n_edits):
        op = rng.randrange(3)
        pos = rng.randrange(len(chars)) if chars else 0
        if op == 0 and chars:
            chars[pos] = rng.choice(alphabet)
        elif op == 1 and len(chars) > 1:
            del chars[pos]
        else:
            chars.insert(pos, rng.choice(alphabet))
    return "".join(chars)


def reorder_words(text: str, rng: random.Random) -> str:
    words = text.split()
    cut = rng.randrange(1, len(words)) if len(words) > 1 else 0
    return " ".join(words[cut:] + words[:cut])


def hallucinate(rng: random.Random, n_words: int = 12) -> str:
    vocab = vocabulary(size=200, seed=987654)
    return " ".join(rng.choice(vocab) for _ in range(n_words)).capitalize() + "."


def paraphrasing_backend(seed: int = 0) -> FunctionBackend:
    """Picks sentences like a model would, then mangles, reorders, duplicates and invents lines."""

    def fn(sentences, size, request):
        rng = _rng_for(sentences, seed)
        n = len(sentences) if size is None else size
        picked = rng.sample(sentences, min(n, len(sentences)))
        out = []
        for s in picked:
            roll = rng.random()
            if roll < 0.3:
                out.append(perturb(s, 0.1, rng))
            elif roll < 0.45:
                out.append(reorder_words(s, rng))
            elif roll < 0.55:
                out.append(hallucinate(rng))
            elif roll < 0.6:
                out.append(s.upper())
            else:
                out.append(s)
        if out and rng.random() < 0.3:
            out.extend(rng.sample(out, min(3, len(out))))
        if rng.random() < 0.2:
            out = out[: len(out) // 2]
        if rng.random() < 0.1:
            out.insert(0, "Here are the selected sentences:")
        return [f"{i}. {line}" for i, line in enumerate(out, start=1)]

    return FunctionBackend(fn, name=f"adversarial:paraphrase:{seed}")


def garbage_backend(seed: int = 0) -> FunctionBackend:
    """Ignores the input entirely: empty replies, chatter, or invented sentences."""

    def fn(sentences, size, request):
        rng = _rng_for(sentences, seed)
        mode = rng.randrange(3)
        if mode == 0:
            return ""
        if mode == 1:
            return "I cannot help with that request.\nPlease provide more context."
        return [hallucinate(rng) for _ in range(rng.randint(1, 2 * (size or 5)))]

    return FunctionBackend(fn, name=f"adversarial:garbage:{seed}")


def marked_backend(marker: str) -> FunctionBackend:
    """Approves every sentence containing ``marker`` first, then fills up in input order."""

    def fn(sentences, size, request):
        marked = [s for s in sentences if marker in s]
        rest = [s for s in sentences if marker not in s]
        ordered = marked + rest
        return ordered if size is None else ordered[:size]

    return FunctionBackend(fn, name=f"marked:{marker}")
