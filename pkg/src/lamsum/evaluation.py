"""Summary scoring: ROUGE-1/2/Lsum, category entropy, Fleiss' kappa, word counts."""

from __future__ import annotations

import logging
import math
import re
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Corpus, ReferenceSummary

logger = logging.getLogger(__name__)

UNCATEGORIZED = "__uncategorized__"
_PUNCT_RE = re.compile(r"[^\w\s]|_", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _PUNCT_RE.sub(" ", text.lower()).split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _f1(hits: int, n_cand: int, n_ref: int) -> float:
    if hits == 0 or n_cand == 0 or n_ref == 0:
        return 0.0
    p, r = hits / n_cand, hits / n_ref
    return 2 * p * r / (p + r)


def rouge_n(candidate: str, reference: str, n: int = 1) -> float:
    """Clipped n-gram overlap F1."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    cand, ref = _ngrams(tokenize(candidate), n), _ngrams(tokenize(reference), n)
    if not cand or not ref:
        logger.warning("empty candidate or reference for ROUGE-%d; scoring 0", n)
        return 0.0
    hits = sum((cand & ref).values())
    return _f1(hits, sum(cand.values()), sum(ref.values()))


def _lcs_table(a: list[str], b: list[str]) -> list[list[int]]:
    rows, cols = len(a), len(b)
    t = [[0] * (cols + 1) for _ in range(rows + 1)]
    for i in range(1, rows + 1):
        ai = a[i - 1]
        row, prev = t[i], t[i - 1]
        for j in range(1, cols + 1):
            row[j] = prev[j - 1] + 1 if ai == b[j - 1] else max(prev[j], row[j - 1])
    return t


def _lcs_positions(ref: list[str], cand: list[str]) -> set[int]:
    """Indices into ``ref`` covered by one LCS with ``cand``."""
    t = _lcs_table(ref, cand)
    i, j, hits = len(ref), len(cand), set()
    while i > 0 and j > 0:
        if ref[i - 1] == cand[j - 1]:
            hits.add(i - 1)
            i, j = i - 1, j - 1
        elif t[i - 1][j] >= t[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return hits


def rouge_lsum(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Summary-level ROUGE-L with union LCS per reference sentence."""
    cand_sents = [tokenize(s) for s in candidate]
    ref_sents = [tokenize(s) for s in reference]
    n_cand = sum(map(len, cand_sents))
    n_ref = sum(map(len, ref_sents))
    if n_cand == 0 or n_ref == 0:
        logger.warning("empty candidate or reference for ROUGE-Lsum; scoring 0")
        return 0.0
    cand_counts = Counter(t for s in cand_sents for t in s)
    ref_counts = Counter(t for s in ref_sents for t in s)
    hits = 0
    for ref in ref_sents:
        union: set[int] = set()
        for cand in cand_sents:
            union |= _lcs_positions(ref, cand)
        # each token may only be credited as often as it occurs on both sides
        for idx in sorted(union):
            tok = ref[idx]
            if cand_counts[tok] > 0 and ref_counts[tok] > 0:
                hits += 1
                cand_counts[tok] -= 1
                ref_counts[tok] -= 1
    return _f1(hits, n_cand, n_ref)


@dataclass
class RougeScore:
    rouge1_f: float
    rouge2_f: float
    rougeLsum_f: float
    per_reference: list[dict] = field(default_factory=list)


def _ids(selection) -> list[int]:
    return list(getattr(selection, "unit_ids", selection))


def score_texts(candidate: Sequence[str], reference: Sequence[str]) -> dict:
    cand, ref = "\n".join(candidate), "\n".join(reference)
    return {
        "rouge1_f": rouge_n(cand, ref, 1),
        "rouge2_f": rouge_n(cand, ref, 2),
        "rougeLsum_f": rouge_lsum(candidate, reference),
    }


def score_summary(selection, references: Sequence[ReferenceSummary], corpus: Corpus) -> RougeScore:
    """Score against every reference; the headline triple is the mean over references."""
    if not references:
        raise ValueError("need at least one reference summary")
    cand = corpus.texts(_ids(selection))
    rows = []
    for ref in references:
        ref.validate(corpus)
        row = score_texts(cand, corpus.texts(ref.unit_ids))
        row["annotator"] = ref.annotator_id
        rows.append(row)
    mean = {key: float(np.mean([r[key] for r in rows])) for key in ("rouge1_f", "rouge2_f", "rougeLsum_f")}
    return RougeScore(per_reference=rows, **mean)


def category_entropy(selection, corpus: Corpus) -> float:
    """Shannon entropy (bits) of the category distribution of the selected posts."""
    counts: Counter = Counter()
    for uid in _ids(selection):
        cats = corpus[uid].categories
        counts.update(cats if cats else [UNCATEGORIZED])
    total = sum(counts.values())
    if total == 0:
        logger.warning("entropy of an empty selection is taken as 0")
        return 0.0
    return max(0.0, -sum((c / total) * math.log2(c / total) for c in counts.values()))


def fleiss_kappa_from_counts(table) -> float:
    """Fleiss' kappa from an items x categories matrix of rating counts."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2:
        raise ValueError("table must be 2-dimensional")
    raters = table.sum(axis=1)
    if not np.allclose(raters, raters[0]) or raters[0] < 2:
        raise ValueError("every item needs the same number (>= 2) of ratings")
    n_items, r = table.shape[0], raters[0]
    p_j = table.sum(axis=0) / (n_items * r)
    p_i = ((table**2).sum(axis=1) - r) / (r * (r - 1))
    p_bar, p_e = p_i.mean(), (p_j**2).sum()
    if math.isclose(p_e, 1.0):
        # every rating in one category: agreement is perfect by construction
        return 1.0
    return float((p_bar - p_e) / (1 - p_e))


def fleiss_kappa(references: Sequence[ReferenceSummary], corpus: Corpus) -> float:
    """Agreement over all corpus units, each rated selected / not selected by every annotator."""
    if len(references) < 2:
        raise ValueError("Fleiss' kappa needs at least 2 references")
    selected = np.zeros(corpus.N, dtype=int)
    for ref in references:
        ref.validate(corpus)
        selected[list(ref.unit_ids)] += 1
    return fleiss_kappa_from_counts(np.column_stack([selected, len(references) - selected]))


def word_stats(selection, corpus: Corpus) -> dict:
    counts = [len(corpus[i].text.split()) for i in _ids(selection)]
    if not counts:
        return {"mean": 0.0, "median": 0.0, "max": 0, "n": 0}
    return {
        "mean": statistics.fmean(counts),
        "median": float(statistics.median(counts)),
        "max": max(counts),
        "n": len(counts),
    }


@dataclass
class EvalReport:
    rouge: RougeScore | None
    entropy_bits: float
    mean_words: float
    kappa: float | None = None
    words: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_table(self) -> str:
        lines = [f"{'reference':<14}{'ROUGE-1':>10}{'ROUGE-2':>10}{'ROUGE-Lsum':>12}"]
        if self.rouge is not None:
            for row in self.rouge.per_reference:
                lines.append(
                    f"{str(row['annotator']):<14}{row['rouge1_f']:>10.4f}{row['rouge2_f']:>10.4f}{row['rougeLsum_f']:>12.4f}"
                )
            lines.append(
                f"{'mean':<14}{self.rouge.rouge1_f:>10.4f}{self.rouge.rouge2_f:>10.4f}{self.rouge.rougeLsum_f:>12.4f}"
            )
        lines.append(f"{'entropy (bits)':<14}{self.entropy_bits:>10.4f}")
        lines.append(f"{'mean words':<14}{self.mean_words:>10.2f}")
        if self.kappa is not None:
            lines.append(f"{'fleiss kappa':<14}{self.kappa:>10.4f}")
        return "\n".join(lines)


def evaluate(selection, corpus: Corpus, references: Sequence[ReferenceSummary] | None = None) -> EvalReport:
    rouge = score_summary(selection, references, corpus) if references else None
    kappa = fleiss_kappa(references, corpus) if references and len(references) >= 2 else None
    words = word_stats(selection, corpus)
    return EvalReport(rouge, category_entropy(selection, corpus), words["mean"], kappa, words)
