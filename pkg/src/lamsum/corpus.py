"""Loading and validation of post collections and reference summaries."""

from __future__ import annotations

import csv
import json
import logging
import os
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

CATEGORY_DELIMITER = ";"


class CorpusError(ValueError):
    """Raised for malformed corpus or reference files."""


def normalize_text(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


@dataclass(frozen=True)
class TextualUnit:
    id: int
    text: str
    categories: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True)
class Corpus:
    units: tuple[TextualUnit, ...]

    def __post_init__(self):
        if not self.units:
            raise CorpusError("corpus is empty")
        for pos, unit in enumerate(self.units):
            if unit.id != pos:
                raise CorpusError(f"unit at position {pos} has id {unit.id}")
            if not unit.text.strip():
                raise CorpusError(f"unit {pos} has empty text")

    @property
    def N(self) -> int:
        return len(self.units)

    def __len__(self) -> int:
        return len(self.units)

    def __getitem__(self, idx: int) -> TextualUnit:
        return self.units[idx]

    def texts(self, ids: Iterable[int] | None = None) -> list[str]:
        if ids is None:
            return [u.text for u in self.units]
        return [self.units[i].text for i in ids]

    @classmethod
    def from_texts(
        cls,
        texts: Sequence[str],
        categories: Sequence[Iterable[str]] | None = None,
    ) -> "Corpus":
        units = []
        for i, text in enumerate(texts):
            norm = normalize_text(text)
            if not norm:
                raise CorpusError(f"text at position {i} is empty")
            cats = frozenset(categories[i]) if categories is not None else frozenset()
            units.append(TextualUnit(i, norm, cats))
        return cls(tuple(units))


@dataclass(frozen=True)
class ReferenceSummary:
    annotator_id: str
    unit_ids: tuple[int, ...]

    def validate(self, corpus: Corpus) -> None:
        if not self.unit_ids:
            raise CorpusError(f"reference {self.annotator_id!r}: reference must be non-empty")
        seen = set()
        for uid in self.unit_ids:
            if not 0 <= uid < corpus.N:
                raise CorpusError(
                    f"reference {self.annotator_id!r}: unknown unit id {uid} (corpus has {corpus.N})"
                )
            if uid in seen:
                raise CorpusError(f"reference {self.annotator_id!r}: duplicate unit id {uid}")
            seen.add(uid)


def _parse_categories(value) -> frozenset[str]:
    if value is None:
        return frozenset()
    if isinstance(value, str):
        parts = value.split(CATEGORY_DELIMITER)
    else:
        parts = [str(v) for v in value]
    return frozenset(p.strip() for p in parts if p.strip())


def _infer_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".csv",):
        return "csv"
    return "jsonl"


def _iter_jsonl(path: Path):
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def _iter_csv(path: Path):
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "text" not in reader.fieldnames:
            raise CorpusError(f"{path}: CSV header must contain a 'text' column")
        # line 1 is the header
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row


def load_corpus(path: str | os.PathLike, format: str | None = None) -> Corpus:
    """Read a corpus from JSONL or CSV.

    Ids found in the file are ignored; units are renumbered densely in
    file order. Text is NFC-normalized and trimmed, nothing else.
    """
    path = Path(path)
    fmt = format or _infer_format(path)
    if fmt not in ("jsonl", "csv"):
        raise CorpusError(f"unsupported corpus format {fmt!r}")
    records = _iter_jsonl(path) if fmt == "jsonl" else _iter_csv(path)

    units = []
    for lineno, record in records:
        text = record.get("text")
        if not isinstance(text, str) or not normalize_text(text):
            raise CorpusError(f"{path}:{lineno}: record has empty or missing 'text'")
        new_id = len(units)
        if record.get("id") not in (None, "") and str(record["id"]) != str(new_id):
            logger.debug("%s:%d: input id %r reassigned to %d", path, lineno, record["id"], new_id)
        units.append(TextualUnit(new_id, normalize_text(text), _parse_categories(record.get("categories"))))
    if not units:
        raise CorpusError(f"{path}: corpus is empty")
    return Corpus(tuple(units))


def unit_record(unit: TextualUnit) -> dict:
    return {"id": unit.id, "text": unit.text, "categories": sorted(unit.categories)}


def save_corpus(corpus: Corpus, path: str | os.PathLike, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or _infer_format(path)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for unit in corpus.units:
                fh.write(json.dumps(unit_record(unit), ensure_ascii=False) + "\n")
    elif fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "text", "categories"])
            for unit in corpus.units:
                writer.writerow([unit.id, unit.text, CATEGORY_DELIMITER.join(sorted(unit.categories))])
    else:
        raise CorpusError(f"unsupported corpus format {fmt!r}")


def load_references(path: str | os.PathLike, corpus: Corpus | None = None) -> list[ReferenceSummary]:
    """Read reference summaries, one JSON object per annotator.

    Each line looks like ``{"annotator": "A", "unit_ids": [3, 17, ...]}``.
    When ``corpus`` is given every id is checked against it.
    """
    path = Path(path)
    refs = []
    for lineno, record in _iter_jsonl(path):
        annotator = str(record.get("annotator", record.get("annotator_id", f"ref{len(refs)}")))
        ids = record.get("unit_ids")
        if not isinstance(ids, list):
            raise CorpusError(f"{path}:{lineno}: 'unit_ids' must be a list")
        if not ids:
            raise CorpusError(f"{path}:{lineno}: reference must be non-empty")
        try:
            ids = tuple(int(i) for i in ids)
        except (TypeError, ValueError) as exc:
            raise CorpusError(f"{path}:{lineno}: non-integer unit id") from exc
        if len(set(ids)) != len(ids):
            raise CorpusError(f"{path}:{lineno}: duplicate unit id in reference {annotator!r}")
        ref = ReferenceSummary(annotator, ids)
        if corpus is not None:
            ref.validate(corpus)
        refs.append(ref)
    if not refs:
        raise CorpusError(f"{path}: no references found")
    return refs


def save_references(refs: Sequence[ReferenceSummary], path: str | os.PathLike) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ref in refs:
            fh.write(json.dumps({"annotator": ref.annotator_id, "unit_ids": list(ref.unit_ids)}) + "\n")
