"""Zero-shot prompt templates and the line format shared with the model."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

from .calibration import collapse_whitespace

APPROVAL_TEMPLATE = (
    "Input consists of {chunk_size} sentences. Each sentence is present in a new line. "
    "Each sentence contains a sentence number followed by text. You are an assistant that "
    "selects best {summary_length} sentences (subset) which summarizes the input. "
    "Think step by step and follow the instructions. {sentences}"
)
# "Input consist" is the wording the ranked prompt has always used; kept byte-for-byte.
RANKED_TEMPLATE = (
    "Input consist of {chunk_size} sentences. Each sentence is present in a new line. "
    "Each sentence contains a sentence number followed by text. You are an assistant that "
    "outputs the sentences in the decreasing order of their relevance to be included in the "
    "summary. Remember that output should contain all the sentences in the decreasing order "
    "of their relevance. {sentences}"
)

TOKENS_PER_WORD = 1.5
DEFAULT_CONTEXT_BUDGET = 8192

_NUMBERED_RE = re.compile(r"^\s*(?:\d+\s*[.):\]-]|[-*•])\s*")
_APPROVAL_SIZE_RE = re.compile(r"selects best (\d+) sentences")


class ContextOverflowError(ValueError):
    """The rendered prompt would not fit the model's context window."""


@dataclass(frozen=True)
class LlmRequest:
    prompt_text: str
    kind: str = "approval"
    max_output_tokens: int = 8192
    temperature: float = 0.0
    top_p: float = 1.0
    context_budget_tokens: int = DEFAULT_CONTEXT_BUDGET


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text.split()) * TOKENS_PER_WORD)


def format_sentences(texts: Sequence[str]) -> str:
    return "\n".join(f"{i}. {collapse_whitespace(t)}" for i, t in enumerate(texts, start=1))


def build_prompt(
    variant_units: Sequence[str],
    q: int,
    kind: str = "approval",
    context_budget_tokens: int = DEFAULT_CONTEXT_BUDGET,
    max_output_tokens: int = 8192,
) -> LlmRequest:
    """Render the approval or ranked prompt for one shuffled chunk."""
    if kind == "approval":
        head = APPROVAL_TEMPLATE.format(chunk_size=len(variant_units), summary_length=q, sentences="")
    elif kind == "ranked":
        head = RANKED_TEMPLATE.format(chunk_size=len(variant_units), sentences="")
    else:
        raise ValueError(f"unknown prompt kind {kind!r}")
    text = head.rstrip() + "\n" + format_sentences(variant_units)
    needed = estimate_tokens(text)
    if needed > context_budget_tokens:
        raise ContextOverflowError(
            f"prompt needs ~{needed} tokens but the context budget is {context_budget_tokens}; "
            "use a smaller chunk size s"
        )
    return LlmRequest(text, kind, max_output_tokens, 0.0, 1.0, context_budget_tokens)


def strip_numbering(line: str) -> str:
    return _NUMBERED_RE.sub("", line, count=1).strip()


def parse_prompt(prompt_text: str) -> tuple[list[str], int | None]:
    """Recover the sentence block and approval size from a rendered prompt.

    Used by offline backends; the returned size is ``None`` for ranked prompts.
    """
    lines = prompt_text.split("\n")
    match = _APPROVAL_SIZE_RE.search(lines[0])
    size = int(match.group(1)) if match else None
    return [strip_numbering(line) for line in lines[1:]], size


def parse_response(text: str) -> list[str]:
    """Split a completion into candidate sentence lines.

    When any line carries a list marker ("3." / "-"), unmarked lines are
    treated as chatter and dropped.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    marked = [ln for ln in lines if _NUMBERED_RE.match(ln)]
    chosen = marked if marked else lines
    return [s for s in (strip_numbering(ln) for ln in chosen) if s]
