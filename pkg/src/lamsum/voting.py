"""Multi-winner election rules over approval and ranked ballots.

Ties are always broken by candidate order, so callers that want the
lowest corpus id to win a tie pass candidates sorted by id.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class ApprovalProfile:
    candidates: tuple
    ballots: tuple[frozenset, ...]

    def __init__(self, candidates: Sequence, ballots: Sequence):
        object.__setattr__(self, "candidates", tuple(candidates))
        object.__setattr__(self, "ballots", tuple(frozenset(b) for b in ballots))
        known = set(self.candidates)
        if len(known) != len(self.candidates):
            raise ValueError("duplicate candidates")
        for b in self.ballots:
            if not b <= known:
                raise ValueError(f"ballot approves unknown candidates {sorted(b - known, key=str)}")


@dataclass(frozen=True)
class RankedProfile:
    candidates: tuple
    rankings: tuple[tuple, ...]

    def __init__(self, candidates: Sequence, rankings: Sequence[Sequence]):
        object.__setattr__(self, "candidates", tuple(candidates))
        object.__setattr__(self, "rankings", tuple(tuple(r) for r in rankings))
        known = set(self.candidates)
        for r in self.rankings:
            if len(r) != len(known) or set(r) != known:
                raise ValueError("each ranking must be a permutation of the candidates")


@dataclass
class ElectionOutcome:
    winners: list
    scores: dict
    tie_events: list = field(default_factory=list)
    rule: str = ""
    committee_score: float | None = None

    def ranked_candidates(self, candidates: Sequence) -> list:
        """All candidates by descending score, candidate order on ties."""
        pos = {c: i for i, c in enumerate(candidates)}
        return sorted(candidates, key=lambda c: (-self.scores.get(c, 0), pos[c]))


def _check_target(target: int, n: int) -> None:
    if not 0 <= target <= n:
        raise ValueError(f"target {target} must be between 0 and the {n} candidates")


def _top_by_score(candidates: tuple, scores: dict, target: int) -> tuple[list, list]:
    pos = {c: i for i, c in enumerate(candidates)}
    order = sorted(candidates, key=lambda c: (-scores[c], pos[c]))
    winners = order[:target]
    ties = []
    if 0 < target < len(order):
        cutoff = scores[order[target - 1]]
        tied = [c for c in order if scores[c] == cutoff]
        if len(tied) > 1 and scores[order[target]] == cutoff:
            chosen = [c for c in tied if c in winners]
            ties.append({"score": cutoff, "tied": tied, "chosen": chosen})
    return winners, ties


def plurality(profile: ApprovalProfile, target: int) -> ElectionOutcome:
    """Block voting: the ``target`` candidates with the most approvals."""
    _check_target(target, len(profile.candidates))
    scores = {c: 0 for c in profile.candidates}
    for ballot in profile.ballots:
        for c in ballot:
            scores[c] += 1
    winners, ties = _top_by_score(profile.candidates, scores, target)
    return ElectionOutcome(winners, scores, ties, "plurality")


def harmonic(t: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, t + 1)), Fraction(0))


def pav_score(profile: ApprovalProfile, committee) -> Fraction:
    committee = set(committee)
    return sum((harmonic(len(b & committee)) for b in profile.ballots), Fraction(0))


def pav_exact(profile: ApprovalProfile, target: int, limit: int = EXHAUSTIVE_LIMIT) -> ElectionOutcome:
    """Exhaustive proportional approval voting.

    Scores are exact rationals. Among optimal committees the first one in
    lexicographic candidate order wins.
    """
    n = len(profile.candidates)
    _check_target(target, n)
    if n > limit:
        raise ValueError(f"pav_exact limited to {limit} candidates, got {n}; use pav_sequential")
    best, best_score, n_best = None, None, 0
    for combo in itertools.combinations(profile.candidates, target):
        score = pav_score(profile, combo)
        if best_score is None or score > best_score:
            best, best_score, n_best = combo, score, 1
        elif score == best_score:
            n_best += 1
    approvals = {c: sum(1 for b in profile.ballots if c in b) for c in profile.candidates}
    ties = []
    if n_best > 1:
        ties.append({"score": float(best_score), "tied_committees": n_best, "chosen": list(best)})
    return ElectionOutcome(list(best), approvals, ties, "pav_exact", float(best_score))


def pav_sequential(profile: ApprovalProfile, target: int) -> ElectionOutcome:
    """Greedy PAV: add the candidate with the largest marginal harmonic gain."""
    _check_target(target, len(profile.candidates))
    # gains are kept as exact integers scaled by lcm(1..target+1)
    scale = math.lcm(*range(1, target + 2))
    supporters = {c: [v for v, b in enumerate(profile.ballots) if c in b] for c in profile.candidates}
    weight = [scale] * len(profile.ballots)
    winners: list = []
    remaining = list(profile.candidates)
    ties = []
    for _ in range(target):
        best, best_gain, tied = None, -1, []
        for c in remaining:
            gain = sum(weight[v] for v in supporters[c])
            if gain > best_gain:
                best, best_gain, tied = c, gain, [c]
            elif gain == best_gain:
                tied.append(c)
        if len(tied) > 1:
            ties.append({"score": best_gain / scale, "tied": tied, "chosen": best})
        winners.append(best)
        remaining.remove(best)
        for v in supporters[best]:
            weight[v] = scale // (scale // weight[v] + 1)
    approvals = {c: len(supporters[c]) for c in profile.candidates}
    return ElectionOutcome(winners, approvals, ties, "pav_sequential", float(pav_score(profile, winners)))


def borda(profile: RankedProfile, target: int) -> ElectionOutcome:
    """Position p (from the top) of an n-candidate ranking earns n-1-p points."""
    n = len(profile.candidates)
    _check_target(target, n)
    scores = {c: 0 for c in profile.candidates}
    for ranking in profile.rankings:
        for p, c in enumerate(ranking):
            scores[c] += n - 1 - p
    winners, ties = _top_by_score(profile.candidates, scores, target)
    return ElectionOutcome(winners, scores, ties, "borda")


def dedupe(ids: Sequence[Hashable]) -> list:
    seen = set()
    out = []
    for i in ids:
        if i not in seen:
            seen.add(i)
            out.append(i)
    return out


def pad_ranking(partial: Sequence, candidates: Sequence) -> list:
    """Keep the partial order (first occurrences), append missing candidates in candidate order."""
    known = set(candidates)
    head = [c for c in dedupe(partial) if c in known]
    present = set(head)
    return head + [c for c in candidates if c not in present]


APPROVAL_RULES = {
    "plurality": plurality,
    "pav_sequential": pav_sequential,
    "pav_exact": pav_exact,
}
RANKED_RULES = {"borda": borda}
VOTING_RULES = (*APPROVAL_RULES, *RANKED_RULES)


def ballot_kind(rule: str) -> str:
    if rule in APPROVAL_RULES:
        return "approval"
    if rule in RANKED_RULES:
        return "ranked"
    raise ValueError(f"unknown voting rule {rule!r}; choose from {', '.join(VOTING_RULES)}")


def elect(rule: str, candidates: Sequence, ballots: Sequence, target: int) -> ElectionOutcome:
    if ballot_kind(rule) == "approval":
        return APPROVAL_RULES[rule](ApprovalProfile(candidates, ballots), target)
    return RANKED_RULES[rule](RankedProfile(candidates, ballots), target)


def dump_election(rule: str, candidates: Sequence, ballots: Sequence, outcome: ElectionOutcome) -> str:
    """JSON record of one election for offline auditing."""
    return json.dumps(
        {
            "rule": rule,
            "candidates": list(candidates),
            "ballots": [sorted(b) if isinstance(b, (set, frozenset)) else list(b) for b in ballots],
            "winners": list(outcome.winners),
            "scores": {str(k): v for k, v in outcome.scores.items()},
            "tie_events": outcome.tie_events,
        },
        default=float,
    )

