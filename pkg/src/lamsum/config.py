from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .calibration import CalibrationConfig
from .voting import VOTING_RULES

MODES = ("lamsum", "vanilla")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of one summarization run.

    ``q`` defaults to ``k``, which keeps the worst case (every final unit
    coming from one level-0 chunk) reachable.
    """

    k: int = 50
    s: int = 100
    q: int | None = None
    m: int = 3
    mode: str = "lamsum"
    voting_rule: str = "pav_sequential"
    seed: int = 0
    backend: str = "mock:first-q"
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    context_budget_tokens: int = 8192
    max_output_tokens: int = 8192
    max_workers: int = 1
    max_levels: int = 64

    def __post_init__(self):
        if self.q is None:
            object.__setattr__(self, "q", self.k)
        self.validate()

    def validate(self) -> None:
        errors = []
        if self.k < 1:
            errors.append(f"k: must be >= 1 (got {self.k})")
        if self.q < self.k:
            errors.append(f"q: must be >= k={self.k} (got {self.q})")
        if self.s <= self.q:
            errors.append(f"s: must be > q={self.q} (got {self.s})")
        if self.m < 1:
            errors.append(f"m: must be >= 1 (got {self.m})")
        if self.mode not in MODES:
            errors.append(f"mode: must be one of {MODES} (got {self.mode!r})")
        if self.voting_rule not in VOTING_RULES:
            errors.append(f"voting_rule: must be one of {VOTING_RULES} (got {self.voting_rule!r})")
        if self.max_workers < 1:
            errors.append("max_workers: must be >= 1")
        if self.max_levels < 1:
            errors.append("max_levels: must be >= 1")
        if errors:
            raise ConfigError("; ".join(errors))

    def snapshot(self) -> dict:
        d = asdict(self)
        cal = d.pop("calibration")
        d["calibration"] = {
            "epsilon": cal["epsilon"],
            "keyword_min_length": cal["keyword_min_length"],
            "n_stopwords": len(cal["stopwords"]),
            "custom_keyword_extractor": cal["keyword_extractor"] is not None,
        }
        return d
