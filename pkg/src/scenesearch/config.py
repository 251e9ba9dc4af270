"""Engine configuration with the published defaults.

``sigma_a`` (seconds) controls the temporal Gaussian discount between a
transcript term and a shot, ``sigma_b`` the width of the center-weighting
Gaussian on hypercolumn maps, ``svm_c_rank`` the ranking-SVM trade-off and
``alpha`` the semantic/aesthetic blend. Defaults: sigma_a=5, sigma_b=4.5,
svm_c_rank=3, alpha=0.5.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class EngineConfig:
    sigma_a: float = 5.0
    sigma_b: float = 4.5
    svm_c_rank: float = 3.0
    svm_c_concept: float = 1.0
    alpha: float = 0.5
    # None means "derived": 3 * sigma_a, beyond which the temporal weight
    # falls under 0.012 and shots are not worth classifying.
    candidate_window: float | None = None
    map_size: int = 56
    neg_ratio: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma_a > 0:
            raise ConfigError("bad-config", f"sigma_a must be > 0, got {self.sigma_a}")
        if not self.sigma_b > 0:
            raise ConfigError("bad-config", f"sigma_b must be > 0, got {self.sigma_b}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("bad-config", f"alpha must be in [0, 1], got {self.alpha}")
        if self.map_size < 2:
            raise ConfigError("bad-config", f"map_size must be >= 2, got {self.map_size}")
        if self.candidate_window is not None and not self.candidate_window > 0:
            raise ConfigError(
                "bad-config", f"candidate_window must be > 0, got {self.candidate_window}"
            )
        if not self.svm_c_rank > 0 or not self.svm_c_concept > 0:
            raise ConfigError("bad-config", "SVM C parameters must be > 0")
        if not self.neg_ratio > 0:
            raise ConfigError("bad-config", f"neg_ratio must be > 0, got {self.neg_ratio}")

    @property
    def window(self) -> float:
        """Effective half-width, in seconds, of the candidate-shot window."""
        if self.candidate_window is not None:
            return self.candidate_window
        return 3.0 * self.sigma_a

    def replace(self, **changes) -> "EngineConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "EngineConfig":
        """Load a JSON config file; keyword overrides win over file values."""
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("bad-config", f"{path}: config file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError("bad-config", f"{path}: unknown config keys {unknown}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)
