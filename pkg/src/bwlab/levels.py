"""The boundary-distance coordinate ``lam = -log(1 - r)``.

Every radial quantity in the package is parametrised by ``lam`` so that
``1 - r = exp(-lam)`` is available to full relative precision even when
``r`` itself rounds to 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True, order=True)
class Level:
    lam: float

    def __post_init__(self) -> None:
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ParameterError(f"level must be finite and >= 0, got {self.lam!r}")

    @classmethod
    def from_radius(cls, r: float) -> "Level":
        if not 0.0 <= r < 1.0:
            raise ParameterError(f"radius must lie in [0, 1), got {r!r}")
        return cls(-math.log1p(-r))

    @classmethod
    def from_gap(cls, gap: float) -> "Level":
        """Level whose distance to the boundary ``1 - r`` equals ``gap``."""
        if not 0.0 < gap <= 1.0:
            raise ParameterError(f"gap must lie in (0, 1], got {gap!r}")
        return cls(-math.log(gap))

    @property
    def gap(self) -> float:
        return math.exp(-self.lam)

    @property
    def r(self) -> float:
        return -math.expm1(-self.lam)


LevelLike = Union[Level, float, int]


def as_lam(at: LevelLike) -> float:
    if isinstance(at, Level):
        return at.lam
    lam = float(at)
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ParameterError(f"level must be finite and >= 0, got {at!r}")
    return lam


def radius(lam):
    """``r = 1 - exp(-lam)``, elementwise."""
    return -np.expm1(-np.asarray(lam, dtype=float))


def gap(lam):
    """``1 - r = exp(-lam)``, elementwise."""
    return np.exp(-np.asarray(lam, dtype=float))


def log_grid(lo: float, hi: float, count: int) -> np.ndarray:
    if not 0.0 < lo < hi:
        raise ParameterError("log grid needs 0 < lo < hi")
    return np.geomspace(lo, hi, count)


def merge_grid(*parts) -> np.ndarray:
    """Sorted union of level arrays with exact duplicates removed."""
    merged = np.unique(np.concatenate([np.atleast_1d(np.asarray(p, float)) for p in parts]))
    return merged[merged >= 0.0]
