"""Ratio profiles over level grids, shared by the diagnostics and constructions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


class ProfileKind(enum.Enum):
    DHAT_RATIO = "dhat_ratio"
    DCHECK_RATIO = "dcheck_ratio"
    MOMENT_CONDITION = "moment_condition"
    TAIL_COMPARISON = "tail_comparison"
    REGULARITY = "regularity"


@dataclass(frozen=True)
class ProfileSummary:
    sup: float
    inf: float
    # least-squares slope of log(value) against log(1 + level) over the upper half
    tail_trend: float


@dataclass(frozen=True)
class RatioProfile:
    grid: np.ndarray
    values: np.ndarray
    kind: ProfileKind
    param: float | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ParameterError("grid and values must be 1-D arrays of equal length")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ParameterError("profile grid must be strictly ascending")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def summary(self) -> ProfileSummary:
        v = self.values
        half = v.size // 2
        tail_v, tail_g = v[half:], self.grid[half:]
        trend = 0.0
        if tail_v.size >= 2 and np.all(tail_v > 0):
            trend = float(np.polyfit(np.log1p(tail_g), np.log(tail_v), 1)[0])
        return ProfileSummary(float(np.max(v)), float(np.min(v)), trend)

    def rows(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.grid, self.values)]
