"""Numerical laboratory for radial weights on the unit disc and weighted Bergman norms."""

from __future__ import annotations

from .errors import (
    BwlError,
    Divergent,
    DivergentNorm,
    DivergentWeight,
    NumericalFailure,
    ParameterError,
    TailNotCertified,
    is_divergent,
)
from .levels import Level
from .weights import (
    BlockStep,
    Lebesgue,
    LogStep,
    MeasureKind,
    RadialWeight,
    RapidV,
    Shifted,
    Standard,
    density,
    hat_moment,
    log_moment,
    moment,
    radial_integral,
    shift,
    tail_hat,
    tilde_hat,
)

__version__ = "0.1.0"

__all__ = [
    "BlockStep",
    "BwlError",
    "Divergent",
    "DivergentNorm",
    "DivergentWeight",
    "Lebesgue",
    "Level",
    "LogStep",
    "MeasureKind",
    "NumericalFailure",
    "ParameterError",
    "RadialWeight",
    "RapidV",
    "Shifted",
    "Standard",
    "TailNotCertified",
    "__version__",
    "density",
    "hat_moment",
    "is_divergent",
    "log_moment",
    "moment",
    "radial_integral",
    "shift",
    "tail_hat",
    "tilde_hat",
]
