"""Exception types and the divergence marker shared by all modules."""

from __future__ import annotations

import math
from dataclasses import dataclass


class BwlError(Exception):
    """Base class for every error raised by bwlab."""


class ParameterError(BwlError, ValueError):
    """An argument is outside the domain of the operation."""


class NumericalFailure(BwlError, ArithmeticError):
    """Adaptive quadrature or a series did not reach its tolerance."""


class TailNotCertified(NumericalFailure):
    """The contribution beyond the last integrated level could not be bounded."""


class DivergentWeight(BwlError, ArithmeticError):
    """The associated weight (tail of the tail) is not integrable."""


@dataclass(frozen=True)
class Divergent:
    """Value returned in place of an integral that does not converge.

    ``partials`` keeps the ``(lam_max, partial_integral)`` pairs that led to
    the verdict so reports can show the growth.
    """

    partials: tuple[tuple[float, float], ...] = ()

    def __float__(self) -> float:
        return math.inf

    def __repr__(self) -> str:
        return f"Divergent(partials={self.partials!r})"


# the norm functionals use the same marker
DivergentNorm = Divergent


def is_divergent(value: object) -> bool:
    return isinstance(value, Divergent)
