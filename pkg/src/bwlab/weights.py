"""Radial weights and their core functionals.

Every family exposes its *level density* ``omega(r) (1 - r)``, i.e. the
density of ``omega(r) dr`` with respect to ``d lam``.  Two facts are used
throughout:

* ``omega_hat(lam) = int_lam^inf level_density``;
* ``omega_tilde(r) dr = omega_hat(lam) d lam``, so the tail of the
  associated weight is ``int_lam^inf omega_hat``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import betaln

from . import construct
from .errors import Divergent, DivergentWeight, NumericalFailure, ParameterError, TailNotCertified
from .levels import LevelLike, as_lam
from .quadrature import clip_panels, dyadic_edges, gauss_legendre, integrate, split_at

DEFAULT_RTOL = 1e-10
# quadrature inside the library runs tighter than the user tolerance
_INNER_RTOL = 1e-13
# levels probed by the divergence rule
DOUBLING_LEVELS = (10.0, 20.0, 40.0, 80.0)
# increments shrinking slower than this factor count as non-geometric
DIVERGENCE_RATIO = 0.9
# windows stop here; every family in this module is negligible far earlier
MAX_LEVEL = 2.0**14


class MeasureKind(enum.Enum):
    OMEGA_DR = "omega_dr"  # omega(r) dr
    TILDE_DR = "tilde_dr"  # omega_tilde(r) dr
    OMEGA_R_DR = "omega_r_dr"  # omega(r) r dr


def _vec(f, lam):
    arr = np.asarray(lam, dtype=float)
    out = f(arr)
    return out if np.ndim(out) else float(out)


def _log_r_pow(x: float, lam: np.ndarray) -> np.ndarray:
    """``r^x`` for ``r = 1 - e^{-lam}``; ``0^0 = 1``."""
    lam = np.asarray(lam, dtype=float)
    if x == 0.0:
        return np.ones_like(lam)
    with np.errstate(divide="ignore"):
        return np.exp(x * np.log1p(-np.exp(-lam)))


class RadialWeight:
    """Common interface; concrete families are frozen dataclasses below."""

    exact_tail: bool = True

    # -- family hooks -----------------------------------------------------
    def level_density(self, lam):
        raise NotImplementedError

    def _tail_hat(self, lam: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _tilde_hat(self, lam: np.ndarray) -> np.ndarray:
        return self._tilde_hat_quadrature(lam)

    def support(self, lo: float, hi: float) -> np.ndarray:
        """``(a, b)`` pieces of ``[lo, hi]`` on which the density is smooth and nonzero."""
        return np.column_stack([(e := dyadic_edges(lo, hi))[:-1], e[1:]])

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        """Levels in ``[lo, hi]`` where the density jumps."""
        return np.zeros(0)

    def log_moment_tail(self, lam: float) -> float | None:
        """``int_lam^inf (1 + mu) level_density`` in closed form, if known."""
        return None

    def closed_moment(self, x: float) -> float | None:
        return None

    # -- public API -------------------------------------------------------
    def density(self, at: LevelLike) -> float:
        lam = as_lam(at)
        return float(self.level_density(np.asarray(lam)) * math.exp(lam))

    def tail_hat(self, at):
        return _vec(self._tail_hat, _levels(at))

    def tilde_hat(self, at):
        if isinstance(self.log_moment(), Divergent):
            raise DivergentWeight(f"{self!r} has a non-integrable associated weight")
        return _vec(self._tilde_hat, _levels(at))

    def moment(self, x: float, rtol: float = DEFAULT_RTOL) -> float:
        if x < 0:
            raise ParameterError(f"moment exponent must be >= 0, got {x!r}")
        closed = self.closed_moment(x)
        if closed is not None:
            return closed
        return self.moment_by_quadrature(x, rtol=rtol)

    def moment_by_quadrature(self, x: float, rtol: float = DEFAULT_RTOL) -> float:
        # beyond cut, r^x differs from 1 by at most x e^{-cut} = e^{-40}
        cut = math.log(max(x, 1.0)) + 40.0
        body = integrate(
            lambda lam: _log_r_pow(x, lam) * self.level_density(lam),
            self.support(0.0, cut),
            rtol=min(rtol, _INNER_RTOL),
        )
        return body + float(self._tail_hat(np.asarray(cut)))

    def log_moment(self):
        """``int omega(s) log(e/(1-s)) ds``, or a ``Divergent`` marker."""
        return _log_moment_cached(self)

    def _tilde_hat_quadrature(self, lam: np.ndarray) -> np.ndarray:
        out = np.empty(lam.shape)
        for idx, l0 in np.ndenumerate(lam):
            out[idx] = _integrate_to_infinity(
                lambda mu: self._tail_hat(mu), self, float(l0), kind="tilde"
            )
        return out


def _levels(at):
    if hasattr(at, "lam"):
        return np.asarray(at.lam, dtype=float)
    arr = np.asarray(at, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ParameterError("levels must be finite and >= 0")
    return arr


def _integrate_to_infinity(g, w: RadialWeight, lo: float, kind: str, rtol: float = _INNER_RTOL) -> float:
    """``int_lo^inf g`` over dyadic windows until the tail mass is negligible.

    ``kind`` selects the tail bound: ``"tilde"`` integrates ``omega_hat``
    itself (nonincreasing, so the tail is at most ``omega_hat(hi) * (next window)``
    and decays with it); ``"density"`` bounds by ``omega_hat(hi)``.
    """
    total = 0.0
    hi = lo
    width = 1.0
    parts = []
    while hi < MAX_LEVEL:
        a, b = hi, hi + width
        edges = split_at(a, b, w.breakpoints(a, b))
        parts.append(integrate(g, edges, rtol=rtol))
        total = math.fsum(parts)
        hi, width = b, width * 2.0
        bound = float(w._tail_hat(np.asarray(hi)))
        if kind == "tilde":
            # omega_hat decays at least like the remaining mass; two extra windows
            # carry essentially everything when the last window is negligible
            if parts[-1] <= rtol * abs(total) and bound * width <= rtol * abs(total):
                return total
        elif bound <= rtol * abs(total):
            return total
    raise TailNotCertified(f"tail of {w!r} not negligible below level {MAX_LEVEL:g}")


_LOG_MOMENT_CACHE: dict = {}


def _log_moment_cached(w: RadialWeight):
    key = w
    try:
        return _LOG_MOMENT_CACHE[key]
    except (KeyError, TypeError):
        pass
    value = _log_moment(w)
    try:
        _LOG_MOMENT_CACHE[key] = value
    except TypeError:
        pass
    return value


def _log_moment(w: RadialWeight):
    f = lambda lam: (1.0 + lam) * w.level_density(lam)
    partials = []
    prev = 0.0
    acc = []
    for lam_max in DOUBLING_LEVELS:
        acc.append(integrate(f, w.support(prev, lam_max), rtol=_INNER_RTOL))
        partials.append((lam_max, math.fsum(acc)))
        prev = lam_max
    closed_tail = w.log_moment_tail(DOUBLING_LEVELS[-1])
    if closed_tail is not None:
        if not math.isfinite(closed_tail):
            return Divergent(tuple(partials))
        return partials[-1][1] + closed_tail
    incs = np.diff([0.0] + [p for _, p in partials])
    if incs[-1] > DIVERGENCE_RATIO * incs[-2] and incs[-1] > 1e-12 * partials[-1][1]:
        return Divergent(tuple(partials))
    rest = _integrate_to_infinity(f, w, DOUBLING_LEVELS[-1], kind="density")
    return partials[-1][1] + rest


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class Lebesgue(RadialWeight):
    def level_density(self, lam):
        return np.exp(-np.asarray(lam, dtype=float))

    def _tail_hat(self, lam):
        return np.exp(-lam)

    def _tilde_hat(self, lam):
        return np.exp(-lam)

    def closed_moment(self, x):
        return 1.0 / (x + 1.0)

    def log_moment_tail(self, lam):
        return (2.0 + lam) * math.exp(-lam)

    def support(self, lo, hi):
        e = split_at(lo, hi, np.arange(math.ceil(lo), math.floor(hi) + 1))
        return np.column_stack([e[:-1], e[1:]])


@dataclass(frozen=True)
class Standard(RadialWeight):
    """``(1 - r)^alpha``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > -1:
            raise ParameterError("standard weights need alpha > -1")

    def level_density(self, lam):
        return np.exp(-(self.alpha + 1.0) * np.asarray(lam, dtype=float))

    def _tail_hat(self, lam):
        a1 = self.alpha + 1.0
        return np.exp(-a1 * lam) / a1

    def _tilde_hat(self, lam):
        a1 = self.alpha + 1.0
        return np.exp(-a1 * lam) / (a1 * a1)

    def closed_moment(self, x):
        return math.exp(betaln(x + 1.0, self.alpha + 1.0))

    def log_moment_tail(self, lam):
        a1 = self.alpha + 1.0
        return math.exp(-a1 * lam) * ((1.0 + lam) / a1 + 1.0 / (a1 * a1))

    def support(self, lo, hi):
        step = 1.0 / max(1.0, self.alpha + 1.0)
        e = split_at(lo, hi, np.arange(0.0, hi, step))
        return np.column_stack([e[:-1], e[1:]])


@dataclass(frozen=True)
class RapidV(RadialWeight):
    """``v_alpha(r) = (1 - r)^{-1} (log e/(1 - r))^{-alpha}``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ParameterError("v_alpha is a weight only for alpha > 1")

    def level_density(self, lam):
        return (1.0 + np.asarray(lam, dtype=float)) ** (-self.alpha)

    def _tail_hat(self, lam):
        return (1.0 + lam) ** (1.0 - self.alpha) / (self.alpha - 1.0)

    def _tilde_hat(self, lam):
        a = self.alpha
        return (1.0 + lam) ** (2.0 - a) / ((a - 1.0) * (a - 2.0))

    def log_moment_tail(self, lam):
        if self.alpha <= 2.0:
            return math.inf
        return (1.0 + lam) ** (2.0 - self.alpha) / (self.alpha - 2.0)


@dataclass(frozen=True)
class LogStep(RadialWeight):
    """Unit level density on ``[n + 1 - phi(n), n + 1]``, ``n >= 2``."""

    phi: construct.PhiSequence = field(default_factory=lambda: construct.DEFAULT_PHI)

    def _blocks(self, lo, hi):
        n = np.arange(max(2, math.floor(lo) - 1), math.floor(hi) + 1, dtype=float)
        a = np.asarray(self.phi.block_start(n))
        return np.column_stack([a, n + 1.0])

    def level_density(self, lam):
        lam = np.asarray(lam, dtype=float)
        n = np.maximum(np.floor(lam), 2.0)
        inside = (lam >= self.phi.block_start(n)) & (lam <= n + 1.0) & (lam >= 2.0)
        return np.where(inside, 1.0, 0.0)

    def _tail_hat(self, lam):
        return construct.t3_tail(lam, self.phi)

    def _tilde_hat(self, lam):
        return construct.t3_tilde_tail(lam, self.phi)

    def support(self, lo, hi):
        return clip_panels(self._blocks(lo, hi), lo, hi)

    def breakpoints(self, lo, hi):
        return self._blocks(lo, hi).ravel()

    def log_moment_tail(self, lam):
        # blocks n >= N = ceil(lam) lie entirely beyond lam when lam is an integer
        n0 = math.ceil(lam)
        if n0 != lam:
            return None
        ph = self.phi
        return ph.first_moment_tail(n0) + 2.0 * ph.tail(n0) - 0.5 * ph.square_tail(n0)

    def moment_by_quadrature(self, x, rtol=DEFAULT_RTOL):
        cut = float(math.ceil(math.log(max(x, 1.0)) + 40.0))
        body = integrate(
            lambda lam: _log_r_pow(x, lam), self.support(0.0, cut), rtol=min(rtol, _INNER_RTOL)
        )
        return body + self.phi.tail(cut)


@dataclass(frozen=True)
class BlockStep(RadialWeight):
    """Indicator of ``[r_{2n+1}, r_{2n+2}]``, ``n >= 1``."""

    psi: construct.PsiFunction = field(default_factory=lambda: construct.DEFAULT_PSI)

    def _tables(self):
        return construct.block_tables(self.psi)

    def level_density(self, lam):
        lam = np.asarray(lam, dtype=float)
        tb = self._tables()
        i = np.minimum(np.searchsorted(tb.ends, lam, side="left"), len(tb.ends) - 1)
        inside = (lam >= tb.starts[i]) & (lam <= tb.ends[i])
        return np.where(inside, np.exp(-lam), 0.0)

    def _tail_hat(self, lam):
        return construct.t7_tail(lam, self.psi)

    def _tilde_hat(self, lam):
        return construct.t7_tilde_tail(lam, self.psi)

    def support(self, lo, hi):
        tb = self._tables()
        return clip_panels(np.column_stack([tb.starts, tb.ends]), lo, hi)

    def breakpoints(self, lo, hi):
        tb = self._tables()
        pts = np.concatenate([tb.starts, tb.ends])
        return np.sort(pts[(pts >= lo) & (pts <= hi)])

    def closed_moment(self, x):
        tb = self._tables()
        # int over block of r^x e^{-lam} = [r^{x+1}/(x+1)], via exp/expm1
        ua = (x + 1.0) * np.log1p(-np.exp(-tb.starts))
        ub = (x + 1.0) * np.log1p(-np.exp(-tb.ends))
        # r_b^{x+1} - r_a^{x+1} = r_b^{x+1} (1 - e^{ua - ub}); ua <= ub, so nothing overflows
        pieces = np.exp(ub) * -np.expm1(ua - ub) / (x + 1.0)
        return math.fsum(pieces[::-1])

    def log_moment_tail(self, lam):
        # the density decays like e^{-lam}; past level 80 the tail is < 1e-33
        return 0.0 if lam >= 80.0 else None


@dataclass(frozen=True)
class Shifted(RadialWeight):
    """``omega_[beta](r) = omega(r) (1 - r)^beta``.

    Tails come from a table of cumulative integrals on a node grid (integers
    plus the breakpoints of the base) and one short Gauss-Legendre segment
    for the remainder; between nodes the integrand is smooth.
    """

    base: RadialWeight
    beta: float
    exact_tail = False

    def level_density(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.base.level_density(lam) * np.exp(-self.beta * lam)

    @functools.cached_property
    def _table(self):
        # the table runs until the tail bound underflows relative to the total, so
        # ratios of tails stay meaningful far out; 1e-18 is the certification floor
        top = 1.0
        ref = float(self.base._tail_hat(np.asarray(0.0)))
        bound = lambda lam: float(self.base._tail_hat(np.asarray(lam))) * math.exp(-self.beta * lam)
        while top < MAX_LEVEL and bound(top) > 1e-290 * ref:
            top *= 2.0
        if bound(top) > 1e-18 * ref:
            raise TailNotCertified(f"{self!r} has no negligible tail below level {MAX_LEVEL:g}")
        nodes = split_at(0.0, top, np.arange(0.0, top + 1.0))
        nodes = np.union1d(nodes, self.base.breakpoints(0.0, top))
        hat_pieces = _segment_integrals(self.level_density, nodes)
        hat = np.concatenate([np.cumsum(hat_pieces[::-1])[::-1], [0.0]])
        tilde_pieces = _segment_integrals(lambda mu: _table_eval(self.level_density, nodes, hat, mu), nodes)
        tilde = np.concatenate([np.cumsum(tilde_pieces[::-1])[::-1], [0.0]])
        return nodes, hat, tilde

    def _tail_hat(self, lam):
        nodes, hat, _ = self._table
        return _table_eval(self.level_density, nodes, hat, np.asarray(lam, dtype=float))

    def _tilde_hat(self, lam):
        nodes, hat, tilde = self._table
        g = lambda mu: _table_eval(self.level_density, nodes, hat, mu)
        return _table_eval(g, nodes, tilde, np.asarray(lam, dtype=float))

    def support(self, lo, hi):
        return self.base.support(lo, hi)

    def breakpoints(self, lo, hi):
        return self.base.breakpoints(lo, hi)


_SEG_ORDER = 32


def _segment_integrals(f, nodes: np.ndarray) -> np.ndarray:
    """Fixed-order Gauss-Legendre integral of ``f`` over each ``[nodes[i], nodes[i+1]]``."""
    return _segment_integrals_pairs(f, nodes[:-1], nodes[1:])


def _table_eval(f, nodes: np.ndarray, cum: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``int_lam^inf f`` from suffix sums ``cum`` at ``nodes`` plus one segment."""
    lam = np.asarray(lam, dtype=float)
    flat = lam.ravel()
    i = np.searchsorted(nodes, flat, side="left")
    beyond = i >= len(nodes)
    i = np.minimum(i, len(nodes) - 1)
    right = nodes[i]
    seg = _segment_integrals_pairs(f, np.minimum(flat, right), right)
    out = np.where(beyond, 0.0, cum[i] + seg)
    return out.reshape(lam.shape)


def _segment_integrals_pairs(f, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    x, wts = gauss_legendre(_SEG_ORDER)
    half = 0.5 * (b - a)
    pts = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    return half * (np.asarray(f(pts), dtype=float) @ wts)


# ---------------------------------------------------------------------------
# operations


def density(w: RadialWeight, at: LevelLike) -> float:
    return w.density(at)


def tail_hat(w: RadialWeight, at):
    return w.tail_hat(at)


def tilde_hat(w: RadialWeight, at):
    return w.tilde_hat(at)


def moment(w: RadialWeight, x: float, rtol: float = DEFAULT_RTOL) -> float:
    return w.moment(x, rtol=rtol)


def log_moment(w: RadialWeight):
    return w.log_moment()


def shift(w: RadialWeight, beta: float) -> RadialWeight:
    if beta < 0:
        raise ParameterError(f"shift exponent must be >= 0, got {beta!r}")
    if beta == 0:
        return w
    if isinstance(w, Lebesgue):
        return Standard(beta)
    if isinstance(w, Standard):
        return Standard(w.alpha + beta)
    if isinstance(w, Shifted):
        return shift(w.base, w.beta + beta)
    return Shifted(w, beta)


def hat_moment(w: RadialWeight, x: float, rtol: float = DEFAULT_RTOL) -> float:
    """``int_0^1 r^x omega_hat(r) dr``."""
    return radial_integral(
        lambda lam: _log_r_pow(x, lam) * np.exp(-lam),
        w,
        MeasureKind.TILDE_DR,
        g_bound=lambda lam: math.exp(-lam),
        rtol=rtol,
    )


def radial_integral(
    g: Callable[[np.ndarray], np.ndarray],
    w: RadialWeight,
    m: MeasureKind = MeasureKind.OMEGA_DR,
    *,
    lam_max: float | None = None,
    g_bound: float | Callable[[float], float] | None = None,
    g_limit: float | None = None,
    g_slope: float = 0.0,
    rtol: float = DEFAULT_RTOL,
    lam_cap: float = MAX_LEVEL,
) -> float:
    """``int_0^1 g(r) d mu(r)`` with ``g`` given as a function of the level.

    With ``lam_max`` the integral is truncated there and no tail is added.
    Otherwise panels are added window by window until ``g_bound`` times the
    remaining mass of ``mu`` is below ``rtol`` of the running value.
    ``g_bound`` is either a constant or a function returning ``sup |g - g_limit|``
    beyond a given level (``g_limit`` defaults to 0).  When ``g_limit`` is set
    the remaining mass times ``g_limit`` is added in closed form, which keeps
    slowly decaying weights cheap.  Without ``g_bound`` the bound falls back
    to twice the largest ``|g|`` seen at the end of the last window, which is
    only a heuristic; past ``lam_cap`` that route raises ``TailNotCertified``.
    With ``g_slope`` the model is ``g_limit + g_slope * lam`` and its tail is
    taken from ``log_moment_tail``; ``g_bound`` then bounds ``|g - model|``.
    """
    if g_slope and m is MeasureKind.TILDE_DR:
        raise ParameterError("an affine limit needs omega dr or omega r dr")
    if m is MeasureKind.OMEGA_DR:
        dens = w.level_density
    elif m is MeasureKind.OMEGA_R_DR:
        dens = lambda lam: w.level_density(lam) * (-np.expm1(-lam))
    elif m is MeasureKind.TILDE_DR:
        if isinstance(w.log_moment(), Divergent):
            raise DivergentWeight(f"{w!r} has a non-integrable associated weight")
        dens = w._tail_hat
    else:  # pragma: no cover
        raise ParameterError(f"unknown measure {m!r}")

    def f(lam):
        return np.asarray(g(lam), dtype=float) * dens(lam)

    def pieces(a, b):
        if m is MeasureKind.TILDE_DR:
            e = split_at(a, b, w.breakpoints(a, b))
            return np.column_stack([e[:-1], e[1:]])
        return w.support(a, b)

    inner = min(rtol * 1e-2, _INNER_RTOL)
    if lam_max is not None:
        edges = dyadic_edges(0.0, lam_max)
        parts = [integrate(f, pieces(a, b), rtol=inner) for a, b in zip(edges[:-1], edges[1:])]
        return math.fsum(parts)

    def mass_beyond(lam):
        if m is MeasureKind.TILDE_DR:
            return float(w._tilde_hat(np.asarray(lam)))
        # omega dr dominates omega r dr; the gap is at most e^{-lam} times this
        return float(w._tail_hat(np.asarray(lam)))

    def exact_mass(lam):
        if m is MeasureKind.OMEGA_R_DR:
            return mass_beyond(lam) - integrate(
                lambda mu: w.level_density(mu) * np.exp(-mu), w.support(lam, lam + 40.0), rtol=_INNER_RTOL
            )
        return mass_beyond(lam)

    def first_moment(lam):
        # int_lam^inf mu d mu, or None where the weight has no closed form there
        lmt = w.log_moment_tail(lam)
        if lmt is None:
            return None
        if math.isinf(lmt):
            raise DivergentWeight(f"{w!r} has no finite logarithmic moment")
        out = lmt - float(w._tail_hat(np.asarray(lam)))
        if m is MeasureKind.OMEGA_R_DR:
            out -= integrate(
                lambda mu: mu * w.level_density(mu) * np.exp(-mu), w.support(lam, lam + 60.0), rtol=_INNER_RTOL
            )
        return out

    limit = 0.0 if g_limit is None else float(g_limit)
    parts = []
    a, width = 0.0, 1.0
    while True:
        b = a + width
        parts.append(integrate(f, pieces(a, b), rtol=inner))
        total = math.fsum(parts)
        a, width = b, 2.0 * width
        if callable(g_bound):
            bound = float(g_bound(a))
        elif g_bound is not None:
            bound = float(g_bound)
        else:
            if a > lam_cap:
                raise TailNotCertified(f"no bound for the integrand beyond level {lam_cap:g}")
            probe = np.linspace(b - width / 4.0, b, 17)
            bound = 2.0 * float(np.max(np.abs(np.asarray(g(probe)) - limit)))
        mass = mass_beyond(a)
        rest = bound * mass
        if limit:
            tail = limit * exact_mass(a)
            scale = abs(total + tail)
        else:
            tail, scale = 0.0, abs(total)
        ready = True
        if g_slope:
            fm = first_moment(a)
            ready = fm is not None
            if ready:
                tail += g_slope * fm
                scale = abs(total + tail)
        if ready and (rest <= rtol * 1e-2 * scale or rest == 0.0):
            return total + tail
        if a >= min(lam_cap, MAX_LEVEL):
            raise TailNotCertified("tail mass did not become negligible")
