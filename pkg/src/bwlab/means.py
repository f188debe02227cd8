"""Integral means, Bergman norms and related functionals of analytic test functions.

Points of the disc are handled in polar form ``z = (1 - delta) e^{i theta}``
with the gap ``delta = 1 - |z|`` carried explicitly.  The singular factor
``1 - z`` of the extremal functions is then evaluated as

    1 - s e^{i theta} = (1 - s) + 2 s sin^2(theta / 2) - i s sin(theta)

which has no cancellation for ``s`` close to 1 and ``theta`` close to 0.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln

from .errors import Divergent, DivergentWeight, NumericalFailure, ParameterError, TailNotCertified
from .levels import LevelLike, as_lam
from .quadrature import gauss_legendre, integrate, split_at
from .weights import (
    DEFAULT_RTOL,
    DIVERGENCE_RATIO,
    DOUBLING_LEVELS,
    MAX_LEVEL,
    MeasureKind,
    RadialWeight,
    radial_integral,
)


class Target(enum.Enum):
    FULL = "f"
    RE = "re"
    DERIV = "df"


def _as_target(t) -> Target:
    if isinstance(t, Target):
        return t
    try:
        return Target(t)
    except ValueError:
        raise ParameterError(f"unknown target {t!r}; use 'f', 're' or 'df'") from None


# ---------------------------------------------------------------------------
# test functions


class AnalyticTestFunction:
    """Common interface of the test functions below."""

    def polar(self, delta, theta, derivative: bool = False):
        """``f`` (or ``f'``) at ``(1 - delta) e^{i theta}``, broadcasting."""
        raise NotImplementedError

    def sup_abs(self, radius: float, derivative: bool = False) -> float:
        """``max |f|`` (or ``|f'|``) over the closed disc of the given radius."""
        raise NotImplementedError

    def peak_width(self, delta: float) -> float | None:
        """Angular width of the boundary peak at ``theta = 0``, if any."""
        return None

    def resolution(self) -> int:
        """Number of equal angular panels that resolve the function."""
        return 16

    # -- convenience ----------------------------------------------------------
    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return self.polar(1.0 - np.abs(z), np.angle(z))

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.polar(1.0 - np.abs(z), np.angle(z), derivative=True)

    def real_part(self, z):
        return np.real(self.value(z))

    def at_zero(self) -> complex:
        return complex(self.polar(1.0, 0.0))


@dataclass(frozen=True)
class Monomial(AnalyticTestFunction):
    n: int

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise ParameterError("monomial degree must be a nonnegative integer")

    def polar(self, delta, theta, derivative=False):
        delta = np.asarray(delta, dtype=float)
        theta = np.asarray(theta, dtype=float)
        k = self.n - 1 if derivative else self.n
        coef = float(self.n) if derivative else 1.0
        if k < 0:
            return np.zeros(np.broadcast(delta, theta).shape, dtype=complex)
        with np.errstate(divide="ignore"):
            mod = np.exp(k * np.log1p(-delta)) if k else np.ones_like(delta)
        return coef * mod * np.exp(1j * k * theta)

    def sup_abs(self, radius, derivative=False):
        if derivative:
            return float(self.n * radius ** max(self.n - 1, 0)) if self.n else 0.0
        return float(radius**self.n)

    def resolution(self):
        return max(16, 4 * self.n)


_UNIT_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


@dataclass(frozen=True)
class HLExtremal(AnalyticTestFunction):
    """``exp(i (k - 1) pi / 2) (1 - z)^{-k}``."""

    k: int

    def __post_init__(self):
        if self.k < 1 or int(self.k) != self.k:
            raise ParameterError("k must be a positive integer")

    @property
    def prefactor(self) -> complex:
        # exact powers of i; exp(i (k-1) pi/2) in floating point would not be
        return _UNIT_POWERS[(self.k - 1) % 4]

    def polar(self, delta, theta, derivative=False):
        delta = np.asarray(delta, dtype=float)
        theta = np.asarray(theta, dtype=float)
        s = 1.0 - delta
        w = delta + 2.0 * s * np.sin(0.5 * theta) ** 2 - 1j * s * np.sin(theta)
        if derivative:
            return self.prefactor * self.k * w ** (-(self.k + 1))
        return self.prefactor * w ** (-self.k)

    def sup_abs(self, radius, derivative=False):
        if radius >= 1.0:
            return math.inf
        if derivative:
            return self.k * (1.0 - radius) ** (-(self.k + 1))
        return (1.0 - radius) ** (-self.k)

    def peak_width(self, delta):
        return float(delta)


@dataclass(frozen=True)
class Taylor(AnalyticTestFunction):
    """``sum_m a_m z^m`` with finitely many coefficients."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        c = tuple(complex(a) for a in self.coeffs)
        if not c:
            raise ParameterError("Taylor needs at least one coefficient")
        if not all(math.isfinite(a.real) and math.isfinite(a.imag) for a in c):
            raise ParameterError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    def polar(self, delta, theta, derivative=False):
        delta = np.asarray(delta, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = (1.0 - delta) * np.exp(1j * theta)
        c = np.array(self.coeffs)
        if derivative:
            c = (c * np.arange(len(c)))[1:]
            if c.size == 0:
                return np.zeros(z.shape, dtype=complex)
        return np.polyval(c[::-1], z)

    def sup_abs(self, radius, derivative=False):
        c = np.abs(np.array(self.coeffs))
        m = np.arange(len(c))
        if derivative:
            return float(np.sum(c[1:] * m[1:] * radius ** (m[1:] - 1.0)))
        return float(np.sum(c * radius**m))

    def resolution(self):
        return max(16, 4 * len(self.coeffs))


@dataclass(frozen=True)
class Dilate(AnalyticTestFunction):
    """``f(rho z)``."""

    base: AnalyticTestFunction
    rho: float

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ParameterError("dilation factor must lie in [0, 1)")

    def _gap(self, delta):
        # 1 - rho (1 - delta), kept free of cancellation
        return (1.0 - self.rho) + self.rho * np.asarray(delta, dtype=float)

    def polar(self, delta, theta, derivative=False):
        out = self.base.polar(self._gap(delta), theta, derivative)
        return self.rho * out if derivative else out

    def sup_abs(self, radius, derivative=False):
        out = self.base.sup_abs(self.rho * radius, derivative)
        return self.rho * out if derivative else out

    def peak_width(self, delta):
        return self.base.peak_width(float(self._gap(delta)))

    def resolution(self):
        return self.base.resolution()


# ---------------------------------------------------------------------------
# integral means


def _sample(f: AnalyticTestFunction, target: Target, delta, theta):
    v = f.polar(delta, theta, derivative=target is Target.DERIV)
    return np.real(v) if target is Target.RE else v


def _theta_panels(f: AnalyticTestFunction, delta: float) -> np.ndarray:
    width = f.peak_width(delta)
    if width is None:
        return np.linspace(-math.pi, math.pi, f.resolution() + 1)
    # dyadic grading toward the singular direction, finest panel ~ width / 8
    floor = max(width / 8.0, 1e-300)
    k = max(0, math.ceil(math.log2(math.pi / floor)))
    right = math.pi * np.exp2(-np.arange(k, -1, -1, dtype=float))
    # four equal panels on the outer dyadic piece keep the coarse end accurate
    right = np.union1d(right, np.linspace(math.pi / 2, math.pi, 5))
    return np.concatenate([-right[::-1], [0.0], right])


@functools.lru_cache(maxsize=1 << 16)
def _angular_factor(target: Target, p: float) -> float:
    """``(1/2pi) int |cos u|^p du`` for the real part, 1 otherwise."""
    if target is not Target.RE:
        return 1.0
    if p == math.inf:
        return 1.0
    # integrand behaves like (pi/2 - u)^p at the right end
    edges = math.pi / 2 - (math.pi / 2) * np.exp2(-np.arange(0, 60, dtype=float))
    edges = np.append(edges, math.pi / 2)
    val = integrate(lambda u: np.abs(np.cos(u)) ** p, edges, rtol=1e-14)
    return val / (math.pi / 2)


def cos_mean(p: float) -> float:
    """``c_p = (1/2pi) int_0^{2pi} |cos u|^p du``."""
    if not p > 0:
        raise ParameterError("p must be positive")
    return _angular_factor(Target.RE, float(p))


def _monomial_mp_pow(f: Monomial, target: Target, p: float, lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    k, coef = f.n, 1.0
    if target is Target.DERIV:
        if f.n == 0:
            return np.zeros_like(lam)
        k, coef = f.n - 1, float(f.n)
    factor = 1.0 if (f.n == 0 and target is Target.RE) else _angular_factor(target, p)
    if k == 0:
        # avoid 0 * log(0) at the centre
        return np.full_like(lam, coef if p == math.inf else coef**p * factor)
    with np.errstate(divide="ignore"):
        if p == math.inf:
            return coef * factor * np.exp(k * np.log1p(-np.exp(-lam)))
        return coef**p * factor * np.exp(k * p * np.log1p(-np.exp(-lam)))


@functools.lru_cache(maxsize=1 << 18)
def _mp_pow_scalar(f: AnalyticTestFunction, target: Target, p: float, lam: float, rtol: float) -> float:
    delta = math.exp(-lam) if lam > 0 else 1.0
    if lam == 0.0:
        # r = 0: the circle collapses to the centre
        v = abs(complex(_sample(f, target, 1.0, 0.0)))
        return v if p == math.inf else v**p
    return _circle_pow(f, target, p, delta, rtol)


def _circle_pow(f: AnalyticTestFunction, target: Target, p: float, delta: float, rtol: float) -> float:
    # delta = 0 is the boundary circle, usable for functions bounded on the closed disc
    if p == math.inf:
        return _sup_mean(f, target, delta, rtol)
    panels = _theta_panels(f, delta)
    val = integrate(lambda t: np.abs(_sample(f, target, delta, t)) ** p, panels, rtol=rtol)
    return val / (2.0 * math.pi)


def _sup_mean(f, target, delta, rtol):
    prev = -1.0
    n = 64
    while n <= 1 << 22:
        theta = np.concatenate([np.linspace(-math.pi, math.pi, n, endpoint=False), [0.0]])
        cur = float(np.max(np.abs(_sample(f, target, delta, theta))))
        if prev >= 0 and abs(cur - prev) <= rtol * cur:
            return cur
        prev, n = cur, 2 * n
    raise NumericalFailure("sampled maximum did not settle")


def mp_pow(f: AnalyticTestFunction, target, p: float, lam, rtol: float = DEFAULT_RTOL):
    """``M_p^p(r, .)`` at the given level(s); for ``p = inf`` the maximum modulus."""
    target = _as_target(target)
    p = float(p)
    if not p > 0:
        raise ParameterError("p must be positive")
    arr = np.asarray(lam, dtype=float)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ParameterError("levels must be finite and >= 0")
    if isinstance(f, Monomial):
        out = _monomial_mp_pow(f, target, p, arr)
    else:
        out = np.array([_mp_pow_scalar(f, target, p, float(x), rtol) for x in arr.ravel()]).reshape(arr.shape)
    return out if out.ndim else float(out)


def mp_mean(f: AnalyticTestFunction, target, p: float, at: LevelLike, rtol: float = DEFAULT_RTOL) -> float:
    """``M_p(r, .)`` for the target ``'f'``, ``'re'`` (real part) or ``'df'`` (derivative)."""
    val = mp_pow(f, target, p, as_lam(at), rtol=rtol)
    return val if p == math.inf else val ** (1.0 / p)


@dataclass(frozen=True)
class MeanProfile:
    grid: np.ndarray
    mp_pow: np.ndarray
    sup_env: np.ndarray
    p: float
    target: Target


def mean_profile(f: AnalyticTestFunction, target, p: float, grid, rtol: float = DEFAULT_RTOL) -> MeanProfile:
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ParameterError("grid must be ascending")
    vals = np.asarray(mp_pow(f, target, p, grid, rtol=rtol), dtype=float).reshape(grid.shape)
    return MeanProfile(grid, vals, np.maximum.accumulate(vals), float(p), _as_target(target))


def running_sup(profile: MeanProfile) -> MeanProfile:
    """Recompute the running supremum of ``mp_pow``."""
    if profile.grid.size > 1 and not np.all(np.diff(profile.grid) > 0):
        raise ParameterError("grid must be ascending")
    return replace(profile, sup_env=np.maximum.accumulate(np.asarray(profile.mp_pow, dtype=float)))


# ---------------------------------------------------------------------------
# norms


def _tail_data(f: AnalyticTestFunction, target: Target, p: float, extra: float, rtol: float):
    """Asymptotics of ``g = M_p^p (1 - r)^extra`` as the level grows, or ``None``.

    Returns ``(limit, slope, deviation bound)``: ``g`` approaches
    ``limit + slope * lam`` and the bound is a function of the level returning
    ``sup |g - limit - slope * lam|`` beyond it.
    """
    if isinstance(f, Monomial):
        lim = float(_monomial_mp_pow(f, target, p, np.asarray(np.inf)))
        k = f.n - 1 if target is Target.DERIV else f.n
        if extra > 0:
            return 0.0, 0.0, lambda a: lim * math.exp(-extra * a)
        q = max(k * p, 1.0)
        # 1 - (1 - delta)^{kp} <= max(kp, 1) delta
        return lim, 0.0, (lambda a: lim * q * math.exp(-a)) if k > 0 else (lambda a: 0.0)
    if isinstance(f, HLExtremal):
        return _extremal_tail(f, target, p, extra)
    deriv = target is Target.DERIV
    top = f.sup_abs(1.0, derivative=deriv)
    if not math.isfinite(top):
        return None
    if extra > 0:
        return 0.0, 0.0, lambda a: top**p * math.exp(-extra * a)
    slope_sup = f.sup_abs(1.0, derivative=True) if not deriv else math.inf
    if not math.isfinite(slope_sup):
        return 0.0, 0.0, lambda a: top**p
    # |f(r e^{it}) - f(e^{it})| <= (1 - r) sup |f'|, and the same for Re f
    lim = _circle_pow(f, target, p, 0.0, min(rtol * 1e-2, 1e-12))
    if p >= 1.0:
        dev = lambda a: p * top ** (p - 1.0) * slope_sup * math.exp(-a)
    else:
        dev = lambda a: (slope_sup * math.exp(-a)) ** p
    return lim, 0.0, dev


def _extremal_tail(f: HLExtremal, target: Target, p: float, extra: float):
    if target is Target.RE and f.k == 1 and p == 1.0 and extra == 0:
        # Re 1/(1 - z) is a positive harmonic function with value 1 at 0
        return 1.0, 0.0, lambda a: 0.0
    deriv = target is Target.DERIV
    s = (f.k + 1 if deriv else f.k) * p
    coef = float(f.k) ** p if deriv else 1.0
    if s < 1.0:
        if extra > 0 or target is Target.RE:
            # M_p^p increases to the boundary value (1/2pi) int |1 - e^{it}|^{-s}
            top = coef * math.exp(gammaln(1.0 - s) - 2.0 * gammaln(1.0 - 0.5 * s))
            return 0.0, 0.0, lambda a: top * math.exp(-extra * a)
        return None
    if s == 1.0 and extra == 0 and target is not Target.RE:
        # (2/pi) K(r) = (2/pi) log(4 / sqrt(1 - r^2)) + O((1 - r) log) ; the bound
        # (1 + lam) e^{-lam} has a factor of about 3 to spare
        lim = coef * 3.0 * math.log(2.0) / math.pi
        return lim, coef / math.pi, lambda a: coef * (1.0 + a) * math.exp(-a)
    if s > 1.0 and extra >= s - 1.0:
        # M_p^p = 2F1(s/2, s/2; 1; r^2) <= C_s (1 - r^2)^{1 - s}, C_s = Gamma(s-1)/Gamma(s/2)^2
        c_s = coef * math.exp(gammaln(s - 1.0) - 2.0 * gammaln(0.5 * s))
        if extra > s - 1.0:
            return 0.0, 0.0, lambda a: c_s * math.exp(-(extra - s + 1.0) * a)
        if s == 2.0 and target is not Target.RE:
            # M_2^2-type mean is exactly coef / (1 - r^2), so g = coef / (2 - delta)
            return 0.5 * coef, 0.0, lambda a: 0.5 * coef * math.exp(-a)
        return 0.0, 0.0, lambda a: c_s
    return None


def _weighted_pow(
    f: AnalyticTestFunction,
    target: Target,
    p: float,
    w: RadialWeight,
    m: MeasureKind,
    extra_exponent: float = 0.0,
    rtol: float = DEFAULT_RTOL,
):
    """``int M_p^p(r) (1 - r)^extra d mu`` or a ``Divergent`` marker."""

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        val = np.asarray(mp_pow(f, target, p, lam, rtol=min(rtol * 1e-2, 1e-12)), dtype=float)
        return val * np.exp(-extra_exponent * lam) if extra_exponent else val

    data = _tail_data(f, target, p, extra_exponent, rtol) if extra_exponent >= 0 else None
    if data is not None:
        lim, slope, dev = data
        if slope and isinstance(w.log_moment(), Divergent):
            # a mean growing like the level against a weight with no log moment
            return _doubling_rule(g, w, m, rtol)
        return radial_integral(g, w, m, g_bound=dev, g_limit=lim, g_slope=slope, rtol=rtol)
    return _doubling_rule(g, w, m, rtol)


def _doubling_rule(g, w: RadialWeight, m: MeasureKind, rtol: float):
    partials = []
    acc = []
    prev = 0.0
    for lam_max in DOUBLING_LEVELS:
        acc.append(_window(g, w, m, prev, lam_max))
        partials.append((lam_max, math.fsum(acc)))
        prev = lam_max
    incs = np.diff([0.0] + [v for _, v in partials])
    if incs[-1] > DIVERGENCE_RATIO * incs[-2] and incs[-1] > 1e-12 * partials[-1][1]:
        return Divergent(tuple(partials))
    # heuristic continuation: windows until the last one is negligible
    a, width = prev, prev
    while a < MAX_LEVEL:
        acc.append(_window(g, w, m, a, a + width))
        a, width = a + width, 2.0 * width
        if acc[-1] <= rtol * 1e-2 * math.fsum(acc):
            return math.fsum(acc)
    raise TailNotCertified("norm integral did not settle below the level cap")


def _window(g, w: RadialWeight, m: MeasureKind, a: float, b: float) -> float:
    # a truncated radial integral restricted to [a, b]
    if m is MeasureKind.OMEGA_R_DR:
        dens = lambda lam: w.level_density(lam) * (-np.expm1(-lam))
        pieces = w.support(a, b)
    elif m is MeasureKind.OMEGA_DR:
        dens = w.level_density
        pieces = w.support(a, b)
    else:
        dens = w._tail_hat
        pieces = split_at(a, b, w.breakpoints(a, b))
    return integrate(lambda lam: g(lam) * dens(lam), pieces, rtol=1e-12)


def _norm(val, p: float):
    if isinstance(val, Divergent):
        return val
    return max(2.0 * val, 0.0) ** (1.0 / p)


def bergman_norm(f: AnalyticTestFunction, w: RadialWeight, p: float, rtol: float = DEFAULT_RTOL):
    """``||f||_{A^p_w}`` via ``||f||^p = 2 int M_p^p(r, f) w(r) r dr``; ``Divergent`` if infinite."""
    _check_p(p)
    return _norm(_weighted_pow(f, Target.FULL, p, w, MeasureKind.OMEGA_R_DR, rtol=rtol), p)


def repart_norm(f: AnalyticTestFunction, w: RadialWeight, p: float, rtol: float = DEFAULT_RTOL):
    """``||Re f||_{L^p_w}``."""
    _check_p(p)
    return _norm(_weighted_pow(f, Target.RE, p, w, MeasureKind.OMEGA_R_DR, rtol=rtol), p)


def norm_partials(f: AnalyticTestFunction, w: RadialWeight, p: float, target="f", levels=DOUBLING_LEVELS):
    """``2 int_0^{r(L)} M_p^p w r dr`` at each truncation level ``L``."""
    target = _as_target(target)
    g = lambda lam: np.asarray(mp_pow(f, target, p, lam, rtol=1e-12), dtype=float)
    acc, out, prev = [], [], 0.0
    for lam_max in levels:
        acc.append(_window(g, w, MeasureKind.OMEGA_R_DR, prev, float(lam_max)))
        out.append((float(lam_max), 2.0 * math.fsum(acc)))
        prev = float(lam_max)
    return out


def lp_functional(
    f: AnalyticTestFunction,
    w: RadialWeight,
    p: float,
    derivative_weight_exponent: float | None = None,
    rtol: float = DEFAULT_RTOL,
):
    """``|f(0)|^p + 2 int M_p^p(r, f') (1 - r)^e w(r) r dr`` (``e`` defaults to ``p``)."""
    _check_p(p)
    e = float(p if derivative_weight_exponent is None else derivative_weight_exponent)
    head = abs(f.at_zero()) ** p
    body = _weighted_pow(f, Target.DERIV, p, w, MeasureKind.OMEGA_R_DR, extra_exponent=e, rtol=rtol)
    if isinstance(body, Divergent):
        return body
    return head + 2.0 * body


def _check_p(p):
    if not (p > 0 and math.isfinite(p)):
        raise ParameterError("p must be a positive finite number")


# ---------------------------------------------------------------------------
# Stolz-type regions and the maximal function


def _wrap(a):
    """Wrap angles to ``(-pi, pi]``."""
    out = np.mod(np.asarray(a, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    return np.where(out == -math.pi, math.pi, out)


def stolz_contains(zeta: tuple[float, float], z: complex) -> bool:
    """Whether ``z`` lies in the aperture region of ``zeta = (r, theta)``.

    ``z = 0`` is never contained (its argument is undefined).
    """
    r, theta = zeta
    if not 0.0 < r <= 1.0:
        raise ParameterError("zeta must satisfy 0 < |zeta| <= 1")
    z = complex(z)
    if z == 0:
        return False
    diff = float(_wrap(theta - math.atan2(z.imag, z.real)))
    return abs(diff) < 0.5 * (1.0 - abs(z) / r)


@dataclass(frozen=True)
class Sampling:
    """Resolution of the maximal-function estimate.

    ``radial_edges`` split the level axis; each piece carries ``radial_order``
    Gauss nodes (64 radii by default), and ``angles`` equally spaced points
    sample each circle.  Each region is sampled on ``region_radii`` radii
    ``|zeta| (1 - 2^{-10 i / region_radii})``, graded toward ``|zeta|``, and on
    a power-of-two number of equally spaced interior angles per radius, at
    least ``region_angles`` and enough to resolve the test function across the
    aperture.  ``refined()`` doubles both lattice sizes; the lattices are
    nested, so the estimate can only grow.
    """

    radial_edges: tuple[float, ...] = (0.0, 5.0, 10.0, 20.0, 40.0)
    radial_order: int = 16
    angles: int = 128
    region_radii: int = 32
    region_angles: int = 8

    def refined(self) -> "Sampling":
        return replace(self, region_radii=2 * self.region_radii, region_angles=2 * self.region_angles)


def _maximal_values(f: AnalyticTestFunction, lam: float, s: Sampling) -> np.ndarray:
    """Lower estimates of ``N(Re f)`` on the circle of level ``lam`` (one per angle)."""
    big_r = s.region_radii
    theta0 = 2.0 * math.pi * np.arange(s.angles) / s.angles
    i = np.arange(1, big_r + 1, dtype=float)
    # lattice radius |zeta| t with 1 - t = 2^{-10 i / R}
    one_minus_t = np.exp2(-10.0 * i / big_r)
    aperture = 0.5 * one_minus_t
    # gap 1 - |zeta| t, without cancellation
    gap = one_minus_t + math.exp(-lam) * (1.0 - one_minus_t)
    res = f.resolution()
    best = np.zeros(s.angles)
    for row in range(big_r):
        need = max(s.region_angles, math.ceil(aperture[row] * res * s.region_angles / 2.0))
        big_a = 1 << max(1, math.ceil(math.log2(need)))
        frac = 2.0 * np.arange(1, big_a) / big_a - 1.0
        th = theta0[:, None] + aperture[row] * frac[None, :]
        vals = np.abs(np.real(f.polar(gap[row], th)))
        best = np.maximum(best, vals.max(axis=1))
    return best


def maximal_norm(
    f: AnalyticTestFunction, w: RadialWeight, p: float, sampling: Sampling | None = None
) -> float:
    """Lower estimate of ``||N(Re f)||_{L^p_w}`` from a deterministic lattice."""
    _check_p(p)
    s = sampling or Sampling()
    lo, hi = s.radial_edges[0], s.radial_edges[-1]
    edges = np.union1d(np.asarray(s.radial_edges, dtype=float), w.breakpoints(lo, hi))
    x, wts = gauss_legendre(s.radial_order)
    total = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        nodes = 0.5 * (a + b) + half * x
        for lam, wt in zip(nodes, wts):
            dens = float(w.level_density(np.asarray(lam))) * -math.expm1(-lam)
            if dens == 0.0:
                continue
            nvals = _maximal_values(f, float(lam), s)
            total.append(half * wt * dens * float(np.mean(nvals**p)))
    val = 2.0 * math.fsum(total)
    if not val > 0 or not math.isfinite(val):
        raise NumericalFailure("maximal-function estimate is not positive and finite")
    return val ** (1.0 / p)


# ---------------------------------------------------------------------------
# comparison report


_REPORT_KEYS = ("norm_f", "norm_re", "sup_tilde", "sup_omega", "lp")


@dataclass(frozen=True)
class ConjugateReport:
    """Norms and running-supremum integrals of one ``(f, w, p)`` triple.

    ``sup_tilde`` and ``sup_omega`` are ``int sup_{s<r} M_p^p(s, Re f)`` against
    ``w_tilde(r) dr`` and ``w(r) dr`` (no ``r`` factor).  Entries that are
    infinite are ``Divergent`` markers; ratios involving them are ``None``.
    """

    values: dict
    ratios: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def _envelope_integrals(f, w: RadialWeight, p: float, lam_max: float = 60.0, order: int = 16):
    """``int env w_tilde dr`` and ``int env w dr`` on a fixed fine grid plus a tail."""
    edges = np.union1d(np.arange(0.0, lam_max + 1.0), w.breakpoints(0.0, lam_max))
    x, wts = gauss_legendre(order)
    a, b = edges[:-1], edges[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    weights = (half[:, None] * wts[None, :]).ravel()
    nodes = nodes.ravel()
    order_idx = np.argsort(nodes, kind="stable")
    nodes, weights = nodes[order_idx], weights[order_idx]
    env = np.maximum.accumulate(np.asarray(mp_pow(f, Target.RE, p, nodes, rtol=1e-12), dtype=float))
    top = float(env[-1])
    omega = math.fsum(weights * env * w.level_density(nodes)) + top * float(w.tail_hat(lam_max))
    try:
        tilde_w = w.tail_hat(nodes)
        tilde = math.fsum(weights * env * tilde_w) + top * float(w.tilde_hat(lam_max))
    except DivergentWeight:
        tilde = Divergent(((lam_max, math.fsum(weights * env * w.tail_hat(nodes))),))
    return tilde, omega


def conjugate_report(f: AnalyticTestFunction, w: RadialWeight, p: float) -> ConjugateReport:
    _check_p(p)
    vals = {}
    vals["norm_f"] = bergman_norm(f, w, p)
    vals["norm_re"] = repart_norm(f, w, p)
    vals["sup_tilde"], vals["sup_omega"] = _envelope_integrals(f, w, p)
    vals["lp"] = lp_functional(f, w, p)
    ratios = {}
    for a, b in itertools.combinations(_REPORT_KEYS, 2):
        va, vb = vals[a], vals[b]
        if isinstance(va, Divergent) or isinstance(vb, Divergent) or vb == 0:
            ratios[f"{a}/{b}"] = None
        else:
            ratios[f"{a}/{b}"] = va / vb
    return ConjugateReport(vals, ratios)
