"""Counterexample weights: the log-step weight, the block weight and v_alpha.

The log-step weight lives on blocks ``[s_n, t_{n+1}]`` with ``t_n = 1 - e^{-n}``
and density ``1/(1 - r)``; in level coordinates block ``n`` is
``[n + 1 - phi(n), n + 1]`` with unit density.  Its tails are assembled from
the series ``S(m) = sum_{k>=m} phi(k)`` and relatives, which are evaluated
through the Hurwitz zeta function plus the finitely many spike corrections.

The block weight is the indicator of ``[r_{2n+1}, r_{2n+2}]``, ``n >= 1``,
with ``r_x = 1 - 2^{-x psi(x)}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.special import zeta

from .errors import ParameterError
from .levels import LevelLike, as_lam
from .profiles import ProfileKind, RatioProfile
from .quadrature import integrate

LN2 = math.log(2.0)

# spikes n = 2^(2^j); j = 8 is the last one whose square is representable
SPIKE_J_MAX = 8
WITNESS_J_MAX = 4


# ---------------------------------------------------------------------------
# phi sequence


@dataclass(frozen=True)
class PhiSequence:
    """``phi(n) = n^-3`` plus ``log2(log2 n)/n^2`` at ``n = 2^(2^j)``."""

    spike_j_max: int = SPIKE_J_MAX

    @cached_property
    def _spikes(self) -> tuple[np.ndarray, np.ndarray]:
        js = np.arange(1, self.spike_j_max + 1)
        ns = np.array([2.0 ** (2**j) for j in js])
        heights = np.array([j / 2.0 ** (2 ** (j + 1)) for j in js])
        return ns, heights

    @cached_property
    def _spike_tails(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        ns, hs = self._spikes
        # suffix sums over spikes with index >= i, padded with a trailing 0
        def suffix(v):
            return np.concatenate([np.cumsum(v[::-1])[::-1], [0.0]])

        return ns, suffix(hs), suffix(ns * hs), suffix(2.0 * hs / ns**3 + hs**2)

    def spike_levels(self, j_max: int = WITNESS_J_MAX) -> np.ndarray:
        return np.array([2.0 ** (2**j) for j in range(1, j_max + 1)])

    def __call__(self, n):
        n_arr = np.asarray(n, dtype=float)
        if np.any(n_arr < 2):
            raise ParameterError("phi is defined for n >= 2")
        ns, hs = self._spikes
        out = n_arr**-3.0
        for nj, hj in zip(ns, hs):
            out = np.where(n_arr == nj, out + hj, out)
        return out if out.ndim else float(out)

    def _spike_index(self, m):
        ns = self._spike_tails[0]
        return np.searchsorted(ns, np.asarray(m, dtype=float), side="left")

    def tail(self, m):
        """``S(m) = sum_{k >= m} phi(k)``."""
        m_arr = np.asarray(m, dtype=float)
        idx = self._spike_index(m_arr)
        out = zeta(3.0, m_arr) + self._spike_tails[1][idx]
        return out if out.ndim else float(out)

    def first_moment_tail(self, m):
        """``sum_{k >= m} k phi(k)``."""
        m_arr = np.asarray(m, dtype=float)
        idx = self._spike_index(m_arr)
        out = zeta(2.0, m_arr) + self._spike_tails[2][idx]
        return out if out.ndim else float(out)

    def square_tail(self, m):
        """``sum_{k >= m} phi(k)^2``."""
        m_arr = np.asarray(m, dtype=float)
        idx = self._spike_index(m_arr)
        out = zeta(6.0, m_arr) + self._spike_tails[3][idx]
        return out if out.ndim else float(out)

    def double_tail(self, m):
        """``sum_{n >= m} S(n) = sum_{k >= m} (k - m + 1) phi(k)``."""
        m_arr = np.asarray(m, dtype=float)
        out = self.first_moment_tail(m_arr) - (m_arr - 1.0) * self.tail(m_arr)
        return out

    def block_start(self, n):
        """Level of ``s_n``: ``n + 1 - phi(n)``."""
        return np.asarray(n, dtype=float) + 1.0 - self(n)


DEFAULT_PHI = PhiSequence()


# ---------------------------------------------------------------------------
# log-step weight


def t3_breakpoints(n_max: int, phi: PhiSequence = DEFAULT_PHI) -> list[tuple[int, float, float]]:
    """Rows ``(n, level(t_n), level(s_n))`` for ``2 <= n <= n_max``."""
    return [(n, float(n), float(phi.block_start(n))) for n in range(2, n_max + 1)]


def t3_tail(at, phi: PhiSequence = DEFAULT_PHI):
    """Tail integral of the log-step weight at level(s) ``at``."""
    lam = np.asarray(at.lam if hasattr(at, "lam") else at, dtype=float)
    n = np.maximum(np.floor(lam), 2.0)
    a = phi.block_start(n)
    s_n = phi.tail(n)
    s_next = phi.tail(n + 1.0)
    out = np.where(lam <= a, s_n, s_next + (n + 1.0 - lam))
    out = np.where(lam < 2.0, phi.tail(2.0), out)
    return out if out.ndim else float(out)


def _tilde_at_block_start(k, phi: PhiSequence):
    """Tail of the associated weight at ``s_k``.

    ``sum_{n>=k} (phi(n) + 1 - phi(n+1)) S(n+1) + 1/2 sum_{n>=k} phi(n)^2``,
    with the three series resummed into the closed forms of ``PhiSequence``.
    """
    k = np.asarray(k, dtype=float)
    ph = phi(k)
    s_k = phi.tail(k)
    s_k1 = phi.tail(k + 1.0)
    return phi.double_tail(k + 1.0) + 0.5 * (ph * (s_k + s_k1) - phi.square_tail(k + 1.0))


def t3_tilde_tail(at, phi: PhiSequence = DEFAULT_PHI):
    """Tail of ``omega_tilde = omega_hat/(1-r)`` for the log-step weight."""
    lam = np.asarray(at.lam if hasattr(at, "lam") else at, dtype=float)
    k = np.maximum(np.floor(lam), 2.0)
    a = phi.block_start(k)
    s_k = phi.tail(k)
    s_k1 = phi.tail(k + 1.0)
    first = (a - np.maximum(lam, 2.0)) * s_k + _tilde_at_block_start(k, phi)
    d = k + 1.0 - lam
    second = (
        d * s_k1
        + 0.5 * d * d
        + (1.0 - phi(k + 1.0)) * s_k1
        + _tilde_at_block_start(k + 1.0, phi)
    )
    out = np.where(lam <= a, first, second)
    out = np.where(lam < 2.0, (2.0 - lam) * phi.tail(2.0) + first, out)
    return out if out.ndim else float(out)


def t3_witness(j: int, phi: PhiSequence = DEFAULT_PHI) -> tuple[int, float]:
    """``(n, omega_hat(t_n)/omega_hat(t_{n+1}))`` at ``n = 2^(2^j)``."""
    if not 1 <= j <= WITNESS_J_MAX:
        raise ParameterError(f"witness scale j must lie in 1..{WITNESS_J_MAX}, got {j}")
    n = 2 ** (2**j)
    return n, 1.0 + phi(n) / phi.tail(n + 1)


def t3_spike_orientations(j_max: int = WITNESS_J_MAX, phi: PhiSequence = DEFAULT_PHI):
    """Both orientations of the spike quotient, ``S(n+1)/phi(n)`` and its inverse."""
    rows = []
    for j in range(1, j_max + 1):
        n = 2 ** (2**j)
        ph = phi(n)
        rest = phi.tail(n + 1)
        rows.append({"j": j, "n": n, "tail_over_phi": rest / ph, "phi_over_tail": ph / rest})
    return rows


@dataclass(frozen=True)
class RequirementsReport:
    kmax: int
    c_tail: float  # sup_k S(k) / sum_{n>=k} S(n+1)
    c_phi: float  # sup_k phi(k) / sum_{n>=k+1} S(n+1)
    argmax_tail: int
    argmax_phi: int
    max_phi: float
    ratios_tail: np.ndarray = field(repr=False)
    ratios_phi: np.ndarray = field(repr=False)


def t3_requirements(kmax: int, phi: PhiSequence = DEFAULT_PHI) -> RequirementsReport:
    if not 4 <= kmax <= 2**16:
        raise ParameterError("kmax must lie in [4, 65536]")
    k = np.arange(4, kmax + 1, dtype=float)
    lhs_tail = phi.tail(k)
    rhs_tail = phi.double_tail(k + 1.0)
    lhs_phi = phi(k)
    rhs_phi = phi.double_tail(k + 2.0)
    r_tail = lhs_tail / rhs_tail
    r_phi = lhs_phi / rhs_phi
    allk = np.arange(2, kmax + 1, dtype=float)
    return RequirementsReport(
        kmax=kmax,
        c_tail=float(r_tail.max()),
        c_phi=float(r_phi.max()),
        argmax_tail=int(k[np.argmax(r_tail)]),
        argmax_phi=int(k[np.argmax(r_phi)]),
        max_phi=float(np.max(phi(allk))),
        ratios_tail=r_tail,
        ratios_phi=r_phi,
    )


@dataclass(frozen=True)
class EnvelopeReport:
    """``w_hat(lam) lam^2`` against the band ``[c1, c2 log log lam]``."""

    grid: np.ndarray
    scaled: np.ndarray  # w_hat * lam^2
    c1: float  # min of scaled
    c2: float  # max of scaled / log log lam


def t3_envelope(grid, phi: PhiSequence = DEFAULT_PHI) -> EnvelopeReport:
    """Observed constants of the two-sided tail envelope; needs levels > e."""
    lam = np.asarray(grid, dtype=float)
    if np.any(lam <= math.e):
        raise ParameterError("envelope levels must exceed e so that log log lam > 0")
    scaled = np.asarray(t3_tail(lam, phi)) * lam**2
    upper = scaled / np.log(np.log(lam))
    return EnvelopeReport(lam, scaled, float(scaled.min()), float(upper.max()))


# ---------------------------------------------------------------------------
# block weight


def _log2_plus_one(x):
    return np.log2(np.asarray(x, dtype=float) + 1.0)


@dataclass(frozen=True)
class PsiFunction:
    """Increasing unbounded ``psi`` with ``psi(x+1) - psi(x) <= C/x``."""

    func: Callable = _log2_plus_one
    certificate: float = 2.0
    name: str = "log2"

    def __call__(self, x):
        out = self.func(np.asarray(x, dtype=float))
        return out if np.ndim(out) else float(out)

    def check(self, x_max: int = 10_000) -> bool:
        x = np.arange(1.0, x_max + 1.0)
        v = np.asarray(self(x))
        dv = np.diff(v)
        return bool(np.all(dv > 0) and np.all(dv <= self.certificate / x[:-1]))

    def shifted(self, c: float) -> "PsiFunction":
        base = self.func
        return PsiFunction(lambda x: base(x) + c, self.certificate, f"{self.name}+{c:g}")


DEFAULT_PSI = PsiFunction()

# e^{-lam} underflows past this level
LEVEL_CAP = 740.0


def t7_radius(x, psi: PsiFunction = DEFAULT_PSI):
    """Level of ``r_x = 1 - 2^{-x psi(x)}``, i.e. ``x psi(x) log 2``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 1.0):
        raise ParameterError("r_x is defined for x >= 1")
    out = x_arr * np.asarray(psi(x_arr)) * LN2
    return out if out.ndim else float(out)


def _expm1_minus_x(d):
    """``e^d - 1 - d`` without cancellation for small ``d``."""
    d = np.asarray(d, dtype=float)
    small = np.abs(d) < 0.5
    ds = np.where(small, d, 0.0)
    # Horner form of sum_{k>=2} d^k / k!, truncated where d^k / k! < 1e-20 d^2
    series = np.zeros_like(ds)
    for k in range(17, 1, -1):
        series = (series + 1.0 / math.factorial(k)) * (ds if k > 2 else ds * ds)
    return np.where(small, series, np.expm1(d) - d)


@dataclass(frozen=True)
class BlockTables:
    """Block levels and cumulative tails of the block weight."""

    starts: np.ndarray  # level(r_{2n+1}), n = 1, 2, ...
    ends: np.ndarray  # level(r_{2n+2})
    hat_tail: np.ndarray  # G_n = sum_{i >= n} mass_i, one extra trailing 0
    tilde_tail: np.ndarray  # integral of omega_hat over [end_{n-1}, inf), end_0 = 0


def block_tables(psi: PsiFunction = DEFAULT_PSI) -> BlockTables:
    return _block_tables(psi)


_TABLE_CACHE: dict[int, BlockTables] = {}


def _block_tables(psi: PsiFunction) -> BlockTables:
    key = id(psi)
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit
    starts, ends = [], []
    n = 1
    while True:
        a = t7_radius(2 * n + 1, psi)
        b = t7_radius(2 * n + 2, psi)
        if a > LEVEL_CAP:
            break
        starts.append(a)
        ends.append(b)
        n += 1
    starts = np.array(starts)
    ends = np.array(ends)
    d = ends - starts
    mass = -np.exp(-starts) * np.expm1(-d)
    # far-to-near cumulative sums, terms decay super-geometrically
    hat = np.concatenate([np.cumsum(mass[::-1])[::-1], [0.0]])
    prev_end = np.concatenate([[0.0], ends[:-1]])
    gap_part = (starts - prev_end) * hat[:-1]
    block_part = d * hat[1:] + np.exp(-ends) * _expm1_minus_x(d)
    pieces = gap_part + block_part
    tilde = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    tables = BlockTables(starts, ends, hat, tilde)
    _TABLE_CACHE[key] = tables
    # keep psi alive so its id stays unique while cached
    _PSI_KEEP.append(psi)
    return tables


_PSI_KEEP: list[PsiFunction] = []


def t7_tail(at, psi: PsiFunction = DEFAULT_PSI):
    """Tail integral of the block weight (exact piecewise form)."""
    lam = np.asarray(at.lam if hasattr(at, "lam") else at, dtype=float)
    tb = _block_tables(psi)
    # index of the first block whose end is > lam
    i = np.searchsorted(tb.ends, lam, side="right")
    i_c = np.minimum(i, len(tb.starts) - 1)
    in_block = (i < len(tb.starts)) & (lam >= tb.starts[i_c])
    on_gap = tb.hat_tail[i]
    # lam < end inside a block; the clamp only silences the discarded branch
    inside = tb.hat_tail[np.minimum(i + 1, len(tb.hat_tail) - 1)] - np.exp(-lam) * np.expm1(
        np.minimum(lam - tb.ends[i_c], 0.0)
    )
    out = np.where(in_block, inside, on_gap)
    return out if out.ndim else float(out)


def t7_tilde_tail(at, psi: PsiFunction = DEFAULT_PSI):
    """Tail of ``omega_tilde`` for the block weight, by exact piece integration."""
    lam = np.asarray(at.lam if hasattr(at, "lam") else at, dtype=float)
    tb = _block_tables(psi)
    i = np.searchsorted(tb.ends, lam, side="right")
    last = len(tb.starts) - 1
    i_c = np.minimum(i, last)
    a = tb.starts[i_c]
    b = tb.ends[i_c]
    g_next = tb.hat_tail[np.minimum(i + 1, len(tb.hat_tail) - 1)]
    g_here = tb.hat_tail[i]
    after = tb.tilde_tail[np.minimum(i + 1, len(tb.tilde_tail) - 1)]
    block_full = (b - a) * g_next + np.exp(-b) * _expm1_minus_x(b - a)
    # lam inside the gap before block i
    gap_val = (a - lam) * g_here + block_full + after
    # lam inside block i: int_lam^b (g_next + e^-mu - e^-b) dmu
    d = b - lam
    blk_val = d * g_next + np.exp(-b) * _expm1_minus_x(d) + after
    out = np.where(lam >= a, blk_val, gap_val)
    out = np.where(i > last, 0.0, out)
    return out if out.ndim else float(out)


def t7_tilde_witness(n: int, psi: PsiFunction = DEFAULT_PSI) -> float:
    """``tilde_hat(r_{2n+2}) / tilde_hat(2 r_{2n+2} - 1)``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if t7_radius(2 * n + 3, psi) > 700 * LN2:
        raise ParameterError(f"n = {n} is beyond double-precision range")
    lam = t7_radius(2 * n + 2, psi)
    return float(t7_tilde_tail(lam, psi) / t7_tilde_tail(lam - LN2, psi))


def t7_tilde_envelope(n: int, psi: PsiFunction = DEFAULT_PSI) -> float:
    """``tilde_hat(r_{2n+2}) / (psi(2n+3) 2^{-(2n+3) psi(2n+3)})``."""
    x = 2 * n + 3
    scale = psi(x) * math.exp(-t7_radius(x, psi))
    return float(t7_tilde_tail(t7_radius(2 * n + 2, psi), psi) / scale)


def t7_comparability(xs, psi: PsiFunction = DEFAULT_PSI) -> np.ndarray:
    """``(1 - r_x)/(1 - r_{x+1}) / 2^{psi(x+1)}`` computed in log form."""
    xs = np.asarray(xs, dtype=float)
    expo = (t7_radius(xs + 1.0, psi) - t7_radius(xs, psi)) / LN2 - np.asarray(psi(xs + 1.0))
    return np.exp2(expo)


def t7_phi_regularity(c1: float, grid, psi: PsiFunction = DEFAULT_PSI, *, rtol: float = 1e-11):
    """``int_r^1 phi / ((1 - r) phi(r))`` for ``phi(r) = 2^{-c1 psi(1/(1-r))}``.

    Returns a regularity profile on ``grid`` (ascending levels).
    """
    if c1 <= 0:
        raise ParameterError("C1 must be positive")
    out = []
    for lam in np.asarray(grid, dtype=float):
        ref = float(psi(math.exp(lam)))

        def integrand(mu, lam=lam, ref=ref):
            # phi(mu) e^{-mu} / (phi(lam) e^{-lam}); bounded by e^{-(mu-lam)}
            return np.exp2(-c1 * (np.asarray(psi(np.exp(mu))) - ref)) * np.exp(-(mu - lam))

        edges = lam + np.array([0.0, 0.5, 1, 2, 4, 8, 16, 32, 48])
        val = integrate(integrand, edges, rtol=rtol)
        out.append(val)  # remainder beyond lam + 48 is below e^-48
    return RatioProfile(np.asarray(grid, dtype=float), np.asarray(out), ProfileKind.REGULARITY, c1)


def t7_phi_weight(c1: float, psi: PsiFunction = DEFAULT_PSI):
    """Level density of ``phi(r) dr`` for ``phi(r) = 2^{-c1 psi(1/(1-r))}``."""

    def lam_density(lam):
        lam = np.asarray(lam, dtype=float)
        return np.exp2(-c1 * np.asarray(psi(np.exp(lam)))) * np.exp(-lam)

    return lam_density


def t7_phi_moment(c1: float, x: float, psi: PsiFunction = DEFAULT_PSI) -> float:
    """``int_0^1 r^x phi(r) dr`` for ``phi(r) = 2^{-c1 psi(1/(1-r))}``."""
    if c1 <= 0 or x < 0:
        raise ParameterError("need C1 > 0 and x >= 0")
    dens = t7_phi_weight(c1, psi)
    # r^x e^{-lam} phi <= e^{-lam}; the part beyond level 60 is below e^{-60}
    cut = 60.0 + math.log1p(x)
    edges = np.concatenate([[0.0], np.exp2(np.arange(-4.0, math.log2(cut))), [cut]])

    def integrand(lam):
        with np.errstate(divide="ignore"):
            rx = np.exp(x * np.log1p(-np.exp(-lam))) if x else np.ones_like(lam)
        return rx * dens(lam)

    return integrate(integrand, np.unique(edges), rtol=1e-12)


# ---------------------------------------------------------------------------
# rapidly increasing weight v_alpha


@dataclass(frozen=True)
class ValphaReport:
    alpha: float
    grid: np.ndarray
    hat: np.ndarray
    tilde_hat: np.ndarray
    ratio_times_log: np.ndarray  # hat/tilde_hat * log(e/(1-r)); constant alpha - 2


def valpha_report(alpha: float, grid) -> ValphaReport:
    if alpha <= 2:
        raise ParameterError("v_alpha has an integrable associated weight only for alpha > 2")
    lam = np.asarray(grid, dtype=float)
    big_l = 1.0 + lam
    hat = big_l ** (1.0 - alpha) / (alpha - 1.0)
    tilde = big_l ** (2.0 - alpha) / ((alpha - 1.0) * (alpha - 2.0))
    return ValphaReport(alpha, lam, hat, tilde, hat / tilde * big_l)
