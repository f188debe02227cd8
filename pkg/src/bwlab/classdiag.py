"""Numerical evidence for membership of radial weights in the doubling classes.

All profiles are ratios of tails evaluated on level grids.  Verdicts are
evidence only: the classes are defined asymptotically, so every verdict is
tied to explicit grids and thresholds.

* ``D-hat``: ``w_hat(lam) <= C w_hat(lam + ln K)``, i.e. a bounded ratio.
* ``D-check``: ``w_hat(lam) >= C w_hat(lam + ln K)`` with ``C > 1``, i.e. a
  ratio staying above 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import construct
from .errors import ParameterError
from .profiles import ProfileKind, ProfileSummary, RatioProfile
from .weights import BlockStep, LogStep, RadialWeight, Shifted, moment, shift

__all__ = [
    "ClassVerdict",
    "ProfileKind",
    "ProfileSummary",
    "RatioProfile",
    "Verdict",
    "dcheck_profile",
    "dcheck_verdict",
    "default_grid",
    "dhat_profile",
    "dhat_verdict",
    "moment_condition_profile",
    "moment_condition_verdict",
    "regularity_profile",
    "regularity_verdict",
    "tail_comparison",
    "tail_comparison_verdict",
    "moment_xs",
    "witness_levels",
]

# sup over [0, BASE_TOP] must move by less than this when extending to EXTENDED_TOP
STABILITY = 0.01
BASE_TOP = 60.0
EXTENDED_TOP = 120.0
# an escaping witness needs this many consecutive steps, each by this factor
ESCAPE_STEPS = 3
ESCAPE_FACTOR = 1.25
# D-check needs the ratio to stay above 1 + DCHECK_MARGIN
DCHECK_MARGIN = 0.01
DCHECK_LADDER = (2.0, 4.0, 16.0, 256.0)


class Verdict(enum.Enum):
    EVIDENCE_IN = "EvidenceIn"
    EVIDENCE_OUT = "EvidenceOut"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ClassVerdict:
    verdict: Verdict
    witness: tuple[tuple[float, float], ...] | None = None
    note: str = ""

    def __post_init__(self):
        if self.verdict is Verdict.EVIDENCE_OUT and (self.witness is None or len(self.witness) < ESCAPE_STEPS):
            raise ParameterError("an EvidenceOut verdict needs a witness across at least 3 scales")


# ---------------------------------------------------------------------------
# grids


def _injected_levels(w: RadialWeight, top: float) -> np.ndarray:
    if isinstance(w, Shifted):
        return _injected_levels(w.base, top)
    if isinstance(w, LogStep):
        n = np.arange(2.0, math.floor(top) + 1.0)
        return np.concatenate([n, np.asarray(w.phi.block_start(n))])
    if isinstance(w, BlockStep):
        x = np.arange(1.0, 2.0 * top + 2.0)
        lv = np.asarray(construct.t7_radius(x, w.psi))
        return lv[lv <= top]
    return np.zeros(0)


def default_grid(w: RadialWeight | None = None, count: int = 256, lo: float = 0.01, hi: float = BASE_TOP) -> np.ndarray:
    """Log-spaced levels on ``[lo, hi]`` plus the breakpoints of ``w``.

    ``count`` points cover ``[lo, BASE_TOP]``; beyond it the same density
    continues, so a grid with larger ``hi`` contains every point of a smaller one.
    """
    if not 0 < lo < hi:
        raise ParameterError("need 0 < lo < hi")
    if hi <= BASE_TOP:
        base = np.geomspace(lo, hi, count)
    else:
        extra = math.ceil(count * math.log(hi / BASE_TOP) / math.log(BASE_TOP / lo))
        base = np.union1d(np.geomspace(lo, BASE_TOP, count), np.geomspace(BASE_TOP, hi, extra + 1))
    if w is None:
        return base
    extra_lv = _injected_levels(w, hi)
    return np.unique(np.concatenate([base, extra_lv[(extra_lv >= lo) & (extra_lv <= hi)]]))


def witness_levels(w: RadialWeight) -> np.ndarray:
    """Levels where escape from the bounded regime is expected to show."""
    if isinstance(w, Shifted):
        # the factor e^{-beta lam} must stay well inside double precision
        lv = witness_levels(w.base)
        return lv[lv * w.beta < 600.0]
    if isinstance(w, LogStep):
        n = w.phi.spike_levels(construct.WITNESS_J_MAX)
        return np.concatenate([n, n + 1.0])
    if isinstance(w, BlockStep):
        # block ends r_{2n+2} up to the precision guard of the block tables
        x = 2.0 * np.arange(1.0, 200.0) + 2.0
        lv = np.asarray(construct.t7_radius(x, w.psi))
        return lv[lv < 600.0]
    return np.zeros(0)


def _grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0 or np.any(g < 0) or np.any(~np.isfinite(g)):
        raise ParameterError("grid must be a nonempty 1-D array of finite levels >= 0")
    if g.size > 1 and not np.all(np.diff(g) > 0):
        raise ParameterError("grid must be strictly ascending")
    return g


# ---------------------------------------------------------------------------
# profiles


def _doubling_ratio(w: RadialWeight, k: float, g: np.ndarray) -> np.ndarray:
    if not k > 1:
        raise ParameterError("K must be > 1")
    return np.asarray(w.tail_hat(g), dtype=float) / np.asarray(w.tail_hat(g + math.log(k)), dtype=float)


def dhat_profile(w: RadialWeight, K: float, grid) -> RatioProfile:
    """``w_hat(lam) / w_hat(lam + ln K)``."""
    g = _grid(grid)
    return RatioProfile(g, _doubling_ratio(w, K, g), ProfileKind.DHAT_RATIO, float(K))


def dcheck_profile(w: RadialWeight, K: float, grid) -> RatioProfile:
    """Same ratio as ``dhat_profile``; read as a lower bound."""
    g = _grid(grid)
    return RatioProfile(g, _doubling_ratio(w, K, g), ProfileKind.DCHECK_RATIO, float(K))


def moment_condition_profile(w: RadialWeight, beta: float, xs) -> RatioProfile:
    """``x^beta moment(shift(w, beta), x) / moment(w, x)``."""
    if not beta > 0:
        raise ParameterError("beta must be positive")
    x = np.asarray(xs, dtype=float)
    if x.ndim != 1 or np.any(x <= 0) or (x.size > 1 and not np.all(np.diff(x) > 0)):
        raise ParameterError("xs must be ascending positive reals")
    sw = shift(w, beta)
    vals = np.array([xi**beta * moment(sw, xi) / moment(w, xi) for xi in x])
    return RatioProfile(x, vals, ProfileKind.MOMENT_CONDITION, float(beta))


def tail_comparison(w: RadialWeight, grid) -> RatioProfile:
    """``w_hat / (tail of w_tilde)``; raises ``DivergentWeight`` if ``w_tilde`` is not integrable."""
    g = _grid(grid)
    vals = np.asarray(w.tail_hat(g), dtype=float) / np.asarray(w.tilde_hat(g), dtype=float)
    return RatioProfile(g, vals, ProfileKind.TAIL_COMPARISON)


def regularity_profile(w: RadialWeight, grid) -> RatioProfile:
    """``w(r) (1 - r) / w_hat(r)``."""
    g = _grid(grid)
    vals = np.asarray(w.level_density(g), dtype=float) / np.asarray(w.tail_hat(g), dtype=float)
    return RatioProfile(g, vals, ProfileKind.REGULARITY)


# ---------------------------------------------------------------------------
# verdict machinery


def _records(grid: np.ndarray, values: np.ndarray, grow: bool) -> list[tuple[float, float]]:
    """Record-breaking values of the running max (``grow``) or min, one per dyadic scale.

    Scales are dyadic in ``1 + lam = log(e / (1 - r))``.
    """
    out: list[tuple[float, float]] = []
    best = None
    scale_of = np.floor(np.log2(1.0 + grid))
    for s in np.unique(scale_of):
        sel = scale_of == s
        idx = int(np.argmax(values[sel]) if grow else np.argmin(values[sel]))
        lv, v = float(grid[sel][idx]), float(values[sel][idx])
        if best is None or (v > best if grow else v < best):
            best = v
            out.append((lv, v))
    return out


def _escape(records: list[tuple[float, float]], grow: bool) -> tuple[tuple[float, float], ...] | None:
    """The trailing run of records that escape by ``ESCAPE_FACTOR`` per step, if long enough."""
    run = [records[-1]] if records else []
    for prev in reversed(records[:-1]):
        cur = run[0][1]
        ok = cur >= ESCAPE_FACTOR * prev[1] if grow else cur <= prev[1] / ESCAPE_FACTOR
        if not ok:
            break
        run.insert(0, prev)
    if len(run) - 1 >= ESCAPE_STEPS:
        return tuple(run)
    return None


def _per_scale(grid: np.ndarray, values: np.ndarray, mask: np.ndarray):
    """First masked level of each dyadic scale, if at least ``ESCAPE_STEPS`` scales have one."""
    lv = grid[mask]
    _, first = np.unique(np.floor(np.log2(1.0 + lv)), return_index=True)
    if len(first) < ESCAPE_STEPS:
        return None
    vals = values[mask]
    return tuple((float(lv[i]), float(vals[i])) for i in first)


def _bounded_verdict(make, w: RadialWeight, what: str) -> ClassVerdict:
    base = make(default_grid(w, hi=BASE_TOP))
    ext_grid = np.union1d(default_grid(w, hi=EXTENDED_TOP), witness_levels(w))
    ext = make(ext_grid)
    wit = _escape(_records(ext.grid, ext.values, grow=True), grow=True)
    if wit is not None:
        return ClassVerdict(Verdict.EVIDENCE_OUT, wit, f"{what} grows by >= 25% per scale")
    s0, s1 = base.summary.sup, ext.summary.sup
    if abs(s1 - s0) < STABILITY * s0:
        return ClassVerdict(Verdict.EVIDENCE_IN, None, f"{what} sup {s1:.6g} stable under grid extension")
    return ClassVerdict(Verdict.INCONCLUSIVE, None, f"{what} sup moved from {s0:.6g} to {s1:.6g}")


def dhat_verdict(w: RadialWeight, K: float = math.e) -> ClassVerdict:
    return _bounded_verdict(lambda g: dhat_profile(w, K, g), w, f"D-hat ratio (K = {K:g})")


def tail_comparison_verdict(w: RadialWeight) -> ClassVerdict:
    return _bounded_verdict(lambda g: tail_comparison(w, g), w, "tail comparison")


def dcheck_verdict(w: RadialWeight, ladder=DCHECK_LADDER) -> ClassVerdict:
    """EvidenceIn if some ``K`` keeps the ratio above ``1 + margin``; Out if every ``K`` decays to 1."""
    grid = np.union1d(default_grid(w, hi=EXTENDED_TOP), witness_levels(w))
    witnesses = []
    for k in ladder:
        prof = dcheck_profile(w, k, grid)
        excess = prof.values - 1.0
        tail = excess[prof.grid >= prof.grid[-1] / 2.0]
        # membership is asymptotic: the decay test ignores levels below 1
        far = prof.grid >= 1.0
        wit = _escape(_records(prof.grid[far], excess[far], grow=False), grow=False)
        if wit is not None:
            wit = tuple((lv, 1.0 + v) for lv, v in wit)
        elif float(np.min(tail)) > DCHECK_MARGIN:
            return ClassVerdict(Verdict.EVIDENCE_IN, None, f"ratio >= {1 + float(np.min(tail)):.6g} with K = {k:g}")
        else:
            # the ratio comes within the margin of 1: one such level per scale
            wit = _per_scale(prof.grid, prof.values, excess <= DCHECK_MARGIN)
        witnesses.append(wit)
    if all(x is not None for x in witnesses):
        return ClassVerdict(
            Verdict.EVIDENCE_OUT,
            witnesses[-1],
            f"ratio approaches 1 for every K in {tuple(ladder)}; witness for K = {ladder[-1]:g}",
        )
    return ClassVerdict(Verdict.INCONCLUSIVE, None, "no K in the ladder separates the ratio from 1")


def regularity_verdict(w: RadialWeight) -> ClassVerdict:
    base = regularity_profile(w, default_grid(w, hi=BASE_TOP))
    ext = regularity_profile(w, default_grid(w, hi=EXTENDED_TOP))
    wit = _per_scale(ext.grid, ext.values, ext.values == 0.0)
    if wit is not None:
        return ClassVerdict(Verdict.EVIDENCE_OUT, wit, "density vanishes at levels of every scale")
    wit = _escape(_records(ext.grid, ext.values, grow=False), grow=False)
    if wit is not None:
        return ClassVerdict(Verdict.EVIDENCE_OUT, wit, "ratio decays by >= 25% per scale")
    lo0, lo1 = base.summary.inf, ext.summary.inf
    hi0, hi1 = base.summary.sup, ext.summary.sup
    if lo1 > 0 and abs(lo1 - lo0) < STABILITY * lo0 and abs(hi1 - hi0) < STABILITY * hi0:
        return ClassVerdict(Verdict.EVIDENCE_IN, None, f"ratio within [{lo1:.6g}, {hi1:.6g}]")
    return ClassVerdict(Verdict.INCONCLUSIVE, None, f"band moved from [{lo0:.6g}, {hi0:.6g}] to [{lo1:.6g}, {hi1:.6g}]")


def moment_xs(w: RadialWeight, count: int = 40, top: float = 1e8) -> np.ndarray:
    """Log-spaced exponents, plus a cluster around each log-step spike.

    The ratio peaks near ``x = u e^{n+1}`` with ``u`` of order 2, where the
    spike block ``[s_n, t_{n+1}]`` sits at ``x (1 - r)`` of order one.  Only
    the spikes with ``e^{n+1}`` inside double range are reachable.
    """
    xs = np.geomspace(1.0, top, count)
    if isinstance(w, LogStep):
        u = np.geomspace(0.5, 8.0, 9)
        for n in w.phi.spike_levels(construct.WITNESS_J_MAX):
            if n + 1.0 + math.log(u[-1]) < 700.0:
                xs = np.union1d(xs, u * math.exp(n + 1.0))
    return xs


def moment_condition_verdict(w: RadialWeight, beta: float = 1.0) -> ClassVerdict:
    prof = moment_condition_profile(w, beta, moment_xs(w))
    wit = _escape(_records(np.log(prof.grid) + 1.0, prof.values, grow=True), grow=True)
    if wit is not None:
        wit = tuple((math.exp(lv - 1.0), v) for lv, v in wit)
        return ClassVerdict(Verdict.EVIDENCE_OUT, wit, "moment ratio grows by >= 25% per scale")
    half = prof.values[prof.grid >= math.sqrt(prof.grid[-1])]
    if float(np.max(half)) <= (1.0 + STABILITY) * float(np.max(prof.values[prof.grid < math.sqrt(prof.grid[-1])])):
        return ClassVerdict(Verdict.EVIDENCE_IN, None, f"moment ratio bounded by {prof.summary.sup:.6g}")
    return ClassVerdict(Verdict.INCONCLUSIVE, None, f"moment ratio sup {prof.summary.sup:.6g} still rising")
