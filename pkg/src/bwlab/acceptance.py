"""The eight acceptance checks, shared by the test-suite and ``bwlab suite acceptance``.

Every check returns a ``CriterionResult``; a check passes only if all of its
conditions hold and it finished within its runtime budget.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import betaln

from . import classdiag, construct, means
from .errors import Divergent, ParameterError, is_divergent
from .weights import (
    BlockStep,
    Lebesgue,
    LogStep,
    RapidV,
    Standard,
    hat_moment,
    shift,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    runtime: float
    budget: float
    checks: dict = field(default_factory=dict)  # condition name -> bool
    detail: dict = field(default_factory=dict)  # observed numbers

    @property
    def within_budget(self) -> bool:
        return self.runtime <= self.budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, v in self.checks.items() if not v]
        if not self.within_budget:
            failed.append(f"runtime {self.runtime:.1f}s > {self.budget:.0f}s")
        why = f" (failed: {', '.join(failed)})" if failed else ""
        return f"criterion {self.number} [{status}] {self.name}: {self.runtime:.2f}s / {self.budget:.0f}s{why}"


def _timed(number: int, name: str, budget: float):
    def wrap(fn: Callable[[], tuple[dict, dict]]):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            checks, detail = fn()
            dt = time.perf_counter() - t0
            ok = all(checks.values()) and dt <= budget
            return CriterionResult(number, name, ok, dt, budget, checks, detail)

        run.number = number
        run.criterion_name = name
        return run

    return wrap


def _c_p_oracle(p: float) -> float:
    # independent of the library: scipy quadrature of |cos|^p on a quarter period
    val, _ = quad(lambda u: math.cos(u) ** p, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-13, limit=200)
    return val / (math.pi / 2)


# ---------------------------------------------------------------------------


@_timed(1, "monomial norm identity", 10.0)
def criterion_1():
    worst_norm = 0.0
    worst_beta = 0.0
    for w in (Lebesgue(), Standard(1.0), Standard(2.5)):
        alpha = 0.0 if isinstance(w, Lebesgue) else w.alpha
        for p in (0.5, 1.0, 2.0):
            for n in range(65):
                x = n * p + 1.0
                mom = w.moment(x)
                got = means.bergman_norm(means.Monomial(n), w, p) ** p
                worst_norm = max(worst_norm, abs(got / (2.0 * mom) - 1.0))
                beta = math.exp(betaln(x + 1.0, alpha + 1.0))
                worst_beta = max(worst_beta, abs(mom / beta - 1.0))
    checks = {"norm^p = 2 w_{np+1}": worst_norm <= 1e-8, "moment = Beta": worst_beta <= 1e-8}
    return checks, {"max_rel_err_norm": worst_norm, "max_rel_err_beta": worst_beta}


@_timed(2, "Riesz-ratio exactness", 10.0)
def criterion_2():
    checks, detail = {}, {}
    w = Standard(0.0)
    for p in (0.5, 1.0, 2.0):
        ratios = np.array(
            [means.bergman_norm(means.Monomial(n), w, p) / means.repart_norm(means.Monomial(n), w, p) for n in range(1, 65)]
        )
        variation = float(ratios.max() / ratios.min() - 1.0)
        target = _c_p_oracle(p) ** (-1.0 / p)
        err = float(np.max(np.abs(ratios / target - 1.0)))
        checks[f"p={p:g} constant in n"] = variation <= 1e-6
        checks[f"p={p:g} equals c_p^(-1/p)"] = err <= 1e-6
        detail[f"p={p:g}"] = {"ratio": float(ratios[0]), "oracle": target, "variation": variation, "err": err}
    return checks, detail


@_timed(3, "conjugation-failure witness", 60.0)
def criterion_3():
    f = means.HLExtremal(1)
    w = RapidV(2.0)
    re_norm = means.repart_norm(f, w, 1.0)
    full = means.bergman_norm(f, w, 1.0)
    partials = means.norm_partials(f, w, 1.0)
    lv = np.log([a for a, _ in partials])
    vals = np.array([v for _, v in partials])
    b, a = np.polyfit(lv, vals, 1)
    resid = float(np.max(np.abs(vals - (a + b * lv))))
    spread = b * (lv[-1] - lv[0])
    rel_resid = resid / spread if spread > 0 else math.inf
    lam = np.linspace(0.05, 80.0, 41)
    re_means = np.array([means.mp_mean(f, "re", 1.0, x) for x in lam])
    band_lam = np.linspace(2.0, 14.0, 25)
    growth = np.array([means.mp_mean(f, "f", 1.0, x) for x in band_lam]) / (1.0 + band_lam)
    band = float(growth.max() / growth.min())
    checks = {
        "repart_norm finite": math.isfinite(re_norm) and re_norm > 0,
        "bergman_norm divergent": is_divergent(full),
        "log fit slope > 0": b > 0,
        "log fit residual < 20%": rel_resid < 0.2,
        "M_1(r, Re f) = 1": float(np.max(np.abs(re_means - 1.0))) <= 1e-8,
        "M_1(r, f)/log(e/(1-r)) band <= 2": band <= 2.0,
    }
    detail = {
        "repart_norm": re_norm,
        "partials": partials,
        "fit": {"a": float(a), "b": float(b), "relative_residual": rel_resid},
        "growth_band": band,
    }
    return checks, detail


@_timed(4, "log-step weight headline", 30.0)
def criterion_4():
    wits = [construct.t3_witness(j)[1] for j in (1, 2, 3)]
    w = LogStep()
    base = classdiag.tail_comparison(w, classdiag.default_grid(w, hi=60.0)).summary.sup
    ext = classdiag.tail_comparison(w, classdiag.default_grid(w, hi=120.0)).summary.sup
    req = construct.t3_requirements(4096)
    req_half = construct.t3_requirements(2048)
    env = construct.t3_envelope(np.linspace(math.exp(3.0), 60.0, 600))
    checks = {
        "(a) witness increasing": wits[0] < wits[1] < wits[2],
        "(a) witness > 5 by j = 3": wits[2] > 5.0,
        "(b) tail comparison sup finite": math.isfinite(base) and math.isfinite(ext),
        "(b) sup stable to 1%": abs(ext - base) < 0.01 * base,
        "(c) requirement constants finite": math.isfinite(req.c_tail) and math.isfinite(req.c_phi),
        "(c) requirement constants stable": req.c_tail == req_half.c_tail and req.c_phi == req_half.c_phi,
        "(c) phi < 1/2": req.max_phi < 0.5,
        "(d) envelope constants 0 < c1, c2": env.c1 > 0 and env.c2 > 0 and math.isfinite(env.c2),
    }
    detail = {
        "witness": wits,
        "tail_comparison_sup": (base, ext),
        "c_tail": req.c_tail,
        "c_phi": req.c_phi,
        "envelope": (env.c1, env.c2),
    }
    return checks, detail


C1_LADDER = tuple(range(1, 17))


@_timed(5, "block weight headline", 60.0)
def criterion_5():
    psi = construct.DEFAULT_PSI
    ratios = []
    n = 1
    while True:
        try:
            ratios.append(construct.t7_tilde_witness(n, psi))
        except ParameterError:
            break
        n += 1
    n0 = next((i + 1 for i, r in enumerate(ratios) if r < 0.1), None)
    comp = construct.t7_comparability(np.linspace(1.0, 50.0, 491), psi)
    reg = construct.t7_phi_regularity(1.0, np.linspace(1.0, 40.0, 79), psi)
    w = BlockStep(psi)
    chosen = None
    for c1 in C1_LADDER:
        ok = True
        for k in range(33):
            x = k + 1.0
            ph, om, leb = construct.t7_phi_moment(c1, x, psi), w.moment(x), 1.0 / (x + 1.0)
            if not (ph <= om <= leb):
                ok = False
                break
        if ok:
            chosen = c1
            break
    checks = {
        "tilde witness decreasing n = 1..4": all(a > b for a, b in zip(ratios[:4], ratios[1:4])),
        "tilde witness < 0.1 from n0 on": n0 is not None and all(r < 0.1 for r in ratios[n0 - 1 :]),
        "comparability band [1, 2^C]": bool(np.all(comp >= 1.0) and np.all(comp <= 2.0**psi.certificate)),
        "phi regularity band <= 1": reg.summary.sup <= 1.0,
        "phi regularity max/min <= 4": reg.summary.sup / reg.summary.inf <= 4.0,
        "moment domination for some C1": chosen is not None,
    }
    detail = {
        "tilde_witness": ratios[:6],
        "n0": n0,
        "comparability": (float(comp.min()), float(comp.max())),
        "phi_regularity": (reg.summary.inf, reg.summary.sup),
        "C1": chosen,
    }
    return checks, detail


IDENTITY_FAMILIES = (
    Lebesgue(),
    Standard(1.0),
    Standard(2.5),
    RapidV(3.0),
    LogStep(),
    BlockStep(),
    shift(LogStep(), 1.0),
    shift(RapidV(1.5), 0.5),
)


@_timed(6, "identity suite", 10.0)
def criterion_6():
    worst_ibp = 0.0
    worst_fubini = 0.0
    for w in IDENTITY_FAMILIES:
        lm = w.log_moment()
        if isinstance(lm, Divergent):
            continue
        for x in (0.5, 1.0, 3.0, 10.0):
            worst_ibp = max(worst_ibp, abs((x + 1.0) * hat_moment(w, x) / w.moment(x + 1.0) - 1.0))
        worst_fubini = max(worst_fubini, abs((w.moment(0.0) + w.tilde_hat(0.0)) / lm - 1.0))
    checks = {"integration by parts": worst_ibp <= 1e-10, "Fubini": worst_fubini <= 1e-10}
    return checks, {"max_rel_err_ibp": worst_ibp, "max_rel_err_fubini": worst_fubini}


@_timed(7, "maximal-function evidence", 120.0)
def criterion_7():
    w = Standard(0.0)
    rows = {}
    for n in (1, 4, 16, 32):
        f = means.Monomial(n)
        rows[n] = (means.maximal_norm(f, w, 1.0), means.bergman_norm(f, w, 1.0))
    ratios = np.array([m / b for m, b in rows.values()])
    checks = {
        "maximal_norm >= bergman_norm": bool(np.all(ratios >= 1.0)),
        "observed constant varies <= 50%": float(ratios.max() / ratios.min()) <= 1.5,
    }
    return checks, {"ratios": dict(zip(rows, ratios.tolist()))}


@_timed(8, "Littlewood-Paley band", 30.0)
def criterion_8():
    checks, detail = {}, {}
    for w, p in itertools.product((Standard(0.0), Standard(2.0)), (1.0, 2.0)):
        r = np.array(
            [
                means.lp_functional(means.Monomial(n), w, p) / means.bergman_norm(means.Monomial(n), w, p) ** p
                for n in range(65)
            ]
        )
        band = float(r.max() / r.min())
        key = f"alpha={w.alpha:g} p={p:g}"
        checks[f"{key} band <= 10"] = band <= 10.0
        detail[key] = {"min": float(r.min()), "max": float(r.max()), "band": band}
    return checks, detail


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8)


def run_all(selected=None) -> list[CriterionResult]:
    out = []
    for crit in CRITERIA:
        if selected is None or crit.number in selected:
            out.append(crit())
    return out
