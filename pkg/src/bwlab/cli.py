"""``bwlab`` command-line front end.

Every subcommand writes exactly one report file (CSV or JSON).  Exit status:
0 success, 2 invalid configuration, 3 numerical failure, 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, acceptance, classdiag, construct, means
from .errors import BwlError, Divergent, DivergentWeight, NumericalFailure, ParameterError
from .weights import BlockStep, Lebesgue, LogStep, RadialWeight, RapidV, Standard, shift

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

OUT_ENV = "BWL_OUT"


# ---------------------------------------------------------------------------
# spec grammars


def _split_call(spec: str, name: str) -> tuple[str, str]:
    """``name(inner,last)`` -> ``(inner, last)``, splitting at the last top-level comma."""
    body = spec[len(name) + 1 : -1]
    depth = 0
    cut = -1
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                break
        elif ch == "," and depth == 0:
            cut = i
    if depth != 0 or cut < 0:
        raise ParameterError(f"malformed {name}(...) spec: {spec!r}")
    return body[:cut].strip(), body[cut + 1 :].strip()


def _number(text: str, what: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise ParameterError(f"{what} must be a number, got {text!r}") from None
    if not math.isfinite(val):
        raise ParameterError(f"{what} must be finite, got {text!r}")
    return val


def parse_weight(spec: str) -> RadialWeight:
    """``lebesgue | standard:<a> | rapidv:<a> | t3 | t7[:psi=log2] | shift(<spec>,<beta>)``."""
    s = spec.strip()
    low = s.lower()
    if low.startswith("shift(") and low.endswith(")"):
        inner, beta = _split_call(s, "shift")
        return shift(parse_weight(inner), _number(beta, "shift beta"))
    head, _, arg = low.partition(":")
    if head == "lebesgue" and not arg:
        return Lebesgue()
    if head == "standard" and arg:
        return Standard(_number(arg, "standard alpha"))
    if head == "rapidv" and arg:
        return RapidV(_number(arg, "rapidv alpha"))
    if head == "t3" and not arg:
        return LogStep()
    if head == "t7":
        if arg and arg.replace(" ", "") != "psi=log2":
            raise ParameterError(f"unsupported psi in {spec!r}; only psi=log2 is available")
        return BlockStep()
    raise ParameterError(f"unrecognised weight spec {spec!r}")


def parse_function(spec: str) -> means.AnalyticTestFunction:
    """``monomial:<n> | hl:<k> | taylor:<a0>,<a1>,... | dilate(<spec>,<rho>)``."""
    s = spec.strip()
    low = s.lower()
    if low.startswith("dilate(") and low.endswith(")"):
        inner, rho = _split_call(s, "dilate")
        return means.Dilate(parse_function(inner), _number(rho, "dilate rho"))
    head, _, arg = low.partition(":")
    if head in ("monomial", "hl"):
        n = _number(arg, f"{head} index")
        if n != int(n):
            raise ParameterError(f"{head} index must be an integer, got {arg!r}")
        return means.Monomial(int(n)) if head == "monomial" else means.HLExtremal(int(n))
    if head == "taylor" and arg:
        coeffs = []
        for tok in arg.split(","):
            try:
                coeffs.append(complex(tok.strip().replace("i", "j")))
            except ValueError:
                raise ParameterError(f"bad Taylor coefficient {tok!r}") from None
        return means.Taylor(tuple(coeffs))
    raise ParameterError(f"unrecognised function spec {spec!r}")


# ---------------------------------------------------------------------------
# configuration and reports


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    tolerance: float = 1e-10
    lam_min: float = 0.0
    lam_max: float = 20.0
    count: int = 41
    spacing: str = "linear"
    output: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if not (0.0 < self.tolerance <= 1e-4):
            raise ParameterError("tolerance must lie in (0, 1e-4]")
        if not (8 <= self.count <= 1_000_000):
            raise ParameterError("grid count must lie in [8, 1e6]")
        if not (0.0 <= self.lam_min < self.lam_max) or not math.isfinite(self.lam_max):
            raise ParameterError("grid range needs 0 <= lam-min < lam-max < inf")
        if self.spacing == "log" and self.lam_min <= 0.0:
            raise ParameterError("log spacing needs lam-min > 0")
        if self.fmt not in ("csv", "json"):
            raise ParameterError("format must be csv or json")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lam_min, self.lam_max, self.count)
        return np.linspace(self.lam_min, self.lam_max, self.count)

    def output_path(self) -> Path:
        name = self.output or f"{self.command.replace(' ', '-')}.{self.fmt}"
        path = Path(name)
        base = os.environ.get(OUT_ENV)
        if base:
            path = Path(base) / path.name
        return path


@dataclass(frozen=True)
class Report:
    header: tuple[str, ...]
    rows: list
    notes: tuple[str, ...] = ()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def render(config: RunConfig, report: Report) -> str:
    if config.fmt == "json":
        records = [{k: _json_value(v) for k, v in zip(report.header, row)} for row in report.rows]
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    params = ";".join(f"{k}={_cell(v)}" for k, v in sorted(config.params.items()))
    buf.write(f"# command: {config.command}\n")
    buf.write(f"# params: {params}\n")
    buf.write(f"# version: bwlab {__version__}\n")
    for note in report.notes:
        buf.write(f"# note: {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.header)
    for row in report.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands


def _norm_row(name: str, value):
    if isinstance(value, Divergent):
        return (name, float(value.partials[-1][1]), "divergent")
    return (name, float(value), "finite")


def cmd_weight_profile(cfg: RunConfig, args) -> Report:
    w = parse_weight(args.weight)
    g = cfg.grid()
    dens = np.asarray(w.level_density(g), dtype=float)
    hat = np.asarray(w.tail_hat(g), dtype=float)
    notes = ()
    try:
        tilde = np.asarray(w.tilde_hat(g), dtype=float)
    except DivergentWeight:
        tilde = np.full_like(g, math.inf)
        notes = ("associated weight is not integrable; tilde tail reported as inf",)
    rows = list(zip(g, -np.expm1(-g), dens, hat, tilde))
    return Report(("level", "r", "level_density", "tail_hat", "tilde_hat"), rows, notes)


_PROFILES = {
    "dhat": lambda w, k, g, beta: classdiag.dhat_profile(w, k, g),
    "dcheck": lambda w, k, g, beta: classdiag.dcheck_profile(w, k, g),
    "tail": lambda w, k, g, beta: classdiag.tail_comparison(w, g),
    "regularity": lambda w, k, g, beta: classdiag.regularity_profile(w, g),
}

_VERDICTS = {
    "dhat": lambda w, k, beta: classdiag.dhat_verdict(w, k),
    "dcheck": lambda w, k, beta: classdiag.dcheck_verdict(w),
    "tail": lambda w, k, beta: classdiag.tail_comparison_verdict(w),
    "regularity": lambda w, k, beta: classdiag.regularity_verdict(w),
    "moment": lambda w, k, beta: classdiag.moment_condition_verdict(w, beta),
}


def cmd_class_check(cfg: RunConfig, args) -> Report:
    w = parse_weight(args.weight)
    if not args.K > 1.0:
        raise ParameterError("K must exceed 1")
    if args.verdict:
        rows = []
        for name in args.profiles or list(_VERDICTS):
            v = _VERDICTS[name](w, args.K, args.beta)
            rows.append((name, v.verdict.value, len(v.witness or ()), v.note))
        return Report(("test", "verdict", "witness_scales", "note"), rows)
    name = (args.profiles or ["dhat"])[0]
    if name == "moment":
        prof = classdiag.moment_condition_profile(w, args.beta, classdiag.moment_xs(w))
        return Report(("x", "ratio"), prof.rows())
    try:
        prof = _PROFILES[name](w, args.K, cfg.grid(), args.beta)
    except DivergentWeight as exc:
        raise NumericalFailure(str(exc)) from exc
    return Report(("level", "ratio"), prof.rows())


def cmd_construct_t3(cfg: RunConfig, args) -> Report:
    if args.requirements:
        rep = construct.t3_requirements(args.kmax)
        rows = [("c_tail", rep.c_tail), ("c_phi", rep.c_phi), ("max_phi", rep.max_phi)]
        return Report(("quantity", "value"), rows)
    if args.envelope:
        env = construct.t3_envelope(cfg.grid())
        rows = list(zip(env.grid, env.scaled))
        return Report(("level", "scaled_tail"), rows, (f"c1={_cell(env.c1)} c2={_cell(env.c2)}",))
    if not 1 <= args.jmax <= construct.WITNESS_J_MAX:
        raise ParameterError(f"jmax must lie in [1, {construct.WITNESS_J_MAX}]")
    rows = [(j, *construct.t3_witness(j)) for j in range(1, args.jmax + 1)]
    return Report(("j", "n", "ratio"), rows)


def cmd_construct_t7(cfg: RunConfig, args) -> Report:
    if args.comparability:
        xs = np.arange(1.0, args.nmax + 1.0)
        return Report(("x", "ratio"), list(zip(xs, construct.t7_comparability(xs))))
    if args.regularity:
        prof = construct.t7_phi_regularity(args.c1, cfg.grid())
        return Report(("level", "ratio"), prof.rows())
    rows = [(n, construct.t7_tilde_witness(n)) for n in range(1, args.nmax + 1)]
    return Report(("n", "ratio"), rows)


def cmd_norms_compare(cfg: RunConfig, args) -> Report:
    f = parse_function(args.f)
    w = parse_weight(args.weight)
    p = args.p
    rows = []
    full = means.bergman_norm(f, w, p, rtol=cfg.tolerance)
    re = means.repart_norm(f, w, p, rtol=cfg.tolerance)
    rows.append(_norm_row("norm_f^p", full if isinstance(full, Divergent) else full**p))
    rows.append(_norm_row("norm_re^p", re if isinstance(re, Divergent) else re**p))
    if args.full:
        rep = means.conjugate_report(f, w, p)
        for key in ("sup_tilde", "sup_omega", "lp"):
            rows.append(_norm_row(key, rep[key]))
        for key, val in rep.ratios.items():
            rows.append((key, math.nan if val is None else float(val), "ratio" if val is not None else "undefined"))
    return Report(("quantity", "value", "status"), rows)


def cmd_maximal(cfg: RunConfig, args) -> Report:
    f = parse_function(args.f)
    w = parse_weight(args.weight)
    s = means.Sampling()
    for _ in range(args.refine):
        s = s.refined()
    mx = means.maximal_norm(f, w, args.p, s)
    bn = means.bergman_norm(f, w, args.p, rtol=cfg.tolerance)
    rows = [("maximal_norm", mx, "finite"), _norm_row("bergman_norm", bn)]
    if not isinstance(bn, Divergent):
        rows.append(("ratio", mx / bn, "finite"))
    return Report(("quantity", "value", "status"), rows)


def cmd_suite_acceptance(cfg: RunConfig, args) -> Report:
    only = None
    if args.only:
        try:
            only = {int(t) for t in args.only.split(",")}
        except ValueError:
            raise ParameterError("--only takes a comma-separated list of criterion numbers") from None
        if not only <= {c.number for c in acceptance.CRITERIA}:
            raise ParameterError("unknown criterion number")
    results = acceptance.run_all(only)
    for r in results:
        print(r.line())
    # runtimes vary from run to run; the report records budgets only
    rows = [(r.number, r.name, r.passed, r.within_budget, r.budget) for r in results]
    return Report(("criterion", "name", "passed", "within_budget", "budget_s"), rows)


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tolerance", type=float, default=1e-10, help="relative tolerance in (0, 1e-4]")
    p.add_argument("--lam-min", type=float, default=0.0, help="lowest level of the grid")
    p.add_argument("--lam-max", type=float, default=20.0, help="highest level of the grid")
    p.add_argument("--count", type=int, default=41, help="number of grid levels, in [8, 1e6]")
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--out", default=None, help="report file name (directory overridden by $BWL_OUT)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bwlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bwlab {__version__}")
    top = parser.add_subparsers(dest="group", required=True)

    weight = top.add_parser("weight").add_subparsers(dest="action", required=True)
    p = weight.add_parser("profile", help="density and tails of a weight on a level grid")
    p.add_argument("--weight", required=True)
    _common(p)
    p.set_defaults(handler=cmd_weight_profile, command="weight profile")

    klass = top.add_parser("class").add_subparsers(dest="action", required=True)
    p = klass.add_parser("check", help="class-membership ratio profiles or verdicts")
    p.add_argument("--weight", required=True)
    p.add_argument("--K", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--profile", dest="profiles", action="append", choices=sorted(_VERDICTS))
    p.add_argument("--verdict", action="store_true", help="emit verdicts instead of a profile")
    _common(p)
    p.set_defaults(handler=cmd_class_check, command="class check")

    cons = top.add_parser("construct").add_subparsers(dest="action", required=True)
    p = cons.add_parser("t3", help="log-step construction")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--witness", action="store_true", help="witness ratios (default)")
    mode.add_argument("--requirements", action="store_true")
    mode.add_argument("--envelope", action="store_true")
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--kmax", type=int, default=4096)
    _common(p)
    p.set_defaults(handler=cmd_construct_t3, command="construct t3")
    p = cons.add_parser("t7", help="block construction")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--witness", action="store_true", help="tilde witness ratios (default)")
    mode.add_argument("--comparability", action="store_true")
    mode.add_argument("--regularity", action="store_true")
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--c1", type=float, default=1.0)
    _common(p)
    p.set_defaults(handler=cmd_construct_t7, command="construct t7")

    norms = top.add_parser("norms").add_subparsers(dest="action", required=True)
    p = norms.add_parser("compare", help="p-th powers of the norms of f and Re f")
    p.add_argument("--f", required=True)
    p.add_argument("--weight", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--full", action="store_true", help="add envelope integrals, LP functional and ratios")
    _common(p)
    p.set_defaults(handler=cmd_norms_compare, command="norms compare")

    p = top.add_parser("maximal", help="lattice estimate of the maximal-function norm")
    p.add_argument("--f", required=True)
    p.add_argument("--weight", required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--refine", type=int, default=0, choices=range(0, 4))
    _common(p)
    p.set_defaults(handler=cmd_maximal, command="maximal")

    suite = top.add_parser("suite").add_subparsers(dest="action", required=True)
    p = suite.add_parser("acceptance", help="run the acceptance checks")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    _common(p)
    p.set_defaults(handler=cmd_suite_acceptance, command="suite acceptance")
    return parser


_NON_PARAMS = {"group", "action", "handler", "command", "tolerance", "lam_min", "lam_max", "count", "spacing", "out", "fmt"}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = {k: v for k, v in vars(args).items() if k not in _NON_PARAMS and v is not None}
        params.update(tolerance=args.tolerance, grid=f"{args.spacing}:{args.lam_min:g}:{args.lam_max:g}:{args.count}")
        cfg = RunConfig(
            command=args.command,
            params={k: (",".join(v) if isinstance(v, list) else v) for k, v in params.items()},
            tolerance=args.tolerance,
            lam_min=args.lam_min,
            lam_max=args.lam_max,
            count=args.count,
            spacing=args.spacing,
            output=args.out,
            fmt=args.fmt,
        )
        report = args.handler(cfg, args)
    except ParameterError as exc:
        print(f"bwlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, DivergentWeight, BwlError, ArithmeticError) as exc:
        print(f"bwlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    path = cfg.output_path()
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(cfg, report), encoding="utf-8")
    if args.command == "suite acceptance" and not all(row[2] for row in report.rows):
        return EXIT_ACCEPTANCE
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
