"""
Command-line front end: read a JSON problem file, run the pipeline
(parse, realize, solve, certify) or the Fock oracle, and print a JSON report.

Exit codes: 0 success, 2 not found or inconclusive, 3 bad input,
4 a check that should hold did not.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .algcert import (
    DEFAULT_GUARD,
    certify,
    check_nonsingular,
    count_negative_valuation_roots,
    find_annihilator,
    newton_polygon,
    poly_from_json,
    poly_to_json,
)
from .errors import (
    DepthOverflow,
    FreeAlgebraicError,
    IndeterminateValuation,
    InsufficientOrder,
    InsufficientPrecision,
    NonContractive,
    NotAState,
    NotFound,
    NotSummable,
    ParseError,
    SingularA0,
    UnknownPreset,
    ZeroPolynomial,
)
from .fock import DEFAULT_DIM_CAP, free_independence_check, moment_oracle
from .laws import Law, preset
from .ncpoly import parse
from .realize import build_sd_data, realize
from .sde import solve_gsde, stieltjes_from_g
from .series import format_scalar, parse_scalar, series_to_json

__all__ = [
    "ProblemSpec",
    "InputError",
    "load_problem",
    "law_from_spec",
    "Pipeline",
    "cmd_moments",
    "cmd_stieltjes",
    "cmd_annihilator",
    "cmd_verify",
    "cmd_newton",
    "cmd_oracle",
    "main",
]

EXIT_OK = 0
EXIT_NOT_FOUND = 2
EXIT_INPUT = 3
EXIT_INVARIANT = 4


class InputError(FreeAlgebraicError):
    module = "cli"


class InvariantViolation(FreeAlgebraicError):
    module = "cli"


def _scalar(v):
    return parse_scalar(v) if isinstance(v, str) else v


def law_from_spec(obj):
    """
    ``"semicircle"``, ``{"preset": name, "params": {...}}``,
    ``{"moments": [...]}`` or ``{"cumulants": [...]}``.
    """
    if isinstance(obj, str):
        return preset(obj)
    if not isinstance(obj, dict):
        raise InputError(f"law specification must be a string or object, got {obj!r}")
    if "preset" in obj:
        params = {k: _scalar(v) for k, v in obj.get("params", {}).items()}
        return preset(obj["preset"], params)
    if "moments" in obj:
        return Law(moments=[_scalar(v) for v in obj["moments"]])
    if "cumulants" in obj:
        return Law(cumulants=[_scalar(v) for v in obj["cumulants"]])
    raise InputError(f"law specification needs preset, moments or cumulants: {obj!r}")


@dataclass
class ProblemSpec:
    q: int
    laws: list
    expression: str
    order: int
    degx: int = 1
    degy: int = 2
    guard: int = DEFAULT_GUARD
    depth_cap: int = DEFAULT_DIM_CAP
    max_degx: int | None = None
    max_degy: int | None = None
    raw: dict = field(default_factory=dict, repr=False)


def load_problem(obj, **overrides):
    """Validate a problem dict (or a path to a JSON file) into a :class:`ProblemSpec`."""
    if isinstance(obj, str):
        try:
            with open(obj) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read problem file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"problem file is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("problem must be a JSON object")
    for key in ("q", "laws", "expression"):
        if key not in obj:
            raise InputError(f"problem file lacks {key!r}")
    vals = dict(obj)
    for k, v in overrides.items():
        if v is not None:
            vals[k] = v
    q = vals["q"]
    if not isinstance(q, int) or q < 1:
        raise InputError("q must be a positive integer")
    if len(vals["laws"]) != q:
        raise InputError(f"expected {q} laws, got {len(vals['laws'])}")
    order = vals.get("order", 13)
    if not isinstance(order, int) or order < 4:
        raise InputError("order must be an integer >= 4")
    laws = [law_from_spec(s) for s in vals["laws"]]
    return ProblemSpec(
        q=q, laws=laws, expression=vals["expression"], order=order,
        degx=int(vals.get("degx", 1)), degy=int(vals.get("degy", 2)),
        guard=int(vals.get("guard", DEFAULT_GUARD)),
        depth_cap=int(vals.get("depth_cap", DEFAULT_DIM_CAP)),
        max_degx=vals.get("max_degx"), max_degy=vals.get("max_degy"), raw=obj)


def _fmt_list(xs):
    return [format_scalar(x) for x in xs]


class Pipeline:
    """Parse, realize and solve once per working order; results are cached."""

    def __init__(self, spec):
        self.spec = spec
        self.timings = {}
        t0 = time.perf_counter()
        self.f = parse(spec.expression)
        if self.f.num_vars() > spec.q:
            raise InputError(f"expression uses x{self.f.num_vars()} but q = {spec.q}")
        self.realization = realize(self.f, spec.q)
        self.timings["realize"] = time.perf_counter() - t0
        self._solutions = {}

    def solve(self, T):
        best = min((k for k in self._solutions if k >= T), default=None)
        if best is not None:
            return self._solutions[best]
        t0 = time.perf_counter()
        data = build_sd_data(self.realization, self.spec.laws, T, degree=max(1, self.f.degree()))
        sol = solve_gsde(data, T, checks=False)
        S = stieltjes_from_g(sol.g, data.p).truncate(-T)
        self.timings[f"solve_T{T}"] = time.perf_counter() - t0
        self._solutions[T] = (data, sol, S)
        return data, sol, S

    def dims(self):
        r = self.realization
        return {"p": r.p, "N": r.N, "n": r.p + r.N}


def _moments_from(S, T):
    return [S.coeff(-k - 1) for k in range(T)]


def _oracle_block(spec, moments, timings):
    t0 = time.perf_counter()
    f = parse(spec.expression)
    om = moment_oracle(f, spec.laws, len(moments) - 1, dim_cap=spec.depth_cap)
    timings["oracle"] = time.perf_counter() - t0
    window = 0
    for a, b in zip(moments, om):
        if a != b:
            break
        window += 1
    return {"moments": _fmt_list(om), "agreement_window": window, "agrees": window == len(moments)}


def cmd_moments(spec, oracle=False):
    pipe = Pipeline(spec)
    T = spec.order
    _, _, S = pipe.solve(T)
    m = _moments_from(S, T)
    report = {"command": "moments", "order": T, "moments": _fmt_list(m),
              "realization": pipe.dims()}
    if oracle:
        report["oracle"] = _oracle_block(spec, m, pipe.timings)
    report["timings"] = pipe.timings
    return report


def cmd_stieltjes(spec, oracle=False):
    pipe = Pipeline(spec)
    _, _, S = pipe.solve(spec.order)
    report = {"command": "stieltjes", "order": spec.order, "stieltjes": series_to_json(S),
              "realization": pipe.dims()}
    if oracle:
        report["oracle"] = _oracle_block(spec, _moments_from(S, spec.order), pipe.timings)
    report["timings"] = pipe.timings
    return report


def _sd_checks(data, sol, T):
    from .sde import check_gsde1, check_gsde3, residual

    res = residual(data, sol.g)
    try:
        rv = res.val()
    except IndeterminateValuation:
        rv = res.val_bound()
    try:
        g3 = "pass" if check_gsde3(data, sol.g, T) else "fail"
    except IndeterminateValuation:
        g3 = "inconclusive"
    return {"residual_val": None if rv == float("-inf") else int(rv),
            "residual_exact_zero": rv == float("-inf"),
            "residual_ok": rv <= -T,
            "gsde1": check_gsde1(data, sol.g),
            "gsde3": g3}


def _polygon_block(P, S):
    poly = newton_polygon(P)
    try:
        nonsing = check_nonsingular(P, S)
    except (InsufficientPrecision, ValueError):
        nonsing = None
    return {"segments": poly.to_json(), "y_content": poly.y_content,
            "negative_valuation_roots": count_negative_valuation_roots(P),
            "nonsingular_at_series": nonsing}


def cmd_annihilator(spec, oracle=False):
    """
    Full pipeline and annihilator search.

    The order is raised to ``(degx+1)(degy+1) + guard`` whenever the
    requested order cannot support the degree box; the order actually used
    is reported.
    """
    pipe = Pipeline(spec)
    T = spec.order
    data, sol, S = pipe.solve(T)
    m = _moments_from(S, T)
    report = {"command": "annihilator", "order": T, "moments": _fmt_list(m),
              "stieltjes": series_to_json(S), "realization": pipe.dims()}
    max_dx = spec.max_degx if spec.max_degx is not None else max(spec.degx, 4)
    max_dy = spec.max_degy if spec.max_degy is not None else max(spec.degy, 4)
    trace = []
    found = None
    t0 = time.perf_counter()
    for dx in range(spec.degx, max_dx + 1):
        for dy in range(spec.degy, max_dy + 1):
            need = max(T, (dx + 1) * (dy + 1) + spec.guard)
            _, _, Sw = pipe.solve(need)
            try:
                P, tr = find_annihilator(Sw, need, dx, dy, spec.guard, dx, dy)
            except NotFound as exc:
                trace.extend(exc.trace)
                continue
            trace.extend(tr)
            found = (P, need, Sw)
            break
        if found:
            break
    pipe.timings["annihilator"] = time.perf_counter() - t0
    dataT, solT, ST = pipe.solve(found[1] if found else T)
    report["sd_checks"] = _sd_checks(dataT, solT, found[1] if found else T)
    if found is None:
        report["annihilator"] = {"certified": False, "trace": trace}
    else:
        P, need, Sw = found
        cert = certify(P, Sw, need, spec.guard)
        certified = cert.ok and all(report["sd_checks"]["gsde1"])
        report["annihilator"] = {
            "polynomial": poly_to_json(P), "text": str(P), "degx": P.degx, "degy": P.degy,
            "order_used": need, "certified": certified, **cert.to_json(),
            "irreducibility": "not checked", "trace": trace}
        report["polygon"] = _polygon_block(P, Sw)
    if oracle:
        report["oracle"] = _oracle_block(spec, m, pipe.timings)
    report["timings"] = pipe.timings
    return report


def cmd_verify(spec, oracle=True):
    pipe = Pipeline(spec)
    T = spec.order
    data, sol, S = pipe.solve(T)
    m = _moments_from(S, T)
    checks = _sd_checks(data, sol, T)
    report = {"command": "verify", "order": T, "moments": _fmt_list(m),
              "realization": pipe.dims(), "sd_checks": checks}
    passed = checks["residual_ok"] and all(checks["gsde1"]) and checks["gsde3"] == "pass"
    if oracle:
        report["oracle"] = _oracle_block(spec, m, pipe.timings)
        passed = passed and report["oracle"]["agrees"]
    t0 = time.perf_counter()
    report["free_independence"] = free_independence_check(spec.laws)
    pipe.timings["independence"] = time.perf_counter() - t0
    passed = passed and report["free_independence"]
    report["passed"] = passed
    report["timings"] = pipe.timings
    return report


def cmd_oracle(spec):
    t0 = time.perf_counter()
    info = {}
    m = moment_oracle(parse(spec.expression), spec.laws, spec.order - 1,
                      dim_cap=spec.depth_cap, report=info)
    return {"command": "oracle", "order": spec.order, "moments": _fmt_list(m),
            "max_word_length": info.get("depth"),
            "timings": {"oracle": time.perf_counter() - t0}}


def cmd_newton(obj):
    """Polygon report for a polynomial file ``{"annihilator": ...}`` or ``{"polynomial": "..."}``."""
    if isinstance(obj, str):
        try:
            with open(obj) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read polynomial file: {exc}") from None
    if isinstance(obj, dict):
        src = obj.get("annihilator", obj.get("polynomial"))
        if isinstance(src, dict):
            src = src.get("polynomial", src.get("text"))
    else:
        src = obj
    if src is None:
        raise InputError("polynomial file needs an 'annihilator' or 'polynomial' entry")
    try:
        P = poly_from_json(src)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    poly = newton_polygon(P)
    return {"command": "newton", "polynomial": poly_to_json(P), "text": str(P),
            "segments": poly.to_json(), "leading_val": poly.leading_val,
            "y_content": poly.y_content,
            "negative_valuation_roots": count_negative_valuation_roots(P),
            "nonsingular_at_origin": check_nonsingular(P, 0)}


# ----
# main
# ----

_INPUT_ERRORS = (InputError, ParseError, UnknownPreset, InsufficientOrder, NotAState,
                 ZeroPolynomial, InsufficientPrecision)
_INCONCLUSIVE = (NotFound, DepthOverflow, NonContractive, NotSummable, SingularA0,
                 IndeterminateValuation)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, help="series order T")
    common.add_argument("--degx", type=int, help="x-degree bound for the annihilator")
    common.add_argument("--degy", type=int, help="y-degree bound for the annihilator")
    common.add_argument("--guard", type=int, help="guard window for certification")
    common.add_argument("--depth-cap", type=int, dest="depth_cap",
                        help="support cap for Fock-space vectors")
    common.add_argument("--oracle", action="store_true", help="also run the Fock oracle")
    common.add_argument("--output", help="write the JSON report here instead of stdout")
    ap = argparse.ArgumentParser(prog="freealgebraic", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("moments", "moments through the Schwinger-Dyson pipeline"),
                        ("stieltjes", "Stieltjes transform series"),
                        ("annihilator", "find and certify an annihilating polynomial"),
                        ("verify", "run the side conditions and the oracle"),
                        ("oracle", "moments from the Fock model only"),
                        ("newton", "Newton polygon of a polynomial file")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("file", help="problem file (JSON); polynomial file for newton")
    return ap


def _run(args):
    if args.command == "newton":
        report = cmd_newton(args.file)
        return report, EXIT_OK
    spec = load_problem(args.file, order=args.order, degx=args.degx, degy=args.degy,
                        guard=args.guard, depth_cap=args.depth_cap)
    if args.command == "moments":
        report = cmd_moments(spec, args.oracle)
        bad = args.oracle and not report["oracle"]["agrees"]
        return report, EXIT_INVARIANT if bad else EXIT_OK
    if args.command == "stieltjes":
        report = cmd_stieltjes(spec, args.oracle)
        bad = args.oracle and not report["oracle"]["agrees"]
        return report, EXIT_INVARIANT if bad else EXIT_OK
    if args.command == "annihilator":
        report = cmd_annihilator(spec, args.oracle)
        if args.oracle and not report["oracle"]["agrees"]:
            return report, EXIT_INVARIANT
        if not report["sd_checks"]["residual_ok"]:
            return report, EXIT_INVARIANT
        return report, EXIT_OK if report["annihilator"]["certified"] else EXIT_NOT_FOUND
    if args.command == "verify":
        report = cmd_verify(spec, True)
        if report["sd_checks"]["gsde3"] == "inconclusive":
            return report, EXIT_NOT_FOUND
        return report, EXIT_OK if report["passed"] else EXIT_INVARIANT
    if args.command == "oracle":
        return cmd_oracle(spec), EXIT_OK
    raise InputError(f"unknown command {args.command}")


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        report, code = _run(args)
    except _INPUT_ERRORS as exc:
        report, code = _error_report(exc), EXIT_INPUT
    except _INCONCLUSIVE as exc:
        report, code = _error_report(exc), EXIT_NOT_FOUND
    except FreeAlgebraicError as exc:
        report, code = _error_report(exc), EXIT_INVARIANT
    text = json.dumps(report, indent=2, default=str)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


def _error_report(exc):
    out = {"error": type(exc).__name__, "module": getattr(exc, "module", None),
           "message": str(exc)}
    if isinstance(exc, NotFound):
        out["trace"] = exc.trace
    return out


if __name__ == "__main__":
    sys.exit(main())
