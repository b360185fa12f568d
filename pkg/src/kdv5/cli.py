"""Command-line front end.

Machine output (JSON or CSV) goes to stdout, human-readable notes to stderr.
Exit status: 0 success, 1 negative analysis verdict or failed verification,
2 bad input or usage.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import invariants as inv
from .equivalence import (
    NoRealTransformationError,
    TargetConstants,
    build_transformation,
    check_necessary_equivalence,
    recognize,
    transformation_json,
)
from .model import EquationInstance, InvalidEquationError, remove_damping
from .solutions import FAMILIES, ClosedFormSolution, DegenerateFamilyError, make, map_solution
from .symexpr import EvaluationError, ParseError, parse
from .timefunc import MonotonicityError, OutOfDomainError
from .verify import Grid, default_threshold, pde_residual, sample_csv

GRID_ENV = "KDV5_GRID_POINTS"


class UsageError(Exception):
    """Bad input; maps to exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid_points(value: int | None) -> int:
    if value is not None:
        n = value
    else:
        raw = os.environ.get(GRID_ENV)
        if raw is None:
            return inv.DEFAULT_GRID_POINTS
        try:
            n = int(raw)
        except ValueError:
            raise UsageError(f"{GRID_ENV} must be an integer, got {raw!r}") from None
    if n < 2:
        raise UsageError("grid needs at least two points")
    return n


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _number(text: str):
    """Integers and p/q stay exact; anything else is a float."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _constants(text: str) -> TargetConstants:
    parts = text.split(",")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("expected five comma-separated constants m1,...,m5")
    try:
        return TargetConstants.of([_number(p) for p in parts])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}")
    lo, hi = (float(p) for p in parts)
    if not lo <= hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _load_equation(path_or_data) -> EquationInstance:
    data = _load_json(path_or_data) if isinstance(path_or_data, str) else path_or_data
    try:
        return EquationInstance.from_json(data)
    except ParseError as exc:
        raise UsageError(f"coefficient does not parse: {exc}") from None


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, allow_nan=False, default=_jsonable)
    sys.stdout.write("\n")


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if hasattr(v, "item"):
        return v.item()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands --------------------------------------------------------------


def cmd_invariants(args) -> int:
    eq = _load_equation(args.equation)
    sig = inv.signature(eq, _grid_points(args.points), args.rel_tol, args.abs_tol)
    _emit(sig.to_json())
    const = [k for k in inv.NAMES if sig.constant[k]]
    _note(f"constant invariants: {', '.join(const) or 'none'}")
    return 0


def cmd_classify(args) -> int:
    eq = _load_equation(args.equation)
    points = _grid_points(args.points)
    out: dict = {}
    work = eq
    if not eq.q_is_zero():
        rec = recognize(eq, points=points)
        out["recognition"] = rec.to_json()
        work, _ = remove_damping(eq)
        out["dampingRemoved"] = True
    verdict = check_necessary_equivalence(work, args.target, points, args.rel_tol, args.abs_tol)
    out = {"verdict": verdict.verdict, **verdict.to_json(), **out}
    _emit(out)
    if verdict.candidate:
        _note("candidate: necessary conditions hold (not a proof of equivalence)")
        return 0
    _note(f"excluded: failed {', '.join(verdict.failed)}")
    return 1


def _transformation_for(eq: EquationInstance, m: TargetConstants, points: int, k2: float):
    rec = recognize(eq, points=points)
    if not rec.matched:
        return rec, None
    return rec, build_transformation(rec, m, k2)


def cmd_transform(args) -> int:
    eq = _load_equation(args.equation)
    try:
        rec, T = _transformation_for(eq, args.target, _grid_points(args.points), args.k2)
    except (NoRealTransformationError, ValueError) as exc:
        _emit({"matched": True, "transformation": None, "reason": str(exc)})
        _note(str(exc))
        return 1
    if T is None:
        _emit({"matched": False, "recognition": rec.to_json(), "transformation": None})
        _note("equation is not of a recognized form")
        return 1
    _emit({"matched": True, "recognition": rec.to_json(), "transformation": transformation_json(T)})
    return 0


def _family_params(args) -> dict:
    needed = {
        "exponential": ("m",),
        "kink": ("a", "m4", "m5"),
        "soliton": ("a", "m4", "m5"),
        "compacton": ("a", "m5"),
    }[args.family]
    optional = ("c2",) if args.family == "exponential" else ()
    params = {}
    for name in ("m", "a", "m4", "m5", "c2"):
        value = getattr(args, name)
        if value is None:
            if name in needed:
                raise UsageError(f"{args.family} needs --{name}")
            continue
        if name not in needed and name not in optional:
            raise UsageError(f"--{name} does not apply to the {args.family} family")
        params[name] = value
    return params


def cmd_solve(args) -> int:
    try:
        m, sol = make(args.family, **_family_params(args))
    except DegenerateFamilyError as exc:
        raise UsageError(str(exc)) from None
    out = sol.to_json()
    out["equation"] = m.instance().to_json()
    if args.map is None:
        _emit(out)
        return 0
    eq = _load_equation(args.map)
    try:
        rec, T = _transformation_for(eq, m, _grid_points(args.points), args.k2)
    except (NoRealTransformationError, ValueError) as exc:
        _note(str(exc))
        _emit({"base": out, "transformed": None, "reason": str(exc)})
        return 1
    if T is None:
        _note("equation is not of a recognized form")
        _emit({"base": out, "transformed": None, "recognition": rec.to_json()})
        return 1
    mapped = map_solution(sol, T)
    result = mapped.to_json()
    result["equation"] = eq.to_json()
    _emit({"base": out, "transformed": result, "transformation": transformation_json(T)})
    return 0


def _load_bundle(path: str) -> tuple[ClosedFormSolution, EquationInstance]:
    data = _load_json(path)
    if isinstance(data, dict) and "transformed" in data:
        data = data["transformed"]
        if data is None:
            raise UsageError("bundle has no transformed solution")
    if not isinstance(data, dict) or "solutionSource" not in data or "equation" not in data:
        raise UsageError("bundle needs 'solutionSource' and 'equation'")
    try:
        u = parse(str(data["solutionSource"]))
    except ParseError as exc:
        raise UsageError(f"solution does not parse: {exc}") from None
    family = data.get("family", "transformed")
    params = data.get("parameters", {})
    return ClosedFormSolution(family, params, u), _load_equation(data["equation"])


def _grid(args, eq: EquationInstance | None = None) -> Grid:
    t_range = args.t_range or ((0.0, 1.0) if eq is None else eq.domain)
    return Grid(t_range, args.x_range or (-10.0, 10.0), args.nt, args.nx)


def cmd_verify(args) -> int:
    sol, eq = _load_bundle(args.bundle)
    grid = _grid(args, eq)
    threshold = args.threshold if args.threshold is not None else default_threshold(sol)
    report = pde_residual(sol, eq, grid, threshold)
    _emit(report.to_json())
    status = "pass" if report.passed else "FAIL"
    _note(f"{status}: max |residual| = {report.max_abs_residual:.3e} (threshold {threshold:g})")
    return 0 if report.passed else 1


def cmd_sample(args) -> int:
    sol, eq = _load_bundle(args.bundle)
    mask = None
    if args.window:
        if sol.family != "compacton":
            raise UsageError("--window applies to compacton bundles only")
        a = float(sol.parameters.get("a", 1.0))

        # display only: keep the central hump |a (x - t)| <= pi/2
        def mask(tt, xx):
            return np.abs(a * (xx - tt)) <= math.pi / 2

    grid = _grid(args, eq)
    sample_csv(sol, grid, args.output or sys.stdout, mask=mask)
    return 0


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kdv5", description="Fifth-order KdV equations with time-dependent coefficients.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def grid_points(sp):
        sp.add_argument("--points", type=int, default=None, help=f"grid size (default ${GRID_ENV} or 101)")

    def tolerances(sp):
        sp.add_argument("--rel-tol", type=_positive, default=inv.DEFAULT_REL_TOL)
        sp.add_argument("--abs-tol", type=_positive, default=inv.DEFAULT_ABS_TOL)

    sp = sub.add_parser("invariants", help="zero- and first-order invariants on a grid")
    sp.add_argument("equation")
    grid_points(sp)
    tolerances(sp)
    sp.set_defaults(func=cmd_invariants)

    sp = sub.add_parser("classify", help="necessary conditions for constant-coefficient equivalence")
    sp.add_argument("equation")
    sp.add_argument("--target", type=_constants, default=None, help="m1,m2,m3,m4,m5")
    grid_points(sp)
    tolerances(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("transform", help="transformation to the constant-coefficient equation")
    sp.add_argument("equation")
    sp.add_argument("--target", type=_constants, required=True, help="m1,m2,m3,m4,m5")
    sp.add_argument("--k2", type=float, default=0.0)
    grid_points(sp)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("solve", help="exact traveling-wave solutions")
    sp.add_argument("family", choices=FAMILIES)
    sp.add_argument("--a", type=_number)
    sp.add_argument("--m4", type=_number)
    sp.add_argument("--m5", type=_number)
    sp.add_argument("--m", type=_constants, help="m1,...,m5 (exponential)")
    sp.add_argument("--c2", type=_number)
    sp.add_argument("--map", metavar="EQ.json", help="carry the solution to this recognized equation")
    sp.add_argument("--k2", type=float, default=0.0)
    grid_points(sp)
    sp.set_defaults(func=cmd_solve)

    def grid_flags(sp):
        sp.add_argument("--t-range", type=_range, default=None, help="lo,hi (default: equation domain)")
        sp.add_argument("--x-range", type=_range, default=None, help="lo,hi (default -10,10)")
        sp.add_argument("--nt", type=int, default=101)
        sp.add_argument("--nx", type=int, default=401)

    sp = sub.add_parser("verify", help="PDE residual of a solution bundle")
    sp.add_argument("bundle")
    grid_flags(sp)
    sp.add_argument("--threshold", type=_positive, default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sample", help="CSV samples of a solution bundle")
    sp.add_argument("bundle")
    grid_flags(sp)
    sp.add_argument("--window", action="store_true", help="compacton: zero outside the central hump")
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "nt", 1) < 1 or getattr(args, "nx", 1) < 1:
            raise UsageError("--nt and --nx must be positive")
        return args.func(args)
    except UsageError as exc:
        _note(f"kdv5: error: {exc}")
        return 2
    except (InvalidEquationError, ParseError, EvaluationError, MonotonicityError, OutOfDomainError,
            ValueError, TypeError) as exc:
        _note(f"kdv5: error: {exc}")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
