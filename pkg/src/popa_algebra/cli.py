"""Command-line front end: JSON in, JSON report out.

Exit codes: 0 success, 1 verification failure (a residual above
tolerance, a failed check, or non-convergence), 2 input error.  Reports
are UTF-8 JSON with sorted keys, newline-terminated; identical input and
seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .algebra import Element
from .errors import NoConvergence, PopaAlgebraError
from .solutions import eval_solution, solution_from_json, verify_gs
from .special import st_roots, wj_build_S, wj_extract, xi_root
from .structure import SigmaMatrix, analyse_sigma, classify_2d
from .structure import PartitionSolution
from .tilting import tilt_T, tilt_inverse, tilt_solve_fixed_point


def _fail_input(msg: str) -> int:
    print(f"input error: {msg}", file=sys.stderr)
    return 2


def _load_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _InputError(f"malformed JSON in {path} at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}")


class _InputError(Exception):
    pass


def _field(data: dict, name: str, where: str):
    if not isinstance(data, dict) or name not in data:
        raise _InputError(f"missing field '{name}' in {where}")
    return data[name]


def _load_solution(data: dict, where: str):
    sol_data = _field(data, "solution", where) if "solution" in data else data
    try:
        return solution_from_json(sol_data)
    except (KeyError, TypeError) as exc:
        raise _InputError(f"bad solution object in {where}: missing or invalid "
                          f"field {exc}")
    except PopaAlgebraError as exc:
        raise _InputError(f"bad solution object in {where}: {exc}")


def _load_point(data, sol, name: str, where: str) -> Element:
    raw = _field(data, name, where)
    try:
        if isinstance(raw, dict):
            return Element.from_json(raw)
        return sol.algebra.element(raw)
    except (PopaAlgebraError, TypeError, ValueError) as exc:
        raise _InputError(f"bad element '{name}' in {where}: {exc}")


def _emit(report, output: str | None) -> None:
    text = json.dumps(report, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_classify(args) -> int:
    data = _load_json(args.input)
    if "sigma" in data:
        try:
            m = SigmaMatrix.from_json(data)
        except (PopaAlgebraError, ValueError) as exc:
            raise _InputError(f"bad sigma matrix in {args.input}: {exc}")
        analysis = analyse_sigma(m, args.tol)
        report = analysis.to_json()
        if analysis.valid and m.dim == 2:
            report["class"] = classify_2d(PartitionSolution(analysis.partition)).cls.value
        _emit(report, args.output)
        return 0 if analysis.valid else 1
    sol = _load_solution(data, args.input)
    result = classify_2d(sol)
    _emit(result.to_json(), args.output)
    return 0


def _cmd_verify(args) -> int:
    data = _load_json(args.input)
    sol = _load_solution(data, args.input)
    report = verify_gs(sol, n_samples=args.samples, seed=args.seed,
                       box_radius=args.box_radius)
    out = {"solution": sol.to_json(),
           "params": {"samples": args.samples, "seed": args.seed,
                      "box_radius": args.box_radius, "tol": args.tol},
           "results": report.to_json()}
    _emit(out, args.output)
    return 0 if report.max_gs_residual <= args.tol else 1


def _cmd_tilt(args) -> int:
    data = _load_json(args.input)
    sol = _load_solution(data, args.input)
    u = _load_point(data, sol, "u", args.input)
    _emit({"u": u.to_json(), "tilt": tilt_T(sol, u).to_json()}, args.output)
    return 0


def _cmd_invert_tilt(args) -> int:
    data = _load_json(args.input)
    sol = _load_solution(data, args.input)
    v = _load_point(data, sol, "v", args.input)
    u = tilt_inverse(sol, v)
    residual = (tilt_T(sol, u) - v).norm()
    _emit({"v": v.to_json(), "u": u.to_json(), "residual": residual},
          args.output)
    return 0 if residual <= args.tol else 1


def _cmd_solve_tilt(args) -> int:
    data = _load_json(args.input)
    sol = _load_solution(data, args.input)
    v = _load_point(data, sol, "v", args.input)
    try:
        result = tilt_solve_fixed_point(sol, v, max_iter=args.max_iter)
    except NoConvergence as exc:
        _emit({"error": str(exc)}, args.output)
        return 1
    _emit(result.to_json(), args.output)
    return 0


def _cmd_solve_st(args) -> int:
    roots = st_roots(args.n_roots)
    _emit([r.to_json() for r in roots], args.output)
    worst = max((r.residual for r in roots), default=0.0)
    return 0 if len(roots) == args.n_roots and worst < 1e-12 else 1


def _cmd_xi(args) -> int:
    xi = xi_root()
    residual = abs(math.exp(-xi) - (xi - 1.0))
    _emit({"xi": xi, "residual": residual}, args.output)
    return 0 if residual < 1e-13 else 1


def _cmd_wj(args) -> int:
    data = _load_json(args.input)
    sol = _load_solution(data, args.input)
    raw_samples = _field(data, "lambda_samples", args.input)
    lams = [_load_point({"x": s}, sol, "x", args.input) for s in raw_samples]
    triple = wj_extract(sol, lams, tol=args.tol)
    oracle = wj_build_S(triple, tol=max(args.tol, 1e-9))
    worst = 0.0
    for lam in oracle.covered_values():
        x = triple.section(lam)
        worst = max(worst, (eval_solution(sol, x) - oracle.eval(x)).norm())
    covered_residual = oracle.gs_residual_on_covered(seed=args.seed)
    out = {"verified": True,
           "kernel_dim": len(triple.kernel_basis),
           "covered_values": len(oracle.covered_values()),
           "match_residual": worst,
           "gs_residual_covered": covered_residual}
    _emit(out, args.output)
    ok = worst <= max(args.tol, 1e-10) and covered_residual <= max(args.tol, 1e-10)
    return 0 if ok else 1


def _cmd_report(args) -> int:
    data = _load_json(args.input)
    params = _field(data, "params", args.input)
    sol = _load_solution({"solution": _field(data, "solution", args.input)},
                         args.input)
    fresh = verify_gs(sol,
                      n_samples=int(_field(params, "samples", "params")),
                      seed=int(_field(params, "seed", "params")),
                      box_radius=float(_field(params, "box_radius", "params")))
    recorded = _field(data, "results", args.input)
    match = json.dumps(fresh.to_json(), sort_keys=True) == json.dumps(
        recorded, sort_keys=True)
    _emit({"match": match, "results": fresh.to_json()}, args.output)
    return 0 if match else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="popa-algebra",
        description="classify, verify, tilt and solve solution families")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, input_required=True):
        if input_required:
            p.add_argument("--input", required=True, help="input JSON path")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("classify", help="classify a sigma matrix or a 2-d solution")
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("verify", help="sampled residuals of the composition law")
    common(p)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--box-radius", type=float, default=0.4)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("tilt", help="apply the tilting map to a point")
    common(p)
    p.set_defaults(func=_cmd_tilt)

    p = sub.add_parser("invert-tilt", help="closed-form tilt inverse")
    common(p)
    p.set_defaults(func=_cmd_invert_tilt)

    p = sub.add_parser("solve-tilt", help="fixed-point tilt solver")
    common(p)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=_cmd_solve_tilt)

    p = sub.add_parser("solve-st", help="roots of e^w = 1 + w, Re w > 0")
    common(p, input_required=False)
    p.add_argument("--n-roots", type=int, default=10)
    p.set_defaults(func=_cmd_solve_st)

    p = sub.add_parser("xi", help="the boundary root of e^{-x} = x - 1")
    common(p, input_required=False)
    p.set_defaults(func=_cmd_xi)

    p = sub.add_parser("wj", help="extract/verify/rebuild a solution triple")
    common(p)
    p.set_defaults(func=_cmd_wj)

    p = sub.add_parser("report", help="re-run a verify report and compare")
    common(p)
    p.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        return _fail_input(str(exc))
    except PopaAlgebraError as exc:
        return _fail_input(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
