"""Command-line interface.

Exit codes: 0 success, 1 check failed (certificate not verified or
interpolation violated), 2 usage error, 3 step schedule outside the
required regime, 4 SDP solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds
from .certify import build_certificate, verify_certificate
from .core import PepError, RegimeClass, RegimeError, SmoothProblemSpec, StepSchedule
from .interp import TripleSet, check_interpolation
from .pep import assemble_pep
from .sdp import SolveOptions, SolverError, solve
from .tight import attainment_check, build_tight_instance, export_triples, run_gd

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_SOLVER = 4

GAP_TOL_ENV = "PEPGRAD_GAP_TOL"

SWEEP_COLUMNS = (
    "bound_main",
    "bound_nesterov",
    "bound_drori",
    "bound_taylor",
    "bound_conjecture",
    "sdp_value",
    "sdp_gap",
)


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    return "-" if v is None else f"{float(v):.6g}"


def _cell(v) -> str:
    return "" if v is None else repr(float(v))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _default_gap_tol() -> float:
    raw = os.environ.get(GAP_TOL_ENV)
    if raw is None:
        return SolveOptions.gap_tol
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{GAP_TOL_ENV}={raw!r} is not a number")


def _parse_steps(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--steps must be a comma-separated list of numbers, got {text!r}")


def _spec(args) -> SmoothProblemSpec:
    try:
        return SmoothProblemSpec(args.L, args.delta, args.f_star)
    except ValueError as exc:
        raise UsageError(str(exc))


def _schedule(args) -> StepSchedule:
    if args.steps is not None and (args.t_const is not None or args.N is not None):
        raise UsageError("--steps cannot be combined with --t-const/--N")
    try:
        if args.steps is not None:
            return StepSchedule(_parse_steps(args.steps))
        if args.t_const is None or args.N is None:
            raise UsageError("give either --steps or both --t-const and --N")
        return StepSchedule.constant(args.t_const, args.N)
    except ValueError as exc:
        raise UsageError(str(exc))


def _solve_options(args) -> SolveOptions:
    gap = args.gap_tol if args.gap_tol is not None else _default_gap_tol()
    return SolveOptions(gap_tol=gap, feas_tol=args.feas_tol, max_iter=args.max_iter)


def _add_problem_flags(p: argparse.ArgumentParser, schedule: bool = True):
    p.add_argument("--L", type=float, default=1.0, help="gradient Lipschitz constant")
    p.add_argument("--delta", type=float, default=1.0, help="initial gap f(x1) - f*")
    p.add_argument("--f-star", dest="f_star", type=float, default=0.0, help="lower bound f*")
    if schedule:
        p.add_argument("--steps", help="comma-separated step lengths t1,t2,...")
        p.add_argument("--t-const", dest="t_const", type=float, help="constant step length")
        p.add_argument("--N", type=int, help="number of steps (with --t-const)")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--gap-tol", type=float, default=None, help=f"duality-gap tolerance (env {GAP_TOL_ENV})")
    p.add_argument("--feas-tol", type=float, default=SolveOptions.feas_tol)
    p.add_argument("--max-iter", type=int, default=SolveOptions.max_iter)


def _table(rows) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


# --- commands ---------------------------------------------------------------


def cmd_bound(args, out) -> int:
    spec, schedule = _spec(args), _schedule(args)
    report = bounds.bound_report(spec, schedule)
    if report.conjecture is None:
        raise RegimeError(
            f"no bound applies: every bound needs steps in {RegimeClass.CONJECTURE.interval}, "
            f"got t*L = {max(schedule) * spec.L:.6g}"
        )
    if args.json:
        out.write(_dump(report.to_dict()) + "\n")
        return EXIT_OK
    rows = [
        ("regime", report.regime.label),
        ("main", _fmt(report.main) + "   [proven, t in (0, sqrt(3)/L)]"),
        ("nesterov", _fmt(report.nesterov) + "   [proven, t in (0, 2/L)]"),
        ("drori", _fmt(report.drori) + "   [proven, t in (0, 1/L]]"),
        ("taylor", _fmt(report.taylor) + "   [claimed, t = 1/L]"),
        ("conjecture", _fmt(report.conjecture) + f"   [{bounds.CONJECTURE_TAG}, t in (0, 2/L)]"),
    ]
    out.write(_table(rows) + "\n")
    return EXIT_OK


def _closed_form(spec, schedule):
    try:
        return bounds.bound_main(spec, schedule)
    except RegimeError:
        return None


def cmd_pep_solve(args, out) -> int:
    spec, schedule = _spec(args), _schedule(args)
    program = assemble_pep(spec, schedule)
    sol = solve(program, _solve_options(args))
    closed = _closed_form(spec, schedule)
    diff = None if closed is None else abs(sol.sqrt_ell - closed)
    if args.json:
        d = sol.to_dict()
        d.update(sdp_value=sol.sqrt_ell, closed_form=closed, abs_diff=diff, iterations=sol.iterations)
        out.write(_dump(d) + "\n")
        return EXIT_OK
    rows = [
        ("status", sol.status.value),
        ("sdp_value", _fmt(sol.sqrt_ell)),
        ("closed_form", _fmt(closed)),
        ("abs_diff", "-" if diff is None else f"{diff:.3e}"),
        ("gap", f"{sol.gap:.3e}"),
        ("iterations", str(sol.iterations)),
    ]
    out.write(_table(rows) + "\n")
    return EXIT_OK


def cmd_certify(args, out) -> int:
    spec, schedule = _spec(args), _schedule(args)
    if spec.delta <= 0:
        raise UsageError("certify needs --delta > 0")
    cert = build_certificate(spec, schedule)
    report = verify_certificate(cert, spec, schedule, q_tol=args.q_tol)
    if args.json:
        d = report.to_dict(spec, schedule)
        d["certificate"] = cert.to_dict()
        out.write(_dump(d) + "\n")
    else:
        rows = [
            ("verified", str(report.verified)),
            ("certified_bound", _fmt(report.certified_bound)),
            ("multipliers_nonneg", str(report.multipliers_nonneg)),
            ("sigma_sums_to_one", str(report.sigma_sums_to_one)),
            ("linear_terms_vanish", f"{report.linear_terms_vanish} (max {report.max_linear_residual:.2e})"),
            ("quadratic_matches_Q", f"{report.quadratic_matches_Q} (max {report.max_quadratic_mismatch:.2e})"),
            ("residual_nsd", f"{report.residual_nsd} (top eig {report.max_eigenvalue:.2e})"),
        ]
        out.write(_table(rows) + "\n")
    return EXIT_OK if report.verified else EXIT_CHECK_FAILED


def cmd_tight(args, out) -> int:
    spec, schedule = _spec(args), _schedule(args)
    if spec.delta <= 0:
        raise UsageError("tight needs --delta > 0")
    inst = build_tight_instance(spec, schedule)
    if args.out:
        Path(args.out).write_text(inst.f.to_json() + "\n")
    if args.triples_out:
        Path(args.triples_out).write_text(export_triples(inst).to_json() + "\n")
    if args.trajectory_out:
        Path(args.trajectory_out).write_text(run_gd(inst.f, inst.x1, schedule).to_csv())
    result = {"U": inst.U, "x1": inst.x1, "anchors": inst.l.tolist(), "f_values": inst.f_values.tolist()}
    if args.simulate:
        result.update(attainment_check(spec, schedule, tol=args.tol).to_dict())
    if args.json:
        if not args.out:
            result["function"] = inst.f.to_dict()
        out.write(_dump(result) + "\n")
        return EXIT_OK
    rows = [("U", _fmt(inst.U)), ("x1", _fmt(inst.x1)), ("anchors", " ".join(_fmt(v) for v in inst.l))]
    if args.simulate:
        rows += [("bound", _fmt(result["bound"])), ("attained", _fmt(result["attained"])), ("exact", str(result["exact"]))]
    if args.out:
        rows.append(("written", args.out))
    out.write(_table(rows) + "\n")
    if args.simulate and not result["exact"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


@dataclass(frozen=True)
class SweepGrid:
    param: str  # "step", "N" or "delta"
    values: tuple

    def __post_init__(self):
        if self.param not in ("step", "N", "delta"):
            raise UsageError(f"unknown sweep parameter {self.param!r}")
        if not self.values:
            raise UsageError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise UsageError("sweep values must be strictly increasing")

    @property
    def column(self) -> str:
        return "t" if self.param == "step" else self.param

    @classmethod
    def linspace(cls, param: str, start: float, stop: float, points: int) -> "SweepGrid":
        if points < 1:
            raise UsageError("--points must be positive")
        vals = np.linspace(start, stop, points).tolist()
        if param == "N":
            vals = [int(round(v)) for v in vals]
        return cls(param, tuple(vals))


def sweep_rows(grid: SweepGrid, args, options: SolveOptions | None, sdp: bool = True) -> list[dict]:
    rows = []
    for v in grid.values:
        L, delta, t, N = args.L, args.delta, args.t_const, args.N
        if grid.param == "step":
            t = v
        elif grid.param == "N":
            N = v
        else:
            delta = v
        spec = SmoothProblemSpec(L, delta, args.f_star)
        schedule = StepSchedule.constant(t, N)
        rep = bounds.bound_report(spec, schedule)
        row = {
            grid.column: v,
            "bound_main": rep.main,
            "bound_nesterov": rep.nesterov,
            "bound_drori": rep.drori,
            "bound_taylor": rep.taylor,
            "bound_conjecture": None if rep.conjecture is None else float(rep.conjecture),
            "sdp_value": None,
            "sdp_gap": None,
        }
        if sdp and rep.regime is not RegimeClass.OUTSIDE:
            try:
                sol = solve(assemble_pep(spec, schedule), options)
                row["sdp_value"], row["sdp_gap"] = sol.sqrt_ell, sol.gap
            except SolverError as exc:
                logging.getLogger(__name__).warning("%s = %s: %s", grid.column, v, exc)
        rows.append(row)
    return rows


def sweep_csv(grid: SweepGrid, rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([grid.column, *SWEEP_COLUMNS])
    for row in rows:
        key = row[grid.column]
        w.writerow([str(key) if grid.param == "N" else repr(float(key)), *(_cell(row[c]) for c in SWEEP_COLUMNS)])
    return buf.getvalue()


def cmd_sweep(args, out) -> int:
    _spec(args)
    if args.steps is not None:
        raise UsageError("sweep works on constant schedules; use --t-const/--N")
    if args.values:
        try:
            vals = [float(v) for v in args.values.split(",")]
        except ValueError:
            raise UsageError(f"--values must be comma-separated numbers, got {args.values!r}")
        if args.param == "N":
            vals = [int(v) for v in vals]
        grid = SweepGrid(args.param, tuple(vals))
    else:
        if args.start is None or args.stop is None:
            raise UsageError("give --from/--to/--points or --values")
        grid = SweepGrid.linspace(args.param, args.start, args.stop, args.points)
    if args.param != "step" and args.t_const is None:
        raise UsageError("--t-const is required unless sweeping the step")
    if args.param != "N" and args.N is None:
        raise UsageError("--N is required unless sweeping N")
    try:
        rows = sweep_rows(grid, args, _solve_options(args), sdp=not args.no_sdp)
    except ValueError as exc:
        raise UsageError(str(exc))
    text = sweep_csv(grid, rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_check_interp(args, out) -> int:
    try:
        triples = TripleSet.from_json(Path(getattr(args, "in")).read_text())
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read triples: {exc}")
    report = check_interpolation(triples, args.tol)
    if args.json:
        out.write(_dump(report.to_dict()) + "\n")
    else:
        rows = [("ok", str(report.ok)), ("pairs", str(len(triples) * (len(triples) - 1))), ("worst", _fmt(report.worst))]
        if report.violations:
            i, j, r = report.violations[0]
            rows.append(("worst_pair", f"({i}, {j}) residual {r:.6g}"))
            rows.append(("violations", str(len(report.violations))))
        out.write(_table(rows) + "\n")
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


# --- parser -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pepgrad", description="Worst-case rates of fixed-step gradient descent on L-smooth functions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", help="closed-form bounds")
    _add_problem_flags(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("pep-solve", help="solve the performance-estimation SDP")
    _add_problem_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_pep_solve)

    p = sub.add_parser("certify", help="build and verify the dual certificate")
    _add_problem_flags(p)
    p.add_argument("--q-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("tight", help="build the worst-case function")
    _add_problem_flags(p)
    p.add_argument("--out", help="write the piecewise quadratic as JSON")
    p.add_argument("--triples-out", help="write the iterate triples as JSON")
    p.add_argument("--trajectory-out", help="write the gradient-descent trajectory as CSV")
    p.add_argument("--simulate", action="store_true", help="run gradient descent and compare with the bound")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_tight)

    p = sub.add_parser("sweep", help="bounds (and SDP values) over a parameter grid, as CSV")
    _add_problem_flags(p)
    _add_solver_flags(p)
    p.add_argument("--param", choices=("step", "N", "delta"), default="step")
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--values", help="explicit comma-separated grid instead of --from/--to/--points")
    p.add_argument("--no-sdp", action="store_true")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check-interp", help="check interpolation conditions of a triple file")
    p.add_argument("--in", required=True, help="triples JSON")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_interp)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"pepgrad: error: {exc}\n")
        return EXIT_USAGE
    except RegimeError as exc:
        err.write(f"pepgrad: regime error: {exc}\n")
        return EXIT_REGIME
    except SolverError as exc:
        err.write(f"pepgrad: solver failure: {exc}\n")
        return EXIT_SOLVER
    except PepError as exc:
        err.write(f"pepgrad: error: {exc}\n")
        return EXIT_USAGE


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
