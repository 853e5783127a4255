"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``acceptance_log`` and printed in the pytest
terminal summary, so they show under normal output capture.
"""
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from acceptance_log import LINES
from oracles import p4_direct
from pepgrad.bounds import (
    bound_b3,
    bound_conjecture,
    bound_drori,
    bound_main,
    bound_nesterov,
    bound_taylor,
)
from pepgrad.certify import build_certificate, verify_certificate
from pepgrad.cli import main as cli_main
from pepgrad.core import SQRT3, SmoothProblemSpec, StepSchedule
from pepgrad.interp import check_interpolation, extension_minimum
from pepgrad.pep import assemble_pep, gram
from pepgrad.sdp import solve
from pepgrad.tight import attainment_check, build_tight_instance, export_triples, run_gd

SWEEP_CSV = Path(__file__).resolve().parent.parent / "artifacts" / "conjecture_sweep.csv"


def report(number, title, ok, detail=""):
    line = f"[acceptance {number:>2}] {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  ({detail})"
    LINES.append(line)
    assert ok, line


def _reference_instance(spec, schedule, anchors, bound):
    inst = build_tight_instance(spec, schedule)
    traj = run_gd(inst.f, inst.x1, schedule)
    xs = [round(t.x[0], 4) for t in traj.iterates]
    att = attainment_check(spec, schedule)
    ok = (
        abs(bound_main(spec, schedule) - bound) <= 5e-8
        and [round(v, 4) for v in inst.l[:-1]] == anchors
        and xs == anchors
        and att.exact
        and abs(att.attained - att.bound) <= 1e-9 * att.bound
    )
    return ok, f"bound {att.bound:.7f}, attained {att.attained:.7f}"


def test_01_unit_step_four_iterations():
    ok, detail = _reference_instance(
        SmoothProblemSpec(1, 2), StepSchedule.constant(1, 4), [3.7796, 3.0237, 2.2678, 1.5119, 0.7559], math.sqrt(4 / 7)
    )
    report(1, "L=1, delta=2, t=1, N=4: bound, breakpoints, attainment", ok, detail)


def test_02_half_step_three_iterations():
    ok, detail = _reference_instance(
        SmoothProblemSpec(2, 4), StepSchedule.constant(0.5, 3), [3.4112, 2.5584, 1.7056, 0.8528], 1.7056057
    )
    report(2, "L=2, delta=4, t=0.5, N=3: bound, iterates, attainment", ok, detail)


def test_03_unit_step_closed_form():
    ok = True
    for N in range(1, 21):
        spec = SmoothProblemSpec(1.3, 0.7)
        b = bound_main(spec, StepSchedule.constant(1 / spec.L, N))
        exact = math.sqrt(4 * spec.L * spec.delta / (3 * N + 2))
        ok &= math.isclose(b, exact, rel_tol=1e-14) and b < bound_taylor(spec, N)
    big = 10**5
    unit = SmoothProblemSpec(1, 1)
    c_unit = big * bound_main(unit, StepSchedule.constant(1, big)) ** 2
    c_opt = big * bound_b3(unit, big) ** 2
    ok &= round(c_unit, 4) == 1.3333 and round(c_opt, 4) == 1.2990
    report(3, "unit-step closed form below bound_taylor; constants 4/3 vs 6 sqrt(3)/8", ok, f"{c_unit:.4f} vs {c_opt:.4f}")


def test_04_sdp_equals_closed_form():
    worst = 0.0
    for N in range(1, 6):
        for t in (0.25, 0.5, 0.75, 1.0):
            spec, sched = SmoothProblemSpec(1, 1), StepSchedule.constant(t, N)
            sol = solve(assemble_pep(spec, sched))
            worst = max(worst, abs(sol.sqrt_ell - bound_main(spec, sched)))
    report(4, "solver matches the closed form on 20 instances", worst <= 1e-5, f"max diff {worst:.2e}")


def test_05_certificate_replay():
    rng = np.random.default_rng(5)
    cases, failures = [], 0
    for _ in range(100):
        N = int(rng.integers(1, 11))
        L = float(rng.choice([0.5, 1.0, 4.0]))
        spec, sched = SmoothProblemSpec(L, 1.0), StepSchedule(rng.uniform(0.05, SQRT3 - 0.05, N) / L)
        rep = verify_certificate(build_certificate(spec, sched), spec, sched, q_tol=1e-10)
        failures += not rep.verified
        cases.append((spec, sched, rep.certified_bound))
    slack = math.inf
    for spec, sched, cert in cases[::5]:
        slack = min(slack, cert - solve(assemble_pep(spec, sched)).sqrt_ell)
    ok = failures == 0 and slack >= -1e-5
    report(5, "certificate replay on 100 schedules, weak duality on 20", ok, f"{failures} failed, min slack {slack:.2e}")


def test_06_dominance():
    rng = np.random.default_rng(6)
    m_nest = m_drori = math.inf
    for _ in range(1000):
        N = int(rng.integers(1, 21))
        L = float(rng.uniform(0.1, 10))
        spec = SmoothProblemSpec(L, float(rng.uniform(0.01, 100)))
        wide = StepSchedule(rng.uniform(1e-3, SQRT3 - 1e-9, N) / L)
        unit = StepSchedule(rng.uniform(1e-3, 1, N) / L)
        m_nest = min(m_nest, bound_nesterov(spec, wide) - bound_main(spec, wide))
        m_drori = min(m_drori, bound_drori(spec, unit) - bound_main(spec, unit))
    ok = m_nest >= -1e-12 and m_drori >= -1e-12
    report(6, "main bound below the two classical bounds on 1000 schedules", ok, f"margins {m_nest:.2e}, {m_drori:.2e}")


def test_07_optimal_step():
    ok, detail = True, []
    for L in (1.0, 2.0):
        spec = SmoothProblemSpec(L, 1.0)
        h = (SQRT3 / L) / (10**5 + 1)
        ts = h * np.arange(1, 10**5 + 1)
        vals = [bound_main(spec, StepSchedule([t, t, t])) for t in ts]
        best = ts[int(np.argmin(vals))]
        target = 2 / (SQRT3 * L)
        ok &= abs(best - target) <= h
        detail.append(f"L={L:g}: {best:.7f} vs {target:.7f}")
    report(7, "grid argmin of the main bound at 2/(sqrt(3) L)", ok, "; ".join(detail))


def test_08_interpolation_round_trip():
    rng = np.random.default_rng(8)
    worst_res, worst_f, worst_x = math.inf, 0.0, 0.0
    for _ in range(20):
        N = int(rng.integers(1, 9))
        L = float(rng.uniform(0.5, 4))
        spec = SmoothProblemSpec(L, float(rng.uniform(0.5, 5)))
        ts = export_triples(build_tight_instance(spec, StepSchedule(rng.uniform(1e-3, 1, N) / L)))
        worst_res = min(worst_res, check_interpolation(ts, 1e-10).worst)
        m = extension_minimum(ts)
        worst_f = max(worst_f, abs(m.f_min))
        worst_x = max(worst_x, abs(m.x_min[0]))
    ok = worst_res >= -1e-10 and worst_f <= 1e-10 and worst_x <= 1e-8
    report(8, "worst-case triples interpolate, minimum at the origin", ok,
           f"min residual {worst_res:.1e}, |f*| {worst_f:.1e}, |x*| {worst_x:.1e}")


def _direct(c, steps, L, delta, g, f, ell):
    if c.kind == "pair":
        return p4_direct(*c.index, steps, L, g, f)
    if c.kind == "stationarity":
        k = c.index[0] - 1
        return f[k] - g[k] @ g[k] / (2 * L)
    if c.kind == "gap":
        return delta - f[0]
    k = c.index[0] - 1
    return g[k] @ g[k] - ell


def test_09_assembly_oracle():
    rng = np.random.default_rng(9)
    worst = 0.0
    L, delta = 1.7, 2.5
    for N in range(1, 5):
        steps = rng.uniform(0.05, 1.9, N) / L
        prog = assemble_pep(SmoothProblemSpec(L, delta), StepSchedule(steps))
        for _ in range(100):
            g = rng.standard_normal((N + 1, int(rng.integers(1, N + 3))))
            f, ell = rng.standard_normal(N + 1), float(rng.standard_normal())
            G = gram(g)
            for c in prog.constraints:
                lifted = c.evaluate(G, f, 0.0, ell)
                direct = _direct(c, steps, L, delta, g, f, ell)
                worst = max(worst, abs(lifted - direct) / max(1.0, abs(direct)))
    report(9, "lifted constraints match direct evaluation", worst <= 1e-12, f"max rel err {worst:.1e}")


def test_10_conjecture_sweep():
    SWEEP_CSV.parent.mkdir(exist_ok=True)
    rows = []
    for N in (2, 4):
        out = io.StringIO()
        code = cli_main(["sweep", "--param", "step", "--from", "1.05", "--to", "1.95", "--points", "19",
                         "--N", str(N)], out, io.StringIO())
        assert code == 0
        for r in csv.DictReader(io.StringIO(out.getvalue())):
            rows.append({"N": N, **r})
    with SWEEP_CSV.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    above_conj = above_main = 0
    for r in rows:
        sdp = float(r["sdp_value"])
        above_conj += sdp > float(r["bound_conjecture"]) + 1e-5
        above_main += r["bound_main"] != "" and sdp > float(r["bound_main"]) + 1e-5
    ok = above_conj == 0 and above_main == 0
    report(10, "conjecture sweep (report only)", ok,
           f"{len(rows)} rows -> {SWEEP_CSV.name}; above conjecture {above_conj}, above main {above_main}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
