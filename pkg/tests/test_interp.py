import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import quadratic_gd, random_smooth_quadratic
from pepgrad.core import DimensionMismatch, IterateTriple, NotInterpolable, SmoothProblemSpec, StepSchedule
from pepgrad.interp import (
    TripleSet,
    check_interpolation,
    descent_lemma_check,
    extension_minimum,
    interp_residual,
)
from pepgrad.tight import build_tight_instance, export_triples


def test_residual_identical_triple_is_zero():
    a = IterateTriple([0.3, -1.0], [2.0, 0.5], 1.7)
    assert interp_residual(a, a, 2.0) == 0.0


def test_residual_on_half_square():
    # f(x) = x^2 / 2 at x = 0 and x = 1
    a = IterateTriple(0.0, 0.0, 0.0)
    b = IterateTriple(1.0, 1.0, 0.5)
    assert interp_residual(a, b, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert interp_residual(b, a, 1.0) >= 0


def test_residual_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        interp_residual(IterateTriple([0.0], [0.0], 0), IterateTriple([0.0, 1.0], [0.0, 0.0], 0), 1.0)


def test_tripleset_mixed_dimension():
    with pytest.raises(DimensionMismatch):
        TripleSet([IterateTriple([0.0], [0.0], 0), IterateTriple([0.0, 1.0], [0.0, 0.0], 0)], 1.0)


def test_single_triple_ok():
    rep = check_interpolation(TripleSet([IterateTriple(1.0, 2.0, 3.0)], 1.0))
    assert rep.ok and rep.violations == []


def tight_triples(L=1.0, delta=2.0, steps=(1, 1, 1, 1)):
    inst = build_tight_instance(SmoothProblemSpec(L, delta), StepSchedule(steps))
    return export_triples(inst)


@pytest.mark.parametrize("N", range(1, 9))
def test_tight_triples_interpolable(N, rng):
    L = 1.5
    ts = tight_triples(L, 1.0, rng.uniform(0.05, 1.0, N) / L)
    rep = check_interpolation(ts, 1e-10)
    assert rep.ok, rep.violations


def test_lowering_first_value_breaks_interpolation():
    ts = tight_triples()
    tol = 1e-9
    first = ts.triples[0]
    broken = TripleSet([IterateTriple(first.x, first.g, first.f - 10 * tol), *ts.triples[1:]], ts.L)
    rep = check_interpolation(broken, tol)
    assert not rep.ok
    assert rep.violations[0][0] == 0
    residuals = [v[2] for v in rep.violations]
    assert residuals == sorted(residuals)


def test_tight_pairs_are_binding():
    ts = tight_triples()
    rep = check_interpolation(ts)
    assert rep.worst == pytest.approx(0.0, abs=1e-12)


def test_extension_minimum_single():
    m = extension_minimum(TripleSet([IterateTriple(0.0, 1.0, 0.5)], 1.0))
    assert m.f_min == 0.0 and m.x_min.tolist() == [-1.0] and m.witness_index == 0


def test_extension_minimum_tight_instance():
    ts = tight_triples()
    m = extension_minimum(ts)
    assert m.f_min == pytest.approx(0.0, abs=1e-10)
    assert m.witness_index == 4  # x^{N+1}
    assert m.x_min[0] == pytest.approx(0.0, abs=1e-12)


def test_extension_minimum_tie_break():
    tr = IterateTriple([1.0, 2.0], [0.5, 0.0], 1.0)
    one = extension_minimum(TripleSet([tr], 2.0))
    two = extension_minimum(TripleSet([tr, tr], 2.0))
    assert two.witness_index == 0
    assert two.f_min == one.f_min and np.array_equal(two.x_min, one.x_min)


def test_extension_minimum_refuses_non_interpolable():
    bad = TripleSet([IterateTriple(0.0, 0.0, 0.0), IterateTriple(1.0, 0.0, -1.0)], 1.0)
    with pytest.raises(NotInterpolable):
        extension_minimum(bad)


def test_descent_lemma():
    tr = IterateTriple(1.0, 1.0, 0.5)  # x^2/2 at x = 1
    assert descent_lemma_check(tr, 0.0, 1.0)
    assert not descent_lemma_check(tr, 0.0 + 2e-9, 1.0)


def test_descent_lemma_on_tight_instance():
    inst = build_tight_instance(SmoothProblemSpec(1, 2), StepSchedule.constant(1, 4))
    v, g = inst.f(inst.x1)
    after, _ = inst.f(inst.x1 - g / inst.f.L)
    assert descent_lemma_check(IterateTriple(inst.x1, g, v), after, inst.f.L)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 6), st.booleans())
def test_samples_from_smooth_quadratics_interpolate(seed, n, N, convex):
    rng = np.random.default_rng(seed)
    L = 2.0
    H = random_smooth_quadratic(rng, n, L, convex=convex)
    b = rng.standard_normal(n)
    xs = rng.standard_normal((N, n))
    triples = [IterateTriple(x, H @ x + b, 0.5 * x @ H @ x + b @ x) for x in xs]
    ts = TripleSet(triples, L)
    for a in triples:
        for c in triples:
            assert interp_residual(a, c, L) >= -1e-9
    assert check_interpolation(ts).ok


def test_translation_invariance(rng):
    a = IterateTriple(rng.standard_normal(3), rng.standard_normal(3), 0.4)
    b = IterateTriple(rng.standard_normal(3), rng.standard_normal(3), -1.2)
    v = rng.standard_normal(3)
    base = interp_residual(a, b, 1.7)
    shifted = interp_residual(IterateTriple(a.x + v, a.g, a.f + 5), IterateTriple(b.x + v, b.g, b.f + 5), 1.7)
    assert shifted == pytest.approx(base, abs=1e-12)


@pytest.mark.parametrize("c", [0.5, 3])
def test_scaling(c, rng):
    a = IterateTriple(rng.standard_normal(2), rng.standard_normal(2), 0.3)
    b = IterateTriple(rng.standard_normal(2), rng.standard_normal(2), 0.9)
    base = interp_residual(a, b, 1.2)
    scaled = interp_residual(IterateTriple(a.x, c * a.g, c * a.f), IterateTriple(b.x, c * b.g, c * b.f), c * 1.2)
    assert scaled == pytest.approx(c * base, rel=1e-12)


def test_extension_minimum_lower_bounds_values(rng):
    H = random_smooth_quadratic(rng, 3, 1.0)
    xs, gs, fs = quadratic_gd(H, rng.standard_normal(3), rng.standard_normal(3), [0.7, 0.9, 0.3])
    ts = TripleSet([IterateTriple(x, g, f) for x, g, f in zip(xs, gs, fs)], 1.0)
    m = extension_minimum(ts)
    assert all(m.f_min <= tr.f for tr in ts.triples)


def test_json_round_trip():
    ts = tight_triples()
    back = TripleSet.from_json(ts.to_json())
    assert back == ts
