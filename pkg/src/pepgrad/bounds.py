"""Closed-form worst-case bounds on min_k ||grad f(x^k)|| for fixed-step
gradient descent, and the step length that minimises the main bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import (
    SQRT3,
    RegimeClass,
    RegimeError,
    SmoothProblemSpec,
    StepSchedule,
    classify_regime,
    require_regime,
)

CONJECTURE_TAG = "CONJECTURE"


class ConjecturalBound(float):
    """A float that carries the fact that it is not a proven bound."""

    proven = False
    tag = CONJECTURE_TAG

    def __repr__(self):
        return f"ConjecturalBound({float(self)!r})"


def per_step_weight(t: float, L: float) -> float:
    """min(-L^2 t^3 + 4t, -L t^2 + 4t); the first branch is active for t >= 1/L."""
    return min(-L * L * t**3 + 4 * t, -L * t * t + 4 * t)


def weight_sum(schedule: StepSchedule, L: float) -> float:
    """H(t): the sum of per-step weights."""
    return math.fsum(per_step_weight(t, L) for t in schedule)


def bound_main(spec: SmoothProblemSpec, schedule: StepSchedule) -> float:
    require_regime(schedule, spec.L, RegimeClass.MAIN_THEOREM, "the main bound")
    return math.sqrt(4 * spec.delta / (weight_sum(schedule, spec.L) + 2 / spec.L))


def bound_taylor(spec: SmoothProblemSpec, N: int) -> float:
    """sqrt(4 L delta / (3N)), stated for the constant step 1/L."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N!r}")
    return math.sqrt(4 * spec.L * spec.delta / (3 * N))


def bound_drori(spec: SmoothProblemSpec, schedule: StepSchedule) -> float:
    require_regime(schedule, spec.L, RegimeClass.UNIT_OR_BELOW, "bound_drori")
    L = spec.L
    denom = math.fsum(t * (4 - L * t) for t in schedule)
    return math.sqrt(4 * spec.delta / denom)


def bound_nesterov(spec: SmoothProblemSpec, schedule: StepSchedule) -> float:
    require_regime(schedule, spec.L, RegimeClass.CONJECTURE, "bound_nesterov")
    L = spec.L
    denom = math.fsum(t * (1 - L * t / 2) for t in schedule) + 1 / (2 * L)
    return math.sqrt(spec.delta / denom)


def bound_conjecture(spec: SmoothProblemSpec, schedule: StepSchedule) -> ConjecturalBound:
    """Conjectured (unproven) bound for steps in (0, 2/L); drops the 2/L term."""
    require_regime(schedule, spec.L, RegimeClass.CONJECTURE, "the conjectured bound")
    return ConjecturalBound(math.sqrt(4 * spec.delta / weight_sum(schedule, spec.L)))


def bound_b3(spec: SmoothProblemSpec, N: int) -> float:
    """The main bound at the optimal constant step 2/(sqrt(3) L)."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N!r}")
    return math.sqrt(6 * SQRT3 * spec.L * spec.delta / (8 * N + 3 * SQRT3))


def optimal_step(L: float) -> float:
    if L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    return 2 / (SQRT3 * L)


def _is_unit_schedule(schedule: StepSchedule, L: float) -> bool:
    return all(math.isclose(t * L, 1.0, rel_tol=1e-12, abs_tol=0.0) for t in schedule)


@dataclass(frozen=True)
class BoundReport:
    """Every closed-form bound applicable to one (spec, schedule) pair.

    A field is None when the schedule lies outside that bound's regime.
    ``conjecture`` is never a proven bound.
    """

    regime: RegimeClass
    nesterov: Optional[float] = None
    taylor: Optional[float] = None
    drori: Optional[float] = None
    main: Optional[float] = None
    conjecture: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.label,
            "nesterov": self.nesterov,
            "taylor": self.taylor,
            "drori": self.drori,
            "main": self.main,
            "conjecture": None if self.conjecture is None else float(self.conjecture),
            "conjecture_status": CONJECTURE_TAG,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        regime = next(r for r in RegimeClass if r.label == d["regime"])
        conj = d.get("conjecture")
        return cls(
            regime=regime,
            nesterov=d.get("nesterov"),
            taylor=d.get("taylor"),
            drori=d.get("drori"),
            main=d.get("main"),
            conjecture=None if conj is None else ConjecturalBound(conj),
        )


def _maybe(fn, *args):
    try:
        return fn(*args)
    except RegimeError:
        return None


def bound_report(spec: SmoothProblemSpec, schedule: StepSchedule) -> BoundReport:
    """Batch path: never raises on regime violations, leaves fields empty instead."""
    return BoundReport(
        regime=classify_regime(schedule, spec.L),
        nesterov=_maybe(bound_nesterov, spec, schedule),
        taylor=bound_taylor(spec, schedule.N) if _is_unit_schedule(schedule, spec.L) else None,
        drori=_maybe(bound_drori, spec, schedule),
        main=_maybe(bound_main, spec, schedule),
        conjecture=_maybe(bound_conjecture, spec, schedule),
    )
