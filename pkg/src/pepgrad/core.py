"""Shared domain types, validation and numeric policy."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL_EQ = 1e-9

SQRT3 = math.sqrt(3.0)


class PepError(Exception):
    """Base class for all package errors."""


class RegimeError(PepError, ValueError):
    """A step schedule lies outside the validity interval of a result."""


class DimensionMismatch(PepError, ValueError):
    pass


class NotInterpolable(PepError, ValueError):
    pass


class NotPsd(PepError, ValueError):
    pass


class OracleError(PepError, RuntimeError):
    pass


class RegimeClass(enum.IntEnum):
    """Nested step-length regimes, ordered from tightest to loosest."""

    UNIT_OR_BELOW = 0  # all t_k in (0, 1/L]
    MAIN_THEOREM = 1  # all t_k in (0, sqrt(3)/L)
    CONJECTURE = 2  # all t_k in (0, 2/L)
    OUTSIDE = 3

    @property
    def label(self) -> str:
        return _REGIME_LABELS[self]

    @property
    def interval(self) -> str:
        return _REGIME_INTERVALS[self]


_REGIME_LABELS = {
    RegimeClass.UNIT_OR_BELOW: "UnitOrBelow",
    RegimeClass.MAIN_THEOREM: "MainTheorem",
    RegimeClass.CONJECTURE: "Conjecture",
    RegimeClass.OUTSIDE: "Outside",
}

_REGIME_INTERVALS = {
    RegimeClass.UNIT_OR_BELOW: "(0, 1/L]",
    RegimeClass.MAIN_THEOREM: "(0, sqrt(3)/L)",
    RegimeClass.CONJECTURE: "(0, 2/L)",
    RegimeClass.OUTSIDE: "unbounded",
}


@dataclass(frozen=True)
class SmoothProblemSpec:
    """Function class parameters: smoothness ``L``, initial gap ``delta`` and
    the known lower bound ``f_star``."""

    L: float
    delta: float
    f_star: float = 0.0

    def __post_init__(self):
        L, delta, f_star = float(self.L), float(self.delta), float(self.f_star)
        if not (math.isfinite(L) and L > 0):
            raise ValueError(f"L must be positive and finite, got {self.L!r}")
        if not (math.isfinite(delta) and delta >= 0):
            raise ValueError(f"delta must be nonnegative and finite, got {self.delta!r}")
        if not math.isfinite(f_star):
            raise ValueError(f"f_star must be finite, got {self.f_star!r}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "f_star", f_star)


@dataclass(frozen=True)
class StepSchedule:
    """Fixed step lengths t_1..t_N of the gradient method."""

    steps: tuple[float, ...]

    def __init__(self, steps: Sequence[float]):
        steps = tuple(float(t) for t in steps)
        if len(steps) < 1:
            raise ValueError("a schedule needs at least one step")
        for t in steps:
            if not (math.isfinite(t) and t > 0):
                raise ValueError(f"step lengths must be positive and finite, got {t!r}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def constant(cls, t: float, N: int) -> "StepSchedule":
        if int(N) != N or N < 1:
            raise ValueError(f"N must be a positive integer, got {N!r}")
        return cls([t] * int(N))

    @property
    def N(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, k):
        return self.steps[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.steps, dtype=float)

    def scaled(self, c: float) -> "StepSchedule":
        return StepSchedule([c * t for t in self.steps])

    def regime(self, L: float) -> RegimeClass:
        return classify_regime(self, L)


def classify_regime(schedule: StepSchedule, L: float) -> RegimeClass:
    """Tightest nested regime containing every step of ``schedule``.

    Boundaries are decided on the products t_k * L: 1 is included in the unit
    regime, sqrt(3) and 2 are excluded from theirs.
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    tl = max(t * L for t in schedule.steps)
    if tl <= 1.0:
        return RegimeClass.UNIT_OR_BELOW
    if tl < SQRT3:
        return RegimeClass.MAIN_THEOREM
    if tl < 2.0:
        return RegimeClass.CONJECTURE
    return RegimeClass.OUTSIDE


def require_regime(schedule: StepSchedule, L: float, allowed: RegimeClass, what: str) -> RegimeClass:
    """Raise RegimeError unless ``schedule`` lies in ``allowed`` (or tighter)."""
    regime = classify_regime(schedule, L)
    if regime > allowed:
        worst = max(schedule.steps)
        raise RegimeError(
            f"{what} requires every step in {allowed.interval}; "
            f"got t = {worst:.6g} with t*L = {worst * L:.6g}"
        )
    return regime


@dataclass(frozen=True)
class IterateTriple:
    """A point, the gradient there and the function value."""

    x: np.ndarray
    g: np.ndarray
    f: float

    def __init__(self, x, g, f):
        x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
        g = np.atleast_1d(np.asarray(g, dtype=float)).copy()
        if x.ndim != 1 or g.ndim != 1 or x.shape != g.shape:
            raise DimensionMismatch(f"x and g must be vectors of equal length, got {x.shape} and {g.shape}")
        x.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", float(f))

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    def __eq__(self, other):
        if not isinstance(other, IterateTriple):
            return NotImplemented
        return (
            self.f == other.f
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.g, other.g)
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "g": self.g.tolist(), "f": self.f}

    @classmethod
    def from_dict(cls, d: dict) -> "IterateTriple":
        return cls(d["x"], d["g"], d["f"])
