"""Univariate worst-case function on which gradient descent attains the main
bound exactly, plus a plain gradient-descent simulator."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import bound_main
from .core import (
    TOL_EQ,
    IterateTriple,
    OracleError,
    RegimeClass,
    SmoothProblemSpec,
    StepSchedule,
    require_regime,
)
from .interp import TripleSet


@dataclass(frozen=True)
class Segment:
    """f(x) = p x^2 + q x + r on [lo, hi]; lo/hi may be -inf/+inf."""

    lo: float
    hi: float
    p: float
    q: float
    r: float

    def __post_init__(self):
        for name in ("lo", "hi", "p", "q", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def value(self, x: float) -> float:
        return (self.p * x + self.q) * x + self.r

    def derivative(self, x: float) -> float:
        return 2 * self.p * x + self.q

    def to_dict(self) -> dict:
        enc = lambda v: None if math.isinf(v) else v  # noqa: E731
        return {"lo": enc(self.lo), "hi": enc(self.hi), "p": self.p, "q": self.q, "r": self.r}

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        lo = -math.inf if d["lo"] is None else d["lo"]
        hi = math.inf if d["hi"] is None else d["hi"]
        return cls(lo, hi, d["p"], d["q"], d["r"])


def _shifted(a: float, c: float, U: float, fc: float) -> tuple[float, float, float]:
    """Coefficients of a (x - c)^2 + U (x - c) + fc in powers of x."""
    return a, U - 2 * a * c, a * c * c - U * c + fc


@dataclass(frozen=True)
class PiecewiseQuadratic:
    segments: tuple[Segment, ...]
    L: float

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("need at least one segment")
        if segs[0].lo != -math.inf or segs[-1].hi != math.inf:
            raise ValueError("segments must cover the real line")
        for a, b in zip(segs, segs[1:]):
            if a.hi != b.lo:
                raise ValueError(f"segments must be contiguous, got hi={a.hi} then lo={b.lo}")
        for s in segs:
            if not s.lo < s.hi:
                raise ValueError(f"empty segment [{s.lo}, {s.hi}]")
            if abs(2 * s.p) > self.L * (1 + 1e-12):
                raise ValueError(f"curvature {2 * s.p} exceeds L = {self.L}")
        object.__setattr__(self, "segments", segs)

    @property
    def breakpoints(self) -> list[float]:
        return [s.hi for s in self.segments[:-1]]

    def locate(self, x: float) -> int:
        """Index of the segment owning x: half-open [lo, hi), last one closed."""
        for k, s in enumerate(self.segments):
            if x < s.hi:
                return k
        return len(self.segments) - 1

    def evaluate(self, x: float) -> tuple[float, float]:
        s = self.segments[self.locate(float(x))]
        return s.value(x), s.derivative(x)

    def __call__(self, x: float) -> tuple[float, float]:
        return self.evaluate(x)

    def junction_mismatch(self) -> list[tuple[float, float, float]]:
        """(breakpoint, value jump, derivative jump) at every junction."""
        out = []
        for a, b in zip(self.segments, self.segments[1:]):
            x = a.hi
            out.append((x, abs(a.value(x) - b.value(x)), abs(a.derivative(x) - b.derivative(x))))
        return out

    def to_dict(self) -> dict:
        return {"L": self.L, "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseQuadratic":
        return cls(tuple(Segment.from_dict(s) for s in d["segments"]), d["L"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseQuadratic":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TightInstance:
    f: PiecewiseQuadratic
    U: float
    l: np.ndarray  # anchors l_1..l_{N+2}, l_{N+2} = 0
    f_values: np.ndarray  # f^1..f^{N+1}
    x1: float
    t_aug: tuple[float, ...]  # t_1..t_N, 1/L

    @property
    def N(self) -> int:
        return len(self.t_aug) - 1


def build_tight_instance(spec: SmoothProblemSpec, schedule: StepSchedule) -> TightInstance:
    """Piecewise quadratic with gradient U at every iterate x^i = l_i.

    Around each anchor l_i sits a convex piece (L/2)(x-l_i)^2 + U(x-l_i) + f^i,
    joined to the next anchor by a concave piece, and the bottom piece
    (L/2) x^2 puts the minimum 0 at x = 0.
    """
    L = spec.L
    require_regime(schedule, L, RegimeClass.UNIT_OR_BELOW, "the tight instance")
    if spec.delta <= 0:
        raise ValueError("the tight instance needs delta > 0")
    U = bound_main(spec, schedule)
    N = schedule.N
    t_aug = np.append(schedule.as_array(), 1.0 / L)
    # l_i = U * sum_{k >= i} t_k, i = 1..N+1, and l_{N+2} = 0
    l = np.append(U * np.cumsum(t_aug[::-1])[::-1], 0.0)
    w = -L * t_aug[:N] ** 2 + 4 * t_aug[:N]
    f_values = spec.delta - (U * U / 4) * np.concatenate([[0.0], np.cumsum(w)])

    # build right to left then reverse; index i below is 0-based (anchor l[i])
    segs = []
    upper = math.inf
    for i in range(N + 1):
        lower = (l[i] + l[i + 1]) / 2
        segs.append(Segment(lower, upper, *_shifted(L / 2, l[i], U, f_values[i])))
        if i < N:
            segs.append(Segment(l[i + 1], lower, *_shifted(-L / 2, l[i + 1], U, f_values[i + 1])))
            upper = l[i + 1]
    segs.append(Segment(-math.inf, l[N] / 2, L / 2, 0.0, 0.0))
    f = PiecewiseQuadratic(tuple(reversed(segs)), L)
    return TightInstance(f=f, U=U, l=l, f_values=f_values, x1=float(l[0]), t_aug=tuple(t_aug))


def _gd_oracle_call(oracle, x):
    try:
        value, grad = oracle(x)
    except OracleError:
        raise
    except Exception as exc:
        raise OracleError(f"oracle failed at x = {x!r}: {exc}") from exc
    return float(value), np.atleast_1d(np.asarray(grad, dtype=float))


@dataclass
class Trajectory:
    iterates: list[IterateTriple]
    min_grad_norm: float
    argmin_index: int  # 0-based position in ``iterates``

    def to_csv(self) -> str:
        """Columns k, x, f, g; vector entries are joined with spaces."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "x", "f", "g"])
        for k, tr in enumerate(self.iterates, start=1):
            w.writerow([k, _fmt_vec(tr.x), repr(tr.f), _fmt_vec(tr.g)])
        return buf.getvalue()


def _fmt_vec(v: np.ndarray) -> str:
    return " ".join(repr(float(a)) for a in v)


def run_gd(
    oracle: Callable[[np.ndarray | float], tuple[float, object]],
    x1,
    schedule: StepSchedule | Sequence[float],
) -> Trajectory:
    """x^{k+1} = x^k - t_k grad f(x^k) for k = 1..N; records x^1..x^{N+1}.

    ``oracle`` maps a point to (value, gradient). Scalar starting points are
    passed to the oracle as Python floats, vectors as 1-d arrays.
    """
    steps = schedule.steps if isinstance(schedule, StepSchedule) else tuple(schedule)
    scalar = np.ndim(x1) == 0
    x = np.atleast_1d(np.asarray(x1, dtype=float))
    iterates = []
    for k in range(len(steps) + 1):
        value, g = _gd_oracle_call(oracle, float(x[0]) if scalar else x.copy())
        if g.shape != x.shape:
            raise OracleError(f"gradient shape {g.shape} does not match point shape {x.shape}")
        iterates.append(IterateTriple(x, g, value))
        if k < len(steps):
            x = x - steps[k] * g
    norms = [float(np.linalg.norm(tr.g)) for tr in iterates]
    j = int(np.argmin(norms))
    return Trajectory(iterates=iterates, min_grad_norm=norms[j], argmin_index=j)


@dataclass(frozen=True)
class Attainment:
    bound: float
    attained: float
    exact: bool

    def to_dict(self) -> dict:
        return {"bound": self.bound, "attained": self.attained, "exact": self.exact}


def attainment_check(spec: SmoothProblemSpec, schedule: StepSchedule, tol: float = TOL_EQ) -> Attainment:
    inst = build_tight_instance(spec, schedule)
    traj = run_gd(inst.f, inst.x1, schedule)
    bound = bound_main(spec, schedule)
    attained = traj.min_grad_norm
    return Attainment(bound=bound, attained=attained, exact=abs(attained - bound) <= tol * max(1.0, bound))


def export_triples(instance: TightInstance) -> TripleSet:
    """(l_i, U, f^i) for i = 1..N+1."""
    n = instance.N + 1
    return TripleSet(
        [IterateTriple([instance.l[i]], [instance.U], instance.f_values[i]) for i in range(n)],
        instance.f.L,
    )
