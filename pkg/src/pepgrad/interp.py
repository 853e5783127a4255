"""Interpolation conditions for L-smooth functions on finite triple sets."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import TOL_EQ, DimensionMismatch, IterateTriple, NotInterpolable


@dataclass(frozen=True)
class TripleSet:
    triples: tuple[IterateTriple, ...]
    L: float

    def __init__(self, triples: Sequence[IterateTriple], L: float):
        triples = tuple(triples)
        if not triples:
            raise ValueError("a triple set needs at least one triple")
        if not L > 0:
            raise ValueError(f"L must be positive, got {L!r}")
        dims = {tr.dim for tr in triples}
        if len(dims) != 1:
            raise DimensionMismatch(f"triples have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "triples", triples)
        object.__setattr__(self, "L", float(L))

    def __len__(self):
        return len(self.triples)

    @property
    def dim(self) -> int:
        return self.triples[0].dim

    def to_dict(self) -> dict:
        return {"L": self.L, "triples": [tr.to_dict() for tr in self.triples]}

    @classmethod
    def from_dict(cls, d: dict) -> "TripleSet":
        return cls([IterateTriple.from_dict(t) for t in d["triples"]], d["L"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TripleSet":
        return cls.from_dict(json.loads(text))


def interp_residual(a: IterateTriple, b: IterateTriple, L: float) -> float:
    """Slack of the interpolation inequality for the ordered pair (a, b).

    Nonnegative iff the pair is consistent with some L-smooth function.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension {a.dim} != {b.dim}")
    dx = a.x - b.x
    dg = a.g - b.g
    w = dx - dg / L
    return float(a.f - b.f - b.g @ dx - (dg @ dg) / (2 * L) + (L / 4) * (w @ w))


@dataclass
class InterpolationReport:
    ok: bool
    violations: list[tuple[int, int, float]] = field(default_factory=list)
    worst: float | None = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "worst": self.worst,
            "violations": [{"i": i, "j": j, "residual": r} for i, j, r in self.violations],
        }


def check_interpolation(triples: TripleSet, tol: float = TOL_EQ) -> InterpolationReport:
    """Evaluate every ordered pair i != j; a pair violates when its residual < -tol.

    Violations are listed with the most negative residual first.
    """
    items = triples.triples
    worst = None
    violations = []
    for i, a in enumerate(items):
        for j, b in enumerate(items):
            if i == j:
                continue
            r = interp_residual(a, b, triples.L)
            if worst is None or r < worst:
                worst = r
            if r < -tol:
                violations.append((i, j, r))
    violations.sort(key=lambda v: (v[2], v[0], v[1]))
    return InterpolationReport(ok=not violations, violations=violations, worst=worst)


@dataclass(frozen=True)
class ExtensionMinimum:
    f_min: float
    x_min: np.ndarray
    witness_index: int


def extension_minimum(triples: TripleSet, tol: float = TOL_EQ) -> ExtensionMinimum:
    """Minimum value and a minimiser of the minimal L-smooth extension.

    f_min = min_i f^i - ||g^i||^2 / (2L), attained at x^i - g^i / L; ties go to
    the lowest index.
    """
    report = check_interpolation(triples, tol)
    if not report.ok:
        i, j, r = report.violations[0]
        raise NotInterpolable(f"pair ({i}, {j}) violates interpolation by {r:.3e}")
    L = triples.L
    values = [tr.f - (tr.g @ tr.g) / (2 * L) for tr in triples.triples]
    k = int(np.argmin(values))  # first occurrence
    best = triples.triples[k]
    return ExtensionMinimum(f_min=float(values[k]), x_min=best.x - best.g / L, witness_index=k)


def descent_lemma_check(triple: IterateTriple, f_at_step: float, L: float, tol: float = TOL_EQ) -> bool:
    """True iff f(x - g/L) <= f(x) - ||g||^2/(2L) up to ``tol``."""
    return bool(f_at_step <= triple.f - (triple.g @ triple.g) / (2 * L) + tol)
