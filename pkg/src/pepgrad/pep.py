"""Performance-estimation program for N steps of fixed-step gradient descent.

Gradients g^1..g^{N+1} are the Gram basis; iterates are eliminated through
x^i = x^1 - sum_{k<i} t_k g^k, so every difference x^i - x^j is a combination
of gradients and x^1 never appears. Indices i, j, k in this module are
1-based, matching the iterate numbering x^1..x^{N+1}.

Each constraint reads

    f_coeff . f + fstar_coeff * f* + const_coeff + ell_coeff * ell + tr(A G) >= 0

and the program maximises ell.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import SmoothProblemSpec, StepSchedule

KINDS = ("pair", "stationarity", "gap", "link")


@dataclass(frozen=True)
class QuadraticConstraint:
    A: np.ndarray
    f_coeff: np.ndarray
    fstar_coeff: float = 0.0
    const_coeff: float = 0.0
    ell_coeff: float = 0.0
    kind: str = "pair"
    index: tuple[int, ...] = ()

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        A = (A + A.T) / 2
        f = np.array(self.f_coeff, dtype=float)
        if f.shape != (A.shape[0],):
            raise ValueError(f"f_coeff must have length {A.shape[0]}, got {f.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        A.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "f_coeff", f)
        object.__setattr__(self, "fstar_coeff", float(self.fstar_coeff))
        object.__setattr__(self, "const_coeff", float(self.const_coeff))
        object.__setattr__(self, "ell_coeff", float(self.ell_coeff))
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))

    def evaluate(self, G, f, f_star: float, ell: float = 0.0) -> float:
        """Left-hand side of the constraint at a (G, f, f*, ell) point."""
        G = np.asarray(G, dtype=float)
        return float(
            np.sum(self.A * G)
            + self.f_coeff @ np.asarray(f, dtype=float)
            + self.fstar_coeff * f_star
            + self.const_coeff
            + self.ell_coeff * ell
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "index": list(self.index),
            "A": self.A.tolist(),
            "f_coeff": self.f_coeff.tolist(),
            "fstar_coeff": self.fstar_coeff,
            "const_coeff": self.const_coeff,
            "ell_coeff": self.ell_coeff,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticConstraint":
        return cls(
            A=d["A"],
            f_coeff=d["f_coeff"],
            fstar_coeff=d["fstar_coeff"],
            const_coeff=d["const_coeff"],
            ell_coeff=d["ell_coeff"],
            kind=d["kind"],
            index=tuple(d["index"]),
        )


def _sym_outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    M = np.outer(u, v)
    return (M + M.T) / 2


def iterate_coefficients(schedule: StepSchedule) -> np.ndarray:
    """Row i-1 holds the gradient coefficients of x^i - x^1."""
    N = schedule.N
    t = schedule.as_array()
    X = np.zeros((N + 1, N + 1))
    for i in range(1, N + 1):
        X[i] = X[i - 1]
        X[i, i - 1] -= t[i - 1]
    return X


def build_pair_constraint(i: int, j: int, schedule: StepSchedule, L: float) -> QuadraticConstraint:
    """Interpolation inequality for the ordered pair (x^i, x^j), lifted to G.

    The A matrix is accumulated from one rank-one term per piece of

        f^i - f^j - <g^j, x^i - x^j> - ||g^i - g^j||^2/(2L)
            + (L/4) ||x^i - x^j - (g^i - g^j)/L||^2
    """
    n = schedule.N + 1
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"pair ({i}, {j}) out of range 1..{n}")
    if i == j:
        raise IndexError(f"pair indices must differ, got ({i}, {j})")
    X = iterate_coefficients(schedule)
    E = np.eye(n)
    dx = X[i - 1] - X[j - 1]
    dg = E[i - 1] - E[j - 1]
    w = dx - dg / L
    A = -_sym_outer(E[j - 1], dx) - np.outer(dg, dg) / (2 * L) + (L / 4) * np.outer(w, w)
    return QuadraticConstraint(A=A, f_coeff=dg, kind="pair", index=(i, j))


def build_stationarity_constraint(k: int, N: int, L: float) -> QuadraticConstraint:
    """f^k - G_kk/(2L) - f* >= 0."""
    n = N + 1
    if not 1 <= k <= n:
        raise IndexError(f"index {k} out of range 1..{n}")
    A = np.zeros((n, n))
    A[k - 1, k - 1] = -1 / (2 * L)
    f = np.zeros(n)
    f[k - 1] = 1.0
    return QuadraticConstraint(A=A, f_coeff=f, fstar_coeff=-1.0, kind="stationarity", index=(k,))


def build_gap_constraint(N: int, delta: float) -> QuadraticConstraint:
    """f* - f^1 + delta >= 0."""
    n = N + 1
    f = np.zeros(n)
    f[0] = -1.0
    return QuadraticConstraint(
        A=np.zeros((n, n)), f_coeff=f, fstar_coeff=1.0, const_coeff=delta, kind="gap"
    )


def build_link_constraint(k: int, N: int) -> QuadraticConstraint:
    """G_kk - ell >= 0."""
    n = N + 1
    if not 1 <= k <= n:
        raise IndexError(f"index {k} out of range 1..{n}")
    A = np.zeros((n, n))
    A[k - 1, k - 1] = 1.0
    return QuadraticConstraint(A=A, f_coeff=np.zeros(n), ell_coeff=-1.0, kind="link", index=(k,))


@dataclass(frozen=True)
class PepProgram:
    """maximise ell subject to ``constraints``; G is PSD of size N+1.

    Constraint order is frozen: pairs (i, j) lexicographic, stationarity k
    ascending, the gap constraint, links k ascending. Dual multipliers are
    reported in this order.
    """

    spec: SmoothProblemSpec
    schedule: StepSchedule
    constraints: tuple[QuadraticConstraint, ...] = field(repr=False)

    @property
    def N(self) -> int:
        return self.schedule.N

    @property
    def gram_dim(self) -> int:
        return self.schedule.N + 1

    def __len__(self):
        return len(self.constraints)

    def indices(self, kind: str) -> list[int]:
        return [m for m, c in enumerate(self.constraints) if c.kind == kind]

    def find(self, kind: str, *index: int) -> int:
        for m, c in enumerate(self.constraints):
            if c.kind == kind and c.index == tuple(index):
                return m
        raise KeyError((kind, index))

    def stacked(self):
        """Constraint data as arrays: A (m, n, n), F (m, n), fstar (m,), const (m,), ell (m,)."""
        cs = self.constraints
        return (
            np.stack([c.A for c in cs]),
            np.stack([c.f_coeff for c in cs]),
            np.array([c.fstar_coeff for c in cs]),
            np.array([c.const_coeff for c in cs]),
            np.array([c.ell_coeff for c in cs]),
        )

    def slacks(self, G, f, ell: float, f_star: float | None = None) -> np.ndarray:
        if f_star is None:
            f_star = self.spec.f_star
        return np.array([c.evaluate(G, f, f_star, ell) for c in self.constraints])

    def to_dict(self) -> dict:
        return {
            "L": self.spec.L,
            "delta": self.spec.delta,
            "f_star": self.spec.f_star,
            "steps": list(self.schedule.steps),
            "N": self.N,
            "gram_dim": self.gram_dim,
            "objective": "maximize ell",
            "constraints": [c.to_dict() for c in self.constraints],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PepProgram":
        return cls(
            spec=SmoothProblemSpec(d["L"], d["delta"], d["f_star"]),
            schedule=StepSchedule(d["steps"]),
            constraints=tuple(QuadraticConstraint.from_dict(c) for c in d["constraints"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def assemble_pep(spec: SmoothProblemSpec, schedule: StepSchedule) -> PepProgram:
    N, L = schedule.N, spec.L
    n = N + 1
    cons = [
        build_pair_constraint(i, j, schedule, L)
        for i in range(1, n + 1)
        for j in range(1, n + 1)
        if i != j
    ]
    cons += [build_stationarity_constraint(k, N, L) for k in range(1, n + 1)]
    cons.append(build_gap_constraint(N, spec.delta))
    cons += [build_link_constraint(k, N) for k in range(1, n + 1)]
    return PepProgram(spec=spec, schedule=schedule, constraints=tuple(cons))


def gram(vectors) -> np.ndarray:
    """Gram matrix of the rows of ``vectors``."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    return V @ V.T
