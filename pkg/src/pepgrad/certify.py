"""Dual multipliers proving the main bound, and an exact replay of the proof.

The certificate combines the program's own constraints (from ``pep``) with
nonnegative weights; the combination must leave no linear terms and a Gram
form equal to -sum_k Q_k, which is negative semidefinite. That shows
ell <= U for every feasible point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import bound_main
from .core import SQRT3, RegimeClass, RegimeError, SmoothProblemSpec, StepSchedule, require_regime
from .pep import (
    build_gap_constraint,
    build_link_constraint,
    build_pair_constraint,
    build_stationarity_constraint,
)

# steps closer than this to sqrt(3)/L are refused so round-off cannot flip sigma_1's sign
SIGMA_GUARD = 1e-12


@dataclass(frozen=True)
class Certificate:
    B: float
    alpha: np.ndarray  # length N
    sigma: np.ndarray  # length N+1
    U: float

    def to_dict(self) -> dict:
        return {"B": self.B, "U": self.U, "alpha": self.alpha.tolist(), "sigma": self.sigma.tolist()}


def build_certificate(spec: SmoothProblemSpec, schedule: StepSchedule) -> Certificate:
    """Multipliers alpha_k (pairs), sigma_k (links) and B (gap, last stationarity)."""
    require_regime(schedule, spec.L, RegimeClass.MAIN_THEOREM, "the certificate")
    L = spec.L
    if any(t * L > SQRT3 - SIGMA_GUARD for t in schedule):
        raise RegimeError(f"step within {SIGMA_GUARD:g} of sqrt(3)/L; sigma would be sign-ambiguous")
    if spec.delta <= 0:
        raise ValueError("the certificate needs delta > 0")
    U = bound_main(spec, schedule) ** 2
    B = U / spec.delta
    t = schedule.as_array()
    N = schedule.N
    alpha = (B / 2) * np.maximum(2.0, t * L + 1)
    prev = np.concatenate([[0.0], t[:-1]])
    sigma = np.empty(N + 1)
    sigma[:N] = (B / 4) * np.minimum(-L * t**2 + 3 * t + prev, -(L**2) * t**3 + 3 * t + prev)
    sigma[N] = 1.0 - math.fsum(sigma[:N])
    return Certificate(B=B, alpha=alpha, sigma=sigma, U=U)


def sigma_last_closed_form(cert: Certificate, spec: SmoothProblemSpec, schedule: StepSchedule) -> float:
    return cert.B * (2 + spec.L * schedule[-1]) / (4 * spec.L)


@dataclass(frozen=True)
class AggregatedIdentity:
    A_total: np.ndarray
    f_coeffs: np.ndarray
    fstar_coeff: float
    ell_coeff: float
    const_coeff: float


def aggregate_identity(cert: Certificate, spec: SmoothProblemSpec, schedule: StepSchedule) -> AggregatedIdentity:
    """(ell - U) plus the multiplier-weighted sum of the program's constraints."""
    N, L = schedule.N, spec.L
    n = N + 1
    terms = [(cert.B, build_gap_constraint(N, spec.delta)), (cert.B, build_stationarity_constraint(n, N, L))]
    terms += [(cert.sigma[k - 1], build_link_constraint(k, N)) for k in range(1, n + 1)]
    for k in range(1, N + 1):
        a = cert.alpha[k - 1]
        terms.append((a, build_pair_constraint(k, k + 1, schedule, L)))
        terms.append((a - cert.B, build_pair_constraint(k + 1, k, schedule, L)))

    A_total = np.zeros((n, n))
    f = np.zeros(n)
    fstar, ell, const = 0.0, 1.0, -cert.U
    for w, c in terms:
        A_total += w * c.A
        f += w * c.f_coeff
        fstar += w * c.fstar_coeff
        ell += w * c.ell_coeff
        const += w * c.const_coeff
    return AggregatedIdentity(A_total=A_total, f_coeffs=f, fstar_coeff=fstar, ell_coeff=ell, const_coeff=const)


def expected_residual_form(cert: Certificate, spec: SmoothProblemSpec, schedule: StepSchedule) -> np.ndarray:
    """Gram matrix of -sum_k Q_k, Q_k = (B/4)(1/L - t_k)||g^k - g^{k+1}||^2 for t_k < 1/L."""
    N, L = schedule.N, spec.L
    M = np.zeros((N + 1, N + 1))
    for k, t in enumerate(schedule):
        if t * L >= 1.0:
            continue
        c = (cert.B / 4) * (1 / L - t)
        M[k, k] -= c
        M[k + 1, k + 1] -= c
        M[k, k + 1] += c
        M[k + 1, k] += c
    return M


@dataclass(frozen=True)
class CertificateReport:
    multipliers_nonneg: bool
    sigma_sums_to_one: bool
    linear_terms_vanish: bool
    quadratic_matches_Q: bool
    residual_nsd: bool
    certified_bound: float
    max_linear_residual: float = 0.0
    max_quadratic_mismatch: float = 0.0
    max_eigenvalue: float = 0.0

    @property
    def verified(self) -> bool:
        return (
            self.multipliers_nonneg
            and self.sigma_sums_to_one
            and self.linear_terms_vanish
            and self.quadratic_matches_Q
            and self.residual_nsd
        )

    def to_dict(self, spec: SmoothProblemSpec | None = None, schedule: StepSchedule | None = None) -> dict:
        d = {
            "verified": self.verified,
            "multipliers_nonneg": self.multipliers_nonneg,
            "sigma_sums_to_one": self.sigma_sums_to_one,
            "linear_terms_vanish": self.linear_terms_vanish,
            "quadratic_matches_Q": self.quadratic_matches_Q,
            "residual_nsd": self.residual_nsd,
            "certified_bound": self.certified_bound,
            "max_linear_residual": self.max_linear_residual,
            "max_quadratic_mismatch": self.max_quadratic_mismatch,
            "max_eigenvalue": self.max_eigenvalue,
        }
        if spec is not None:
            d["input"] = {"L": spec.L, "delta": spec.delta, "f_star": spec.f_star}
            if schedule is not None:
                d["input"]["steps"] = list(schedule.steps)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CertificateReport":
        keys = (
            "multipliers_nonneg", "sigma_sums_to_one", "linear_terms_vanish", "quadratic_matches_Q",
            "residual_nsd", "certified_bound", "max_linear_residual", "max_quadratic_mismatch",
            "max_eigenvalue",
        )
        return cls(**{k: d[k] for k in keys})


def verify_certificate(
    cert: Certificate,
    spec: SmoothProblemSpec,
    schedule: StepSchedule,
    q_tol: float = 1e-10,
    lin_tol: float = 1e-12,
) -> CertificateReport:
    agg = aggregate_identity(cert, spec, schedule)
    expected = expected_residual_form(cert, spec, schedule)
    # relative to the size of the terms being cancelled
    scale = max(1.0, cert.U, cert.B * spec.delta)
    linear = np.concatenate([agg.f_coeffs, [agg.fstar_coeff, agg.ell_coeff, agg.const_coeff]])
    max_lin = float(np.max(np.abs(linear)))
    mismatch = float(np.max(np.abs(agg.A_total - expected)))
    top_eig = float(np.linalg.eigvalsh(agg.A_total)[-1])
    nonneg = bool(cert.B >= 0 and np.all(cert.alpha >= 0) and np.all(cert.alpha - cert.B >= 0) and np.all(cert.sigma >= 0))
    return CertificateReport(
        multipliers_nonneg=nonneg,
        sigma_sums_to_one=bool(abs(math.fsum(cert.sigma) - 1.0) <= lin_tol),
        linear_terms_vanish=bool(max_lin <= lin_tol * scale),
        quadratic_matches_Q=bool(mismatch <= q_tol),
        residual_nsd=bool(top_eig <= q_tol),
        certified_bound=math.sqrt(cert.U),
        max_linear_residual=max_lin,
        max_quadratic_mismatch=mismatch,
        max_eigenvalue=top_eig,
    )
