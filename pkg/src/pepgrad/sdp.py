"""Dense primal-dual interior-point solver for performance-estimation SDPs.

The program is solved in the standard form

    minimise   c_y . y
    subject to  Acal(X) + C_y y - s = r,   X PSD,  s >= 0,  y free

whose dual is

    maximise   r . lam
    subject to  Z = -Acal^*(lam) PSD,  lam >= 0,  C_y^T lam = c_y.

Here X is the Gram matrix G, y = (f^1..f^{N+1}, ell), s are the constraint
slacks and lam the constraint multipliers. Directions are HKM with a
Mehrotra predictor-corrector; f* is held at its specified value.
"""
from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import TOL_EQ, NotPsd, PepError, SmoothProblemSpec
from .pep import PepProgram, assemble_pep

log = logging.getLogger(__name__)

STEP_FRACTION = 0.98


class SolveStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITER = "MaxIter"
    INFEASIBLE = "Infeasible"
    NUMERICAL_TROUBLE = "NumericalTrouble"


class SolverError(PepError, RuntimeError):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class SolveOptions:
    gap_tol: float = 1e-7
    feas_tol: float = 1e-7
    max_iter: int = 200


@dataclass
class SdpSolution:
    status: SolveStatus
    ell: float
    G: np.ndarray
    f: np.ndarray
    duals: np.ndarray
    gap: float
    dual_objective: float = math.nan
    iterations: int = 0

    @property
    def sqrt_ell(self) -> float:
        return math.sqrt(max(self.ell, 0.0))

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "ell": self.ell,
            "sqrt_ell": self.sqrt_ell,
            "gap": self.gap,
            "G": self.G.tolist(),
            "f": self.f.tolist(),
            "duals": self.duals.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SdpSolution":
        return cls(
            status=SolveStatus(d["status"]),
            ell=d["ell"],
            G=np.array(d["G"], dtype=float),
            f=np.array(d["f"], dtype=float),
            duals=np.array(d["duals"], dtype=float),
            gap=d["gap"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _sym(M):
    return (M + np.swapaxes(M, -1, -2)) / 2


def _max_step(X_chol, dX):
    """Largest a with X + a dX PSD, given the Cholesky factor of X."""
    Linv_dX = np.linalg.solve(X_chol, dX)
    S = np.linalg.solve(X_chol, Linv_dX.T)
    lo = np.linalg.eigvalsh(_sym(S))[0]
    return math.inf if lo >= 0 else -1.0 / lo


def _max_step_orthant(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


@dataclass
class _Iterate:
    X: np.ndarray
    Z: np.ndarray
    s: np.ndarray
    lam: np.ndarray
    y: np.ndarray
    status: SolveStatus = SolveStatus.MAX_ITER
    iterations: int = 0
    history: list = field(default_factory=list)


def _interior_point(A, Cy, r, cy, opts: SolveOptions) -> _Iterate:
    m, n, _ = A.shape
    p = Cy.shape[1]
    it = _Iterate(X=np.eye(n), Z=np.eye(n), s=np.ones(m), lam=np.ones(m), y=np.zeros(p))
    I = np.eye(n)
    scale_r = 1 + np.max(np.abs(r))

    def op(X):
        return np.einsum("ikl,kl->i", A, X)

    def adj(v):
        return np.einsum("i,ikl->kl", v, A)

    for k in range(opts.max_iter + 1):
        X, Z, s, lam, y = it.X, it.Z, it.s, it.lam, it.y
        rp = r - op(X) - Cy @ y + s
        Rd = -adj(lam) - Z
        ry = cy - Cy.T @ lam
        pobj = cy @ y
        dobj = r @ lam
        mu = (np.sum(X * Z) + s @ lam) / (n + m)
        pinf = np.max(np.abs(rp)) / scale_r
        dinf = max(np.max(np.abs(Rd)), np.max(np.abs(ry)))
        it.history.append((pobj, dobj, pinf, dinf, mu))
        log.debug("it %3d pobj %.10e dobj %.10e pinf %.2e dinf %.2e mu %.2e", k, pobj, dobj, pinf, dinf, mu)
        it.iterations = k
        if abs(pobj - dobj) <= opts.gap_tol and pinf <= opts.feas_tol and dinf <= opts.feas_tol:
            it.status = SolveStatus.OPTIMAL
            return it
        if max(np.max(np.abs(X)), np.max(np.abs(lam)), np.max(np.abs(y))) > 1e12:
            it.status = SolveStatus.INFEASIBLE
            return it
        if k == opts.max_iter:
            break

        try:
            Xc = np.linalg.cholesky(X)
            Zc = np.linalg.cholesky(Z)
            Zinv = np.linalg.inv(Z)
            XA = X @ A
            W = XA @ Zinv
            M = np.einsum("ikl,jlk->ij", A, W)
            M = (M + M.T) / 2
            D = s / lam
            K = np.zeros((m + p, m + p))
            K[:m, :m] = M + np.diag(D)
            K[:m, m:] = Cy
            K[m:, :m] = Cy.T
            XRdZ = _sym(X @ Rd @ Zinv)

            def direction(TX, Ts):
                rhs = np.concatenate([rp - op(TX - X - XRdZ) + Ts - s, ry])
                sol = np.linalg.solve(K, rhs)
                dlam, dy = sol[:m], sol[m:]
                dZ = Rd - adj(dlam)
                dX = TX - X - _sym(X @ dZ @ Zinv)
                # taken from the primal equation so rounding in K cannot leak into feasibility
                ds = op(dX) + Cy @ dy - rp
                return dX, ds, dy, dZ, dlam

            def step_lengths(dX, ds, dZ, dlam):
                ap = min(_max_step(Xc, dX), _max_step_orthant(s, ds))
                ad = min(_max_step(Zc, dZ), _max_step_orthant(lam, dlam))
                return ap, ad

            # predictor
            dXa, dsa, dya, dZa, dlama = direction(np.zeros_like(X), np.zeros_like(s))
            ap, ad = step_lengths(dXa, dsa, dZa, dlama)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = (np.sum((X + ap * dXa) * (Z + ad * dZa)) + (s + ap * dsa) @ (lam + ad * dlama)) / (n + m)
            sigma = min(1.0, (mu_aff / mu) ** 3)

            # corrector
            TX = _sym((sigma * mu * I - dXa @ dZa) @ Zinv)
            Ts = (sigma * mu - dsa * dlama) / lam
            dX, ds, dy, dZ, dlam = direction(TX, Ts)
            ap, ad = step_lengths(dX, ds, dZ, dlam)
            ap, ad = min(1.0, STEP_FRACTION * ap), min(1.0, STEP_FRACTION * ad)
        except np.linalg.LinAlgError as exc:
            log.debug("linear algebra failure at iteration %d: %s", k, exc)
            it.status = SolveStatus.NUMERICAL_TROUBLE
            return it
        if not (np.isfinite(ap) and np.isfinite(ad)) or max(ap, ad) < 1e-12:
            it.status = SolveStatus.NUMERICAL_TROUBLE
            return it

        it.X = _sym(X + ap * dX)
        it.s = s + ap * ds
        it.y = y + ap * dy
        it.Z = _sym(Z + ad * dZ)
        it.lam = lam + ad * dlam

    it.status = SolveStatus.MAX_ITER
    return it


def _normalized_program(program: PepProgram) -> PepProgram:
    L = program.spec.L
    return assemble_pep(SmoothProblemSpec(1.0, 1.0, 0.0), program.schedule.scaled(L))


def solve(program: PepProgram, options: SolveOptions | None = None, **kwargs) -> SdpSolution:
    """Solve a performance-estimation program.

    The program is rescaled to L = 1, delta = 1, f* = 0, solved, and mapped
    back: ell and G scale by L*delta, f - f* by delta, and the multipliers of
    all constraints except the links by L.

    Raises SolverError for any status other than Optimal; the partial
    solution is attached to the exception.
    """
    opts = options or SolveOptions(**kwargs)
    spec = program.spec
    L, delta, f_star = spec.L, spec.delta, spec.f_star
    norm = _normalized_program(program)
    if program.gram_dim > 64:
        log.warning("gram_dim %d is beyond the intended desk scale", program.gram_dim)

    A, F, fstar_c, const_c, ell_c = norm.stacked()
    Cy = np.column_stack([F, ell_c])
    r = -const_c  # f* = 0 in normalised units
    cy = np.zeros(Cy.shape[1])
    cy[-1] = -1.0
    it = _interior_point(A, Cy, r, cy, opts)

    ell_hat = float(it.y[-1])
    dual_hat = float(-r @ it.lam)
    scale = L * delta
    kinds = [c.kind for c in norm.constraints]
    duals = np.where(np.array(kinds) == "link", it.lam, L * it.lam)
    sol = SdpSolution(
        status=it.status,
        ell=scale * ell_hat,
        G=scale * it.X,
        f=f_star + delta * it.y[:-1],
        duals=duals,
        gap=scale * (dual_hat - ell_hat),
        dual_objective=scale * dual_hat,
        iterations=it.iterations,
    )
    if it.status is SolveStatus.INFEASIBLE:
        raise SolverError(
            "SDP reported infeasible; a valid program always admits G = 0, f = f*, ell = 0, "
            "so the constraint assembly is inconsistent",
            sol,
        )
    if it.status is not SolveStatus.OPTIMAL:
        raise SolverError(f"SDP solve ended with status {it.status.value} after {it.iterations} iterations", sol)
    return sol


def check_solution(program: PepProgram, sol: SdpSolution, options: SolveOptions | None = None) -> dict:
    """Replay a solution through the program's own constraint evaluators."""
    opts = options or SolveOptions()
    scale = max(1.0, program.spec.L * program.spec.delta, program.spec.delta)
    slacks = program.slacks(sol.G, sol.f, sol.ell)
    min_eig = float(np.linalg.eigvalsh(sol.G)[0])
    return {
        "min_slack": float(np.min(slacks)),
        "min_eig": min_eig,
        "min_dual": float(np.min(sol.duals)),
        "gap": sol.gap,
        "feasible": bool(np.min(slacks) >= -opts.feas_tol * scale and min_eig >= -TOL_EQ * scale),
        "duals_nonneg": bool(np.min(sol.duals) >= -TOL_EQ),
        "gap_ok": bool(abs(sol.gap) <= opts.gap_tol * scale),
    }


def extract_gram_vectors(G, rank_tol: float = 1e-8) -> np.ndarray:
    """Vectors whose pairwise inner products reproduce ``G``.

    Row i of the result is v^i; the dimension is the numerical rank of G
    (eigenvalues at or below ``rank_tol`` are dropped), with at least one
    column so an all-zero G yields zero vectors.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"G must be square, got shape {G.shape}")
    w, U = np.linalg.eigh(_sym(G))
    if w[0] < -rank_tol:
        raise NotPsd(f"G has eigenvalue {w[0]:.3e} < -{rank_tol:g}")
    keep = w > rank_tol
    if not np.any(keep):
        return np.zeros((G.shape[0], 1))
    # largest eigenvalues first
    idx = np.flatnonzero(keep)[::-1]
    return U[:, idx] * np.sqrt(w[idx])
