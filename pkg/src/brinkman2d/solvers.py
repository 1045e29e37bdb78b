"""Linear solvers for the monolithic system.

The primary path is an in-house restarted GMRES (Arnoldi with modified
Gram-Schmidt, Givens-rotation least squares); the reference path is an
LU factorization used as the oracle in verification runs.  Full GMRES
(restart = maxit) is the default, matching the replication setting of
the regime study; restarting is exposed for experimentation.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

#: Largest system factorized densely; bigger systems go through sparse LU.
DENSE_LU_LIMIT = 5000


class SingularMatrixError(RuntimeError):
    """Direct factorization hit an exactly singular pivot."""


@dataclass
class SolverConfig:
    """Iterative-solver settings.

    maxit defaults to the system size, restart defaults to maxit (full
    GMRES).  The convergence test is ||b - M x||_2 / ||b||_2 <= tol.
    """

    tol: float = 1e-6
    maxit: int | None = None
    restart: int | None = None
    preconditioner: str = "none"

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.maxit is not None and self.maxit < 1:
            raise ValueError(f"maxit must be >= 1, got {self.maxit}")
        if self.restart is not None and self.restart < 1:
            raise ValueError(f"restart must be >= 1, got {self.restart}")
        if self.preconditioner not in ("none", "jacobi"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SolveReport:
    """Convergence record of one iterative solve.

    residual_history holds the initial relative residual followed by one
    entry per inner iteration; with a Jacobi preconditioner all residuals
    are those of the preconditioned system.
    """

    iterations: int
    converged: bool
    final_relres: float
    residual_history: np.ndarray = field(repr=False)
    wall_time: float = 0.0


def apply_jacobi(matrix) -> np.ndarray:
    """Inverse-diagonal scaling; rows with a zero diagonal keep unit scale."""
    if sp.issparse(matrix):
        diag = np.asarray(matrix.diagonal(), dtype=float)
    else:
        diag = np.diag(np.asarray(matrix, dtype=float)).copy()
    scale = np.ones_like(diag)
    nz = diag != 0.0
    scale[nz] = 1.0 / diag[nz]
    return scale


def _as_operator(matrix):
    if sp.issparse(matrix):
        A = matrix.tocsr()
    else:
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    return A


def gmres_solve(matrix, rhs, config: SolverConfig | None = None):
    """Solve M x = rhs by restarted GMRES from a zero initial guess.

    Returns ``(x, SolveReport)``.  Arnoldi breakdown (exact solution in
    the current subspace) terminates the iteration with the current
    iterate; hitting maxit returns the best iterate with
    ``converged=False``.  The result is deterministic for fixed inputs.
    """
    cfg = config or SolverConfig()
    A = _as_operator(matrix)
    b = np.asarray(rhs, dtype=float).ravel()
    n = A.shape[0]
    if b.size != n:
        raise ValueError(f"rhs has length {b.size}, matrix is {n}x{n}")

    maxit = cfg.maxit if cfg.maxit is not None else n
    restart = cfg.restart if cfg.restart is not None else maxit
    restart = min(restart, maxit)

    if cfg.preconditioner == "jacobi":
        scale = apply_jacobi(A)
        b_eff = scale * b

        def op(v):
            return scale * (A @ v)
    else:
        b_eff = b

        def op(v):
            return A @ v

    t0 = time.perf_counter()
    b_norm = float(np.linalg.norm(b_eff))
    if b_norm == 0.0:
        x = np.zeros(n)
        return x, SolveReport(0, True, 0.0, np.array([0.0]), time.perf_counter() - t0)

    x = np.zeros(n)
    history = [1.0]
    total_iters = 0
    final_relres = 1.0
    breakdown = False

    while True:
        r = b_eff - op(x)
        r_norm = float(np.linalg.norm(r))
        final_relres = r_norm / b_norm
        if final_relres <= cfg.tol or total_iters >= maxit or breakdown or r_norm == 0.0:
            break

        m = min(restart, maxit - total_iters, n)
        Q = np.empty((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = r_norm
        Q[0] = r / r_norm

        k_used = 0
        est = final_relres
        for k in range(m):
            w = op(Q[k])
            w_scale = float(np.linalg.norm(w))
            for i in range(k + 1):  # modified Gram-Schmidt
                hik = float(Q[i] @ w)
                H[i, k] = hik
                w -= hik * Q[i]
            h_next = float(np.linalg.norm(w))
            H[k + 1, k] = h_next

            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            denom = float(np.hypot(H[k, k], H[k + 1, k]))
            if denom == 0.0:
                cs[k], sn[k] = 1.0, 0.0
            else:
                cs[k] = H[k, k] / denom
                sn[k] = H[k + 1, k] / denom
            H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]

            total_iters += 1
            k_used = k + 1
            est = abs(g[k + 1]) / b_norm
            history.append(est)

            if h_next <= 1e-14 * max(w_scale, 1e-300):  # Arnoldi breakdown
                breakdown = True
                break
            if est <= cfg.tol or total_iters >= maxit:
                break
            Q[k + 1] = w / h_next

        y = _solve_upper(H[:k_used, :k_used], g[:k_used])
        x = x + Q[:k_used].T @ y

        if breakdown or total_iters >= maxit:
            r = b_eff - op(x)
            final_relres = float(np.linalg.norm(r)) / b_norm
            break

    converged = final_relres <= cfg.tol
    report = SolveReport(
        iterations=total_iters,
        converged=converged,
        final_relres=final_relres,
        residual_history=np.asarray(history),
        wall_time=time.perf_counter() - t0,
    )
    return x, report


def _solve_upper(R: np.ndarray, g: np.ndarray) -> np.ndarray:
    if R.size == 0:
        return np.zeros(0)
    if np.any(np.diag(R) == 0.0):
        # stalled iteration on a singular operator: minimum-norm fallback
        return np.linalg.lstsq(R, g, rcond=None)[0]
    return scipy.linalg.solve_triangular(R, g, lower=False)


def direct_solve(matrix, rhs) -> np.ndarray:
    """LU-with-partial-pivoting reference solve.

    Dense factorization up to ``DENSE_LU_LIMIT`` unknowns, sparse LU
    beyond that.  Raises :class:`SingularMatrixError` on an exactly
    singular pivot (use a pinned monolithic system).
    """
    A = _as_operator(matrix)
    b = np.asarray(rhs, dtype=float).ravel()
    n = A.shape[0]
    if b.size != n:
        raise ValueError(f"rhs has length {b.size}, matrix is {n}x{n}")

    if n <= DENSE_LU_LIMIT:
        dense = A.toarray() if sp.issparse(A) else np.array(A, dtype=float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(dense)
        diag = np.diag(lu)
        zero = np.flatnonzero(diag == 0.0)
        if zero.size:
            raise SingularMatrixError(f"singular pivot at index {int(zero[0])}")
        x = scipy.linalg.lu_solve((lu, piv), b)
        # one step of iterative refinement recovers the forward accuracy
        # lost on badly conditioned saddle points
        x += scipy.linalg.lu_solve((lu, piv), b - A @ x)
        return x

    try:
        factor = spla.splu(sp.csc_matrix(A))
        x = factor.solve(b)
        x += factor.solve(b - A @ x)
    except RuntimeError as exc:
        raise SingularMatrixError(f"sparse LU failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("sparse LU produced non-finite solution (singular pivot)")
    return x
