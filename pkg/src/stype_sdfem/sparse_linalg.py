"""Sparse storage helpers and a direct solver for the nonsymmetric discrete systems."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

RESIDUAL_TOL = 1e-12


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


def as_csr(A) -> sp.csr_matrix:
    """Row-compressed copy with sorted, unique column indices."""
    A = sp.csr_matrix(A, dtype=float)
    A.sum_duplicates()
    A.sort_indices()
    return A


def matvec(A, x) -> np.ndarray:
    return as_csr(A) @ np.asarray(x, dtype=float)


def relative_residual(A, x, rhs) -> float:
    rhs = np.asarray(rhs, dtype=float)
    nb = np.linalg.norm(rhs)
    r = np.linalg.norm(A @ x - rhs)
    return float(r / nb) if nb > 0 else float(r)


def solve(A, rhs, tol: float = RESIDUAL_TOL, refine_steps: int = 3) -> np.ndarray:
    """Sparse LU (SuperLU, partial pivoting) with a few steps of iterative refinement.

    Raises SolverError if the matrix is singular or the relative residual stays above `tol`.
    """
    A = as_csr(A)
    n, m = A.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {A.shape}")
    rhs = np.asarray(rhs, dtype=float)
    if not np.linalg.norm(rhs) > 0:
        return np.zeros(n)
    try:
        lu = spla.splu(A.tocsc(), permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SolverError(f"LU factorisation failed: {exc}", float("inf")) from exc
    x = lu.solve(rhs)
    res = relative_residual(A, x, rhs)
    for _ in range(refine_steps):
        if res <= tol:
            break
        x = x + lu.solve(rhs - A @ x)
        res = relative_residual(A, x, rhs)
    if not np.isfinite(res) or res > tol:
        raise SolverError("linear solve did not reach the residual target", res)
    return x
