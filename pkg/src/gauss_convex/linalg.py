"""Cyclic Jacobi eigensolver for small dense symmetric matrices."""
from __future__ import annotations

import math

import numpy as np

OFF_DIAGONAL_TOL = 1e-10
MAX_SWEEPS = 100


class EigenConvergenceError(RuntimeError):
    pass


def _off_norm(A: np.ndarray) -> float:
    return math.sqrt(2.0 * float(np.sum(np.square(np.triu(A, 1)))))


def jacobi_eigh(A, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix.

    Sweeps all pairs ``(p, q)`` with the classical stable rotation until the
    Frobenius norm of the off-diagonal part drops below ``tol``.

    Raises
    ------
    EigenConvergenceError
        If ``max_sweeps`` sweeps do not reach ``tol``.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        if _off_norm(A) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                J = np.array([[c, s], [-s, c]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ J
    else:
        if _off_norm(A) > tol:
            raise EigenConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {_off_norm(A):.3g})")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
