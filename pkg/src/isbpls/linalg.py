"""Dense symmetric kernels: Gram-Schmidt and top-R eigenpairs by simultaneous iteration."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateColumn, DimensionMismatch, NoConvergence

DEGENERATE_NORM = 1e-12


def gram_schmidt_orth(Q: np.ndarray, tol: float = DEGENERATE_NORM) -> np.ndarray:
    """Orthonormalize the columns of ``Q`` in order.

    Column ``r`` of the result is ``q_r`` with its projections onto the
    already-orthonormalized columns ``0..r-1`` removed, then normalized. The
    projection is applied twice (modified Gram-Schmidt, reorthogonalized)
    which leaves the result unchanged in exact arithmetic but keeps
    ``|U^T U - I|`` at rounding level when ``q_r`` is nearly parallel to an
    earlier column.

    Raises
    ------
    DegenerateColumn
        If a column's norm after projection falls below ``tol``.
    """
    Q = np.array(Q, dtype=float, copy=True)
    if Q.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {Q.shape}")
    p, R = Q.shape
    U = np.empty_like(Q)
    for r in range(R):
        v = Q[:, r]
        for _ in range(2):
            for k in range(r):
                v -= (U[:, k] @ v) * U[:, k]
        nrm = np.linalg.norm(v)
        if not nrm >= tol:
            raise DegenerateColumn(r, float(nrm))
        U[:, r] = v / nrm
    return U


def canonicalize_signs(U: np.ndarray) -> np.ndarray:
    """Flip each column so that its largest-magnitude entry is positive."""
    U = np.array(U, dtype=float, copy=True)
    if U.ndim == 1:
        return U if U[np.argmax(np.abs(U))] >= 0 else -U
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[idx, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    return U * signs


def _noise_floor(H: np.ndarray) -> float:
    # attainable residual when forming H @ u in double precision
    return 1e2 * H.shape[0] * np.finfo(float).eps * np.linalg.norm(H)


def _orth_fill(Z: np.ndarray, fallback: np.ndarray, tiny: float) -> np.ndarray:
    """Gram-Schmidt that swaps collapsed columns for fallback candidates.

    Columns of ``Z`` annihilated by projection lie in (numerically) the null
    space of the operator, where any orthonormal completion is an eigenbasis.
    """
    p, R = Z.shape
    candidates = np.hstack([fallback, np.eye(p)])
    U = np.empty((p, R))
    c = 0
    for r in range(R):
        v = Z[:, r].copy()
        for _ in range(2):
            v -= U[:, :r] @ (U[:, :r].T @ v)
        nrm = np.linalg.norm(v)
        limit = tiny
        while not nrm > limit:
            v = candidates[:, c].copy()
            c += 1
            for _ in range(2):
                v -= U[:, :r] @ (U[:, :r].T @ v)
            nrm = np.linalg.norm(v)
            limit = 1e-8  # candidates have unit norm
        U[:, r] = v / nrm
    return U


def sym_eigen_topR(H: np.ndarray, R: int, tol: float = 1e-10, max_iter: int = 1000):
    """Leading ``R`` eigenpairs of a symmetric PSD matrix.

    Simultaneous iteration with a Rayleigh-Ritz rotation of the block at
    every sweep, started from the identity columns of the ``R`` largest
    diagonal entries of ``H`` (ties broken by index, so a diagonal-dominant
    ``H`` starts at its leading coordinate axes). A pair is accepted
    once ``|H u - v u| <= min(tol*|H|, max(tol*|v|, floor))`` where ``floor``
    is the rounding level of a product with ``H``; this is tighter than the
    plain ``tol*|H|`` bound whenever a small eigenvalue sits next to a very
    large one.

    Returns
    -------
    values : ndarray (R,)
        Eigenvalues in descending order.
    U : ndarray (p, R)
        Orthonormal eigenvectors, largest-magnitude entry of each made positive.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"H must be square, got shape {H.shape}")
    p = H.shape[0]
    if not 1 <= R <= p:
        raise ValueError(f"R must lie in [1, {p}], got {R}")
    normH = np.linalg.norm(H)
    if normH == 0.0:
        return np.zeros(R), np.eye(p)[:, :R]
    floor = _noise_floor(H)
    start = np.sort(np.argsort(-np.diag(H), kind="stable")[:R])
    U = np.eye(p)[:, start]
    res = np.full(R, np.inf)
    for _ in range(max_iter):
        Z = H @ U
        T = U.T @ Z
        w, V = np.linalg.eigh((T + T.T) / 2)
        order = np.argsort(w)[::-1]
        w, V = w[order], V[:, order]
        U, Z = U @ V, Z @ V
        res = np.linalg.norm(Z - U * w, axis=0)
        bound = np.minimum(tol * normH, np.maximum(tol * np.abs(w), floor))
        if np.all(res <= bound):
            return w, canonicalize_signs(U)
        U = _orth_fill(Z, U, floor)
    raise NoConvergence(
        f"simultaneous iteration did not converge in {max_iter} sweeps",
        last=(w, canonicalize_signs(U)),
        residual=float(np.max(res / normH)),
    )
