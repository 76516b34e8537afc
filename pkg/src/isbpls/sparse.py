"""Lasso soft-thresholding with count-targeted penalty selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZero, NoConvergence


@dataclass(frozen=True)
class ThresholdResult:
    vector: np.ndarray
    gamma: float
    nonzero_count: int


def soft_threshold(u, gamma: float) -> ThresholdResult:
    """Apply ``sgn(u) * (|u| - gamma)_+`` component-wise (no renormalization)."""
    u = np.asarray(u, dtype=float)
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    out = np.sign(u) * np.maximum(np.abs(u) - gamma, 0.0)
    return ThresholdResult(out, float(gamma), int(np.count_nonzero(out)))


def selection_count_residual(u, gamma: float, theta: int) -> int:
    """Number of survivors of the threshold at ``gamma`` minus the target ``theta``."""
    u = np.asarray(u, dtype=float)
    return int(np.count_nonzero(np.abs(u) > gamma)) - int(theta)


def gamma_for_count(u, theta: int) -> float:
    """Threshold that keeps the ``theta`` largest magnitudes of ``u``.

    Returns the ``(theta+1)``-th largest ``|u_i|``; survivors are the entries
    strictly above it, so ties at the cut drop every tied entry. ``theta == p``
    gives 0.
    """
    a = np.abs(np.asarray(u, dtype=float))
    p = a.size
    if not 1 <= theta <= p:
        raise ValueError(f"theta must lie in [1, {p}], got {theta}")
    if theta == p:
        return 0.0
    return float(np.sort(a)[p - theta - 1])


def sparsify_iterative(H, u0, v0, theta: int, tau: float = 1e-8, max_iter: int = 500):
    """Sparse rank-one refinement of a singular pair of a symmetric matrix.

    Alternates ``u* = soft(H v, gamma)`` with ``gamma`` chosen so that exactly
    ``theta`` entries survive, and ``v = H u* / |H u*|``, stopping once the
    direction of ``u*`` moves by less than ``tau``.

    Returns
    -------
    u : ndarray
        Unit-norm sparse weight vector.
    v : ndarray
        Unit-norm companion vector.
    """
    H = np.asarray(H, dtype=float)
    u = np.asarray(u0, dtype=float)
    u = u / np.linalg.norm(u)
    v = np.asarray(v0, dtype=float)
    for _ in range(max_iter):
        Hv = H @ v
        th = soft_threshold(Hv, gamma_for_count(Hv, theta))
        nrm = np.linalg.norm(th.vector)
        if th.nonzero_count == 0 or nrm == 0.0:
            raise AllZero("thresholding annihilated every entry")
        u_new = th.vector / nrm
        Hu = H @ th.vector
        hn = np.linalg.norm(Hu)
        if hn == 0.0:
            raise AllZero("sparse weight vector lies in the null space of H")
        v = Hu / hn
        step = np.linalg.norm(u_new - u)
        u = u_new
        if step < tau:
            return u, v
    raise NoConvergence(
        f"sparse refinement did not settle within {max_iter} iterations",
        last=(u, v),
        residual=float(step),
    )
