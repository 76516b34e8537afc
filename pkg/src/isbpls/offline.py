"""Batch Sparse Bridge PLS."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidHyper, NonFinite, SingularScores
from .linalg import canonicalize_signs, sym_eigen_topR
from .sparse import sparsify_iterative


@dataclass(frozen=True)
class HyperParams:
    """Model hyperparameters.

    ``thetas`` holds one retained-variable count per component; ``None``
    means no sparsity (every variable kept). A single value is broadcast to
    all ``R`` components.
    """

    alpha: float = 1e-5
    lam: float = 1.0
    R: int = 1
    thetas: tuple[int, ...] | None = None
    tau: float = 1e-8

    def __post_init__(self):
        if self.thetas is not None:
            th = tuple(int(t) for t in np.atleast_1d(self.thetas))
            if len(th) == 1:
                th = th * self.R
            object.__setattr__(self, "thetas", th)

    def validate(self, p: int) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidHyper(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.lam <= 1.0:
            raise InvalidHyper(f"lambda must lie in (0, 1], got {self.lam}")
        if not 1 <= self.R <= p:
            raise InvalidHyper(f"R must lie in [1, {p}], got {self.R}")
        if self.thetas is not None:
            if len(self.thetas) != self.R:
                raise InvalidHyper(f"need {self.R} sparsity targets, got {len(self.thetas)}")
            for t in self.thetas:
                if not 1 <= t <= p:
                    raise InvalidHyper(f"theta must lie in [1, {p}], got {t}")
        if not self.tau > 0:
            raise InvalidHyper(f"tau must be positive, got {self.tau}")

    def theta_list(self, p: int) -> list[int]:
        return list(self.thetas) if self.thetas is not None else [p] * self.R


@dataclass
class SparseModel:
    U: np.ndarray  # (p, R) unit-norm sparse weights
    W: np.ndarray  # (R, q) Y-loadings
    beta: np.ndarray  # (p, q)
    selected: list[np.ndarray]
    hyper: HyperParams
    x_mean: np.ndarray = field(default=None)
    y_mean: np.ndarray = field(default=None)

    def __post_init__(self):
        p, q = self.beta.shape
        if self.x_mean is None:
            self.x_mean = np.zeros(p)
        if self.y_mean is None:
            self.y_mean = np.zeros(q)


def _check_xy(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} and Y {Y.shape} do not share a row count")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NonFinite("X and Y must be finite")
    return X, Y


def bridge_matrix(C: np.ndarray, M: np.ndarray, alpha: float) -> np.ndarray:
    """``alpha*C + (1-alpha)*M M^T``, symmetrized."""
    H = alpha * C + (1.0 - alpha) * (M @ M.T)
    return (H + H.T) / 2


def build_H(X, Y, alpha: float) -> np.ndarray:
    X, Y = _check_xy(X, Y)
    if not 0.0 <= alpha <= 1.0:
        raise InvalidHyper(f"alpha must lie in [0, 1], got {alpha}")
    return bridge_matrix(X.T @ X, X.T @ Y, alpha)


def loadings(S: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Least-squares Y-loadings ``(S^T S)^{-1} S^T Y``."""
    G = S.T @ S
    ev = np.linalg.eigvalsh(G)
    if ev[-1] <= 0 or ev[0] <= 1e-12 * ev[-1]:
        raise SingularScores(f"score Gram matrix is singular (eigenvalues {ev[0]:.3e}..{ev[-1]:.3e})")
    return np.linalg.solve(G, S.T @ Y)


def fit_sbpls(X, Y, hyper: HyperParams, center: bool = True, max_iter: int = 500) -> SparseModel:
    """Fit Sparse Bridge PLS on a data batch.

    All ``R`` dense weight vectors come from one eigen-decomposition of the
    bridge matrix H. Component ``r`` is then sparsified on H restricted to
    the orthogonal complement of the dense directions ``0..r-1``, which keeps
    later components from being pulled back onto the leading one.
    """
    X, Y = _check_xy(X, Y)
    n, p = X.shape
    hyper.validate(p)
    if n < 2:
        raise DimensionMismatch("need at least two observations")
    if center:
        x_mean, y_mean = X.mean(axis=0), Y.mean(axis=0)
        X, Y = X - x_mean, Y - y_mean
    else:
        x_mean, y_mean = np.zeros(p), np.zeros(Y.shape[1])

    H = build_H(X, Y, hyper.alpha)
    _, dense = sym_eigen_topR(H, hyper.R)
    thetas = hyper.theta_list(p)
    U = np.zeros((p, hyper.R))
    for r in range(hyper.R):
        P = np.eye(p) - dense[:, :r] @ dense[:, :r].T
        G = P @ H @ P
        G = (G + G.T) / 2
        u, _ = sparsify_iterative(G, dense[:, r], dense[:, r], thetas[r], hyper.tau, max_iter)
        U[:, r] = canonicalize_signs(u)

    W = loadings(X @ U, Y)
    beta = U @ W
    selected = [np.flatnonzero(U[:, r]) for r in range(hyper.R)]
    return SparseModel(U=U, W=W, beta=beta, selected=selected, hyper=hyper, x_mean=x_mean, y_mean=y_mean)


def predict(model: SparseModel, x) -> np.ndarray:
    """Predict responses for one row (shape (p,)) or a batch (n, p)."""
    x = np.asarray(x, dtype=float)
    p = model.beta.shape[0]
    if x.shape[-1] != p or x.ndim > 2:
        raise DimensionMismatch(f"expected {p} inputs, got shape {x.shape}")
    return (x - model.x_mean) @ model.beta + model.y_mean
