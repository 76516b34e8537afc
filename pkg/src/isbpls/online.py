"""Incremental Sparse Bridge PLS (iSB-PLS).

One :class:`OnlineState` is updated per incoming sample ``(x_t, y_t)``:

1. exponentially forgotten covariances ``C <- lam*C + x^T x``, ``M <- lam*M + x^T y``;
2. one simultaneous-iteration sweep ``Q = H V`` with
   ``H = alpha*C + (1-alpha)*M M^T``, orthonormalized by Gram-Schmidt, where
   ``V`` is the dense eigenvector estimate carried from the previous sweep;
3. each column of the new estimate soft-thresholded to its target count and
   renormalized, giving the sparse weights ``U``;
4. Y-loadings and coefficients from the current sample's latent scores.

With ``center=True`` the state also carries forgotten sample weights and
sums so that the sweep runs on the weighted, mean-centered scatter matrices
and predictions include the running means as an intercept. ``C`` and ``M``
always hold the raw recursions.

A state is mutated in place and must not be stepped from two threads at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateColumn, DimensionMismatch, NonFinite
from .linalg import gram_schmidt_orth
from .offline import HyperParams, bridge_matrix
from .sparse import gamma_for_count, soft_threshold

SCORE_EPS = 1e-12


@dataclass
class OnlineState:
    C: np.ndarray
    M: np.ndarray
    U: np.ndarray
    hyper: HyperParams
    thetas: list[int]
    t: int = 0
    beta: np.ndarray = None
    gammas: np.ndarray = None
    # Gram-Schmidt output of the latest sweep, before thresholding
    dense: np.ndarray = None
    center: bool = False
    weight: float = 0.0  # sum of lam**k over seen samples
    sx: np.ndarray = None
    sy: np.ndarray = None

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def q(self) -> int:
        return self.M.shape[1]

    def means(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.center or self.weight == 0.0:
            return np.zeros(self.p), np.zeros(self.q)
        return self.sx / self.weight, self.sy / self.weight

    def scatter(self) -> tuple[np.ndarray, np.ndarray]:
        """(C, M) as used by the sweep: raw, or centered when ``center``."""
        if not self.center or self.weight == 0.0:
            return self.C, self.M
        mx, my = self.means()
        C = self.C - self.weight * np.outer(mx, mx)
        return (C + C.T) / 2, self.M - self.weight * np.outer(mx, my)


@dataclass
class StepOutput:
    beta: np.ndarray
    y_hat: np.ndarray
    selected: list[np.ndarray]
    scores: np.ndarray
    y_prior: np.ndarray = field(default=None)  # x_t @ beta_{t-1}
    skipped: bool = False  # True when the sweep collapsed and U was kept


def init_state(p: int, q: int, hyper: HyperParams, center: bool = False) -> OnlineState:
    hyper.validate(p)
    R = hyper.R
    return OnlineState(
        center=center,
        sx=np.zeros(p),
        sy=np.zeros(q),
        C=np.zeros((p, p)),
        M=np.zeros((p, q)),
        U=np.eye(p)[:, :R].copy(),
        hyper=hyper,
        thetas=hyper.theta_list(p),
        beta=np.zeros((p, q)),
        gammas=np.zeros(R),
        dense=np.eye(p)[:, :R].copy(),
    )


def _check_sample(state: OnlineState, x, y):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != state.p or y.size != state.q:
        raise DimensionMismatch(f"expected x of length {state.p} and y of length {state.q}, got {x.size} and {y.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFinite("samples must be finite")
    return x, y


def covariance_update(state: OnlineState, x, y) -> None:
    x, y = _check_sample(state, x, y)
    lam = state.hyper.lam
    state.C *= lam
    state.C += np.outer(x, x)
    state.M *= lam
    state.M += np.outer(x, y)
    if state.center:
        state.weight = lam * state.weight + 1.0
        state.sx = lam * state.sx + x
        state.sy = lam * state.sy + y
    state.t += 1


def sim_sparse_step(state: OnlineState) -> np.ndarray:
    """One SIM sweep on the current bridge matrix followed by thresholding.

    Returns the per-component thresholds. Raises :class:`DegenerateColumn`
    (state untouched) if the sweep collapses, e.g. on an all-zero prefix.
    """
    H = bridge_matrix(*state.scatter(), state.hyper.alpha)
    dense = gram_schmidt_orth(H @ state.dense)
    U = np.empty_like(dense)
    gammas = np.empty(dense.shape[1])
    for r in range(dense.shape[1]):
        g = gamma_for_count(dense[:, r], state.thetas[r])
        u = soft_threshold(dense[:, r], g).vector
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            raise DegenerateColumn(r, 0.0)
        U[:, r] = u / nrm
        gammas[r] = g
    state.dense, state.U, state.gammas = dense, U, gammas
    return gammas


def compute_output(state: OnlineState, x, y) -> StepOutput:
    x, y = _check_sample(state, x, y)
    mx, my = state.means()
    prior = predict_state(state, x)
    xc, yc = x - mx, y - my
    s = xc @ state.U
    ss = s @ s
    if ss >= SCORE_EPS:
        W = np.outer(s, yc) / ss
        state.beta = state.U @ W
    selected = [np.flatnonzero(state.U[:, r]) for r in range(state.U.shape[1])]
    return StepOutput(
        beta=state.beta.copy(), y_hat=my + xc @ state.beta, selected=selected, scores=s, y_prior=prior
    )


def predict_state(state: OnlineState, x) -> np.ndarray:
    mx, my = state.means()
    return my + (np.asarray(x, dtype=float) - mx) @ state.beta


def step(state: OnlineState, x, y) -> StepOutput:
    """Consume one sample and return the updated model output."""
    x, y = _check_sample(state, x, y)
    covariance_update(state, x, y)
    try:
        sim_sparse_step(state)
        skipped = False
    except DegenerateColumn:
        skipped = True
    out = compute_output(state, x, y)
    out.skipped = skipped
    return out


class ISBPLS:
    """Object wrapper around :class:`OnlineState` for streaming use."""

    def __init__(self, p: int, q: int, hyper: HyperParams, center: bool = False):
        self.state = init_state(p, q, hyper, center)

    def partial_fit(self, x, y) -> StepOutput:
        return step(self.state, x, y)

    def predict(self, x) -> np.ndarray:
        return predict_state(self.state, x)

    @property
    def selected(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.state.U[:, r]) for r in range(self.state.U.shape[1])]
