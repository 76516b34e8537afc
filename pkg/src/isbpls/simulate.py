"""Synthetic drifting data streams driven by AR(1) hidden factors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, ScheduleGap

GROUP_SIZE = 20
COEF_SD = 0.1


@dataclass(frozen=True)
class FactorConfig:
    delta: float
    mean: float
    variance: float

    def validate(self):
        if not abs(self.delta) < 1:
            raise InvalidConfig(f"AR coefficient must satisfy |delta| < 1, got {self.delta}")
        if not self.variance > 0:
            raise InvalidConfig(f"innovation variance must be positive, got {self.variance}")


DEFAULT_FACTORS = (
    FactorConfig(0.1, 0.0, 12.25),
    FactorConfig(0.4, -1.5, 12.25),
    FactorConfig(0.2, 1.5, 12.25),
)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_factors(T: int, configs=DEFAULT_FACTORS, seed=None) -> np.ndarray:
    """``F[t, j] = delta_j * F[t-1, j] + eps[t, j]``, ``F[0, j] = eps[0, j]``."""
    if T < 2:
        raise InvalidConfig(f"need T >= 2, got {T}")
    for c in configs:
        c.validate()
    rng = _rng(seed)
    delta = np.array([c.delta for c in configs])
    mean = np.array([c.mean for c in configs])
    sd = np.sqrt([c.variance for c in configs])
    eps = mean + sd * rng.standard_normal((T, len(configs)))
    F = np.empty_like(eps)
    F[0] = eps[0]
    for t in range(1, T):
        F[t] = delta * F[t - 1] + eps[t]
    return F


def group_of(p: int = 60, group_size: int = GROUP_SIZE) -> np.ndarray:
    return np.arange(p) // group_size


def gen_streams(F: np.ndarray, seed=None, group_size: int = GROUP_SIZE, noise_sd: float = 1.0) -> np.ndarray:
    """Each factor drives a block of ``group_size`` streams plus unit-normal noise."""
    rng = _rng(seed)
    T, J = F.shape
    X = np.repeat(F, group_size, axis=1)
    noise = rng.standard_normal(X.shape)
    return X + noise_sd * noise


@dataclass(frozen=True)
class Regime:
    start: int  # first time index, 1-based
    beta: np.ndarray  # (p,)
    large: np.ndarray  # 0-based indices of the large-coefficient block
    small: np.ndarray


@dataclass(frozen=True)
class RegimeSchedule:
    regimes: tuple[Regime, ...]

    def validate(self, T: int):
        starts = [r.start for r in self.regimes]
        if not starts or starts[0] != 1:
            raise ScheduleGap("schedule must start at t = 1")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ScheduleGap(f"breakpoints must increase strictly, got {starts}")

    def regime_index(self, T: int) -> np.ndarray:
        """Regime number for each of ``t = 1..T`` (returned 0-based by row)."""
        starts = np.array([r.start for r in self.regimes])
        return np.searchsorted(starts, np.arange(1, T + 1), side="right") - 1

    @property
    def breakpoints(self) -> list[int]:
        return [r.start for r in self.regimes]


def _block(g: int, group_size: int = GROUP_SIZE) -> np.ndarray:
    return np.arange(g * group_size, (g + 1) * group_size)


def static_schedule(seed=None, p: int = 60, group_size: int = GROUP_SIZE) -> RegimeSchedule:
    """Block 1 coefficients near 10, block 2 near 5, block 3 inactive."""
    rng = _rng(seed)
    beta = np.zeros(p)
    b1, b2 = _block(0, group_size), _block(1, group_size)
    beta[b1] = rng.normal(10.0, COEF_SD, group_size)
    beta[b2] = rng.normal(5.0, COEF_SD, group_size)
    return RegimeSchedule((Regime(1, beta, b1, b2),))


def drift_schedule(seed=None, p: int = 60, group_size: int = GROUP_SIZE) -> RegimeSchedule:
    """Three regimes with breakpoints at t = 101 and t = 301.

    Blocks 1 and 2 swap their coefficients at 101. From 301 block 1 is
    inactive, block 3 gets fresh draws near 10 and block 2 fresh draws near 5.
    """
    rng = _rng(seed)
    b1, b2, b3 = (_block(g, group_size) for g in range(3))
    first = static_schedule(rng, p, group_size).regimes[0]
    swapped = np.zeros(p)
    swapped[b1] = first.beta[b2]
    swapped[b2] = first.beta[b1]
    third = np.zeros(p)
    third[b3] = rng.normal(10.0, COEF_SD, group_size)
    third[b2] = rng.normal(5.0, COEF_SD, group_size)
    return RegimeSchedule((
        first,
        Regime(101, swapped, b2, b1),
        Regime(301, third, b3, b2),
    ))


def gen_response(X: np.ndarray, schedule: RegimeSchedule):
    """Noise-free response ``y_t = x_t . beta(t)``.

    Returns
    -------
    Y : ndarray (T, 1)
    regime : ndarray (T,)
        Active regime per row; ``schedule.regimes[regime[t]]`` has the truth sets.
    """
    T, p = X.shape
    schedule.validate(T)
    idx = schedule.regime_index(T)
    B = np.stack([r.beta for r in schedule.regimes])
    if B.shape[1] != p:
        raise InvalidConfig(f"coefficients have length {B.shape[1]}, streams have {p}")
    y = np.einsum("tp,tp->t", X, B[idx])
    return y[:, None], idx


@dataclass
class SimOutput:
    F: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    schedule: RegimeSchedule
    regime: np.ndarray

    def truth(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """(large, small) truth blocks at 0-based row ``t``."""
        r = self.schedule.regimes[self.regime[t]]
        return r.large, r.small


SCHEDULES = {"static": static_schedule, "paper-drift": drift_schedule}


def simulate(T: int = 400, schedule: str = "paper-drift", seed=None, configs=DEFAULT_FACTORS) -> SimOutput:
    if schedule not in SCHEDULES:
        raise InvalidConfig(f"unknown schedule {schedule!r}; choose from {sorted(SCHEDULES)}")
    ss = np.random.SeedSequence(seed)
    f_seed, x_seed, b_seed = (np.random.default_rng(s) for s in ss.spawn(3))
    F = gen_factors(T, configs, f_seed)
    X = gen_streams(F, x_seed)
    sched = SCHEDULES[schedule](b_seed, p=X.shape[1])
    Y, regime = gen_response(X, sched)
    return SimOutput(F, X, Y, sched, regime)
