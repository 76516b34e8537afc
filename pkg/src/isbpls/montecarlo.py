"""Monte Carlo runs of the online selector on simulated drifting streams."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTruth, ISBPLSError, MisalignedHorizons
from .offline import HyperParams, fit_sbpls
from .online import init_state, step
from .simulate import simulate

# operationalization of "stationary" stretches for the drift schedule (1-based, inclusive)
STATIONARY_WINDOWS = ((60, 100), (180, 300), (360, 400))
RECOVERY_LEVEL = 0.9


def percent_correct(selected, truth) -> float:
    """Fraction of the true index set that was selected."""
    truth = np.asarray(truth)
    if truth.size == 0:
        raise EmptyTruth("truth set is empty")
    return np.intersect1d(selected, truth).size / np.unique(truth).size


@dataclass(frozen=True)
class MCConfig:
    T: int = 400
    schedule: str = "paper-drift"
    hyper: HyperParams = field(default_factory=lambda: HyperParams(lam=0.98, R=2, thetas=(20,)))
    center: bool = True
    offline_prefix: int | None = None


@dataclass
class SelectionTrace:
    replicate: int
    hyper: HyperParams
    masks: np.ndarray  # (T, R, p) bool, selected variables per time and component
    percent: np.ndarray  # (T, R) percent_correct per component, NaN without a truth role
    offline_masks: np.ndarray | None = None  # (R, p)
    offline_percent: np.ndarray | None = None  # (R,)

    def selected(self, t: int, r: int) -> np.ndarray:
        return np.flatnonzero(self.masks[t, r])


@dataclass
class AggregateCurve:
    mean: np.ndarray  # (T, R)
    std: np.ndarray  # (T, R)
    n: int


class ReplicateError(ISBPLSError):
    def __init__(self, replicate: int, cause: Exception):
        super().__init__(f"replicate {replicate}: {cause}")
        self.replicate = replicate
        self.cause = cause


def replicate_seeds(master_seed: int, n: int) -> list[int]:
    """Independent per-replicate seeds spawned from one master seed."""
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(master_seed).spawn(n)]


def _percent_row(masks_t: np.ndarray, roles) -> np.ndarray:
    out = np.full(masks_t.shape[0], np.nan)
    for r, truth in enumerate(roles[: masks_t.shape[0]]):
        out[r] = percent_correct(np.flatnonzero(masks_t[r]), truth)
    return out


def run_replicate(config: MCConfig, seed: int, replicate: int = 0) -> SelectionTrace:
    try:
        sim = simulate(config.T, config.schedule, seed)
        T, p = sim.X.shape
        R = config.hyper.R
        state = init_state(p, sim.Y.shape[1], config.hyper, center=config.center)
        masks = np.zeros((T, R, p), dtype=bool)
        percent = np.empty((T, R))
        for t in range(T):
            step(state, sim.X[t], sim.Y[t])
            masks[t] = (state.U != 0).T
            percent[t] = _percent_row(masks[t], sim.truth(t))
        trace = SelectionTrace(replicate, config.hyper, masks, percent)
        if config.offline_prefix:
            n = config.offline_prefix
            model = fit_sbpls(sim.X[:n], sim.Y[:n], config.hyper, center=config.center)
            trace.offline_masks = (model.U != 0).T
            trace.offline_percent = _percent_row(trace.offline_masks, sim.truth(n - 1))
        return trace
    except ISBPLSError as exc:
        raise ReplicateError(replicate, exc) from exc


def _run_one(args):
    config, seed, rep = args
    return run_replicate(config, seed, rep)


def run_experiment(config: MCConfig, n_reps: int, master_seed: int = 0, workers: int = 1) -> list[SelectionTrace]:
    jobs = [(config, s, i) for i, s in enumerate(replicate_seeds(master_seed, n_reps))]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_one, jobs, chunksize=max(1, n_reps // (4 * workers))))
    return [_run_one(j) for j in jobs]


def aggregate(traces: list[SelectionTrace]) -> AggregateCurve:
    """Pointwise mean and population standard deviation of percent-correct."""
    if len(traces) < 2:
        raise ValueError("need at least two traces to aggregate")
    shape = traces[0].percent.shape
    if any(tr.percent.shape != shape for tr in traces):
        raise MisalignedHorizons("traces differ in horizon or component count")
    P = np.stack([tr.percent for tr in traces])
    # shift by the first replicate so agreeing replicates give exact mean and zero spread
    D = P - P[0]
    return AggregateCurve(P[0] + D.mean(axis=0), D.std(axis=0), len(traces))


def recovery_time(mean: np.ndarray, switch: int, level: float = RECOVERY_LEVEL, until: int | None = None):
    """Steps from a 1-based switch time until ``mean`` first reaches ``level``.

    Returns ``None`` if the curve never gets there before ``until`` (1-based,
    inclusive; defaults to the end of the curve).
    """
    end = len(mean) if until is None else min(until, len(mean))
    hits = np.flatnonzero(mean[switch - 1 : end] >= level)
    return int(hits[0]) if hits.size else None


def window_mean(values: np.ndarray, windows=STATIONARY_WINDOWS) -> float:
    """Average of ``values`` (indexed by 1-based time) over the given windows."""
    idx = np.concatenate([np.arange(a - 1, min(b, len(values))) for a, b in windows])
    return float(np.mean(values[idx]))


def settle_stats(curve: AggregateCurve, breakpoints, component: int = 0, level: float = RECOVERY_LEVEL):
    """Recovery times after each breakpoint for one component."""
    out = {}
    bps = list(breakpoints)
    for k, b in enumerate(bps):
        nxt = bps[k + 1] - 1 if k + 1 < len(bps) else None
        out[b] = recovery_time(curve.mean[:, component], b, level, nxt)
    return out


@dataclass
class SweepResult:
    lam: float
    curve: AggregateCurve
    recovery: dict  # breakpoint -> steps (or None)


def lambda_sweep(config: MCConfig, lambdas, n_reps: int, master_seed: int = 0, workers: int = 1,
                 breakpoints=(101, 301)) -> list[SweepResult]:
    """Run the drift experiment once per forgetting factor on shared replicate seeds."""
    out = []
    for lam in lambdas:
        hyper = HyperParams(alpha=config.hyper.alpha, lam=float(lam), R=config.hyper.R,
                            thetas=config.hyper.thetas, tau=config.hyper.tau)
        cfg = MCConfig(config.T, config.schedule, hyper, config.center, config.offline_prefix)
        curve = aggregate(run_experiment(cfg, n_reps, master_seed, workers))
        out.append(SweepResult(float(lam), curve, settle_stats(curve, breakpoints, component=0)))
    return out
