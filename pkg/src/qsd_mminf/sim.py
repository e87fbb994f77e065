"""Exact event-by-event simulation of the absorbed M/M/inf queue.

Draw ``2e + slot`` of trajectory ``i`` is Threefry(seed; 2e + slot, i), where
``e`` counts events and slot 0 is the holding time, slot 1 the jump
direction. Results therefore depend on the seed and the trajectory index
only, never on how trajectories are split across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, RunawayError, StatisticsError
from .model import ModelParams
from .qsd import QsdVector
from .rng import seed_to_key, uniform
from .solver import Method, SurvivalRate

CHUNK = 1 << 16
DEFAULT_MAX_EVENTS = 10_000_000
MIN_FIT_SURVIVORS = 50
MIN_HIST_SURVIVORS = 200
THREADS_ENV = "QSD_MMINF_THREADS"


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    initial_state: int = 1
    n_trajectories: int = 100_000
    t_max: float = 200.0
    max_events: int = DEFAULT_MAX_EVENTS
    seed: int = 42
    probes: tuple[float, ...] = ()

    def __post_init__(self):
        if not isinstance(self.initial_state, (int, np.integer)) or self.initial_state < 0:
            raise ParameterError("initial_state", f"must be a nonnegative integer, got {self.initial_state!r}")
        if not 1 <= self.n_trajectories < 2**32:
            raise ParameterError("n_trajectories", f"must be in [1, 2^32), got {self.n_trajectories!r}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ParameterError("t_max", f"must be finite and > 0, got {self.t_max!r}")
        if not 1 <= self.max_events < 2**31:
            raise ParameterError("max_events", f"must be in [1, 2^31), got {self.max_events!r}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed", f"must be an unsigned 64-bit integer, got {self.seed!r}")
        probes = tuple(sorted(float(p) for p in self.probes))
        if any(not 0 <= p <= self.t_max for p in probes):
            raise ParameterError("probes", f"probe times must lie in [0, t_max={self.t_max}], got {probes}")
        object.__setattr__(self, "probes", probes)


@dataclass
class TrajectoryStats:
    """Absorption times (censored ones set to t_max) and surviving states at each probe."""

    absorption_times: np.ndarray
    censored: np.ndarray
    states_at: dict[float, np.ndarray] = field(default_factory=dict)
    t_max: float = math.inf

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())

    @property
    def n_trajectories(self) -> int:
        return len(self.absorption_times)

    def survivors(self, t: float) -> int:
        """Trajectories still alive at time t; censored ones count as alive through t_max."""
        return int(np.count_nonzero((self.absorption_times > t) | (self.censored & (t <= self.t_max))))


@dataclass(frozen=True)
class SurvivalFit:
    rate: float
    stderr: float
    window: tuple[float, float]
    n_points: int

    def as_survival_rate(self) -> SurvivalRate:
        return SurvivalRate(self.rate, Method.SIMULATION_FIT, self.stderr, 0.0)


@dataclass(frozen=True)
class ConditionalHistogram:
    t: float
    probs: np.ndarray  # probs[k-1] = P(X_t = k | t < T) for k = 1..k_max
    overflow: float
    n_survivors: int


def _simulate_chunk(config: SimConfig, start: int, stop: int):
    a, q = config.params.a, config.params.q
    key = seed_to_key(config.seed)
    n = stop - start
    times = np.zeros(n)
    censored = np.zeros(n, dtype=bool)
    probes = np.asarray(config.probes)
    probe_states = np.zeros((len(probes), n), dtype=np.int64)

    pos = np.arange(n)  # position within the chunk of each live trajectory
    ids = (pos + start).astype(np.uint32)
    state = np.full(n, config.initial_state, dtype=np.int64)
    t = np.zeros(n)
    if config.initial_state == 0:
        return times, censored, probe_states

    event = 0
    while pos.size:
        if event >= config.max_events:
            raise RunawayError(int(ids[0]), config.max_events)
        rate = a + q * state
        c = np.uint32(2 * event)
        hold = -np.log(uniform(key, c, ids)) / rate
        up = uniform(key, c + np.uint32(1), ids) * rate <= a
        t_next = t + hold
        for j, p in enumerate(probes):
            hit = (t <= p) & (p < t_next)
            if hit.any():
                probe_states[j, pos[hit]] = state[hit]
        state = np.where(up, state + 1, state - 1)
        over = t_next > config.t_max
        dead = (state == 0) & ~over
        times[pos[over]] = config.t_max
        censored[pos[over]] = True
        times[pos[dead]] = t_next[dead]
        keep = ~(over | dead)
        pos, ids, state, t = pos[keep], ids[keep], state[keep], t_next[keep]
        event += 1
    return times, censored, probe_states


def default_workers() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run(config: SimConfig, workers: int | None = None) -> TrajectoryStats:
    """Simulate ``config.n_trajectories`` independent paths.

    Chunks are merged in trajectory-index order, so the output is identical
    for any ``workers``.
    """
    if workers is None:
        workers = default_workers()
    cap = os.environ.get(THREADS_ENV)
    if cap:
        workers = min(workers, max(1, int(cap)))
    bounds = [(s, min(s + CHUNK, config.n_trajectories)) for s in range(0, config.n_trajectories, CHUNK)]
    if workers <= 1 or len(bounds) == 1:
        parts = [_simulate_chunk(config, s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _simulate_chunk(config, *b), bounds))
    times = np.concatenate([p[0] for p in parts])
    censored = np.concatenate([p[1] for p in parts])
    states_at = {}
    for j, probe in enumerate(config.probes):
        row = np.concatenate([p[2][j] for p in parts])
        states_at[probe] = row[row > 0]
    return TrajectoryStats(times, censored, states_at, config.t_max)


def fit_survival_rate(stats: TrajectoryStats, window: tuple[float, float], n_points: int = 25) -> SurvivalFit:
    """Slope of ``-log S(t)`` on an even grid over ``window``.

    Weighted least squares with the survivor count as weight, since the
    variance of ``log S(t)`` is roughly one over the number of survivors.
    """
    t_lo, t_hi = map(float, window)
    if not t_lo < t_hi:
        raise StatisticsError(f"empty window ({t_lo}, {t_hi})")
    if t_hi > stats.t_max:
        raise StatisticsError(f"window end {t_hi} beyond the censoring horizon {stats.t_max}")
    n_hi = stats.survivors(t_hi)
    if n_hi < MIN_FIT_SURVIVORS:
        raise StatisticsError(f"{n_hi} survivors at t={t_hi}, need at least {MIN_FIT_SURVIVORS}")
    grid = np.linspace(t_lo, t_hi, n_points)
    ordered = np.sort(stats.absorption_times)
    alive = len(ordered) - np.searchsorted(ordered, grid, side="right")
    alive = alive + np.array([np.count_nonzero(stats.censored & (stats.absorption_times <= g)) for g in grid])
    y = -np.log(alive / stats.n_trajectories)
    w = alive.astype(float)
    tm = np.average(grid, weights=w)
    ym = np.average(y, weights=w)
    sxx = np.sum(w * (grid - tm) ** 2)
    slope = np.sum(w * (grid - tm) * (y - ym)) / sxx
    resid = y - ym - slope * (grid - tm)
    sigma2 = np.sum(w * resid**2) / (n_points - 2)
    return SurvivalFit(float(slope), float(math.sqrt(sigma2 / sxx)), (t_lo, t_hi), n_points)


def conditional_histogram(stats: TrajectoryStats, t: float, k_max: int) -> ConditionalHistogram:
    """Empirical law of X_t given survival, on states 1..k_max plus overflow."""
    if t not in stats.states_at:
        raise StatisticsError(f"t={t} was not a probe time; probes: {sorted(stats.states_at)}")
    states = stats.states_at[t]
    n = len(states)
    if n < MIN_HIST_SURVIVORS:
        raise StatisticsError(f"{n} survivors at t={t}, need at least {MIN_HIST_SURVIVORS}")
    counts = np.bincount(states, minlength=k_max + 1)
    probs = counts[1:k_max + 1] / n
    return ConditionalHistogram(t, probs, float(np.count_nonzero(states > k_max) / n), n)


def total_variation(hist: ConditionalHistogram, reference: QsdVector) -> float:
    """TV distance between a histogram (with overflow bin) and a QSD vector."""
    k_max = len(hist.probs)
    ref = reference.dense(k_max)
    ref_over = max(0.0, reference.total_mass - ref.sum())
    return 0.5 * (float(np.abs(hist.probs - ref).sum()) + abs(hist.overflow - ref_over))


def empirical_mgf(stats: TrajectoryStats, theta: float) -> tuple[float, float]:
    """Sample mean of exp(theta T) and its standard error; needs no censoring."""
    if stats.n_censored:
        raise StatisticsError(f"{stats.n_censored} censored trajectories; exp(theta T) undefined for them")
    v = np.exp(theta * stats.absorption_times)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def mean_time(stats: TrajectoryStats) -> tuple[float, float]:
    """Sample mean of T and its standard error; needs no censoring."""
    if stats.n_censored:
        raise StatisticsError(f"{stats.n_censored} censored trajectories; mean of T undefined")
    v = stats.absorption_times
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))
