"""Time integration and post-processing of trajectories."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from .errors import StepSizeUnderflow, TooShort
from .model import FlowMode, ModelSpec, State, log_rhs_factory

RTOL = 1e-8
ATOL = 1e-10
SAMPLE_DT = 0.1
TRANSIENT_FRACTION = 0.5
#: "converged" if the retained amplitude is below this fraction of Pa
AMPLITUDE_FLOOR = 1e-3


@dataclass
class Trajectory:
    spec: ModelSpec
    mode: FlowMode
    times: np.ndarray
    prices: np.ndarray   # (K, m)
    trend: np.ndarray    # (K, m, n)
    value: np.ndarray    # (K, m, n)
    cash: np.ndarray     # (K, n)
    shares: np.ndarray   # (K, m, n)
    wealth: np.ndarray   # (K, n)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    def state(self, k) -> State:
        st = State(self.prices[k], self.trend[k], self.value[k])
        if self.mode is FlowMode.CLOSED_FLOW:
            st.cash = self.cash[k]
            st.shares = self.shares[k]
        return st

    @property
    def final(self) -> State:
        return self.state(-1)

    def window(self, transient_fraction=TRANSIENT_FRACTION):
        """Boolean mask selecting the post-transient samples."""
        if not 0.0 <= transient_fraction <= 0.9:
            raise ValueError("transient_fraction must lie in [0, 0.9]")
        t0, t1 = self.times[0], self.times[-1]
        return self.times >= t0 + transient_fraction * (t1 - t0)


def _initial_vector(spec, initial: State, mode):
    parts = [np.log(initial.prices / spec.packed.Pa), initial.trend.ravel(), initial.value.ravel()]
    if mode is FlowMode.CLOSED_FLOW:
        M, N = initial.holdings(spec)
        parts += [M, N.ravel()]
    return np.concatenate(parts).astype(float)


def integrate(spec: ModelSpec, initial: State, t_end, sample_dt=SAMPLE_DT, mode=None,
              rtol=RTOL, atol=ATOL, max_step=np.inf) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration with log prices.

    Samples are taken from the dense output every ``sample_dt`` days from 0
    to ``t_end``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if np.any(np.asarray(initial.prices) <= 0):
        raise ValueError("initial prices must be positive")
    mode = FlowMode(mode or spec.flow_mode)
    m, n = spec.m, spec.n
    mn = m * n
    rhs = log_rhs_factory(spec, mode)
    y0 = _initial_vector(spec, initial, mode)

    n_samples = int(np.floor(t_end / sample_dt + 1e-9)) + 1
    times = np.arange(n_samples) * sample_dt
    Y = np.empty((n_samples, y0.size))
    Y[0] = y0

    solver = RK45(rhs, 0.0, y0, t_end, rtol=rtol, atol=atol, max_step=max_step)
    steps = 0
    k = 1
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"integration failed at t = {solver.t:.6g}: {solver.message}")
        steps += 1
        hi = np.searchsorted(times, solver.t, side="right")
        if hi > k:
            Y[k:hi] = solver.dense_output()(times[k:hi]).T
            k = hi

    prices = spec.packed.Pa * np.exp(Y[:, :m])
    prices[0] = initial.prices
    if not np.all(prices > 0):
        raise StepSizeUnderflow("non-positive price in trajectory")
    trend = Y[:, m:m + mn].reshape(-1, m, n)
    value = Y[:, m + mn:m + 2 * mn].reshape(-1, m, n)
    if mode is FlowMode.CLOSED_FLOW:
        cash = Y[:, m + 2 * mn:m + 2 * mn + n]
        shares = Y[:, m + 2 * mn + n:].reshape(-1, m, n)
    else:
        p = spec.packed
        cash = np.broadcast_to(p.M, (n_samples, n))
        shares = np.broadcast_to(p.N, (n_samples, m, n))
    wealth = cash + np.einsum("ki,kij->kj", prices, shares)
    wealth = wealth / wealth.sum(axis=1, keepdims=True)

    attempts = max((solver.nfev - 2) // 6, steps)
    meta = {"steps": steps, "rejected": attempts - steps, "nfev": solver.nfev,
            "rtol": rtol, "atol": atol, "sample_dt": sample_dt}
    return Trajectory(spec, mode, times, prices, trend, value, cash, shares, wealth, meta)


@dataclass
class OscillationStats:
    amplitude: float
    period: float | None
    converged: bool
    asymptote: float | None

    @property
    def angular_frequency(self):
        return None if self.period is None else 2 * np.pi / self.period


def upward_crossings(t, x, level):
    """Linearly interpolated times where ``x`` crosses ``level`` from below."""
    d = x - level
    idx = np.flatnonzero((d[:-1] < 0) & (d[1:] >= 0))
    frac = -d[idx] / (d[idx + 1] - d[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def signal_stats(t, x, reference, transient_fraction=TRANSIENT_FRACTION,
                 floor=AMPLITUDE_FLOOR, require_period=False):
    """Oscillation statistics of a sampled signal after discarding a transient.

    ``reference`` sets the convergence floor (``floor * reference``).
    """
    if not 0.0 <= transient_fraction <= 0.9:
        raise ValueError("transient_fraction must lie in [0, 0.9]")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    keep = t >= t[0] + transient_fraction * (t[-1] - t[0])
    t, x = t[keep], x[keep]
    amplitude = 0.5 * (x.max() - x.min())
    converged = amplitude < floor * reference
    period = None
    if not converged:
        ups = upward_crossings(t, x, x.mean())
        if ups.size >= 3:
            period = float(np.mean(np.diff(ups)))
        if period is not None and t[-1] - t[0] < 2 * period:
            raise TooShort("retained window shorter than two periods")
        if period is None and require_period:
            raise TooShort(f"fewer than two full cycles in a window of {t[-1] - t[0]:.4g}")
    asymptote = float(x[-1]) if converged else None
    return OscillationStats(float(amplitude), period, bool(converged), asymptote)


def oscillation_stats(traj: Trajectory, asset, transient_fraction=TRANSIENT_FRACTION,
                      require_period=False):
    i = traj.spec.asset_index(asset)
    Pa = traj.spec.assets[i].fundamental_price
    return signal_stats(traj.times, traj.prices[:, i], Pa, transient_fraction,
                        require_period=require_period)


@dataclass
class WealthStats:
    mean: float
    std: float
    min: float
    max: float
    counts: np.ndarray
    edges: np.ndarray


def wealth_stats(traj: Trajectory, group, transient_fraction=TRANSIENT_FRACTION, bins=50):
    j = traj.spec.group_index(group)
    w = traj.wealth[traj.window(transient_fraction), j]
    if w.size == 0:
        raise ValueError("empty trajectory window")
    std = float(w.std())
    lo, hi = float(w.min()), float(w.max())
    if std < 1e-12:
        counts = np.array([w.size])
        edges = np.array([lo, hi])
    else:
        counts, edges = np.histogram(w, bins=bins, range=(lo, hi))
    return WealthStats(float(w.mean()), std, lo, hi, counts, edges)
