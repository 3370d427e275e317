"""Multi-asset, multi-group asset-flow model.

State layout (flat vector) is fixed throughout the package::

    [P(0..m-1),
     zeta1 (asset-major, group-minor; m*n),
     zeta2 (asset-major, group-minor; m*n),
     cash (n)            -- closed-flow mode only
     shares (asset-major, group-minor; m*n)  -- closed-flow mode only]

Per-asset-per-group quantities are stored as ``(m, n)`` arrays so that
``arr.ravel()`` reproduces the layout above.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateMarket

#: relative guard on the sell-side denominator T_i
DEGENERACY_EPS = 1e-12


class FlowMode(str, enum.Enum):
    FIXED_ENDOWMENT = "fixed"
    CLOSED_FLOW = "flow"


class RateForm(str, enum.Enum):
    TREND_TANH = "trend_tanh"
    VALUE_LINEAR = "value_linear"
    COMPOSITE = "composite"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _per_asset(value, m, name):
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        a = np.full(m, float(a))
    if a.shape != (m,):
        raise ValueError(f"{name}: expected {m} per-asset values, got shape {a.shape}")
    return _frozen(a)


def _square(value, m, name):
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        a = np.eye(m) * float(a)
    if a.shape != (m, m):
        raise ValueError(f"{name}: expected an {m}x{m} matrix, got shape {a.shape}")
    return _frozen(a)


@dataclass(frozen=True, eq=False)
class AssetSpec:
    name: str
    fundamental_price: float
    adjustment_timescale: float = 1.0

    def __post_init__(self):
        if not self.fundamental_price > 0:
            raise ValueError(f"asset {self.name}: fundamental_price must be > 0")
        if not self.adjustment_timescale > 0:
            raise ValueError(f"asset {self.name}: adjustment_timescale must be > 0")


@dataclass(frozen=True, eq=False)
class RateSpec:
    """Coefficients of one group's buy and sell rates, indexed by asset.

    Buy rate for asset ``i`` (before clamping to [0, 1] and the budget rescale)::

        trend_tanh:    a[i] + b[i] * tanh(alpha[i] @ zeta1 + beta[i] @ zeta2)
        value_linear:  c[i] + d[i] * zeta2[i]
        composite:     a[i] + b[i] * tanh(...) + d[i] * zeta2[i]

    Sell rate for asset ``i`` only sees that asset's sentiments::

        a_s[i] - b_s[i] * tanh(alpha[i, i] * zeta1[i] + beta[i, i] * zeta2[i]) - d_s[i] * zeta2[i]

    ``zeta1``/``zeta2`` are the owning group's sentiments across all assets.
    """

    form: RateForm
    baseline_buy: np.ndarray
    trend_amplitude: np.ndarray
    trend_weights: np.ndarray
    value_weights: np.ndarray
    value_baseline: np.ndarray
    value_slope: np.ndarray
    baseline_sell: np.ndarray
    sell_trend_amplitude: np.ndarray
    sell_value_slope: np.ndarray

    @classmethod
    def build(cls, m, form=RateForm.COMPOSITE, baseline_buy=0.2, trend_amplitude=0.0,
              trend_weights=1.0, value_weights=0.0, value_baseline=None, value_slope=0.0,
              baseline_sell=None, sell_trend_amplitude=None, sell_value_slope=0.0):
        """Broadcast scalars to per-asset arrays.

        Scalar weights become ``weight * I``.  ``value_baseline`` and
        ``baseline_sell`` default to ``baseline_buy``; ``sell_trend_amplitude``
        defaults to ``trend_amplitude`` (mirror of the buy side).
        """
        if value_baseline is None:
            value_baseline = baseline_buy
        if baseline_sell is None:
            baseline_sell = baseline_buy
        if sell_trend_amplitude is None:
            sell_trend_amplitude = trend_amplitude
        return cls(
            form=RateForm(form),
            baseline_buy=baseline_buy,
            trend_amplitude=trend_amplitude,
            trend_weights=trend_weights,
            value_weights=value_weights,
            value_baseline=value_baseline,
            value_slope=value_slope,
            baseline_sell=baseline_sell,
            sell_trend_amplitude=sell_trend_amplitude,
            sell_value_slope=sell_value_slope,
            _m=m,
        )

    # dataclass init with an explicit size so scalars can be broadcast
    def __init__(self, form, baseline_buy, trend_amplitude, trend_weights, value_weights,
                 value_baseline, value_slope, baseline_sell, sell_trend_amplitude,
                 sell_value_slope, _m=None):
        m = _m
        if m is None:
            m = np.shape(trend_weights)[0] if np.ndim(trend_weights) == 2 else np.size(baseline_buy)
        put = object.__setattr__
        put(self, "form", RateForm(form))
        for name in ("baseline_buy", "trend_amplitude", "value_baseline", "value_slope",
                     "baseline_sell", "sell_trend_amplitude", "sell_value_slope"):
            arr = _per_asset(locals()[name], m, name)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name}: non-finite coefficient")
            put(self, name, arr)
        put(self, "trend_weights", _square(trend_weights, m, "trend_weights"))
        put(self, "value_weights", _square(value_weights, m, "value_weights"))
        for name in ("baseline_buy", "value_baseline", "baseline_sell"):
            arr = getattr(self, name)
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError(f"{name}: baseline rates must lie in [0, 1]")

    @property
    def n_assets(self):
        return self.baseline_buy.size

    @cached_property
    def effective(self):
        """(buy_base, buy_amp, buy_slope) with the form's inactive terms zeroed."""
        zero = np.zeros(self.n_assets)
        if self.form is RateForm.TREND_TANH:
            return self.baseline_buy, self.trend_amplitude, zero
        if self.form is RateForm.VALUE_LINEAR:
            return self.value_baseline, zero, self.value_slope
        return self.baseline_buy, self.trend_amplitude, self.value_slope


@dataclass(frozen=True, eq=False)
class GroupSpec:
    name: str
    cash: float
    shares: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    rates: RateSpec

    def __post_init__(self):
        m = self.rates.n_assets
        put = object.__setattr__
        for name in ("shares", "q1", "q2", "c1", "c2"):
            put(self, name, _per_asset(getattr(self, name), m, f"group {self.name}: {name}"))
        put(self, "cash", float(self.cash))
        if self.cash < 0:
            raise ValueError(f"group {self.name}: cash must be >= 0")
        if np.any(self.shares < 0):
            raise ValueError(f"group {self.name}: shares must be >= 0")
        if np.any(self.q1 < 0) or np.any(self.q2 < 0):
            raise ValueError(f"group {self.name}: q1, q2 must be >= 0")
        if np.any(self.c1 <= 0) or np.any(self.c2 <= 0):
            raise ValueError(f"group {self.name}: c1, c2 must be > 0")


class Packed(NamedTuple):
    """Vectorised parameter view; per-asset-per-group arrays are (m, n)."""

    Pa: np.ndarray
    tau: np.ndarray
    M: np.ndarray
    N: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    buy_base: np.ndarray
    buy_amp: np.ndarray
    buy_slope: np.ndarray
    alpha: np.ndarray  # (n, m, m): alpha[j, i, l]
    beta: np.ndarray
    alpha_own: np.ndarray
    beta_own: np.ndarray
    sell_base: np.ndarray
    sell_amp: np.ndarray
    sell_slope: np.ndarray


def _pack_groups(groups, assets):
    def col(get):
        return np.stack([np.asarray(get(g), dtype=float) for g in groups], axis=-1)

    alpha = np.stack([g.rates.trend_weights for g in groups])
    beta = np.stack([g.rates.value_weights for g in groups])
    diag = np.arange(alpha.shape[1])
    return Packed(
        Pa=np.array([a.fundamental_price for a in assets]),
        tau=np.array([a.adjustment_timescale for a in assets]),
        M=np.array([g.cash for g in groups]),
        N=col(lambda g: g.shares),
        q1=col(lambda g: g.q1),
        q2=col(lambda g: g.q2),
        c1=col(lambda g: g.c1),
        c2=col(lambda g: g.c2),
        buy_base=col(lambda g: g.rates.effective[0]),
        buy_amp=col(lambda g: g.rates.effective[1]),
        buy_slope=col(lambda g: g.rates.effective[2]),
        alpha=alpha,
        beta=beta,
        alpha_own=alpha[:, diag, diag].T.copy(),
        beta_own=beta[:, diag, diag].T.copy(),
        sell_base=col(lambda g: g.rates.baseline_sell),
        sell_amp=col(lambda g: g.rates.sell_trend_amplitude),
        sell_slope=col(lambda g: g.rates.sell_value_slope),
    )


@dataclass(frozen=True, eq=False)
class ModelSpec:
    assets: tuple
    groups: tuple
    flow_mode: FlowMode = FlowMode.FIXED_ENDOWMENT

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "flow_mode", FlowMode(self.flow_mode))
        if not self.assets:
            raise ValueError("at least one asset is required")
        if not self.groups:
            raise ValueError("at least one group is required")
        m = len(self.assets)
        for g in self.groups:
            if g.rates.n_assets != m:
                raise ValueError(f"group {g.name}: per-asset arrays must have length {m}")
        for names, what in ((self.asset_names, "asset"), (self.group_names, "group")):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {what} names: {names}")

    @property
    def m(self):
        return len(self.assets)

    @property
    def n(self):
        return len(self.groups)

    @property
    def asset_names(self):
        return tuple(a.name for a in self.assets)

    @property
    def group_names(self):
        return tuple(g.name for g in self.groups)

    @cached_property
    def packed(self) -> Packed:
        return _pack_groups(self.groups, self.assets)

    def state_size(self, mode=None):
        mode = FlowMode(mode or self.flow_mode)
        m, n = self.m, self.n
        size = m + 2 * m * n
        if mode is FlowMode.CLOSED_FLOW:
            size += n + m * n
        return size

    def with_mode(self, mode):
        return replace(self, flow_mode=FlowMode(mode))

    def group_index(self, name_or_index):
        if isinstance(name_or_index, (int, np.integer)):
            return int(name_or_index)
        return self.group_names.index(name_or_index)

    def asset_index(self, name_or_index):
        if isinstance(name_or_index, (int, np.integer)):
            return int(name_or_index)
        return self.asset_names.index(name_or_index)


@dataclass
class State:
    prices: np.ndarray
    trend: np.ndarray
    value: np.ndarray
    cash: np.ndarray | None = None
    shares: np.ndarray | None = None

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        m = self.prices.size
        self.trend = np.asarray(self.trend, dtype=float).reshape(m, -1)
        self.value = np.asarray(self.value, dtype=float).reshape(m, -1)
        if self.cash is not None:
            self.cash = np.asarray(self.cash, dtype=float)
            self.shares = np.asarray(self.shares, dtype=float).reshape(m, -1)

    @property
    def has_flow(self):
        return self.cash is not None

    def to_vector(self):
        parts = [self.prices, self.trend.ravel(), self.value.ravel()]
        if self.has_flow:
            parts += [self.cash, self.shares.ravel()]
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, vec, m, n):
        vec = np.asarray(vec, dtype=float)
        base = m + 2 * m * n
        prices = vec[:m]
        trend = vec[m:m + m * n].reshape(m, n)
        value = vec[m + m * n:base].reshape(m, n)
        if vec.size == base:
            return cls(prices, trend, value)
        if vec.size != base + n + m * n:
            raise ValueError(f"state vector of length {vec.size} does not fit m={m}, n={n}")
        cash = vec[base:base + n]
        shares = vec[base + n:].reshape(m, n)
        return cls(prices, trend, value, cash, shares)

    def holdings(self, spec):
        """(cash (n,), shares (m, n)) from the state or, if absent, the spec."""
        if self.has_flow:
            return self.cash, self.shares
        p = spec.packed
        return p.M, p.N


def equilibrium_state(spec, mode=None):
    """Fundamental point: P = Pa, zero sentiments, holdings from the spec."""
    p = spec.packed
    m, n = spec.m, spec.n
    state = State(p.Pa.copy(), np.zeros((m, n)), np.zeros((m, n)))
    if FlowMode(mode or spec.flow_mode) is FlowMode.CLOSED_FLOW:
        state.cash = p.M.copy()
        state.shares = p.N.copy()
    return state


# --------------------------------------------------------------------------
# sentiment right-hand sides

def trend_sentiment_rhs(zeta1, rel_price_velocity, c1, q1):
    return c1 * q1 * rel_price_velocity - c1 * zeta1


def value_sentiment_rhs(zeta2, price, fundamental_price, c2, q2):
    if np.any(np.asarray(fundamental_price) <= 0):
        raise ValueError("fundamental price must be > 0")
    return c2 * q2 * (1.0 - price / fundamental_price) - c2 * zeta2


# --------------------------------------------------------------------------
# transition rates

class Rates(NamedTuple):
    buy: np.ndarray          # (m, n)
    sell: np.ndarray         # (m, n)
    at_boundary: bool
    # partials, only when requested
    dbuy_trend: np.ndarray | None = None   # [i, j, l] = d k_j^(i) / d zeta1_j^(l)
    dbuy_value: np.ndarray | None = None
    dsell_trend: np.ndarray | None = None  # [i, j]   = d ks_j^(i) / d zeta1_j^(i)
    dsell_value: np.ndarray | None = None


def _rates(p: Packed, z1, z2, derivatives=False) -> Rates:
    # u[i, j] = sum_l alpha[j, i, l] z1[l, j] + beta[j, i, l] z2[l, j]
    u = (np.matmul(p.alpha, z1.T[:, :, None]) + np.matmul(p.beta, z2.T[:, :, None]))[:, :, 0].T
    th = np.tanh(u)
    raw = p.buy_base + p.buy_amp * th + p.buy_slope * z2
    k = np.minimum(np.maximum(raw, 0.0), 1.0)
    total = k.sum(axis=0)
    buy = k / np.maximum(total, 1.0)

    us = p.alpha_own * z1 + p.beta_own * z2
    ths = np.tanh(us)
    raw_s = p.sell_base - p.sell_amp * ths - p.sell_slope * z2
    sell = np.minimum(np.maximum(raw_s, 0.0), 1.0)
    if derivatives is None:
        return Rates(buy, sell, False)

    sens = (p.buy_amp != 0) | (p.buy_slope != 0)
    sens_s = (p.sell_amp != 0) | (p.sell_slope != 0)
    boundary = bool(
        np.any(sens & ((raw == 0.0) | (raw == 1.0)))
        or np.any(sens_s & ((raw_s == 0.0) | (raw_s == 1.0)))
        or np.any(total == 1.0)
    )
    if not derivatives:
        return Rates(buy, sell, boundary)

    m = z1.shape[0]
    inside = ((raw >= 0.0) & (raw <= 1.0)).astype(float)
    g = inside * p.buy_amp * (1.0 - th * th)
    dk1 = g[:, :, None] * p.alpha.transpose(1, 0, 2)
    dk2 = g[:, :, None] * p.beta.transpose(1, 0, 2)
    dk2 += (inside * p.buy_slope)[:, :, None] * np.eye(m)[:, None, :]
    over = total > 1.0
    if np.any(over):
        s = np.where(over, total, 1.0)
        for dk in (dk1, dk2):
            col = dk.sum(axis=0)  # [j, l]
            scaled = dk / s[None, :, None] - k[:, :, None] * col[None, :, :] / (s * s)[None, :, None]
            dk[:] = np.where(over[None, :, None], scaled, dk)

    inside_s = ((raw_s >= 0.0) & (raw_s <= 1.0)).astype(float)
    gs = inside_s * p.sell_amp * (1.0 - ths * ths)
    dks1 = -gs * p.alpha_own
    dks2 = -gs * p.beta_own - inside_s * p.sell_slope
    return Rates(buy, sell, boundary, dk1, dk2, dks1, dks2)


def buy_rate(group: GroupSpec, asset_index, trend, value):
    """Buy rate of ``group`` for one asset given the group's sentiments (length m each)."""
    r = _rates(_pack_groups([group], [AssetSpec("_", 1.0)] * group.rates.n_assets),
               np.asarray(trend, float).reshape(-1, 1), np.asarray(value, float).reshape(-1, 1))
    return float(r.buy[asset_index, 0])


def sell_rate(group: GroupSpec, asset_index, trend, value):
    """Sell rate for one asset; ``trend``/``value`` are that asset's sentiments only."""
    m = group.rates.n_assets
    z1 = np.zeros((m, 1))
    z2 = np.zeros((m, 1))
    z1[asset_index, 0] = trend
    z2[asset_index, 0] = value
    r = _rates(_pack_groups([group], [AssetSpec("_", 1.0)] * m), z1, z2)
    return float(r.sell[asset_index, 0])


def model_rates(spec: ModelSpec, state: State, derivatives=False) -> Rates:
    return _rates(spec.packed, state.trend, state.value, derivatives)


# --------------------------------------------------------------------------
# price dynamics

class Flows(NamedTuple):
    rates: Rates
    S: np.ndarray       # buy-side cash flow per asset
    K: np.ndarray       # sell-side shares flow per asset, T = K * P
    growth: np.ndarray  # (1/P) dP/dt


def _flows(p: Packed, prices, z1, z2, M, N, derivatives=False) -> Flows:
    """``derivatives=None`` skips the clamp-boundary bookkeeping (integration path)."""
    r = _rates(p, z1, z2, derivatives)
    S = r.buy @ M
    K = (r.sell * N).sum(axis=1)
    bad = K <= DEGENERACY_EPS * N.sum(axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DegenerateMarket(f"sell-side flow of asset {i} vanished", asset=i)
    growth = (S / (K * prices) - 1.0) / p.tau
    return Flows(r, S, K, growth)


def price_rhs(asset_index, state: State, spec: ModelSpec):
    M, N = state.holdings(spec)
    f = _flows(spec.packed, state.prices, state.trend, state.value, M, N)
    return float(state.prices[asset_index] * f.growth[asset_index])


def _sentiment_rates(p, prices, growth, z1, z2):
    dz1 = p.c1 * p.q1 * growth[:, None] - p.c1 * z1
    dz2 = p.c2 * p.q2 * (1.0 - prices / p.Pa)[:, None] - p.c2 * z2
    return dz1, dz2


def _trade_flows(f: Flows, prices, M, N):
    """Cash and share flows with per-asset market clearing.

    Executed value per asset is the short side, min(S, T).  Buyers are filled
    in proportion to their cash demand, sellers to their offered value, so
    total cash and total shares per asset are conserved exactly.  At S = T
    this is dM_j = sum_i (ks N P - k M), dN = (k M - ks N P) / P.
    """
    demand = f.rates.buy * M[None, :]
    offer = f.rates.sell * N * prices[:, None]
    T = f.K * prices
    executed = np.minimum(f.S, T)
    with np.errstate(invalid="ignore", divide="ignore"):
        fill_buy = np.where(f.S > 0, executed / f.S, 0.0)
        fill_sell = np.where(T > 0, executed / T, 0.0)
    bought = demand * fill_buy[:, None]
    sold = offer * fill_sell[:, None]
    dM = (sold - bought).sum(axis=0)
    dN = (bought - sold) / prices[:, None]
    return dM, dN


def system_rhs(state: State, spec: ModelSpec, mode=None):
    """Time derivative of the flat state vector.

    Prices are evaluated first and their relative velocity is substituted into
    the trend-sentiment equation, so the system is explicit.
    """
    mode = FlowMode(mode or (FlowMode.CLOSED_FLOW if state.has_flow else FlowMode.FIXED_ENDOWMENT))
    p = spec.packed
    P = state.prices
    M, N = (state.cash, state.shares) if mode is FlowMode.CLOSED_FLOW else (p.M, p.N)
    if M is None:
        raise ValueError("closed-flow evaluation needs cash and shares in the state")
    f = _flows(p, P, state.trend, state.value, M, N)
    dz1, dz2 = _sentiment_rates(p, P, f.growth, state.trend, state.value)
    parts = [P * f.growth, dz1.ravel(), dz2.ravel()]
    if mode is FlowMode.CLOSED_FLOW:
        dM, dN = _trade_flows(f, P, M, N)
        parts += [dM, dN.ravel()]
    return np.concatenate(parts)


def _argument_map(p: Packed):
    """Dense matrix taking [zeta1, zeta2] (flattened asset-major) to the tanh
    arguments of the buy rates (first m*n rows) and sell rates (last m*n)."""
    m, n = p.alpha.shape[1], p.alpha.shape[0]
    mn = m * n
    W = np.zeros((2 * mn, 2 * mn))
    rows = np.arange(m)[:, None] * n + np.arange(n)[None, :]  # [i, j] -> i*n + j
    for l in range(m):
        # buy argument of (i, j) reads zeta(l, j) through alpha[j, i, l], beta[j, i, l]
        W[rows, rows[l][None, :]] += p.alpha[:, :, l].T
        W[rows, mn + rows[l][None, :]] += p.beta[:, :, l].T
    W[mn + rows, rows] = p.alpha_own
    W[mn + rows, mn + rows] = p.beta_own
    return W


def log_rhs_factory(spec: ModelSpec, mode):
    """RHS in log-price coordinates, y = [ln(P / Pa), zeta1, zeta2, (M, N)].

    Measuring log prices from the fundamental keeps them near zero, so the
    absolute tolerance rather than ``rtol * |ln P|`` governs their error.
    This is the integration path: the rates are evaluated through one dense
    argument map and no clamp-boundary bookkeeping is done.
    """
    p = spec.packed
    m, n = spec.m, spec.n
    mn = m * n
    flow = FlowMode(mode) is FlowMode.CLOSED_FLOW
    W = _argument_map(p)
    inv_tau = 1.0 / p.tau

    def rhs(t, y):
        P = p.Pa * np.exp(y[:m])
        z = y[m:m + 2 * mn]
        z1 = z[:mn].reshape(m, n)
        z2 = z[mn:].reshape(m, n)
        th = np.tanh(W @ z)
        if flow:
            M = y[m + 2 * mn:m + 2 * mn + n]
            N = y[m + 2 * mn + n:].reshape(m, n)
        else:
            M, N = p.M, p.N
        k = np.minimum(np.maximum(p.buy_base + p.buy_amp * th[:mn].reshape(m, n) + p.buy_slope * z2, 0.0), 1.0)
        buy = k / np.maximum(k.sum(axis=0), 1.0)
        sell = np.minimum(np.maximum(p.sell_base - p.sell_amp * th[mn:].reshape(m, n) - p.sell_slope * z2,
                                     0.0), 1.0)
        S = buy @ M
        K = (sell * N).sum(axis=1)
        bad = K <= DEGENERACY_EPS * N.sum(axis=1)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DegenerateMarket(f"sell-side flow of asset {i} vanished", asset=i, time=t)
        growth = (S / (K * P) - 1.0) * inv_tau
        out = np.empty_like(y)
        out[:m] = growth
        out[m:m + mn] = (p.c1 * (p.q1 * growth[:, None] - z1)).ravel()
        out[m + mn:m + 2 * mn] = (p.c2 * (p.q2 * (1.0 - P / p.Pa)[:, None] - z2)).ravel()
        if flow:
            f = Flows(Rates(buy, sell, False), S, K, growth)
            dM, dN = _trade_flows(f, P, M, N)
            out[m + 2 * mn:m + 2 * mn + n] = dM
            out[m + 2 * mn + n:] = dN.ravel()
        return out

    return rhs


def wealth_fractions(state: State, spec: ModelSpec):
    M, N = state.holdings(spec)
    wealth = M + state.prices @ N
    total = wealth.sum()
    if not total > 0:
        raise ValueError("total wealth must be positive")
    return wealth / total


def with_group_values(spec: ModelSpec, group, **fields):
    """Copy of ``spec`` with per-asset group fields (q1, q2, c1, c2, shares, cash) replaced."""
    j = spec.group_index(group)
    groups = list(spec.groups)
    groups[j] = replace(groups[j], **fields)
    return replace(spec, groups=tuple(groups))


def with_group_rates(spec: ModelSpec, group, **fields):
    j = spec.group_index(group)
    g = spec.groups[j]
    r = g.rates
    values = {name: getattr(r, name) for name in (
        "form", "baseline_buy", "trend_amplitude", "trend_weights", "value_weights",
        "value_baseline", "value_slope", "baseline_sell", "sell_trend_amplitude",
        "sell_value_slope")}
    values.update(fields)
    return with_group_values(spec, j, rates=RateSpec(**values, _m=spec.m))
