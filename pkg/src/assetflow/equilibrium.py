"""Fundamental equilibrium, share calibration and general price equilibria."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import CalibrationImpossible, NoConvergence, NonPositivePrice
from .model import FlowMode, ModelSpec, State, _rates, equilibrium_state, system_rhs


class EquilibriumKind(str, enum.Enum):
    FUNDAMENTAL = "fundamental"
    NON_FUNDAMENTAL = "non_fundamental"


@dataclass
class EquilibriumResult:
    """``residual_norm`` is the max-norm of the fixed-endowment right-hand side
    in log-price coordinates: relative price velocity and sentiment rates,
    both per unit time and free of currency units."""

    state: State
    residual_norm: float
    kind: EquilibriumKind
    per_asset_residuals: np.ndarray
    iterations: int = 0


def _rhs_norm(spec, state):
    rhs = system_rhs(state, spec, FlowMode.FIXED_ENDOWMENT)
    rhs[:spec.m] /= state.prices
    return float(np.max(np.abs(rhs)))


def baseline_flows(spec: ModelSpec):
    """(S, K) at zero sentiment: buy-side cash flow and sell-side share flow per asset."""
    p = spec.packed
    zero = np.zeros((spec.m, spec.n))
    r = _rates(p, zero, zero)
    return r.buy @ p.M, np.einsum("ij,ij->i", r.sell, p.N)


def fundamental_equilibrium(spec: ModelSpec) -> EquilibriumResult:
    """P = Pa with all sentiments zero.

    ``per_asset_residuals`` is ``sum_j k M_j - sum_j ks N_j Pa`` and is only
    zero if the spec is calibrated.
    """
    state = equilibrium_state(spec, FlowMode.FIXED_ENDOWMENT)
    S, K = baseline_flows(spec)
    residuals = S - K * spec.packed.Pa
    return EquilibriumResult(state, _rhs_norm(spec, state), EquilibriumKind.FUNDAMENTAL, residuals)


def calibrate_shares(spec: ModelSpec) -> ModelSpec:
    """Rescale every asset's share holdings by one factor so the fundamental
    point is an equilibrium. Group proportions are preserved."""
    S, K = baseline_flows(spec)
    Pa = spec.packed.Pa
    if np.any(K <= 0):
        i = int(np.flatnonzero(K <= 0)[0])
        raise CalibrationImpossible(
            f"asset {spec.asset_names[i]}: no baseline sell flow (all sell rates or shares are zero)")
    factor = S / (K * Pa)
    if np.all(factor == 1.0):
        return spec
    groups = tuple(replace(g, shares=g.shares * factor) for g in spec.groups)
    return replace(spec, groups=groups)


def is_calibrated(spec: ModelSpec, rtol=1e-12):
    S, K = baseline_flows(spec)
    return bool(np.all(np.abs(S - K * spec.packed.Pa) <= rtol * S))


def stationary_state(spec: ModelSpec, prices):
    """Sentiments eliminated: zeta1 = 0, zeta2 = q2 (1 - P/Pa)."""
    p = spec.packed
    prices = np.asarray(prices, dtype=float)
    z2 = p.q2 * (1.0 - prices / p.Pa)[:, None]
    return State(prices.copy(), np.zeros((spec.m, spec.n)), z2)


def price_residuals(spec: ModelSpec, prices):
    """(R, T): R_i = S_i - T_i with sentiments at their stationary values."""
    p = spec.packed
    st = stationary_state(spec, prices)
    r = _rates(p, st.trend, st.value)
    S = r.buy @ p.M
    T = np.einsum("ij,ij->i", r.sell, p.N) * st.prices
    return S - T, T


def _fd_jacobian(spec, prices, rel_step=1e-6):
    m = prices.size
    J = np.empty((m, m))
    for k in range(m):
        h = rel_step * prices[k]
        up, dn = prices.copy(), prices.copy()
        up[k] += h
        dn[k] -= h
        J[:, k] = (price_residuals(spec, up)[0] - price_residuals(spec, dn)[0]) / (2 * h)
    return J


def solve_equilibrium(spec: ModelSpec, initial_prices, tol=1e-10, max_iters=100,
                      damping_floor=2.0 ** -20) -> EquilibriumResult:
    """Damped Newton on the m price residuals with sentiments eliminated.

    Converged when max |R_i| / T_i < tol. Steps are halved while any price
    would become non-positive or the residual norm would grow.
    """
    P = np.array(initial_prices, dtype=float)
    if P.shape != (spec.m,) or np.any(P <= 0):
        raise ValueError("initial prices must be positive, one per asset")

    def scaled(prices):
        R, T = price_residuals(spec, prices)
        return R, np.max(np.abs(R) / T)

    R, err = scaled(P)
    it = 0
    while err >= tol:
        if it == max_iters:
            raise NoConvergence(f"Newton did not converge in {max_iters} iterations (residual {err:.3g})")
        it += 1
        J = _fd_jacobian(spec, P)
        try:
            step = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular price Jacobian at P = {P}") from exc
        lam = 1.0
        norm = np.max(np.abs(R))
        while True:
            trial = P + lam * step
            if np.all(trial > 0):
                R_trial, err_trial = scaled(trial)
                if np.max(np.abs(R_trial)) <= norm:
                    break
            lam *= 0.5
            if lam < damping_floor:
                if np.all(trial > 0):
                    raise NoConvergence("damped Newton step could not reduce the residual")
                raise NonPositivePrice("Newton step keeps crossing zero price")
        P, R, err = trial, R_trial, err_trial

    state = stationary_state(spec, P)
    Pa = spec.packed.Pa
    kind = (EquilibriumKind.FUNDAMENTAL if np.all(np.abs(P - Pa) <= 1e-8 * Pa)
            else EquilibriumKind.NON_FUNDAMENTAL)
    return EquilibriumResult(state, _rhs_norm(spec, state), kind, R, it)


def multistart(spec: ModelSpec, grid, **kwargs):
    """Solve from every point of ``grid`` (rows of initial prices) and return
    the distinct equilibria found, sorted by price."""
    found = []
    for start in np.atleast_2d(grid):
        try:
            res = solve_equilibrium(spec, start, **kwargs)
        except (NoConvergence, NonPositivePrice):
            continue
        if not any(np.allclose(res.state.prices, f.state.prices, rtol=1e-7) for f in found):
            found.append(res)
    return sorted(found, key=lambda r: tuple(r.state.prices))
