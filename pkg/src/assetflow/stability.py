"""Analytic Jacobian, eigenvalue classification and the two sufficient
stability conditions (diagonal dominance of the price-value subsystem and
Routh-Hurwitz on the reduced 3x3 asset/group block).

The Jacobian is taken in price coordinates for fixed endowments, i.e. cash
and shares are parameters.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolated
from .linalg import eigenvalues
from .model import FlowMode, ModelSpec, State, _flows, equilibrium_state

MARGINAL_TOL = 1e-8


class Classification(str, enum.Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


def classify(max_real, tol=MARGINAL_TOL):
    if max_real < -tol:
        return Classification.STABLE
    if abs(max_real) <= tol:
        return Classification.MARGINAL
    return Classification.UNSTABLE


@dataclass
class BlockLayout:
    m: int
    n: int

    @property
    def prices(self):
        return slice(0, self.m)

    @property
    def sentiments(self):
        return slice(self.m, self.m + 2 * self.m * self.n)

    def trend(self, i, j):
        return self.m + i * self.n + j

    def value(self, i, j):
        return self.m + self.m * self.n + i * self.n + j

    def blocks(self):
        """Index ranges (rows, cols) of the A, B, C and D blocks."""
        p, s = self.prices, self.sentiments
        return {"A": (p, p), "B": (p, s), "C": (s, p), "D": (s, s)}


@dataclass
class JacobianReport:
    matrix: np.ndarray
    layout: BlockLayout
    eigenvalues: np.ndarray
    max_real_part: float
    classification: Classification
    non_differentiable: bool

    def block(self, name):
        rows, cols = self.layout.blocks()[name]
        return self.matrix[rows, cols]

    @property
    def dominant(self):
        """Eigenvalue with the largest real part (positive imaginary part first)."""
        return self.eigenvalues[0]


@dataclass
class RouthHurwitzReport:
    alpha2: float
    alpha1: float
    alpha0: float
    condition_a2: bool
    condition_a0: bool
    condition_product: bool

    @property
    def stable(self):
        return self.condition_a2 and self.condition_a0 and self.condition_product


def _price_partials(spec, state):
    """dF_i/d zeta for every sentiment, shaped (m, 2, m, n): [i, type, l, j]."""
    p = spec.packed
    P = state.prices
    f = _flows(p, P, state.trend, state.value, p.M, p.N, derivatives=True)
    r = f.rates
    T = f.K * P
    m, n = spec.m, spec.n
    pref = P / (p.tau * T * T)
    out = np.zeros((m, 2, m, n))
    for t, (dk, dks) in enumerate(((r.dbuy_trend, r.dsell_trend), (r.dbuy_value, r.dsell_value))):
        # dS_i / d zeta_j^(l) = M_j dk[i, j, l]
        dS = (dk * p.M[None, :, None]).transpose(0, 2, 1)  # [i, l, j]
        # dT_i / d zeta_j^(l) = delta_il N_ij P_i dks[i, j]
        dT = np.zeros((m, m, n))
        dT[np.arange(m), np.arange(m), :] = p.N * P[:, None] * dks
        out[:, t] = pref[:, None, None] * (T[:, None, None] * dS - f.S[:, None, None] * dT)
    return f, out, r.at_boundary


def jacobian_matrix(spec: ModelSpec, state: State):
    """(J, F, flag) with J the analytic Jacobian of the fixed-endowment system."""
    p = spec.packed
    m, n = spec.m, spec.n
    mn = m * n
    P = state.prices
    f, dF, boundary = _price_partials(spec, state)
    F = P * f.growth
    N = m + 2 * mn
    J = np.zeros((N, N))
    J[np.arange(m), np.arange(m)] = -1.0 / p.tau
    J[:m, m:] = dF.reshape(m, 2 * mn)

    rows1 = m + np.arange(mn)
    rows2 = m + mn + np.arange(mn)
    asset_of = np.repeat(np.arange(m), n)
    c1q1 = (p.c1 * p.q1).ravel()
    Pi = P[asset_of]
    # trend rows: c1 q1 (1/P) dF/dxi - c1 delta
    J[rows1, asset_of] = -c1q1 / Pi * (1.0 / p.tau[asset_of] + F[asset_of] / Pi)
    J[rows1, m:] = (c1q1 / Pi)[:, None] * J[asset_of, m:]
    J[rows1, rows1] -= p.c1.ravel()
    # value rows
    J[rows2, asset_of] = -(p.c2 * p.q2).ravel() / p.Pa[asset_of]
    J[rows2, rows2] = -p.c2.ravel()
    return J, F, boundary


def assemble_jacobian(spec: ModelSpec, state: State | None = None, tol=MARGINAL_TOL):
    if state is None:
        state = equilibrium_state(spec, FlowMode.FIXED_ENDOWMENT)
    J, _, boundary = jacobian_matrix(spec, state)
    lam = eigenvalues(J)
    mx = float(lam[0].real)
    return JacobianReport(J, BlockLayout(spec.m, spec.n), lam, mx, classify(mx, tol), boundary)


def finite_difference_jacobian(spec: ModelSpec, state: State, rel_step=1e-6, richardson=False):
    """Central differences of the fixed-endowment right-hand side.

    With ``richardson`` the steps h and h/2 are combined to cancel the h**2
    term, which keeps entries many orders below the largest one accurate;
    ``rel_step`` around 3e-4 suits that mode.
    """
    if richardson:
        coarse = finite_difference_jacobian(spec, state, rel_step)
        fine = finite_difference_jacobian(spec, state, rel_step / 2)
        return (4.0 * fine - coarse) / 3.0
    from .model import system_rhs

    x0 = State(state.prices, state.trend, state.value).to_vector()
    m, n = spec.m, spec.n
    J = np.empty((x0.size, x0.size))
    for k in range(x0.size):
        h = rel_step * max(abs(x0[k]), 1.0)
        xp, xm = x0.copy(), x0.copy()
        xp[k] += h
        xm[k] -= h
        fp = system_rhs(State.from_vector(xp, m, n), spec, FlowMode.FIXED_ENDOWMENT)
        fm = system_rhs(State.from_vector(xm, m, n), spec, FlowMode.FIXED_ENDOWMENT)
        J[:, k] = (fp - fm) / (xp[k] - xm[k])
    return J


def reduced_block(spec: ModelSpec, asset, group):
    """3x3 linearisation on (P_i, zeta1_ij, zeta2_ij) at the fundamental point,
    cross-asset and cross-group couplings dropped."""
    i = spec.asset_index(asset)
    j = spec.group_index(group)
    p = spec.packed
    state = equilibrium_state(spec, FlowMode.FIXED_ENDOWMENT)
    _, dF, _ = _price_partials(spec, state)
    tau, Pa = p.tau[i], p.Pa[i]
    c1, c2 = p.c1[i, j], p.c2[i, j]
    return np.array([
        [-1.0 / tau, dF[i, 0, i, j], dF[i, 1, i, j]],
        [-c1 * p.q1[i, j] / (tau * Pa), -c1, 0.0],
        [-c2 * p.q2[i, j] / Pa, 0.0, -c2],
    ])


def routh_hurwitz_cubic(block):
    """Routh-Hurwitz test for a block of the reduced (P, zeta1, zeta2) shape."""
    b = np.asarray(block, dtype=float)
    inv_tau = -b[0, 0]
    c1, c2 = -b[1, 1], -b[2, 2]
    b1, b2 = b[0, 1], b[0, 2]
    g1, g2 = b[1, 0], b[2, 0]
    a2 = inv_tau + c1 + c2
    a1 = inv_tau * (c1 + c2) + c1 * c2 - b1 * g1 - b2 * g2
    a0 = inv_tau * c1 * c2 - b1 * g1 * c2 - b2 * g2 * c1
    return RouthHurwitzReport(a2, a1, a0, a2 > 0, a0 > 0, a1 * a2 > a0)


@dataclass
class DominanceReport:
    holds: bool
    margin: float         # 1/tau - sum |b_j c_j| / c2_j
    coupling: np.ndarray  # b_j
    feedback: np.ndarray  # c_j


def price_value_subsystem(spec: ModelSpec, asset):
    """(n+1)x(n+1) matrix on (P_i, zeta2_i1..zeta2_in) at the fundamental point."""
    i = spec.asset_index(asset)
    rep = theorem1_condition(spec, i, check_hypothesis=False)
    p = spec.packed
    n = spec.n
    Mi = np.zeros((n + 1, n + 1))
    Mi[0, 0] = -1.0 / p.tau[i]
    Mi[0, 1:] = rep.coupling
    Mi[1:, 0] = rep.feedback
    Mi[np.arange(1, n + 1), np.arange(1, n + 1)] = -p.c2[i]
    return Mi


def theorem1_condition(spec: ModelSpec, asset, check_hypothesis=True):
    """Diagonal-dominance sufficient condition for an all-value-investor market:
    sum_j |b_j c_j| / c2_j < 1/tau_i at the fundamental point."""
    i = spec.asset_index(asset)
    p = spec.packed
    if check_hypothesis and np.any(p.q1 != 0):
        raise HypothesisViolated("condition assumes q1 = 0 for every asset and group")
    state = equilibrium_state(spec, FlowMode.FIXED_ENDOWMENT)
    f = _flows(p, state.prices, state.trend, state.value, p.M, p.N, derivatives=True)
    r = f.rates
    Pa, tau = p.Pa[i], p.tau[i]
    T = f.K[i] * Pa
    dk = r.dbuy_value[i, :, i]
    dks = r.dsell_value[i, :]
    b = Pa / (tau * T) * (p.M * dk - p.N[i] * Pa * dks)
    c = -p.c2[i] * p.q2[i] / Pa
    lhs = float(np.sum(np.abs(b * c) / p.c2[i]))
    margin = 1.0 / tau - lhs
    return DominanceReport(margin > 0, margin, b, c)
