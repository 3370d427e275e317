import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from assetflow import (AssetSpec, FlowMode, GroupSpec, ModelSpec, RateForm, RateSpec, State,
                       buy_rate, equilibrium_state, gas_market, price_rhs, sell_rate, system_rhs,
                       trend_sentiment_rhs, value_sentiment_rhs, wealth_fractions)
from assetflow.errors import DegenerateMarket
from assetflow.model import _rates, log_rhs_factory, model_rates

from conftest import oil_at


def trend_group(a=0.2, b=0.15, own=1.0, cross=0.0, m=2):
    w = np.full((m, m), cross) + np.eye(m) * (own - cross)
    rates = RateSpec.build(m, RateForm.TREND_TANH, baseline_buy=a, trend_amplitude=b, trend_weights=w)
    return GroupSpec("g", 1.0, 1.0, 0.3, 0.0, 0.2, 0.15, rates)


def value_group(c=0.2, d=0.2, ds=0.2, m=2):
    rates = RateSpec.build(m, RateForm.VALUE_LINEAR, value_slope=d, sell_value_slope=ds)
    return GroupSpec("v", 1.0, 1.0, 0.0, 0.4, 0.1, 0.3, rates)


# --- sentiment equations -------------------------------------------------

def test_trend_rhs_examples():
    assert trend_sentiment_rhs(0.0, 0.0, 0.2, 0.5) == 0.0
    assert trend_sentiment_rhs(0.1, 0.0, 0.2, 0.5) == pytest.approx(-0.02, abs=1e-15)
    assert trend_sentiment_rhs(0.0, 0.05, 0.20, 0.30) == pytest.approx(0.003, abs=1e-15)


def test_value_rhs_examples():
    assert value_sentiment_rhs(0.0, 80.0, 80.0, 0.3, 0.4) == 0.0
    assert value_sentiment_rhs(0.0, 40.0, 80.0, 0.30, 0.40) == pytest.approx(0.06, abs=1e-15)
    with pytest.raises(ValueError):
        value_sentiment_rhs(0.0, 40.0, 0.0, 0.3, 0.4)


@given(st.floats(0.01, 1e3), st.floats(0.1, 1e3), st.floats(0.01, 2.0), st.floats(0.0, 2.0))
def test_value_rhs_stationary_point(P, Pa, c2, q2):
    z2 = q2 * (1 - P / Pa)
    assert value_sentiment_rhs(z2, P, Pa, c2, q2) == pytest.approx(0.0, abs=1e-12 * max(1.0, q2 * P / Pa))


# --- rates -----------------------------------------------------------------

def test_buy_rate_examples():
    g = trend_group()
    assert buy_rate(g, 0, [0, 0], [0, 0]) == pytest.approx(0.2)
    assert buy_rate(g, 0, [50.0, 0], [0, 0]) == pytest.approx(0.35)
    # raw rates (1.0, 0.9) exceed the budget and are rescaled proportionally
    assert buy_rate(trend_group(a=0.9), 0, [50.0, 0], [0, 0]) == pytest.approx(1 / 1.9)
    single = trend_group(a=0.9, m=1)
    assert buy_rate(single, 0, [50.0], [0.0]) == 1.0


def test_buy_rate_reads_other_assets():
    g = trend_group(cross=0.25)
    assert buy_rate(g, 0, [0.0, 0.5], [0, 0]) == pytest.approx(0.2 + 0.15 * np.tanh(0.125))


def test_value_buy_rate_uses_own_value_sentiment():
    g = value_group()
    assert buy_rate(g, 1, [0, 0], [0.0, 0.1]) == pytest.approx(0.22)
    assert buy_rate(g, 1, [0, 0], [0.0, -5.0]) == 0.0


def test_sell_rate_examples():
    g = trend_group()
    assert sell_rate(g, 0, 0.0, 0.0) == pytest.approx(0.2)
    v = value_group()
    assert sell_rate(v, 0, 0.0, -0.5) > 0.2
    assert sell_rate(v, 0, 0.0, -0.5) == pytest.approx(0.3)


def test_sell_rate_locality(oil_spec, rng):
    p = oil_spec.packed
    z1 = rng.normal(size=(2, 2))
    z2 = rng.normal(size=(2, 2))
    base = _rates(p, z1, z2).sell
    z1b, z2b = z1.copy(), z2.copy()
    z1b[1] += 3.0
    z2b[1] -= 2.0
    assert np.array_equal(_rates(p, z1b, z2b).sell[0], base[0])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rate_bounds_and_budget(seed):
    r = np.random.default_rng(seed)
    m, n = 4, 3
    groups = []
    for j in range(n):
        rates = RateSpec.build(m, RateForm.COMPOSITE, baseline_buy=r.uniform(0, 1, m),
                               trend_amplitude=r.uniform(0, 2, m),
                               trend_weights=r.normal(size=(m, m)),
                               value_weights=r.normal(size=(m, m)),
                               value_slope=r.uniform(-1, 1, m),
                               sell_value_slope=r.uniform(-1, 1, m))
        groups.append(GroupSpec(f"g{j}", 1.0, 1.0, 0.1, 0.1, 0.1, 0.1, rates))
    spec = ModelSpec([AssetSpec(f"a{i}", 1.0) for i in range(m)], groups)
    z1 = r.normal(scale=3, size=(m, n))
    z2 = r.normal(scale=3, size=(m, n))
    rates = _rates(spec.packed, z1, z2)
    assert np.all((rates.buy >= 0) & (rates.buy <= 1))
    assert np.all((rates.sell >= 0) & (rates.sell <= 1))
    assert np.all(rates.buy.sum(axis=0) <= 1 + 1e-15)


def test_budget_rescale_is_proportional():
    g = trend_group(a=0.8)
    spec = ModelSpec([AssetSpec("x", 1.0), AssetSpec("y", 1.0)], [g])
    r = _rates(spec.packed, np.array([[0.3], [0.0]]), np.zeros((2, 1)))
    raw = np.array([0.8 + 0.15 * np.tanh(0.3), 0.8])
    np.testing.assert_allclose(r.buy[:, 0], raw / raw.sum(), rtol=1e-15)


def test_rate_validation():
    with pytest.raises(ValueError):
        RateSpec.build(2, baseline_buy=1.5)
    with pytest.raises(ValueError):
        GroupSpec("g", 1.0, 1.0, -0.1, 0.0, 0.1, 0.1, RateSpec.build(2))
    with pytest.raises(ValueError):
        GroupSpec("g", 1.0, 1.0, 0.0, 0.0, 0.0, 0.1, RateSpec.build(2))
    with pytest.raises(ValueError):
        AssetSpec("a", 0.0)


# --- price equation --------------------------------------------------------

def _one_asset(M, N, a=0.2, sell=0.2, tau=1.0):
    rates = RateSpec.build(1, RateForm.TREND_TANH, baseline_buy=a, baseline_sell=sell)
    g = GroupSpec("g", M, N, 0.0, 0.0, 0.1, 0.1, rates)
    return ModelSpec([AssetSpec("x", 80.0, tau)], [g])


def test_price_rhs_at_calibrated_equilibrium(oil_spec):
    st_ = equilibrium_state(oil_spec)
    assert price_rhs(0, st_, oil_spec) == 0.0
    assert price_rhs(1, st_, oil_spec) == 0.0


def test_price_rhs_ratio_example():
    # S/T = 1.1 at P = 80: M = 1.1 * N * 80 with equal baseline rates
    spec = _one_asset(1.1 * 1000 * 80, 1000.0)
    st_ = State([80.0], [[0.0]], [[0.0]])
    assert price_rhs(0, st_, spec) == pytest.approx(8.0, rel=1e-14)


def test_price_rhs_homogeneity(oil_spec, rng):
    st_ = State([82.0, 79.0], rng.normal(scale=0.1, size=(2, 2)), rng.normal(scale=0.1, size=(2, 2)))
    doubled = ModelSpec(oil_spec.assets, [
        type(g)(g.name, 2 * g.cash, 2 * g.shares, g.q1, g.q2, g.c1, g.c2, g.rates) for g in oil_spec.groups])
    for i in range(2):
        a, b = price_rhs(i, st_, oil_spec), price_rhs(i, st_, doubled)
        assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


def test_degenerate_market():
    spec = _one_asset(1e6, 1000.0, sell=0.0)
    with pytest.raises(DegenerateMarket):
        price_rhs(0, State([80.0], [[0.0]], [[0.0]]), spec)


def test_system_rhs_zero_at_fundamental(oil_spec):
    rhs = system_rhs(equilibrium_state(oil_spec), oil_spec, FlowMode.FIXED_ENDOWMENT)
    assert np.max(np.abs(rhs)) < 1e-10


def test_closed_flow_fundamental_keeps_trading(oil_spec):
    # calibration balances the aggregate flow only: prices and sentiments are
    # stationary while individual groups still exchange cash for shares
    rhs = system_rhs(equilibrium_state(oil_spec, FlowMode.CLOSED_FLOW), oil_spec, FlowMode.CLOSED_FLOW)
    assert np.max(np.abs(rhs[:10])) < 1e-10
    np.testing.assert_allclose(rhs[10:12], [-900000.0, 900000.0], rtol=1e-12)


def test_system_rhs_oil_initial_sign(oil):
    rhs = system_rhs(oil.initial, oil.spec, FlowMode.FIXED_ENDOWMENT)
    assert rhs[0] < 0
    assert rhs[1] < 0


def test_trend_rows_use_the_price_velocity(oil_spec):
    spec = oil_at(oil_spec, 0.5)
    st_ = State([82.0, 80.5], np.zeros((2, 2)), np.zeros((2, 2)))
    rhs = system_rhs(st_, spec, FlowMode.FIXED_ENDOWMENT)
    vel = rhs[:2] / st_.prices
    p = spec.packed
    expected = (p.c1 * p.q1 * vel[:, None]).ravel()
    np.testing.assert_allclose(rhs[2:6], expected, rtol=1e-15)


def test_closed_flow_cash_value_identity(oil_spec, rng):
    for _ in range(20):
        st_ = equilibrium_state(oil_spec, FlowMode.CLOSED_FLOW)
        st_.prices = 80.0 * rng.uniform(0.7, 1.3, 2)
        st_.trend = rng.normal(scale=0.2, size=(2, 2))
        st_.value = rng.normal(scale=0.2, size=(2, 2))
        rhs = system_rhs(st_, oil_spec, FlowMode.CLOSED_FLOW)
        dM = rhs[10:12]
        dN = rhs[12:].reshape(2, 2)
        scale = oil_spec.packed.M.sum()
        assert abs(dM.sum() + st_.prices @ dN.sum(axis=1)) < 1e-12 * scale
        assert np.all(np.abs(dN.sum(axis=1)) < 1e-9 * oil_spec.packed.N.sum(axis=1))


def test_closed_flow_matches_flow_formula_when_cleared(oil_spec):
    st_ = equilibrium_state(oil_spec, FlowMode.CLOSED_FLOW)
    st_.value = np.array([[0.05, 0.0], [-0.02, 0.0]])
    rates = model_rates(oil_spec, st_)
    M, N = st_.cash, st_.shares
    P = st_.prices
    # with S != T the clearing rule only executes the short side
    S = rates.buy @ M
    T = (rates.sell * N).sum(axis=1) * P
    rhs = system_rhs(st_, oil_spec, FlowMode.CLOSED_FLOW)
    executed = np.minimum(S, T)
    bought = rates.buy * M[None, :] * (executed / S)[:, None]
    sold = rates.sell * N * P[:, None] * (executed / T)[:, None]
    np.testing.assert_allclose(rhs[10:12], (sold - bought).sum(axis=0), rtol=1e-12)


def test_wealth_fractions_examples(oil_spec):
    g = RateSpec.build(1)
    single = ModelSpec([AssetSpec("x", 1.0)], [GroupSpec("a", 3.0, 2.0, 0, 0, 0.1, 0.1, g)])
    assert wealth_fractions(State([2.0], [[0.0]], [[0.0]]), single).tolist() == [1.0]
    twins = ModelSpec([AssetSpec("x", 1.0)], [GroupSpec("a", 3.0, 2.0, 0, 0, 0.1, 0.1, g),
                                               GroupSpec("b", 3.0, 2.0, 0, 0, 0.1, 0.1, g)])
    assert wealth_fractions(State([2.0], [[0.0, 0.0]], [[0.0, 0.0]]), twins).tolist() == [0.5, 0.5]
    w = wealth_fractions(equilibrium_state(oil_spec), oil_spec)
    np.testing.assert_allclose(w, [37 / 71, 34 / 71], rtol=1e-14)


@given(st.lists(st.floats(0.01, 1e4), min_size=2, max_size=2))
def test_wealth_fractions_sum_to_one(prices):
    from assetflow import load_scenario
    spec = load_scenario("oil_nigeria_libya").spec
    w = wealth_fractions(State(prices, np.zeros((2, 2)), np.zeros((2, 2))), spec)
    assert abs(w.sum() - 1.0) < 1e-12


def test_state_layout_round_trip(oil_spec, rng):
    st_ = equilibrium_state(oil_spec, FlowMode.CLOSED_FLOW)
    st_.trend = rng.normal(size=(2, 2))
    vec = st_.to_vector()
    assert vec.size == oil_spec.state_size(FlowMode.CLOSED_FLOW) == 2 + 8 + 2 + 4
    back = State.from_vector(vec, 2, 2)
    assert np.array_equal(back.to_vector(), vec)
    assert vec[2 + 1] == st_.trend[0, 1]  # asset-major, group-minor


@pytest.mark.parametrize("mode", list(FlowMode))
def test_integration_rhs_matches_system_rhs(oil_spec, rng, mode):
    for spec in (oil_spec, gas_market(1, n_assets=3, n_groups=4).spec):
        rhs = log_rhs_factory(spec, mode)
        p = spec.packed
        for _ in range(10):
            state = State(p.Pa * rng.uniform(0.8, 1.2, spec.m), rng.normal(scale=0.3, size=(spec.m, spec.n)),
                       rng.normal(scale=0.3, size=(spec.m, spec.n)))
            if mode is FlowMode.CLOSED_FLOW:
                state.cash = p.M * rng.uniform(0.5, 1.5, spec.n)
                state.shares = p.N * rng.uniform(0.5, 1.5, (spec.m, spec.n))
            y = state.to_vector()
            y[:spec.m] = np.log(state.prices / p.Pa)
            d = system_rhs(state, spec, mode)
            d[:spec.m] /= state.prices
            np.testing.assert_allclose(rhs(0.0, y), d, rtol=1e-12, atol=1e-12 * np.abs(d).max())
