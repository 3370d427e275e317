import numpy as np
import pytest

from assetflow import (AssetSpec, GroupSpec, ModelSpec, RateForm, RateSpec, State, calibrate_shares,
                       hopf_threshold_amplitude, hopf_threshold_eigen, scan)
from assetflow import bifurcation
from assetflow.bifurcation import ParameterPath
from assetflow.errors import FoldNotHopf, NoOnset, NoSignChange
from assetflow.model import with_group_rates


def test_path_forms(oil_spec):
    a = ParameterPath.parse("groups.china.q1", oil_spec)
    b = ParameterPath.parse("groups[1].q1[*]", oil_spec)
    assert (a.target, a.field, a.index) == (b.target, b.field, b.index) == (1, "q1", None)
    c = ParameterPath.parse("groups.china.rates.trend_amplitude[0]", oil_spec)
    assert c.in_rates and c.index == 0
    d = ParameterPath.parse("assets.libya.adjustment_timescale", oil_spec)
    assert (d.section, d.target) == ("assets", 1)


@pytest.mark.parametrize("bad", ["china.q1", "groups.india.q1", "groups.china.q3", "groups[5].q1",
                                 "groups.china.q1[2]", "groups.china.rates.form", "groups.china.cash[0]"])
def test_bad_paths(oil_spec, bad):
    with pytest.raises(ValueError):
        ParameterPath.parse(bad, oil_spec)


def test_set_and_get(oil_spec):
    pp = ParameterPath.parse("groups.china.q1[1]", oil_spec)
    s = pp.set(oil_spec, 0.7)
    assert s.groups[1].q1.tolist() == [0.3, 0.7]
    assert ParameterPath.parse("groups.china.q1[1]", s).get(s) == 0.7
    assert oil_spec.groups[1].q1.tolist() == [0.3, 0.3]


def test_recalibration_only_for_baseline_fields(oil_spec):
    q1 = ParameterPath.parse("groups.china.q1", oil_spec)
    assert not q1.affects_baseline
    assert np.array_equal(q1.set(oil_spec, 0.6).packed.N, oil_spec.packed.N)
    cash = ParameterPath.parse("groups.usa.cash", oil_spec)
    s = cash.set(oil_spec, 30e6)
    assert cash.affects_baseline
    np.testing.assert_allclose(s.packed.N.sum(axis=1), 45.5e6 / 80, rtol=1e-14)


def test_threshold_eigen_frozen(oil_spec):
    hp = hopf_threshold_eigen(oil_spec, "groups.china.q1", 0.0, 0.8)
    assert hp.value == pytest.approx(0.32700, abs=1e-4)
    assert hp.frequency == pytest.approx(0.5641, abs=1e-3)


def test_threshold_needs_sign_change(oil_spec):
    spec = with_group_rates(oil_spec, "china", trend_amplitude=0.0, sell_trend_amplitude=0.0)
    spec = with_group_rates(spec, "usa", value_slope=0.0, sell_value_slope=0.0)
    with pytest.raises(NoSignChange):
        hopf_threshold_eigen(spec, "groups.china.q1", 0.0, 0.8)


def test_fold_detected(oil_spec, monkeypatch):
    monkeypatch.setattr(bifurcation, "_dominant", lambda spec: (spec.groups[1].q1[0] - 0.5, 0.0))
    with pytest.raises(FoldNotHopf):
        hopf_threshold_eigen(oil_spec, "groups.china.q1", 0.0, 0.8)


def test_no_onset_below_threshold(oil_spec, oil):
    with pytest.raises(NoOnset):
        hopf_threshold_amplitude(oil_spec, "groups.china.q1", 0.0, 0.2, initial=oil.initial, t_end=400.0)


def test_inert_parameter_scan(oil_spec, oil):
    d = scan(oil_spec, "groups.china.q2", 0.0, 1.0, 3, initial=oil.initial, t_end=100.0)
    amps = d.amplitudes
    np.testing.assert_allclose(amps, amps[0][None, :].repeat(3, axis=0), rtol=1e-6)
    np.testing.assert_allclose(d.max_real, d.max_real[0], rtol=1e-12)
    assert d.threshold_eigen is None


def test_scan_deterministic(oil_spec, oil):
    a = scan(oil_spec, "groups.china.q1", 0.3, 0.4, 3, initial=oil.initial, t_end=60.0)
    b = scan(oil_spec, "groups.china.q1", 0.3, 0.4, 3, initial=oil.initial, t_end=60.0)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert np.array_equal(a.max_real, b.max_real)
    assert a.threshold_eigen == b.threshold_eigen
    assert 0.3 < a.threshold_eigen < 0.4
    assert np.all(np.diff(a.params) > 0)


def test_failed_points_are_marked():
    rates = RateSpec.build(1, RateForm.TREND_TANH, trend_amplitude=0.1, sell_trend_amplitude=0.0)
    spec = calibrate_shares(ModelSpec([AssetSpec("x", 1.0)], [GroupSpec("g", 1.0, 1.0, 0.3, 0.0, 0.2, 0.1, rates)]))
    d = scan(spec, "groups.g.rates.sell_trend_amplitude", 0.0, 0.5, 3, initial=State([1.0], [[3.0]], [[0.0]]),
             t_end=10.0, locate_threshold=False)
    assert d.samples[0].status == "ok"
    assert d.samples[-1].status.startswith("failed")
    assert np.all(np.isnan(d.samples[-1].amplitude))


def test_scan_arguments(oil_spec):
    with pytest.raises(ValueError):
        scan(oil_spec, "groups.china.q1", 0.5, 0.1, 3)
    with pytest.raises(ValueError):
        scan(oil_spec, "groups.china.q1", 0.1, 0.5, 1)
