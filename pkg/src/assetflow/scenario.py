"""Scenario files (YAML) and the bundled scenario library.

Schema (``*`` = required; per-asset fields accept a scalar, broadcast to
every asset, or a list of length m)::

    name: str                                   default: file stem
    model:
      flow_mode: fixed | flow                   default: fixed
      calibrate: bool                           default: true
      assets*:                                  list, m >= 1
        - name*: str
          fundamental_price*: float > 0         currency per unit
          adjustment_timescale: float > 0       days, default 1.0
      groups*:                                  list, n >= 1
        - name*: str
          cash*: float >= 0                     currency
          shares: per-asset float >= 0          units, default 1.0 (rescaled by calibrate)
          q1, q2: per-asset float >= 0          default 0.0
          c1, c2: per-asset float > 0           1/day, default 0.1
          rates:
            form: trend_tanh | value_linear | composite   default composite
            baseline_buy: per-asset in [0, 1]   default 0.2
            trend_amplitude: per-asset          default 0.0
            trend_weights: weights              default 1.0 (identity)
            value_weights: weights              default 0.0
            value_baseline: per-asset in [0,1]  default baseline_buy
            value_slope: per-asset              default 0.0
            baseline_sell: per-asset in [0, 1]  default baseline_buy
            sell_trend_amplitude: per-asset     default trend_amplitude
            sell_value_slope: per-asset         default 0.0
    initial_conditions:
      prices: per-asset float > 0               default fundamental prices
      trend_sentiment: scalar or m x n          default 0.0
      value_sentiment: scalar or m x n          default 0.0
    run:
      t_end: float > 0                          days, default 1000
      sample_dt: float > 0                      days, default 0.1
      mode: fixed | flow                        default model.flow_mode
      scan:
        param: str                              default groups.<last>.q1
        range: [lo, hi]                         default [0.0, 0.8]
        points: int >= 2                        default 33

``weights`` is a scalar s (s * I), a mapping ``{own: a, cross: b}`` or an
m x m matrix indexed [asset bought][asset whose sentiment is read].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .equilibrium import calibrate_shares
from .errors import ParseError, ValidationError
from .model import AssetSpec, FlowMode, GroupSpec, ModelSpec, RateForm, RateSpec, State

BUNDLED = ("oil_nigeria_libya",)
GAS = "gas_market"

_TOP = {"name", "model", "initial_conditions", "run"}
_MODEL = {"flow_mode", "calibrate", "assets", "groups"}
_ASSET = {"name", "fundamental_price", "adjustment_timescale"}
_GROUP = {"name", "cash", "shares", "q1", "q2", "c1", "c2", "rates"}
_RATES = {"form", "baseline_buy", "trend_amplitude", "trend_weights", "value_weights",
          "value_baseline", "value_slope", "baseline_sell", "sell_trend_amplitude",
          "sell_value_slope"}
_INITIAL = {"prices", "trend_sentiment", "value_sentiment"}
_RUN = {"t_end", "sample_dt", "mode", "scan"}
_SCAN = {"param", "range", "points"}


@dataclass
class ScanOptions:
    param: str
    lo: float = 0.0
    hi: float = 0.8
    points: int = 33


@dataclass
class RunOptions:
    t_end: float = 1000.0
    sample_dt: float = 0.1
    mode: FlowMode = FlowMode.FIXED_ENDOWMENT
    scan: ScanOptions | None = None


@dataclass
class ScenarioFile:
    name: str
    spec: ModelSpec
    initial: State
    run: RunOptions = field(default_factory=RunOptions)


# --------------------------------------------------------------------------
# parsing

def _check_keys(node, allowed, where):
    if not isinstance(node, dict):
        raise ValidationError(where, "expected a mapping")
    unknown = sorted(set(node) - allowed)
    if unknown:
        key = f"{where}.{unknown[0]}" if where else unknown[0]
        raise ValidationError(key, "unknown key")


def _number(value, key):
    if isinstance(value, bool):
        raise ValidationError(key, "expected a number")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ValidationError(key, f"expected a number, got {value!r}") from None
    if not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ValidationError(key, f"expected a finite number, got {value!r}")
    return float(value)


def _array(value, key, shape):
    if isinstance(value, (list, tuple)):
        arr = np.array([_array(v, f"{key}[{i}]", None) for i, v in enumerate(value)], dtype=float)
    else:
        arr = np.array(_number(value, key))
    if shape is not None:
        if arr.ndim == 0:
            arr = np.full(shape, float(arr))
        if arr.shape != shape:
            raise ValidationError(key, f"expected shape {shape}, got {arr.shape}")
    return arr


def _weights(value, key, m):
    if isinstance(value, dict):
        _check_keys(value, {"own", "cross"}, key)
        own = _number(value.get("own", 1.0), f"{key}.own")
        cross = _number(value.get("cross", 0.0), f"{key}.cross")
        return np.full((m, m), cross) + np.eye(m) * (own - cross)
    arr = _array(value, key, None)
    if arr.ndim == 0:
        return np.eye(m) * float(arr)
    if arr.shape != (m, m):
        raise ValidationError(key, f"expected an {m}x{m} matrix")
    return arr


def _require(node, key, where):
    if key not in node:
        raise ValidationError(f"{where}.{key}", "required key missing")
    return node[key]


def _mode(value, key):
    try:
        return FlowMode(value)
    except ValueError:
        raise ValidationError(key, "expected 'fixed' or 'flow'") from None


def _parse_rates(node, m, where):
    node = node or {}
    _check_keys(node, _RATES, where)
    try:
        form = RateForm(node.get("form", RateForm.COMPOSITE.value))
    except ValueError:
        raise ValidationError(f"{where}.form", "expected trend_tanh, value_linear or composite") from None
    vals = {}
    for key in _RATES - {"form", "trend_weights", "value_weights"}:
        if key in node:
            vals[key] = _array(node[key], f"{where}.{key}", (m,))
    vals["baseline_buy"] = vals.get("baseline_buy", np.full(m, 0.2))
    for key in ("baseline_buy", "value_baseline", "baseline_sell"):
        if key in vals and (np.any(vals[key] < 0) or np.any(vals[key] > 1)):
            raise ValidationError(f"{where}.{key}", "must lie in [0, 1]")
    return RateSpec.build(
        m, form,
        trend_weights=_weights(node.get("trend_weights", 1.0), f"{where}.trend_weights", m),
        value_weights=_weights(node.get("value_weights", 0.0), f"{where}.value_weights", m),
        **vals,
    )


def _parse_group(node, m, where):
    _check_keys(node, _GROUP, where)
    name = str(_require(node, "name", where))
    cash = _number(_require(node, "cash", where), f"{where}.cash")
    if cash < 0:
        raise ValidationError(f"{where}.cash", "must be >= 0")
    arrays = {}
    for key, default, positive in (("shares", 1.0, False), ("q1", 0.0, False), ("q2", 0.0, False),
                                   ("c1", 0.1, True), ("c2", 0.1, True)):
        arr = _array(node.get(key, default), f"{where}.{key}", (m,))
        if positive and np.any(arr <= 0):
            raise ValidationError(f"{where}.{key}", "must be > 0")
        if not positive and np.any(arr < 0):
            raise ValidationError(f"{where}.{key}", "must be >= 0")
        arrays[key] = arr
    rates = _parse_rates(node.get("rates"), m, f"{where}.rates")
    return GroupSpec(name, cash, rates=rates, **arrays)


def _parse_model(node):
    _check_keys(node, _MODEL, "model")
    assets_node = _require(node, "assets", "model")
    groups_node = _require(node, "groups", "model")
    if not isinstance(assets_node, list) or not assets_node:
        raise ValidationError("model.assets", "expected a non-empty list")
    if not isinstance(groups_node, list) or not groups_node:
        raise ValidationError("model.groups", "expected a non-empty list")
    assets = []
    for i, a in enumerate(assets_node):
        where = f"model.assets[{i}]"
        _check_keys(a, _ASSET, where)
        pa = _number(_require(a, "fundamental_price", where), f"{where}.fundamental_price")
        tau = _number(a.get("adjustment_timescale", 1.0), f"{where}.adjustment_timescale")
        if pa <= 0:
            raise ValidationError(f"{where}.fundamental_price", "must be > 0")
        if tau <= 0:
            raise ValidationError(f"{where}.adjustment_timescale", "must be > 0")
        assets.append(AssetSpec(str(_require(a, "name", where)), pa, tau))
    m = len(assets)
    groups = [_parse_group(g, m, f"model.groups[{j}]") for j, g in enumerate(groups_node)]
    mode = _mode(node.get("flow_mode", "fixed"), "model.flow_mode")
    calibrate = node.get("calibrate", True)
    if not isinstance(calibrate, bool):
        raise ValidationError("model.calibrate", "expected true or false")
    try:
        spec = ModelSpec(assets, groups, mode)
    except ValueError as exc:
        raise ValidationError("model", str(exc)) from None
    return calibrate_shares(spec) if calibrate else spec


def _parse_initial(node, spec):
    node = node or {}
    _check_keys(node, _INITIAL, "initial_conditions")
    m, n = spec.m, spec.n
    prices = _array(node.get("prices", list(spec.packed.Pa)), "initial_conditions.prices", (m,))
    if np.any(prices <= 0):
        raise ValidationError("initial_conditions.prices", "must be > 0")
    z1 = _array(node.get("trend_sentiment", 0.0), "initial_conditions.trend_sentiment", (m, n))
    z2 = _array(node.get("value_sentiment", 0.0), "initial_conditions.value_sentiment", (m, n))
    return State(prices, z1, z2)


def _parse_run(node, spec):
    node = node or {}
    _check_keys(node, _RUN, "run")
    t_end = _number(node.get("t_end", 1000.0), "run.t_end")
    dt = _number(node.get("sample_dt", 0.1), "run.sample_dt")
    if t_end <= 0:
        raise ValidationError("run.t_end", "must be > 0")
    if dt <= 0:
        raise ValidationError("run.sample_dt", "must be > 0")
    mode = _mode(node.get("mode", spec.flow_mode.value), "run.mode")
    scan = None
    if "scan" in node:
        s = node["scan"] or {}
        _check_keys(s, _SCAN, "run.scan")
        rng = s.get("range", [0.0, 0.8])
        if not isinstance(rng, list) or len(rng) != 2:
            raise ValidationError("run.scan.range", "expected [lo, hi]")
        lo, hi = (_number(v, "run.scan.range") for v in rng)
        if not lo < hi:
            raise ValidationError("run.scan.range", "need lo < hi")
        points = s.get("points", 33)
        if not isinstance(points, int) or points < 2:
            raise ValidationError("run.scan.points", "expected an integer >= 2")
        param = str(s.get("param", f"groups.{spec.group_names[-1]}.q1"))
        scan = ScanOptions(param, lo, hi, points)
    return RunOptions(t_end, dt, mode, scan)


def parse_scenario(text, name="scenario"):
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(exc.problem or str(exc), line, col) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from None
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a mapping at the top level", 1, 1)
    _check_keys(doc, _TOP, "")
    spec = _parse_model(_require(doc, "model", "scenario"))
    initial = _parse_initial(doc.get("initial_conditions"), spec)
    run = _parse_run(doc.get("run"), spec)
    return ScenarioFile(str(doc.get("name", name)), spec, initial, run)


def load_scenario(path, seed=0):
    """Load a scenario from a file path, a bundled name, or ``gas_market``."""
    p = Path(path)
    if not p.exists():
        key = str(path)
        if key == GAS:
            return gas_market(seed)
        if key in BUNDLED:
            text = resources.files("assetflow.scenarios").joinpath(f"{key}.yaml").read_text()
            return parse_scenario(text, key)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, p.stem)


# --------------------------------------------------------------------------
# serialisation

def _plain(a):
    a = np.asarray(a)
    return [_plain(x) for x in a] if a.ndim else float(a)


def spec_to_dict(spec: ModelSpec):
    groups = []
    for g in spec.groups:
        r = g.rates
        groups.append({
            "name": g.name,
            "cash": float(g.cash),
            "shares": _plain(g.shares),
            "q1": _plain(g.q1),
            "q2": _plain(g.q2),
            "c1": _plain(g.c1),
            "c2": _plain(g.c2),
            "rates": {
                "form": r.form.value,
                "baseline_buy": _plain(r.baseline_buy),
                "trend_amplitude": _plain(r.trend_amplitude),
                "trend_weights": _plain(r.trend_weights),
                "value_weights": _plain(r.value_weights),
                "value_baseline": _plain(r.value_baseline),
                "value_slope": _plain(r.value_slope),
                "baseline_sell": _plain(r.baseline_sell),
                "sell_trend_amplitude": _plain(r.sell_trend_amplitude),
                "sell_value_slope": _plain(r.sell_value_slope),
            },
        })
    return {
        "flow_mode": spec.flow_mode.value,
        "calibrate": False,
        "assets": [{"name": a.name, "fundamental_price": float(a.fundamental_price),
                    "adjustment_timescale": float(a.adjustment_timescale)} for a in spec.assets],
        "groups": groups,
    }


def scenario_to_dict(sc: ScenarioFile):
    doc = {
        "name": sc.name,
        "model": spec_to_dict(sc.spec),
        "initial_conditions": {
            "prices": _plain(sc.initial.prices),
            "trend_sentiment": _plain(sc.initial.trend),
            "value_sentiment": _plain(sc.initial.value),
        },
        "run": {"t_end": float(sc.run.t_end), "sample_dt": float(sc.run.sample_dt),
                "mode": sc.run.mode.value},
    }
    if sc.run.scan is not None:
        s = sc.run.scan
        doc["run"]["scan"] = {"param": s.param, "range": [float(s.lo), float(s.hi)],
                              "points": int(s.points)}
    return doc


def dump_scenario(sc: ScenarioFile):
    """Fully resolved YAML; shares are written already calibrated."""
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False, default_flow_style=None)


# --------------------------------------------------------------------------
# generated gas market

def gas_market(seed=0, n_assets=10, n_groups=20):
    """Synthetic gas market: half value groups, half momentum groups.

    Parameter ranges (uniform draws from ``numpy.random.default_rng(seed)``):

    ========================  =====================================
    fundamental price         [2, 12] $/MMBtu
    adjustment timescale      [0.5, 2] days
    cash per group            [5e6, 25e6]
    share proportions         [0.5, 1.5], then calibrated
    value groups              q2 in [0.2, 0.6], c1 in [0.05, 0.2],
                              c2 in [0.1, 0.4], value slope 0.2 (buy and sell)
    momentum groups           q1 = 0.3, c1 in [0.1, 0.3], c2 in [0.1, 0.3],
                              b = 0.15, trend weights own 1, cross 0.25/(m-1)
    baseline rates            0.2 (budget rescaling keeps sum_i k <= 1)
    initial prices            Pa * (1 + [-0.03, 0.03])
    ========================  =====================================
    """
    rng = np.random.default_rng(seed)
    m, n = n_assets, n_groups
    assets = [AssetSpec(f"hub{i:02d}", float(rng.uniform(2, 12)), float(rng.uniform(0.5, 2)))
              for i in range(m)]
    cross = 0.25 / max(m - 1, 1)
    weights = np.full((m, m), cross) + np.eye(m) * (1.0 - cross)
    groups = []
    for j in range(n):
        cash = float(rng.uniform(5e6, 25e6))
        shares = rng.uniform(0.5, 1.5, m)
        if j % 2 == 0:
            rates = RateSpec.build(m, RateForm.VALUE_LINEAR, value_slope=0.2, sell_value_slope=0.2)
            g = GroupSpec(f"value{j // 2:02d}", cash, shares, 0.0, rng.uniform(0.2, 0.6, m),
                          rng.uniform(0.05, 0.2, m), rng.uniform(0.1, 0.4, m), rates)
        else:
            rates = RateSpec.build(m, RateForm.TREND_TANH, trend_amplitude=0.15, trend_weights=weights)
            g = GroupSpec(f"momentum{j // 2:02d}", cash, shares, 0.3, 0.0,
                          rng.uniform(0.1, 0.3, m), rng.uniform(0.1, 0.3, m), rates)
        groups.append(g)
    spec = calibrate_shares(ModelSpec(assets, groups, FlowMode.CLOSED_FLOW))
    prices = spec.packed.Pa * (1 + rng.uniform(-0.03, 0.03, m))
    initial = State(prices, np.zeros((m, n)), np.zeros((m, n)))
    return ScenarioFile(f"{GAS}_seed{seed}", spec, initial,
                        RunOptions(1000.0, 0.1, FlowMode.CLOSED_FLOW, None))
