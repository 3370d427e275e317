"""Parameter scans and Hopf threshold location.

Two independent routes to the threshold:

* ``hopf_threshold_eigen`` bisects on the sign of max Re(lambda) of the
  analytic Jacobian at the fundamental point;
* ``hopf_threshold_amplitude`` bisects on whether a long simulation from a
  perturbed start keeps oscillating, never touching the Jacobian.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .equilibrium import calibrate_shares
from .errors import FoldNotHopf, NoOnset, NoSignChange, NumericalError
from .model import FlowMode, ModelSpec, State, with_group_rates, with_group_values
from .simulate import TRANSIENT_FRACTION, AMPLITUDE_FLOOR, integrate, signal_stats
from .stability import assemble_jacobian

log = logging.getLogger(__name__)

#: fields that enter the zero-sentiment rates or the fundamental price
BASELINE_FIELDS = {"cash", "shares", "baseline_buy", "value_baseline", "baseline_sell",
                   "fundamental_price"}
GROUP_FIELDS = {"cash", "shares", "q1", "q2", "c1", "c2"}
RATE_FIELDS = {"baseline_buy", "trend_amplitude", "value_baseline", "value_slope",
               "baseline_sell", "sell_trend_amplitude", "sell_value_slope"}
ASSET_FIELDS = {"fundamental_price", "adjustment_timescale"}

_TOKEN = re.compile(r"^([A-Za-z_][\w-]*)(?:\[(\d+|\*)\])?$")


@dataclass(frozen=True)
class ParameterPath:
    """A scalar knob in a ModelSpec, e.g. ``groups.china.q1`` or
    ``groups[1].rates.trend_amplitude[0]``. Without an index (or with
    ``[*]``) every asset's entry is set."""

    text: str
    section: str            # "groups" or "assets"
    target: int
    field: str
    in_rates: bool = False
    index: int | None = None

    @classmethod
    def parse(cls, text: str, spec: ModelSpec) -> ParameterPath:
        tokens = []
        for tok in text.split("."):
            mt = _TOKEN.match(tok)
            if mt is None:
                raise ValueError(f"bad parameter path {text!r}: cannot parse {tok!r}")
            tokens.append((mt.group(1), mt.group(2)))
        head, head_idx = tokens.pop(0)
        if head not in ("groups", "assets"):
            raise ValueError(f"bad parameter path {text!r}: must start with groups or assets")
        names = spec.group_names if head == "groups" else spec.asset_names
        if head_idx is not None:
            if head_idx == "*" or int(head_idx) >= len(names):
                raise ValueError(f"bad parameter path {text!r}: {head} index out of range")
            target = int(head_idx)
        else:
            if not tokens or tokens[0][0] not in names:
                raise ValueError(f"bad parameter path {text!r}: unknown {head[:-1]} name")
            target = names.index(tokens.pop(0)[0])
        in_rates = bool(tokens) and tokens[0] == ("rates", None)
        if in_rates:
            tokens.pop(0)
        if len(tokens) != 1:
            raise ValueError(f"bad parameter path {text!r}")
        name, idx = tokens[0]
        allowed = RATE_FIELDS if in_rates else (GROUP_FIELDS if head == "groups" else ASSET_FIELDS)
        if name not in allowed:
            raise ValueError(f"bad parameter path {text!r}: {name!r} is not a scalar parameter here")
        index = None
        if idx not in (None, "*"):
            index = int(idx)
            if name == "cash" or head == "assets" or index >= spec.m:
                raise ValueError(f"bad parameter path {text!r}: index not allowed or out of range")
        return cls(text, head, target, name, in_rates, index)

    @property
    def affects_baseline(self):
        return self.field in BASELINE_FIELDS

    def get(self, spec: ModelSpec) -> float:
        if self.section == "assets":
            return float(getattr(spec.assets[self.target], self.field))
        owner = spec.groups[self.target]
        value = np.asarray(getattr(owner.rates if self.in_rates else owner, self.field))
        return float(value.flat[self.index or 0])

    def set(self, spec: ModelSpec, value: float) -> ModelSpec:
        """Copy of ``spec`` with the parameter set, shares recalibrated when the
        parameter moves the fundamental balance."""
        value = float(value)
        if self.section == "assets":
            assets = list(spec.assets)
            assets[self.target] = replace(assets[self.target], **{self.field: value})
            out = replace(spec, assets=tuple(assets))
        else:
            g = spec.groups[self.target]
            if self.field == "cash":
                new = value
            else:
                new = np.array(getattr(g.rates if self.in_rates else g, self.field), dtype=float)
                if self.index is None:
                    new[:] = value
                else:
                    new[self.index] = value
            setter = with_group_rates if self.in_rates else with_group_values
            out = setter(spec, self.target, **{self.field: new})
        return calibrate_shares(out) if self.affects_baseline else out


class HopfPoint(NamedTuple):
    value: float
    frequency: float  # |Im lambda| of the crossing pair


class ScanSample(NamedTuple):
    param: float
    amplitude: np.ndarray      # per asset, absolute price units
    max_real: float
    frequency: float | None    # |Im| of the dominant eigenvalue, None if real
    period: float | None       # simulated period of asset 0
    status: str                # "ok" or "failed: ..."


@dataclass
class BifurcationDiagram:
    parameter_path: str
    samples: list
    asset_names: tuple
    threshold_eigen: float | None = None
    threshold_amplitude: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def params(self):
        return np.array([s.param for s in self.samples])

    @property
    def amplitudes(self):
        return np.array([s.amplitude for s in self.samples])

    @property
    def max_real(self):
        return np.array([s.max_real for s in self.samples])


def _dominant(spec):
    rep = assemble_jacobian(spec)
    lam = rep.dominant
    return rep.max_real_part, abs(lam.imag)


def _default_initial(spec):
    return State(spec.packed.Pa.copy(), np.zeros((spec.m, spec.n)), np.zeros((spec.m, spec.n)))


def _amplitudes(spec, initial, t_end, sample_dt, mode, transient_fraction):
    traj = integrate(spec, initial, t_end, sample_dt=sample_dt, mode=mode)
    Pa = spec.packed.Pa
    stats = [signal_stats(traj.times, traj.prices[:, i], Pa[i], transient_fraction)
             for i in range(spec.m)]
    return np.array([s.amplitude for s in stats]), stats[0].period


def scan(spec: ModelSpec, path, lo, hi, n_points, initial: State | None = None, t_end=1000.0,
         sample_dt=0.1, mode=FlowMode.FIXED_ENDOWMENT, transient_fraction=TRANSIENT_FRACTION,
         locate_threshold=True, tol=1e-4) -> BifurcationDiagram:
    """Amplitude and leading eigenvalue at ``n_points`` uniform parameter values.

    A point whose integration fails is kept with status ``failed: ...`` and
    NaN amplitudes. If ``max_real`` changes sign between two samples the
    crossing is refined with :func:`hopf_threshold_eigen`.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if n_points < 2:
        raise ValueError("need at least two points")
    pp = ParameterPath.parse(path, spec) if isinstance(path, str) else path
    initial = initial if initial is not None else _default_initial(spec)
    samples = []
    for value in np.linspace(lo, hi, n_points):
        s = pp.set(spec, value)
        mx, freq = _dominant(s)
        try:
            amp, period = _amplitudes(s, initial, t_end, sample_dt, mode, transient_fraction)
            status = "ok"
        except NumericalError as exc:
            amp, period, status = np.full(spec.m, np.nan), None, f"failed: {exc}"
            log.warning("scan point %s = %.6g failed: %s", pp.text, value, exc)
        samples.append(ScanSample(float(value), amp, mx, freq if freq > 0 else None, period, status))
        log.info("%s = %.6g  max Re = %+.3e  amplitude = %s", pp.text, value, mx, amp)

    diagram = BifurcationDiagram(
        pp.text, samples, spec.asset_names,
        metadata={
            "amplitude_units": "absolute price units (half peak-to-trough)",
            "initial_prices": [float(x) for x in initial.prices],
            "t_end": float(t_end), "sample_dt": float(sample_dt), "mode": FlowMode(mode).value,
            "transient_fraction": float(transient_fraction),
        })
    if locate_threshold:
        mr = diagram.max_real
        cross = np.flatnonzero((mr[:-1] < 0) & (mr[1:] > 0))
        if cross.size:
            k = int(cross[0])
            try:
                hp = hopf_threshold_eigen(spec, pp, samples[k].param, samples[k + 1].param, tol)
                diagram.threshold_eigen = hp.value
                diagram.metadata["threshold_frequency"] = hp.frequency
            except (FoldNotHopf, NoSignChange) as exc:
                diagram.metadata["threshold_note"] = str(exc)
    return diagram


def hopf_threshold_eigen(spec: ModelSpec, path, lo, hi, tol=1e-4) -> HopfPoint:
    """Bisection on max Re(lambda) at the (recalibrated) fundamental point."""
    pp = ParameterPath.parse(path, spec) if isinstance(path, str) else path
    f_lo, _ = _dominant(pp.set(spec, lo))
    f_hi, w_hi = _dominant(pp.set(spec, hi))
    if not (f_lo < 0 < f_hi):
        raise NoSignChange(f"max Re(lambda) is {f_lo:.3e} at {lo} and {f_hi:.3e} at {hi}")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        f_mid, w_mid = _dominant(pp.set(spec, mid))
        if f_mid < 0:
            lo = mid
        else:
            hi, w_hi = mid, w_mid
    if w_hi <= tol:
        raise FoldNotHopf(f"real eigenvalue crosses zero near {hi:.6g}")
    return HopfPoint(0.5 * (lo + hi), float(w_hi))


def hopf_threshold_amplitude(spec: ModelSpec, path, lo, hi, tol=1e-3, initial: State | None = None,
                             t_end=2000.0, sample_dt=0.1, mode=FlowMode.FIXED_ENDOWMENT,
                             floor=AMPLITUDE_FLOOR, transient_fraction=TRANSIENT_FRACTION) -> float:
    """Bisection on "still oscillating after a long run": the largest asset
    amplitude over the retained window exceeds ``floor * Pa``."""
    pp = ParameterPath.parse(path, spec) if isinstance(path, str) else path
    initial = initial if initial is not None else _default_initial(spec)

    def onset(value):
        s = pp.set(spec, value)
        amp, _ = _amplitudes(s, initial, t_end, sample_dt, mode, transient_fraction)
        return bool(np.any(amp > floor * s.packed.Pa))

    if not onset(hi):
        raise NoOnset(f"amplitude stays below the floor on [{lo}, {hi}]")
    if onset(lo):
        raise NoSignChange(f"already oscillating at the lower end {lo}")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if onset(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
