"""
Two oil assets, two investor groups
===================================

The bundled scenario trades Nigerian and Libyan crude. A value-oriented
group (USA) pulls prices towards the fundamental 80 $/bbl; a momentum
group (China) chases the recent price trend. Below a critical momentum
weight the market settles; above it prices cycle.
"""
from pathlib import Path

import numpy as np

from assetflow import FlowMode, emit_svg, integrate, load_scenario, oscillation_stats, wealth_stats
from assetflow.model import with_group_values

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

oil = load_scenario("oil_nigeria_libya")
print(oil.spec.asset_names, oil.spec.group_names)
print("initial prices", oil.initial.prices)

# Calibration picks the share holdings so that the zero-sentiment buy and
# sell flows balance at the fundamental price.
print("calibrated shares per group and asset\n", oil.spec.packed.N)

# Moderate momentum: prices converge and the wealth split stays constant.
stable = integrate(with_group_values(oil.spec, "china", q1=0.3), oil.initial, 1000.0)
for name in stable.spec.asset_names:
    s = oscillation_stats(stable, name)
    print(f"q1 = 0.3  {name}: converged={s.converged} to {s.asymptote:.4f}")
for g in stable.spec.group_names:
    w = wealth_stats(stable, g)
    print(f"  wealth share {g}: {w.mean:.4f} (std {w.std:.1e})")
emit_svg(stable, out / "oil_stable_price.svg", "price")

# Strong momentum with endowments held fixed: a limit cycle.
cycle = integrate(with_group_values(oil.spec, "china", q1=0.5), oil.initial, 1000.0,
                  mode=FlowMode.FIXED_ENDOWMENT)
for name in cycle.spec.asset_names:
    s = oscillation_stats(cycle, name)
    print(f"q1 = 0.5  {name}: amplitude {s.amplitude:.2f} $/bbl, period {s.period:.2f} days")
emit_svg(cycle, out / "oil_cycle_price.svg", "price")
emit_svg(cycle, out / "oil_cycle_sentiment.svg", "sentiment")

# With cash and shares flowing between the groups the cycle does not
# persist: holdings drift towards the value group and the market settles.
flow = integrate(with_group_values(oil.spec, "china", q1=0.5), oil.initial, 1000.0,
                 mode=FlowMode.CLOSED_FLOW)
print("closed flow, final prices", np.round(flow.prices[-1], 4))
print("closed flow, final wealth shares", np.round(flow.wealth[-1], 4))
emit_svg(flow, out / "oil_flow_wealth.svg", "wealth")
