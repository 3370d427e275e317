"""
A larger market
===============

Ten gas contracts and twenty investor groups, drawn from a seeded
generator: even groups trade on value, odd groups on momentum. The model
has 410 state variables with fixed endowments and 630 with flows.
"""
import time

import numpy as np

from assetflow import assemble_jacobian, gas_market, integrate, wealth_stats

sc = gas_market(seed=0)
spec = sc.spec
print(spec.m, "assets,", spec.n, "groups,", spec.state_size(), "state variables")

t0 = time.perf_counter()
rep = assemble_jacobian(spec)
print(f"Jacobian {rep.matrix.shape}, max Re = {rep.max_real_part:+.4f} ({rep.classification.value}), "
      f"{time.perf_counter() - t0:.2f} s")

t0 = time.perf_counter()
traj = integrate(spec, sc.initial, 1000.0)
print(f"1000 days in {time.perf_counter() - t0:.2f} s, {traj.meta['steps']} steps")
print("largest final price deviation from fundamental:",
      np.max(np.abs(traj.prices[-1] / spec.packed.Pa - 1)))
print("wealth shares sum to one within", np.max(np.abs(traj.wealth.sum(axis=1) - 1)))

# The wealthiest groups at the end of the run.
final = traj.wealth[-1]
for j in np.argsort(final)[::-1][:5]:
    w = wealth_stats(traj, int(j))
    print(f"{spec.group_names[j]:>10s}  {final[j]:.4f}  (window mean {w.mean:.4f})")
