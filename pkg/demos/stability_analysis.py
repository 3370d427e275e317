"""
Linear stability at the fundamental price
=========================================

The analytic Jacobian at the calibrated equilibrium decides whether small
deviations die out. Each asset/group pair also has a 3x3 reduced block on
(price, trend sentiment, value sentiment) whose Routh-Hurwitz coefficients
give a quick stability check.
"""
import numpy as np

from assetflow import assemble_jacobian, load_scenario, reduced_block, routh_hurwitz_cubic, theorem1_condition
from assetflow.linalg import eigenvalues
from assetflow.model import with_group_rates, with_group_values

oil = load_scenario("oil_nigeria_libya")

# Leading eigenvalue as China's momentum weight grows.
for q1 in (0.0, 0.2, 0.3, 0.33, 0.4, 0.6):
    rep = assemble_jacobian(with_group_values(oil.spec, "china", q1=q1))
    lam = rep.dominant
    print(f"q1 = {q1:4.2f}  max Re = {rep.max_real_part:+.5f}  |Im| = {abs(lam.imag):.4f}  "
          f"{rep.classification.value}")

# The eigensolver is our own (balancing, Hessenberg reduction, shifted QR).
rep = assemble_jacobian(oil.spec)
print("own vs LAPACK:", np.max(np.abs(np.sort_complex(rep.eigenvalues) - np.sort_complex(np.linalg.eigvals(rep.matrix)))))

# Reduced blocks: Routh-Hurwitz against the eigenvalues of the same block.
for a in oil.spec.asset_names:
    for g in oil.spec.group_names:
        blk = reduced_block(oil.spec, a, g)
        rh = routh_hurwitz_cubic(blk)
        print(f"{a}/{g}: a2={rh.alpha2:.4f} a1={rh.alpha1:.4f} a0={rh.alpha0:.3e} "
              f"stable={rh.stable}  max Re={eigenvalues(blk)[0].real:+.4f}")

# In a market without momentum traders a diagonal-dominance condition
# guarantees stability.
value_only = with_group_rates(with_group_values(oil.spec, "china", q1=0.0), "china",
                              trend_amplitude=0.0, sell_trend_amplitude=0.0)
for a in value_only.asset_names:
    rep = theorem1_condition(value_only, a)
    print(f"{a}: condition holds={rep.holds}, margin {rep.margin:.4f}")
