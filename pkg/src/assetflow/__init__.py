"""Multi-asset, multi-group asset-flow market model.

Prices respond to the ratio of buy-side cash flow to sell-side stock flow;
each investor group trades on trend (momentum) and value sentiments. The
package covers the right-hand side, equilibria and share calibration,
analytic Jacobians with an own eigensolver, time integration and Hopf
bifurcation scans.
"""
from .bifurcation import (BifurcationDiagram, HopfPoint, ParameterPath, hopf_threshold_amplitude,
                          hopf_threshold_eigen, scan)
from .equilibrium import (EquilibriumKind, EquilibriumResult, calibrate_shares,
                          fundamental_equilibrium, multistart, solve_equilibrium)
from .errors import *  # noqa: F401,F403
from .linalg import eigenvalues
from .model import (AssetSpec, FlowMode, GroupSpec, ModelSpec, RateForm, RateSpec, State, buy_rate,
                    equilibrium_state, price_rhs, sell_rate, system_rhs, trend_sentiment_rhs,
                    value_sentiment_rhs, wealth_fractions)
from .output import emit_diagram_csv, emit_svg, emit_trajectory_csv, read_csv
from .scenario import ScenarioFile, dump_scenario, gas_market, load_scenario, parse_scenario
from .simulate import OscillationStats, Trajectory, integrate, oscillation_stats, wealth_stats
from .stability import (Classification, JacobianReport, RouthHurwitzReport, assemble_jacobian,
                        reduced_block, routh_hurwitz_cubic, theorem1_condition)

__version__ = "0.1.0"
