"""
Momentum scan and Hopf threshold
================================

Sweep China's momentum weight, record the post-transient price amplitude
and the leading eigenvalue, then locate the threshold twice: from the
eigenvalue sign change and from simulation alone.
"""
from pathlib import Path

from assetflow import emit_diagram_csv, emit_svg, hopf_threshold_amplitude, load_scenario, scan

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
oil = load_scenario("oil_nigeria_libya")

# A coarse scan keeps the demo quick; the CLI default uses 33 points.
diagram = scan(oil.spec, "groups.china.q1", 0.0, 0.8, 9, initial=oil.initial)
for s in diagram.samples:
    print(f"q1 = {s.param:.2f}  amplitude = {s.amplitude.round(3)}  max Re = {s.max_real:+.4f}")
print("threshold from eigenvalues:", diagram.threshold_eigen)

# The simulation-only route never touches the Jacobian.
diagram.threshold_amplitude = hopf_threshold_amplitude(oil.spec, "groups.china.q1", 0.2, 0.5,
                                                       initial=oil.initial)
print("threshold from amplitudes: ", diagram.threshold_amplitude)

emit_diagram_csv(diagram, out / "oil_diagram.csv")
emit_svg(diagram, out / "oil_diagram.svg")
