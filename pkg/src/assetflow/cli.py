"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 scenario validation error,
3 numerical failure. Set ``ASSETFLOW_LOG`` (debug, info, warning, error) for
diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .bifurcation import ParameterPath, scan
from .equilibrium import calibrate_shares, fundamental_equilibrium, solve_equilibrium
from .errors import AssetFlowError, NumericalError, OutputError, ScenarioError
from .model import FlowMode
from .output import emit_diagram_csv, emit_svg, emit_trajectory_csv, trajectory_columns, trajectory_table
from .scenario import dump_scenario, load_scenario
from .simulate import integrate, oscillation_stats, wealth_stats
from .stability import assemble_jacobian, reduced_block, routh_hurwitz_cubic

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("assetflow")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range(text):
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _fmt(x):
    return "%.17g" % x


def _scenario(args):
    sc = load_scenario(args.scenario, seed=args.seed)
    if args.mode:
        sc.run.mode = FlowMode(args.mode)
    if getattr(args, "t_end", None):
        sc.run.t_end = args.t_end
    return sc


def _simulate(sc):
    return integrate(sc.spec, sc.initial, sc.run.t_end, sample_dt=sc.run.sample_dt, mode=sc.run.mode)


def cmd_simulate(args, out):
    sc = _scenario(args)
    traj = _simulate(sc)
    log.info("integrated %d samples, %s", len(traj), traj.meta)
    if args.out:
        emit_trajectory_csv(traj, args.out)
        for i, name in enumerate(sc.spec.asset_names):
            st = oscillation_stats(traj, i)
            period = "" if st.period is None else _fmt(st.period)
            print(f"{name},amplitude={_fmt(st.amplitude)},period={period},converged={st.converged}", file=out)
    else:
        print(",".join(trajectory_columns(traj)), file=out)
        for row in trajectory_table(traj).tolist():
            print(",".join(map(_fmt, row)), file=out)
    if args.svg:
        emit_svg(traj, args.svg, args.plot)


def cmd_equilibrium(args, out):
    sc = _scenario(args)
    start = sc.initial.prices if args.initial is None else np.array(args.initial, dtype=float)
    res = solve_equilibrium(sc.spec, start)
    print(f"# kind: {res.kind.value}", file=out)
    print(f"# iterations: {res.iterations}", file=out)
    print(f"# residual_norm: {_fmt(res.residual_norm)}", file=out)
    print("asset,price,residual", file=out)
    for name, p, r in zip(sc.spec.asset_names, res.state.prices, res.per_asset_residuals):
        print(f"{name},{_fmt(p)},{_fmt(r)}", file=out)


def cmd_calibrate(args, out):
    sc = _scenario(args)
    sc.spec = calibrate_shares(sc.spec)
    eq = fundamental_equilibrium(sc.spec)
    print(f"# fundamental residual after calibration: {eq.residual_norm:.3e}", file=sys.stderr)
    text = dump_scenario(sc)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise OutputError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        out.write(text)


def cmd_stability(args, out):
    sc = _scenario(args)
    rep = assemble_jacobian(sc.spec)
    print(f"# classification: {rep.classification.value}", file=out)
    print(f"# max_real_part: {_fmt(rep.max_real_part)}", file=out)
    if rep.non_differentiable:
        print("# warning: a rate clamp is exactly active; one-sided derivatives used", file=out)
    for i, a in enumerate(sc.spec.asset_names):
        for j, g in enumerate(sc.spec.group_names):
            rh = routh_hurwitz_cubic(reduced_block(sc.spec, i, j))
            print(f"# routh_hurwitz {a}/{g}: alpha2={_fmt(rh.alpha2)} alpha1={_fmt(rh.alpha1)} "
                  f"alpha0={_fmt(rh.alpha0)} stable={rh.stable}", file=out)
    print("index,real,imag", file=out)
    for k, lam in enumerate(rep.eigenvalues):
        print(f"{k},{_fmt(lam.real)},{_fmt(lam.imag)}", file=out)


def cmd_bifurcate(args, out):
    sc = _scenario(args)
    default = sc.run.scan
    param = args.param or (default.param if default else f"groups.{sc.spec.group_names[-1]}.q1")
    lo, hi = args.range or ((default.lo, default.hi) if default else (0.0, 0.8))
    points = args.points or (default.points if default else 33)
    try:
        path = ParameterPath.parse(param, sc.spec)
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    # the scan runs with fixed endowments unless --mode is given explicitly
    mode = FlowMode(args.mode) if args.mode else FlowMode.FIXED_ENDOWMENT
    diagram = scan(sc.spec, path, lo, hi, points, initial=sc.initial,
                   t_end=args.t_end or sc.run.t_end, sample_dt=sc.run.sample_dt, mode=mode)
    if args.out:
        emit_diagram_csv(diagram, args.out)
    if args.svg:
        emit_svg(diagram, args.svg)
    thr = "none" if diagram.threshold_eigen is None else _fmt(diagram.threshold_eigen)
    print(f"threshold_eigen,{thr}", file=out)
    failed = sum(s.status != "ok" for s in diagram.samples)
    if failed:
        print(f"{failed} scan point(s) failed; see the status column", file=sys.stderr)


def cmd_wealth_stats(args, out):
    sc = _scenario(args)
    traj = _simulate(sc)
    print("group,mean,std,min,max", file=out)
    for j, g in enumerate(sc.spec.group_names):
        w = wealth_stats(traj, j)
        print(f"{g},{_fmt(w.mean)},{_fmt(w.std)},{_fmt(w.min)},{_fmt(w.max)}", file=out)


def cmd_print_effective(args, out):
    out.write(dump_scenario(_scenario(args)))


class _Usage(Exception):
    pass


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True,
                        help="scenario YAML file, a bundled name (oil_nigeria_libya) or gas_market")
    common.add_argument("--mode", choices=[m.value for m in FlowMode],
                        help="fixed endowments or closed cash/share flows")
    common.add_argument("--seed", type=int, default=0, help="seed for the gas_market generator")

    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--t-end", type=float, help="integration horizon in days")

    parser = _Parser(prog="assetflow", description="Multi-asset asset-flow market model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common, timed], help="integrate a scenario")
    p.add_argument("--out", help="trajectory CSV (stdout if omitted)")
    p.add_argument("--svg", help="plot file")
    p.add_argument("--plot", choices=["price", "sentiment", "wealth"], default="price")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equilibrium", parents=[common], help="solve for a price equilibrium")
    p.add_argument("--initial", type=float, nargs="+", help="starting prices")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("calibrate", parents=[common], help="calibrate shares and print the scenario")
    p.add_argument("--out", help="write the calibrated scenario here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("stability", parents=[common], help="eigenvalues at the fundamental point")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("bifurcate", parents=[common, timed], help="parameter scan and Hopf threshold")
    p.add_argument("--param", help="parameter path, e.g. groups.china.q1")
    p.add_argument("--range", type=_range, help="LO:HI")
    p.add_argument("--points", type=int)
    p.add_argument("--out", help="diagram CSV")
    p.add_argument("--svg", help="diagram plot")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("wealth-stats", parents=[common, timed], help="post-transient wealth statistics")
    p.set_defaults(func=cmd_wealth_stats)

    p = sub.add_parser("scenario", help="scenario utilities")
    ssub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    pe = ssub.add_parser("print-effective", parents=[common], help="fully resolved scenario")
    pe.set_defaults(func=cmd_print_effective)
    return parser


def _configure_logging():
    level = os.environ.get("ASSETFLOW_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None, out=None):
    out = out or sys.stdout
    _configure_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "points", None) is not None and args.points < 2:
        print("assetflow: error: --points must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args, out)
    except ScenarioError as exc:
        print(f"assetflow: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"assetflow: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (_Usage, OutputError, ValueError) as exc:
        print(f"assetflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssetFlowError as exc:
        print(f"assetflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
