"""Command line interface: analyze, synthesize, verify, simulate, plot.

Exit codes: 0 success, 2 parse error, 3 assumption violation, 4 synthesis
failure, 5 verification failure.
"""

import argparse
import sys

import numpy as np

from .analysis import ROUTE_SUBDIVISION, reach_control_indices
from .errors import (
    AssumptionViolated,
    ConstructionFailed,
    InfeasibleInvariance,
    ParseError,
    ReachControlError,
    SynthesisFailed,
    UnsupportedDimension,
)
from .problemfile import load_problem
from .simulation import simulate, verify_rcp
from .synthesis import parse_controller, serialize_controller, synthesize

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ASSUMPTION = 3
EXIT_SYNTHESIS = 4
EXIT_VERIFY = 5


def _fmt(x):
    return format(float(x), ".17g")


def _fmt_vec(v):
    return "[" + ", ".join(_fmt(x) for x in np.asarray(v).reshape(-1)) + "]"


def cmd_analyze(args):
    problem = load_problem(args.problem)
    inst = problem.instance()
    eq = inst.equilibrium_set

    lines = []
    if eq.empty:
        lines.append("O: empty")
    elif eq.annihilator.shape[0] == 0:
        lines.append("O: all of R^n")
    else:
        lines.append(f"O: affine set of dimension {eq.dim}, point {_fmt_vec(eq.xbar)}")
        NA = eq.annihilator @ inst.system.A
        rhs = -eq.annihilator @ inst.system.a
        for r in range(NA.shape[0]):
            lines.append(f"O row {r}: {_fmt_vec(NA[r])} . x = {_fmt(rhs[r])}")
    if inst.g_face is None:
        lines.append("G: empty")
        lines.append("kappa: -")
    else:
        lines.append(f"G: vertices {list(inst.g_face.vertex_indices)}")
        lines.append(f"kappa: {inst.kappa}")
    lines.append(f"m_hat: {inst.m_hat if inst.m_hat is not None else '-'}")
    lines.append(f"route: {inst.route}")
    if inst.route_reason:
        lines.append(f"reason: {inst.route_reason}")

    from .analysis import check_necessary

    report = check_necessary(inst)
    lines.append(f"necessary invariance: {'pass' if report.invariance_ok else 'fail'}")
    lines.append(f"necessary cone vectors: {'pass' if report.cone_ok else 'fail'}")
    lines.append(f"necessary transversality: {'pass' if report.transversal_ok else 'fail'}")

    if inst.route == ROUTE_SUBDIVISION:
        indices = reach_control_indices(inst)
        lines.append(f"p: {indices.p}")
        lines.append("r: " + ",".join(str(rk) for rk in indices.r))
        lines.append("m_starts: " + ",".join(str(mk) for mk in indices.m_starts))
        lines.append("permutation: " + ",".join(str(i) for i in indices.permutation))
        for k in range(indices.p):
            lines.append(
                f"group {k + 1}: vertices {indices.group_ids(k)}, "
                f"c = {_fmt_vec(indices.c_coeffs[k])}"
            )
    elif inst.kappa is not None and inst.m_hat is not None:
        lines.append(f"p: {inst.kappa + 1 - inst.m_hat}")

    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_synthesize(args):
    problem = load_problem(args.problem)
    inst = problem.instance()
    ctrl = synthesize(inst, pinned_controls=problem.pinned_controls or None,
                      pinned_subdivision=problem.pinned_subdivision or None)
    text = serialize_controller(ctrl)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    for piece in ctrl.pieces:
        sys.stdout.write(f"piece {piece.index}:\n")
        for row in piece.K:
            sys.stdout.write("  K " + " ".join(_fmt(v) for v in row) + "\n")
        sys.stdout.write("  g " + " ".join(_fmt(v) for v in piece.g) + "\n")
    sys.stdout.write(f"pieces: {ctrl.n_pieces}\n")
    return EXIT_OK


def cmd_verify(args):
    problem = load_problem(args.problem)
    inst = problem.instance()
    with open(args.controller, "r", encoding="utf-8") as fh:
        ctrl = parse_controller(fh.read())
    grid = args.grid if args.grid is not None else problem.grid
    dt = args.dt if args.dt is not None else problem.dt
    tmax = args.tmax if args.tmax is not None else problem.tmax
    report = verify_rcp(inst, ctrl, grid_density=grid, dt=dt, t_max=tmax)
    text = report.to_text()
    sys.stdout.write(text)
    if report.grid_density == 0 or not report.outcomes:
        sys.stdout.write("warning: empty verification grid\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if report.outcomes and not report.passed:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_simulate(args):
    problem = load_problem(args.problem)
    inst = problem.instance()
    with open(args.controller, "r", encoding="utf-8") as fh:
        ctrl = parse_controller(fh.read())
    if args.x0:
        x0 = np.array([float(v) for v in args.x0.split(",")])
    else:
        x0 = inst.simplex.centroid
    trace = simulate(inst, ctrl, x0, dt=args.dt if args.dt is not None else problem.dt,
                     t_max=args.tmax if args.tmax is not None else problem.tmax)
    csv = trace.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    sys.stdout.write(f"status {trace.status}\n")
    if trace.exit_time is not None:
        sys.stdout.write(f"exit_time {_fmt(trace.exit_time)}\n")
    return EXIT_OK


def cmd_plot(args):
    from .plotting import plot_closed_loop

    problem = load_problem(args.problem)
    inst = problem.instance()
    with open(args.controller, "r", encoding="utf-8") as fh:
        ctrl = parse_controller(fh.read())
    trajectories = 0 if args.no_trajectories else 5
    plot_closed_loop(inst, ctrl, args.out, trajectories=trajectories,
                     dt=args.dt if args.dt is not None else problem.dt)
    sys.stdout.write(f"wrote {args.out}\n")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="reachctl",
        description="Reach control on simplices: analysis, PWA feedback synthesis, verification.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, controller=False):
        p.add_argument("problem", help="problem file")
        if controller:
            p.add_argument("controller", help="controller file")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--grid", type=int, default=None, help="verification grid density")
        p.add_argument("--dt", type=float, default=None, help="integration step")
        p.add_argument("--tmax", type=float, default=None, help="time horizon")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")

    p = sub.add_parser("analyze", help="classify the instance and print indices")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="build the PWA controller")
    common(p)
    p.add_argument("--pin-controls", default=None,
                   help="problem file whose pinned controls override")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="verify a controller by simulation")
    common(p, controller=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="simulate one trajectory to CSV")
    common(p, controller=True)
    p.add_argument("--x0", default=None, help="comma-separated start state")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="plot the closed-loop field (2D only)")
    common(p, controller=True)
    p.add_argument("--no-trajectories", action="store_true",
                   help="field-only plot without sample trajectories")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except AssumptionViolated as exc:
        sys.stderr.write(f"assumption violated: {exc}\n")
        return EXIT_ASSUMPTION
    except (SynthesisFailed, ConstructionFailed, InfeasibleInvariance) as exc:
        sys.stderr.write(f"synthesis failed: {exc}\n")
        return EXIT_SYNTHESIS
    except UnsupportedDimension as exc:
        sys.stderr.write(f"unsupported: {exc}\n")
        return EXIT_SYNTHESIS
    except ReachControlError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SYNTHESIS
    except FileNotFoundError as exc:
        sys.stderr.write(f"file not found: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
