"""Command-line front end.

Subcommands: ik, fk, tool-ik, tool-fk, ellipse, roundtrip.  Angles are
radians and lengths millimetres unless --deg is given (which converts angle
arguments and angle output columns).  Output is deterministic for fixed
arguments and seed; machine-readable modes use '.' decimals via repr.

Exit codes: 0 solutions found (or report produced), 1 usage/input error,
2 no solution.
"""

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import machine as mk
from . import oracle
from . import parallel_fk as pfk
from . import parallel_ik as pik
from .errors import AmbiguousSelectionError, KinematicsError

MODE_LABELS = "abcdefghijklmnopqrstuvwxyz"

IK_COLUMNS = ("label", "rho1", "rho2", "rho3", "alpha",
              "s1", "s2", "s3", "residual_norm", "within_limits")
FK_COLUMNS = ("label", "alpha", "x_p", "y_p", "z_p",
              "s1", "s2", "s3", "residual_norm", "reachable")
TOOL_IK_COLUMNS = ("label", "rho1", "rho2", "rho3", "theta1", "theta2",
                   "s1", "s2", "s3", "residual_norm", "within_limits")
TOOL_FK_COLUMNS = ("label", "phi1", "phi2", "x_u", "y_u", "z_u",
                   "s1", "s2", "s3", "residual_norm", "reachable")
ELLIPSE_COLUMNS = ("record", "alpha", "center_x", "a", "b", "phi", "x", "y", "reason")

ANGLE_FIELDS = frozenset(("alpha", "theta1", "theta2", "phi1", "phi2"))


@dataclass(frozen=True)
class SolutionRecord:
    """One output row: a label plus a field/value mapping."""

    label: str
    values: dict

    def row(self, columns, deg=False):
        out = []
        for col in columns:
            if col == "label":
                out.append(self.label)
                continue
            v = self.values.get(col, "")
            if deg and col in ANGLE_FIELDS and isinstance(v, float):
                v = math.degrees(v)
            out.append(v)
        return out


def _fmt_cell(v, human):
    if isinstance(v, bool):
        return ("yes" if v else "no") if human else repr(v).lower()
    if isinstance(v, float):
        return f"{v:14.6f}" if human else repr(v)
    return str(v)


def emit_records(records, columns, fmt, deg, out=None):
    if out is None:
        out = sys.stdout
    if fmt == "table":
        widths = [max(len(c), 14) for c in columns]
        header = "  ".join(c.ljust(w) for c, w in zip(columns, widths))
        print(header, file=out)
        print("-" * len(header), file=out)
        for rec in records:
            cells = [_fmt_cell(v, True).rjust(w) if not isinstance(v, str) else v.ljust(w)
                     for v, w in zip(rec.row(columns, deg), widths)]
            print("  ".join(cells), file=out)
    elif fmt == "csv":
        print(",".join(columns), file=out)
        for rec in records:
            print(",".join(_fmt_cell(v, False) for v in rec.row(columns, deg)), file=out)
    elif fmt == "json-lines":
        for rec in records:
            obj = {"label": rec.label}
            for col in columns:
                if col == "label":
                    continue
                v = rec.values.get(col)
                if v is None:
                    continue
                if deg and col in ANGLE_FIELDS and isinstance(v, float):
                    v = math.degrees(v)
                obj[col] = v
            print(json.dumps(obj, sort_keys=True), file=out)
    else:  # pragma: no cover
        raise ValueError(f"unknown format {fmt!r}")


def _ik_records(solutions):
    records = []
    for i, sol in enumerate(sorted(
            solutions, key=lambda s: (s.alpha, s.indices.as_tuple()))):
        records.append(SolutionRecord(
            label=f"({MODE_LABELS[i]})",
            values=dict(rho1=sol.joints.rho1, rho2=sol.joints.rho2,
                        rho3=sol.joints.rho3, alpha=sol.alpha,
                        s1=sol.indices.s1, s2=sol.indices.s2, s3=sol.indices.s3,
                        residual_norm=sol.residual_norm,
                        within_limits=sol.within_limits)))
    return records


def _fk_records(modes):
    records = []
    for i, mode in enumerate(modes):
        records.append(SolutionRecord(
            label=f"({MODE_LABELS[i]})",
            values=dict(alpha=mode.pose.alpha, x_p=mode.pose.x_p,
                        y_p=mode.pose.y_p, z_p=mode.pose.z_p,
                        s1=mode.indices.s1, s2=mode.indices.s2,
                        s3=mode.indices.s3,
                        residual_norm=mode.residual_norm,
                        reachable=mode.reachable)))
    return records


def _tool_ik_records(solutions):
    records = []
    for i, sol in enumerate(sorted(
            solutions, key=lambda s: (s.machine_joints.theta1, s.indices.as_tuple()))):
        mj = sol.machine_joints
        records.append(SolutionRecord(
            label=f"({MODE_LABELS[i]})",
            values=dict(rho1=mj.joints.rho1, rho2=mj.joints.rho2,
                        rho3=mj.joints.rho3, theta1=mj.theta1, theta2=mj.theta2,
                        s1=sol.indices.s1, s2=sol.indices.s2, s3=sol.indices.s3,
                        residual_norm=sol.residual_norm,
                        within_limits=sol.within_limits)))
    return records


def _tool_fk_records(geom, modes, theta1, theta2):
    records = []
    for i, mode in enumerate(modes):
        tp = mk.tool_pose_from_platform(geom, mode.pose, theta1, theta2)
        records.append(SolutionRecord(
            label=f"({MODE_LABELS[i]})",
            values=dict(phi1=tp.phi1, phi2=tp.phi2, x_u=tp.x_u, y_u=tp.y_u,
                        z_u=tp.z_u, s1=mode.indices.s1, s2=mode.indices.s2,
                        s3=mode.indices.s3, residual_norm=mode.residual_norm,
                        reachable=mode.reachable)))
    return records


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit code 2; this contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="pkmkin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("geometry", help="geometry file (key = value lines)")
        p.add_argument("--format", choices=("table", "csv", "json-lines"),
                       default="table")
        p.add_argument("--deg", action="store_true",
                       help="angles in degrees on input and output")

    p_ik = sub.add_parser("ik", help="inverse kinematics of the parallel module")
    common(p_ik)
    p_ik.add_argument("x_p", type=float)
    p_ik.add_argument("y_p", type=float)
    p_ik.add_argument("z_p", type=float)
    p_ik.add_argument("--select", action="store_true",
                      help="print only the working solution")

    p_fk = sub.add_parser("fk", help="forward kinematics of the parallel module")
    common(p_fk)
    p_fk.add_argument("rho1", type=float)
    p_fk.add_argument("rho2", type=float)
    p_fk.add_argument("rho3", type=float)
    p_fk.add_argument("--select", action="store_true",
                      help="print only the reachable assembly mode")

    p_tik = sub.add_parser("tool-ik", help="inverse kinematics of the full machine")
    common(p_tik)
    p_tik.add_argument("x_u", type=float)
    p_tik.add_argument("y_u", type=float)
    p_tik.add_argument("z_u", type=float)
    p_tik.add_argument("phi1", type=float)
    p_tik.add_argument("phi2", type=float)
    p_tik.add_argument("--select", action="store_true",
                       help="print only the working solution")

    p_tfk = sub.add_parser("tool-fk", help="forward kinematics of the full machine")
    common(p_tfk)
    p_tfk.add_argument("rho1", type=float)
    p_tfk.add_argument("rho2", type=float)
    p_tfk.add_argument("rho3", type=float)
    p_tfk.add_argument("theta1", type=float)
    p_tfk.add_argument("theta2", type=float)
    p_tfk.add_argument("--select", action="store_true",
                       help="print only the reachable assembly mode")

    p_ell = sub.add_parser("ellipse", help="iso-orientation ellipse plot data")
    common(p_ell)
    p_ell.add_argument("--alpha-min", type=float, default=-math.pi)
    p_ell.add_argument("--alpha-max", type=float, default=math.pi)
    p_ell.add_argument("--step", type=float, default=2.0 * math.pi / 45.0)
    p_ell.add_argument("--points", type=int, default=16,
                       help="sample points per ellipse")

    p_rt = sub.add_parser("roundtrip", help="IK->FK consistency benchmark")
    common(p_rt)
    p_rt.add_argument("--count", type=int, default=1000)
    p_rt.add_argument("--seed", type=int, default=0)
    p_rt.add_argument("--starts", type=int, default=20,
                      help="newton starts per sample in the timing section")
    p_rt.add_argument("--box", type=float, nargs=6, metavar=("X0", "X1", "Y0", "Y1", "Z0", "Z1"),
                      default=None,
                      help="sampling box; |y| sampled in (Y0, Y1), either sign")
    p_rt.add_argument("--timing", action="store_true",
                      help="append wall-clock timings (not byte-deterministic)")
    return parser


def _angle_arg(value, deg):
    return math.radians(value) if deg else value


def cmd_ik(geom, args):
    solutions = pik.enumerate_ik(geom, args.x_p, args.y_p, args.z_p)
    if args.select:
        selected = pik.select_working_solution(solutions, geom)
        solutions = [selected] if selected is not None else []
    records = _ik_records(solutions)
    emit_records(records, IK_COLUMNS, args.format, args.deg)
    return 0 if records else 2


def cmd_fk(geom, args):
    modes = pfk.enumerate_fk(geom, pik.ParallelJoints(args.rho1, args.rho2, args.rho3))
    if args.select:
        selected = pfk.select_assembly_mode(modes)
        modes = [selected] if selected is not None else []
    records = _fk_records(modes)
    emit_records(records, FK_COLUMNS, args.format, args.deg)
    return 0 if records else 2


def cmd_tool_ik(geom, args):
    tool = mk.ToolPose(args.x_u, args.y_u, args.z_u,
                       _angle_arg(args.phi1, args.deg),
                       _angle_arg(args.phi2, args.deg))
    solutions = mk.tool_ik(geom, tool)
    if args.select:
        selected = mk.select_machine_solution(solutions, geom)
        solutions = [selected] if selected is not None else []
    records = _tool_ik_records(solutions)
    emit_records(records, TOOL_IK_COLUMNS, args.format, args.deg)
    return 0 if records else 2


def cmd_tool_fk(geom, args):
    theta1 = _angle_arg(args.theta1, args.deg)
    theta2 = _angle_arg(args.theta2, args.deg)
    modes = pfk.enumerate_fk(geom, pik.ParallelJoints(args.rho1, args.rho2, args.rho3))
    if args.select:
        selected = pfk.select_assembly_mode(modes)
        modes = [selected] if selected is not None else []
    records = _tool_fk_records(geom, modes, theta1, theta2)
    emit_records(records, TOOL_FK_COLUMNS, args.format, args.deg)
    return 0 if records else 2


def cmd_ellipse(geom, args):
    if args.step <= 0.0:
        print("pkmkin ellipse: error: step must be positive", file=sys.stderr)
        return 1
    step = _angle_arg(args.step, args.deg)
    lo = _angle_arg(args.alpha_min, args.deg)
    hi = _angle_arg(args.alpha_max, args.deg)
    records = []
    n = int(round((hi - lo) / step))
    grid = [lo + k * step for k in range(n + 1) if lo + k * step <= hi + 1e-12]
    emitted = 0
    for alpha in grid:
        try:
            ell = pik.iso_ellipse(geom, alpha)
        except KinematicsError as exc:
            records.append(SolutionRecord(
                label="", values=dict(record="warning", alpha=alpha,
                                      reason=type(exc).__name__)))
            continue
        emitted += 1
        records.append(SolutionRecord(
            label="", values=dict(record="ellipse", alpha=ell.alpha,
                                  center_x=ell.center_x, a=ell.semi_major_a,
                                  b=ell.semi_minor_b)))
        for k in range(args.points):
            phi = 2.0 * math.pi * k / args.points
            x, y = ell.point(phi)
            records.append(SolutionRecord(
                label="", values=dict(record="point", alpha=ell.alpha,
                                      phi=phi, x=x, y=y)))
    emit_records(records, ELLIPSE_COLUMNS, args.format, args.deg)
    return 0 if emitted else 2


def cmd_roundtrip(geom, args):
    if args.count < 0:
        print("pkmkin roundtrip: error: count must be >= 0", file=sys.stderr)
        return 1
    box = args.box if args.box is not None else [
        geo.SIXTEEN_BRANCH_REGION[0][0], geo.SIXTEEN_BRANCH_REGION[0][1],
        geo.SIXTEEN_BRANCH_REGION[1][0], geo.SIXTEEN_BRANCH_REGION[1][1],
        geo.SIXTEEN_BRANCH_REGION[2][0], geo.SIXTEEN_BRANCH_REGION[2][1]]
    rng = np.random.default_rng(args.seed)
    ik_hist, fk_hist = {}, {}
    failures = 0
    max_err = 0.0
    sum_err = 0.0
    max_ang = 0.0
    recovered = 0
    t_sym = 0.0
    t_newton = 0.0
    for _ in range(args.count):
        x = rng.uniform(box[0], box[1])
        y = rng.uniform(box[2], box[3]) * (1.0 if rng.uniform() < 0.5 else -1.0)
        z = rng.uniform(box[4], box[5])
        solutions = pik.enumerate_ik(geom, x, y, z)
        ik_hist[len(solutions)] = ik_hist.get(len(solutions), 0) + 1
        try:
            working = pik.select_working_solution(solutions, geom)
        except AmbiguousSelectionError:
            working = None
        if working is None:
            failures += 1
            continue
        t0 = time.perf_counter()
        modes = pfk.enumerate_fk(geom, working.joints)
        t_sym += time.perf_counter() - t0
        fk_hist[len(modes)] = fk_hist.get(len(modes), 0) + 1
        if args.timing:
            t0 = time.perf_counter()
            oracle.newton_fk(geom, working.joints, starts=args.starts, seed=args.seed)
            t_newton += time.perf_counter() - t0
        try:
            mode = pfk.select_assembly_mode(modes)
        except AmbiguousSelectionError:
            mode = None
        if mode is None:
            failures += 1
            continue
        err = max(abs(mode.pose.x_p - x), abs(mode.pose.y_p - y),
                  abs(mode.pose.z_p - z))
        ang = abs(mode.pose.alpha - working.alpha)
        if err > 1e-6 or ang > 1e-8:
            failures += 1
            continue
        recovered += 1
        max_err = max(max_err, err)
        sum_err += err
        max_ang = max(max_ang, ang)
    print(f"samples            {args.count}")
    print(f"seed               {args.seed}")
    print(f"recovered          {recovered}")
    print(f"failures           {failures}")
    if recovered:
        print(f"max position error {max_err:.3e} mm")
        print(f"mean position error {sum_err / recovered:.3e} mm")
        print(f"max angle error    {max_ang:.3e} rad")
    for name, hist in (("ik-branch-count", ik_hist), ("fk-mode-count", fk_hist)):
        for k in sorted(hist):
            print(f"{name} {k:3d}      {hist[k]}")
    if args.timing:
        print(f"symbolic fk time   {t_sym:.3f} s")
        print(f"newton fk time     {t_newton:.3f} s ({args.starts} starts/sample)")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        geom = geo.read_geometry_file(args.geometry)
    except OSError as exc:
        print(f"pkmkin: cannot read geometry: {exc}", file=sys.stderr)
        return 1
    except KinematicsError as exc:
        print(f"pkmkin: invalid geometry: {exc}", file=sys.stderr)
        return 1
    handler = {
        "ik": cmd_ik, "fk": cmd_fk, "tool-ik": cmd_tool_ik,
        "tool-fk": cmd_tool_fk, "ellipse": cmd_ellipse,
        "roundtrip": cmd_roundtrip,
    }[args.command]
    try:
        return handler(geom, args)
    except AmbiguousSelectionError as exc:
        print(f"pkmkin: ambiguous selection: {exc}", file=sys.stderr)
        return 1
    except KinematicsError as exc:
        print(f"pkmkin: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
