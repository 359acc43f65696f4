"""Command line entry point: ``stokesdrop <subcommand>``.

Exit codes: 0 success, 1 configuration or input error, 2 solver failure,
3 degenerate stop (resolution floor or unresolved self-intersection),
4 failed verification check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .curve import CurveError

log = logging.getLogger("stokesdrop")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_DEGENERATE, EXIT_CHECK = 0, 1, 2, 3, 4


class Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors map to the configuration exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# --- simulate ---------------------------------------------------------------------


def acceptance_flags(traj, config) -> dict:
    """Checks every run can assert about itself."""
    from .diagnostics.identities import check_dissipation_identity

    recs = traj.records
    t = np.array([r.t for r in recs])
    drift = max(r.area_drift for r in recs)
    flags = {
        "times_increasing": bool(np.all(np.diff(t) > 0)),
        "area_drift_max": float(drift),
        "area_conserved": bool(drift <= config.area_tol),
    }
    if len(recs) >= 2 and not config.prescribed:
        worst, cum = check_dissipation_identity(recs)
        flags["dissipation_interval_rel"] = worst.rel_residual
        flags["dissipation_cumulative_rel"] = cum.rel_residual
        flags["dissipation_identity"] = bool(worst.passed and cum.passed)
    return flags


def simulate_cmd(args) -> int:
    from .diagnostics.monitors import gronwall_monitor
    from .evolve import STOP_INTERSECTION, STOP_RESOLUTION, ConfigError, RunFailure, ScenarioConfig, run

    try:
        config = ScenarioConfig.from_json(args.config)
        if config.snapshot_every and config.snapshot_every % config.record_every:
            raise ConfigError("snapshot_every must be a multiple of record_every")
        boundary = config.initial_boundary()
    except (ConfigError, CurveError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.output)
    snaps = out / "snapshots"
    snaps.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")

    def on_snapshot(s):
        name = f"curve_{s.step_index:06d}"
        io.write_snapshot_csv(snaps / f"{name}.csv", s.boundary, s.kappa, s.normal_velocity)
        if args.svg:
            from .plotting import render

            render(s.boundary, snaps / f"{name}.svg", title=f"t = {s.t:.6g}")

    summary = {"config": str(Path(args.config)), "failure": None}
    code = EXIT_OK
    with io.JsonlWriter(out / "records.jsonl") as writer:
        try:
            traj = run(config, on_record=lambda r: writer.write(r.to_json()), on_snapshot=on_snapshot,
                       boundary=boundary)
        except RunFailure as exc:
            traj = exc.trajectory
            summary["failure"] = str(exc)
            code = EXIT_SOLVER
    summary["stop_reason"] = traj.stop_reason if code == EXIT_OK else "solver failure"
    if traj.final_state is not None:
        summary["final_time"] = traj.final_state.t
        summary["steps"] = traj.final_state.step_index
    if traj.records:
        summary["final"] = traj.records[-1].to_json()
        summary["initial"] = traj.records[0].to_json()
        summary["acceptance"] = acceptance_flags(traj, config)
    if len(traj.records) >= 3:
        summary["monitors"] = gronwall_monitor(traj.records, traj.context).to_json()
    (out / "summary.json").write_text(io.dumps(summary, indent=2, sort_keys=True) + "\n")
    if code == EXIT_OK and traj.stop_reason in (STOP_INTERSECTION, STOP_RESOLUTION):
        code = EXIT_DEGENERATE
    print(f"{summary['stop_reason']} at t={summary.get('final_time', 0.0):.6g}; artifacts in {out}")
    return code


# --- oracle -----------------------------------------------------------------------


def oracle_cmd(args) -> int:
    from .oracle import AnnulusOracle, OracleError

    try:
        st = AnnulusOracle(args.l, args.L, args.theta).state(args.t)
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(io.dumps(st.to_json(), indent=2, sort_keys=True))
    return EXIT_OK


# --- verify -----------------------------------------------------------------------


def verify_cmd(args) -> int:
    from .diagnostics.suites import run_suite

    suites = run_suite(args.suite, args.level)
    payload = [r.to_json() for s in suites for r in s.results]
    out = Path(args.output or f"verify-{args.suite}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(io.dumps(payload, indent=2) + "\n")
    for s in suites:
        print(s.summary())
        print()
    print(f"{len(payload)} results written to {out}")
    return EXIT_OK if all(s.passed for s in suites) else EXIT_CHECK


# --- ubc / export-svg ----------------------------------------------------------------


def ubc_cmd(args) -> int:
    from .geometry import ubc_radius

    try:
        b = io.read_curve_csv(args.input)
    except CurveError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(io.dumps(ubc_radius(b).to_json(), indent=2, sort_keys=True))
    return EXIT_OK


def export_svg_cmd(args) -> int:
    from .plotting import render

    src = Path(args.input)
    try:
        b = io.read_curve_csv(src)
    except CurveError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.output) if args.output else src.with_suffix(".svg")
    render(b, out, normals=args.normals, show_ubc=args.show_ubc)
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    from .diagnostics.suites import SUITES

    p = Parser(prog="stokesdrop", description="Quasi-steady Stokes droplet simulator and verification suites.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("simulate", help="run a scenario and write its artifacts")
    s.add_argument("-c", "--config", required=True, help="scenario JSON")
    s.add_argument("-o", "--output", required=True, help="run directory")
    s.add_argument("--svg", action="store_true", help="also render each snapshot to SVG")
    s.set_defaults(func=simulate_cmd)

    o = sub.add_parser("oracle", help="closed-form reference states")
    osub = o.add_subparsers(dest="shape", required=True, parser_class=Parser)
    a = osub.add_parser("annulus", help="concentric annulus")
    a.add_argument("--l", type=float, required=True, help="initial inner radius")
    a.add_argument("--L", type=float, required=True, help="initial outer radius")
    a.add_argument("--theta", type=float, default=1.0)
    a.add_argument("--t", type=float, default=0.0)
    a.set_defaults(func=oracle_cmd)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=SUITES + ("all",))
    v.add_argument("--level", type=int, default=1, help="resolution level (0 quick, 1 default)")
    v.add_argument("-o", "--output", help="JSON results path (default verify-<suite>.json)")
    v.set_defaults(func=verify_cmd)

    u = sub.add_parser("ubc", help="maximal uniform-ball radius of a curve file")
    u.add_argument("-i", "--input", required=True)
    u.set_defaults(func=ubc_cmd)

    e = sub.add_parser("export-svg", help="render a curve or snapshot CSV")
    e.add_argument("-i", "--input", required=True)
    e.add_argument("-o", "--output")
    e.add_argument("--normals", action="store_true")
    e.add_argument("--show-ubc", action="store_true", help="draw a tangent ball of radius r_omega")
    e.set_defaults(func=export_svg_cmd)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return int(args.func(args))


if __name__ == "__main__":
    sys.exit(main())
