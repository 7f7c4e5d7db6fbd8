"""``gasloc`` command-line interface.

Exit codes: 0 ok, 2 validation, 3 runtime/geometry, 4 I/O. Failures print a
single line ``ERROR <CODE>: <text>`` on stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..anchors.orbit import geodetic_to_ecef
from ..anchors.tle import read_tle_file
from ..errors import GaslocError, ScenarioError
from ..geometry import (
    Attitude,
    direct_distance,
    geometric_angles,
    horizontal_distance,
    local_aoa,
    rotation_from_attitude,
)
from . import output
from .montecarlo import RNG_DESCRIPTION, run_monte_carlo
from .pipelines import altitude_sweep, doppler_profile, gdop_map, pass_geometry, trajopt_problem
from .scenario import load_scenario


class UsageError(GaslocError):
    code = "USAGE"
    exit_status = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _meta(s, extra=None) -> dict:
    meta = {"scenario": s.name, "config_sha256": s.config_hash(), "seed": s.seed,
            "rng": RNG_DESCRIPTION}
    meta.update(extra or {})
    return meta


def _scenario(args):
    s = load_scenario(args.scenario)
    return s.with_overrides(seed=getattr(args, "seed", None), trials=getattr(args, "trials", None))


def cmd_simulate(args) -> int:
    s = _scenario(args)
    report = run_monte_carlo(s, workers=args.workers)
    header = ["trial", "status", "target_x_m", "target_y_m", "target_z_m", "est_x_m", "est_y_m",
              "est_z_m", "err_x_m", "err_y_m", "err_z_m", "err_3d_m", "err_horizontal_m"]
    rows = []
    for r in report.results:
        e = r.sample
        rows.append((r.trial, r.status, *r.target, *r.estimate, e.ex, e.ey, e.ez,
                     e.error_3d, e.horizontal))
    output.write_csv(args.out, header, rows, _meta(s, {"trials": s.trials}))
    js = output.summary_path(args.out)
    if js is not None:
        cdfs = {k: {f"p{q}": c.percentile(q / 100) for q in (50, 67, 90, 95)}
                for k, c in report.axis_cdfs().items()}
        output.write_json(js, {
            "aggregates": report.aggregates(), "axis_percentiles": cdfs,
            "wall_time_s": report.wall_time_s, "workers": args.workers,
            "seed": s.seed, "rng": report.rng, "config_sha256": report.config_hash,
            "config": report.config,
        })
    return 0


def cmd_gdop_map(args) -> int:
    s = _scenario(args)
    cfg = s.pipelines.get("gdop_map")
    if cfg is None:
        raise ScenarioError(f"{s.name}.gdop_map: missing required section")
    kind = args.kind or cfg["kind"]
    anchors = [p for a in s.anchors for p in a.nominal_points()]
    rows = gdop_map(anchors, cfg["x"], cfg["y"], cfg["z"], kind, cfg["reference_anchor"])
    header = ["x_m", "y_m", "z_m", "gdop", "hdop", "vdop", "status"]
    output.write_csv(args.out, header, rows, _meta(s, {"kind": kind}))
    return 0


def _doppler_sources(s, cfg, base_dir: Path):
    """List of (label, orbit, user) tuples."""
    if cfg["tle_file"]:
        path = Path(cfg["tle_file"])
        if not path.is_absolute():
            path = base_dir / path
        user = geodetic_to_ecef(cfg["user_latitude"], cfg["user_longitude"])
        return [(f"{r.catalog_number}", r.to_orbit_elements(), user) for r in read_tle_file(path)]
    elevations = cfg["max_elevations"]
    if not elevations:
        raise ScenarioError(f"{s.name}.doppler: give max_elevations or tle_file")
    lead = cfg["span"] / 2.0
    out = []
    for el in elevations:
        o, user = pass_geometry(cfg["altitude"], el, cfg["user_latitude"], cfg["user_longitude"],
                                lead)
        out.append((f"max_el_{math.degrees(el):g}deg", o, user))
    return out


def cmd_doppler_profile(args) -> int:
    s = _scenario(args)
    cfg = s.pipelines.get("doppler")
    if cfg is None:
        raise ScenarioError(f"{s.name}.doppler: missing required section")
    mask = math.radians(args.mask_deg) if args.mask_deg is not None else cfg["mask"]
    sources = _doppler_sources(s, cfg, Path(args.scenario).parent)
    rows = []
    for sid, (label, orbit, user) in enumerate(sources):
        for r in doppler_profile([orbit], user, cfg["fc"], 0.0, cfg["span"], cfg["step"], mask):
            rows.append((sid, label, r.pass_index, r.t, math.degrees(r.elevation), r.doppler_hz,
                         r.doppler_rate_hz_s))
    if not rows:
        print("NOTICE: no visible pass above the elevation mask in the time span", file=sys.stderr)
    header = ["satellite", "label", "pass", "t_s", "elevation_deg", "doppler_hz",
              "doppler_rate_hz_per_s"]
    output.write_csv(args.out, header, rows,
                     _meta(s, {"fc_hz": cfg["fc"], "mask_deg": math.degrees(mask)}))
    return 0


def cmd_altitude_sweep(args) -> int:
    s = _scenario(args)
    rows = altitude_sweep(s)
    output.write_csv(args.out, ["h_m", "mean_projected_error_m"], rows, _meta(s))
    return 0


def cmd_trajopt(args) -> int:
    from ..trajopt import optimize_trajectory

    s = _scenario(args)
    problem, search = trajopt_problem(s)
    res = optimize_trajectory(problem, search)
    rows = [(k, *res.points[k], res.dwell[k]) for k in range(res.points.shape[0])]
    output.write_csv(args.out, ["waypoint", "x_m", "y_m", "z_m", "dwell_s"], rows,
                     _meta(s, {"objective": output.fmt(res.objective)}))
    js = output.summary_path(args.out)
    if js is not None:
        output.write_json(js, {
            "objective": res.objective, "default_objective": res.default_objective,
            "slacks": res.slacks, "evaluations": res.evaluations, "chain": res.chain,
            "trace_first_last": [res.trace[0], res.trace[-1]], "seed": s.seed,
            "config_sha256": s.config_hash(),
        })
    return 0


def cmd_tle(args) -> int:
    records = read_tle_file(args.file)
    header = ["catalog_number", "epoch_year", "epoch_day", "inclination_deg", "raan_deg",
              "eccentricity", "arg_perigee_deg", "mean_anomaly_deg", "mean_motion_rev_per_day",
              "altitude_m"]
    rows = [(r.catalog_number, r.epoch_year, r.epoch_day, r.inclination_deg, r.raan_deg,
             r.eccentricity, r.arg_perigee_deg, r.mean_anomaly_deg, r.mean_motion_rev_day,
             r.to_orbit_elements().altitude_m) for r in records]
    output.write_csv(args.out, header, rows, {"source": Path(args.file).name,
                                              "records": len(rows)})
    return 0


def cmd_geometry(args) -> int:
    att = Attitude(*(math.radians(v) for v in args.attitude_deg))
    R = rotation_from_attitude(att)
    lines = ["rotation:"]
    lines += ["  " + " ".join(f"{v + 0.0: .12f}" for v in row) for row in R]  # no -0
    if args.anchor is not None and args.target is not None:
        a, t = np.array(args.anchor), np.array(args.target)
        g = geometric_angles(a, t)
        loc = local_aoa(a, t, R)
        lines += [
            f"distance_m: {direct_distance(a, t):.12g}",
            f"horizontal_m: {horizontal_distance(a, t):.12g}",
            f"azimuth_deg: {math.degrees(g.azimuth):.12g}",
            f"elevation_deg: {math.degrees(g.elevation):.12g}",
            f"local_azimuth_deg: {math.degrees(loc.azimuth):.12g}",
            f"local_elevation_deg: {math.degrees(loc.elevation):.12g}",
        ]
    text = "\n".join(lines) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gasloc", description="Ground-air-space localization simulator")
    p.add_argument("--version", action="version", version=f"gasloc {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def scenario_cmd(name, func, help_text, trials=False, workers=False):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--scenario", required=True, help="scenario YAML file")
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--out", default=None, help="output CSV path (default: stdout)")
        if trials:
            sp.add_argument("--trials", type=int, default=None, help="override trial count")
        if workers:
            sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        sp.set_defaults(func=func)
        return sp

    scenario_cmd("simulate", cmd_simulate, "Monte Carlo localization run", trials=True,
                 workers=True)
    g = scenario_cmd("gdop-map", cmd_gdop_map, "GDOP/HDOP/VDOP over a grid")
    g.add_argument("--kind", choices=("range", "tdoa"), default=None)
    d = scenario_cmd("doppler-profile", cmd_doppler_profile, "LEO pass Doppler and rate")
    d.add_argument("--mask-deg", type=float, default=None, help="elevation mask override")
    scenario_cmd("altitude-sweep", cmd_altitude_sweep, "projected RSS ranging error vs altitude")
    scenario_cmd("trajopt", cmd_trajopt, "optimize UAV hover waypoints")

    t = sub.add_parser("tle", help="parse and validate a TLE file")
    t.add_argument("file")
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_tle)

    geo = sub.add_parser("geometry", help="rotation matrix and angles for one pose")
    geo.add_argument("--attitude-deg", type=float, nargs=3, default=(0.0, 0.0, 0.0),
                     metavar=("PITCH", "ROLL", "YAW"))
    geo.add_argument("--anchor", type=float, nargs=3, metavar=("X", "Y", "Z"))
    geo.add_argument("--target", type=float, nargs=3, metavar=("X", "Y", "Z"))
    geo.add_argument("--out", default=None)
    geo.set_defaults(func=cmd_geometry)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args)
    except GaslocError as exc:
        print(f"ERROR {exc.code}: {str(exc).splitlines()[0] if str(exc) else exc.code}",
              file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(f"ERROR IO: {exc.strerror or exc} ({exc.filename})", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
