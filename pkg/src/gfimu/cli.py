"""Batch command-line interface.

Exit codes: 0 success, 2 input/schema error, 3 numerical or degenerate-geometry error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import attitude, calibration, ekf, geometry, io, simulator
from .errors import (
    AmbiguousAttitudeError,
    ConditioningError,
    GeometryDegenerateError,
    InputError,
    UnidentifiableError,
)
from .metrics import error_report

log = logging.getLogger("gfimu")

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC = 0, 2, 3


def profile_from_config(cfg: dict) -> simulator.TrajectoryProfile:
    sim = cfg.get("simulation", {})
    g = sim.get("gravity", simulator.GRAVITY)
    amp = sim.get("linear_accel_amplitude", 0.0)
    origin = (simulator.sinusoidal_origin(amp, sim.get("linear_accel_frequency", 0.3), g)
              if amp > 0 else simulator.constant_gravity(g))
    if sim.get("scenario", "dynamic") == "static":
        return simulator.static_trajectory(origin)
    return simulator.sinusoidal_trajectory(a_origin_fn=origin)


def sim_config_from(cfg: dict, geom, noise_std, seed: int | None) -> simulator.SimulationConfig:
    sim = cfg.get("simulation", {})
    return simulator.SimulationConfig(
        geom=geom,
        noise_std=noise_std,
        sample_rate=sim.get("sample_rate", 100.0),
        duration=sim.get("duration", 100.0),
        seed=sim.get("seed", 0) if seed is None else seed,
    )


def filter_from_config(cfg: dict, geom, noise_std, variant: str | None = None) -> ekf.FilterConfig:
    f = cfg.get("filter", {})
    p0_std = f.get("p0_std", ekf.DEFAULT_P0_STD)
    return ekf.make_filter(
        geom,
        geometry.noise_covariance(noise_std, geom.n),
        variant=variant or f.get("variant", "uncorrelated"),
        x0=f.get("x0"),
        p0=p0_std**2 * np.eye(3),
        dt=f.get("dt"),
    )


def _out(args, name: str) -> Path:
    return Path(args.out_dir) / name


def cmd_simulate(args) -> int:
    cfg = io.load_config(args.config)
    geom, std = io.geometry_from_config(cfg)
    sc = sim_config_from(cfg, geom, std, args.seed)
    run = simulator.simulate(sc, profile_from_config(cfg))
    frames_path, truth_path = _out(args, "frames.csv"), _out(args, "truth.csv")
    io.write_csv(frames_path, io.frames_header(geom.n), np.column_stack([run.t, run.a_hat]))
    io.write_csv(truth_path, io.TRUTH_HEADER, np.column_stack([run.t, np.degrees(run.omega)]))
    io.RunManifest("simulate", io.canonical_hash(cfg), seed=sc.seed, geometry_id=io.geometry_id(geom),
                   inputs=[str(args.config)], outputs=[str(frames_path), str(truth_path)]
                   ).write(_out(args, "manifest_simulate.json"))
    log.info("wrote %d frames to %s", run.t.size, frames_path)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = io.load_config(args.config)
    geom, std = io.geometry_from_config(cfg)
    fcfg = filter_from_config(cfg, geom, std, args.variant)
    t, a = io.read_frames(args.frames)
    if a.shape[1] != 3 * geom.n:
        raise io.SchemaError(f"frames have {a.shape[1] // 3} sensors, config has {geom.n}")
    if fcfg.dt is None and t.size == 1:
        fcfg = ekf.make_filter(geom, fcfg.noise.q, fcfg.variant, fcfg.x0, fcfg.p0,
                               dt=1.0 / cfg.get("simulation", {}).get("sample_rate", 100.0))
    xs, Ps = ekf.filter_arrays(t, a, fcfg)
    pdiag = np.degrees(np.degrees(np.diagonal(Ps, axis1=1, axis2=2))) if t.size else np.zeros((0, 3))
    out = _out(args, "estimates.csv")
    io.write_csv(out, io.ESTIMATE_HEADER, np.column_stack([t, np.degrees(xs), pdiag]))
    io.RunManifest("estimate", io.canonical_hash(cfg), geometry_id=io.geometry_id(geom), variant=fcfg.variant,
                   inputs=[str(args.frames), str(args.config)], outputs=[str(out)]
                   ).write(_out(args, "manifest_estimate.json"))
    return EXIT_OK


def cmd_metrics(args) -> int:
    t_e, w_e = io.read_rates(args.estimates)
    t_t, w_t = io.read_rates(args.truth)
    report = error_report(t_e, w_e, t_t, w_t).to_dict()
    if args.format == "csv":
        rows = ["axis,mean_error,standard_error"]
        rows += [f"{ax},{m:.17g},{s:.17g}" for ax, m, s in zip("xyz", report["mean_error"], report["standard_error"])]
        text = "\n".join(rows) + "\n"
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out_dir:
        io._atomic_write_text(_out(args, f"metrics.{args.format}"), text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = io.load_config(args.config)
    _, std = io.geometry_from_config(cfg)
    base = sim_config_from(cfg, simulator.cube_placement(1.0), float(std[0]), args.seed)
    seeds = cfg.get("simulation", {}).get("seeds") or [base.seed + i for i in range(args.seeds)]
    variant = args.variant or cfg.get("filter", {}).get("variant", "uncorrelated")
    rows = simulator.edge_sweep(args.d, profile_from_config(cfg), base, seeds=seeds, variant=variant)
    table = np.array([[r.d, 1.0 / r.d, *r.stderr] for r in rows]).reshape(-1, 5)
    if args.format == "json":
        io.write_json(_out(args, "sweep.json"), [dict(zip(io.SWEEP_HEADER, map(float, row))) for row in table])
    else:
        io.write_csv(_out(args, "sweep.csv"), io.SWEEP_HEADER, table)
    io.RunManifest("sweep", io.canonical_hash(cfg), seed=base.seed, variant=variant,
                   inputs=[str(args.config)], outputs=[str(_out(args, f"sweep.{args.format}"))]
                   ).write(_out(args, "manifest_sweep.json"))
    return EXIT_OK


def cmd_groundtruth(args) -> int:
    mcfg = io.load_json(args.config, io.MARKERSET_SCHEMA)
    body = np.array(mcfg["body_positions"], dtype=float)
    sigma = np.broadcast_to(np.asarray(mcfg.get("sigma", attitude.DEFAULT_MARKER_SIGMA), dtype=float),
                            (body.shape[0],))
    markers = attitude.MarkerSet.from_sigmas(body, sigma)
    t, world = io.read_markers(args.markers)
    if world.shape[1] != body.shape[0]:
        raise io.SchemaError(f"marker file has {world.shape[1]} markers, config has {body.shape[0]}")
    series = attitude.ground_truth_series(markers, zip(t, world))
    rows = [[tk, *np.degrees(w), *np.degrees(np.degrees(np.diag(p)))] for tk, w, p in series]
    out = _out(args, "groundtruth.csv")
    io.write_csv(out, io.GROUNDTRUTH_HEADER, np.array(rows).reshape(-1, 7))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    groups = io.read_calibration_csv(args.calibration)
    result = {}
    for sensor_id, samples in sorted(groups.items()):
        data = calibration.CalibrationDataset.from_orientations(samples)
        try:
            params = calibration.solve_calibration(data)
        except UnidentifiableError as exc:
            raise UnidentifiableError(f"sensor {sensor_id}: {exc}", exc.rank, exc.orientations) from exc
        result[sensor_id] = params.to_dict()
    io.write_json(_out(args, "calibration.json"), {"sensors": result})
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = io.load_config(args.config)
    geom, _ = io.geometry_from_config(cfg)
    report = geometry.analyze_geometry(geom).to_dict()
    if args.format == "csv":
        sv = report["singular_values"]
        text = ("sigma1,sigma2,sigma3,condition_number,sv_product,rank,noncoplanar\n"
                f"{sv[0]:.17g},{sv[1]:.17g},{sv[2]:.17g},{report['condition_number']},"
                f"{report['sv_product']:.17g},{report['rank']},{str(report['noncoplanar']).lower()}\n")
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    io._atomic_write_text(_out(args, f"analysis.{args.format}"), text)
    sys.stdout.write(text)
    return EXIT_OK if report["noncoplanar"] else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gfimu", description="Gyro-free angular velocity from accelerometer arrays.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True, config_required=True):
        if config:
            sp.add_argument("--config", required=config_required, help="JSON config file")
        sp.add_argument("--out-dir", default=".", help="directory for output files")

    sp = sub.add_parser("simulate", help="synthesize accelerometer frames and truth")
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="run the EKF over a frames CSV")
    sp.add_argument("frames")
    common(sp)
    sp.add_argument("--variant", choices=ekf.VARIANTS)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("metrics", help="mean and standard error of estimates vs truth")
    sp.add_argument("estimates")
    sp.add_argument("truth")
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("sweep", help="standard error vs cube edge length")
    common(sp)
    sp.add_argument("--d", type=float, nargs="+", required=True, help="edge lengths in meters")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--seeds", type=int, default=1, help="Monte Carlo runs per edge length")
    sp.add_argument("--variant", choices=ekf.VARIANTS)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("groundtruth", help="angular velocity from labelled marker positions")
    sp.add_argument("markers")
    common(sp)
    sp.set_defaults(func=cmd_groundtruth)

    sp = sub.add_parser("calibrate", help="least-squares sensitivity and offset per sensor")
    sp.add_argument("calibration")
    common(sp, config=False)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("analyze", help="singular values and conditioning of a placement")
    common(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UnidentifiableError, GeometryDegenerateError, ConditioningError, AmbiguousAttitudeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
