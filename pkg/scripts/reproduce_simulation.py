"""Monte Carlo standard-error tables for the static and dynamic cube scenarios.

    python3 scripts/reproduce_simulation.py --seeds 20
"""

import argparse
import json
import time

import numpy as np

from gfimu.ekf import filter_arrays, make_filter
from gfimu.geometry import noise_covariance
from gfimu.metrics import error_stats
from gfimu.simulator import SimulationConfig, cube_placement, simulate, sinusoidal_trajectory, static_trajectory

REFERENCE = {
    ("dynamic", "uncorrelated"): [1.14, 1.05, 0.97],
    ("dynamic", "correlated"): [1.20, 1.08, 1.01],
    ("static", "uncorrelated"): [2.85, 2.66, 2.25],
}


def stderr(scenario, variant, seeds, d, noise, duration):
    geom = cube_placement(d)
    prof = sinusoidal_trajectory() if scenario == "dynamic" else static_trajectory()
    cfg = make_filter(geom, noise_covariance(noise, geom.n), variant, dt=0.01)
    out = []
    for seed in seeds:
        run = simulate(SimulationConfig(geom, noise, 100.0, duration, seed), prof)
        xs, _ = filter_arrays(run.t, run.a_hat, cfg)
        out.append(error_stats(np.degrees(xs), np.degrees(run.omega))[1])
    return np.array(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--d", type=float, default=0.1)
    ap.add_argument("--noise", type=float, default=0.02)
    ap.add_argument("--duration", type=float, default=100.0)
    ap.add_argument("--json", help="also write the table here")
    args = ap.parse_args()

    seeds = range(args.seeds)
    table = []
    print(f"{'scenario':9} {'variant':13} {'x':>6} {'y':>6} {'z':>6} {'mean':>6}   reference")
    for scenario, variant in [("dynamic", "uncorrelated"), ("dynamic", "correlated"),
                              ("static", "uncorrelated"), ("static", "correlated")]:
        t0 = time.perf_counter()
        se = stderr(scenario, variant, seeds, args.d, args.noise, args.duration)
        m = se.mean(axis=0)
        ref = REFERENCE.get((scenario, variant))
        print(f"{scenario:9} {variant:13} {m[0]:6.3f} {m[1]:6.3f} {m[2]:6.3f} {m.mean():6.3f}   "
              f"{ref if ref else '-'}  ({time.perf_counter() - t0:.1f} s)")
        table.append({"scenario": scenario, "variant": variant, "stderr": m.tolist(),
                      "stderr_seed_std": se.std(axis=0).tolist(), "seeds": args.seeds})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(table, fh, indent=2)


if __name__ == "__main__":
    main()
