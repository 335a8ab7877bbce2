"""Standard error against cube edge length, with a least-squares line in 1/d.

    python3 scripts/edge_sweep.py --seeds 5 --out sweep.csv
"""

import argparse

import numpy as np

from gfimu.io import SWEEP_HEADER, write_csv
from gfimu.simulator import SimulationConfig, cube_placement, edge_sweep, sinusoidal_trajectory, static_trajectory


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--d", type=float, nargs="+", default=[0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--scenario", choices=("dynamic", "static"), default="dynamic")
    ap.add_argument("--variant", choices=("uncorrelated", "correlated"), default="uncorrelated")
    ap.add_argument("--duration", type=float, default=100.0)
    ap.add_argument("--out")
    args = ap.parse_args()

    prof = sinusoidal_trajectory() if args.scenario == "dynamic" else static_trajectory()
    base = SimulationConfig(cube_placement(1.0), noise_std=0.02, duration=args.duration)
    rows = edge_sweep(args.d, prof, base, seeds=range(args.seeds), variant=args.variant)
    table = np.array([[r.d, 1 / r.d, *r.stderr] for r in rows])
    for row in table:
        print("d={:<6g} 1/d={:<6.2f} stderr={:.3f} {:.3f} {:.3f}".format(*row))

    x, y = table[:, 1], table[:, 2:].mean(axis=1)
    slope, icpt = np.polyfit(x, y, 1)
    r2 = 1 - np.sum((y - slope * x - icpt) ** 2) / np.sum((y - y.mean()) ** 2)
    print(f"fit: stderr = {slope:.4f} / d + {icpt:.4f}   R^2 = {r2:.4f}")
    if args.out:
        write_csv(args.out, SWEEP_HEADER, table)


if __name__ == "__main__":
    main()
