"""Synthetic inputs for the groundtruth and calibrate subcommands.

Writes a marker trajectory for a constant body-rate spin and a six-orientation
calibration log for a few sensors with random sensitivity and offset.

    python3 scripts/make_synthetic_inputs.py --out-dir data
"""

import argparse
from pathlib import Path

import numpy as np

from gfimu.calibration import synthetic_dataset
from gfimu.io import marker_header, write_csv
from gfimu.simulator import cube_marker_set, spin_markers


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default=".")
    ap.add_argument("--omega", type=float, nargs=3, default=[0.2, -0.4, 1.0], help="body rate, rad/s")
    ap.add_argument("--rate", type=float, default=100.0, help="marker frame rate, Hz")
    ap.add_argument("--duration", type=float, default=10.0)
    ap.add_argument("--marker-noise", type=float, default=0.0005, help="m")
    ap.add_argument("--sensors", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    body = cube_marker_set(0.1)
    t = np.arange(int(round(args.duration * args.rate))) / args.rate
    world = spin_markers(body, args.omega, t, translation_fn=lambda s: np.outer(np.sin(s), [0.5, 0.2, 0.0]),
                         noise_std=args.marker_noise, seed=args.seed)
    write_csv(out / "markers.csv", marker_header(body.shape[0]), np.column_stack([t, world.reshape(t.size, -1)]))

    rng = np.random.default_rng(args.seed)
    lines = ["sensor_id,orientation,vx,vy,vz"]
    for i in range(args.sensors):
        s = np.eye(3) * rng.uniform(0.9, 1.1) + 0.02 * rng.normal(size=(3, 3))
        o = 0.1 * rng.normal(size=3)
        data = synthetic_dataset(s, o, samples_per_orientation=500, noise_std=0.02, seed=args.seed + i)
        lines += [f"s{i + 1},{lab},{v[0]:.17g},{v[1]:.17g},{v[2]:.17g}" for lab, v in zip(data.labels, data.raw)]
    (out / "calibration.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'markers.csv'} and {out / 'calibration.csv'}")


if __name__ == "__main__":
    main()
