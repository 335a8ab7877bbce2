"""File formats: JSON configs and reports, CSV time series.

All CSVs carry a header row and use ``.`` decimals. Rates are written in deg/s
and their variances in (deg/s)^2; accelerations in m/s^2. Writes go to a
temporary file in the target directory and are renamed into place.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError
from .geometry import SensorArrayGeometry
from .simulator import cube_placement

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_STD = {"oneOf": [{"type": "number", "minimum": 0}, {"type": "array", "items": {"type": "number", "minimum": 0}}]}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["geometry"],
    "properties": {
        "geometry": {
            "type": "object",
            "properties": {
                "positions": {"type": "array", "items": _VEC3, "minItems": 2},
                "cube_edge": {"type": "number", "exclusiveMinimum": 0},
                "noise_std": _STD,
                "name": {"type": "string"},
            },
            "oneOf": [{"required": ["positions"]}, {"required": ["cube_edge"]}],
        },
        "simulation": {
            "type": "object",
            "properties": {
                "scenario": {"enum": ["dynamic", "static"]},
                "sample_rate": {"type": "number", "exclusiveMinimum": 0},
                "duration": {"type": "number", "minimum": 0},
                "seed": {"type": "integer"},
                "gravity": {"type": "number"},
                "linear_accel_amplitude": {"type": "number", "minimum": 0},
                "linear_accel_frequency": {"type": "number", "exclusiveMinimum": 0},
                "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
            },
        },
        "filter": {
            "type": "object",
            "properties": {
                "variant": {"enum": ["uncorrelated", "correlated"]},
                "x0": _VEC3,
                "p0_std": {"type": "number", "exclusiveMinimum": 0},
                "dt": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
    },
}

MARKERSET_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["body_positions"],
    "properties": {
        "body_positions": {"type": "array", "items": _VEC3, "minItems": 3},
        "sigma": {"oneOf": [{"type": "number", "exclusiveMinimum": 0},
                            {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}}]},
    },
}


class SchemaError(InputError):
    pass


def load_json(path: str | os.PathLike, schema: dict | None = None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    if schema is not None:
        try:
            jsonschema.validate(data, schema)
        except jsonschema.ValidationError as exc:
            loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise SchemaError(f"{path}: {loc}: {exc.message}") from exc
    return data


def load_config(path: str | os.PathLike) -> dict:
    return load_json(path, CONFIG_SCHEMA)


def geometry_from_config(cfg: dict) -> tuple[SensorArrayGeometry, NDArray[np.float64]]:
    """Geometry plus per-sensor noise std (m/s^2) from the ``geometry`` block."""
    g = cfg["geometry"]
    if "cube_edge" in g:
        geom = cube_placement(g["cube_edge"])
    else:
        geom = SensorArrayGeometry(np.array(g["positions"], dtype=float), name=g.get("name", "custom"))
    std = np.asarray(g.get("noise_std", 0.02), dtype=float)
    if std.ndim == 1 and std.size != geom.n:
        raise SchemaError(f"noise_std has {std.size} entries for {geom.n} sensors")
    return geom, np.broadcast_to(std, (geom.n,)).copy()


def canonical_hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def geometry_id(geom: SensorArrayGeometry) -> str:
    return hashlib.sha256(np.ascontiguousarray(geom.positions).tobytes()).hexdigest()[:12]


def _atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str | os.PathLike, data: Any) -> None:
    _atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: ArrayLike) -> None:
    rows = np.asarray(rows, dtype=float).reshape(-1, len(header))
    lines = [",".join(header)]
    lines.extend(",".join(f"{v:.17g}" for v in row) for row in rows)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path: str | os.PathLike, expect_prefix: str | None = None) -> tuple[list[str], NDArray[np.float64]]:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline().strip()
        if not header_line:
            raise SchemaError(f"{path}: missing header row")
        header = [h.strip() for h in header_line.split(",")]
        if expect_prefix is not None and header[0] != expect_prefix:
            raise SchemaError(f"{path}: first column must be {expect_prefix!r}, got {header[0]!r}")
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    if data.size == 0:
        data = np.zeros((0, len(header)))
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: rows have {data.shape[1]} columns, header has {len(header)}")
    return header, data


def frames_header(n: int) -> list[str]:
    return ["t"] + [f"a{i}{ax}" for i in range(1, n + 1) for ax in "xyz"]


def marker_header(m: int) -> list[str]:
    return ["t"] + [f"m{i}{ax}" for i in range(1, m + 1) for ax in "xyz"]


TRUTH_HEADER = ["t", "wx", "wy", "wz"]
ESTIMATE_HEADER = ["t", "wx", "wy", "wz", "Pxx", "Pyy", "Pzz"]
GROUNDTRUTH_HEADER = ["t", "wx", "wy", "wz", "Pwxx", "Pwyy", "Pwzz"]
SWEEP_HEADER = ["d", "inv_d", "stderr_x", "stderr_y", "stderr_z"]


def read_frames(path: str | os.PathLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    header, data = read_csv(path, expect_prefix="t")
    n_acc = len(header) - 1
    if n_acc % 3 or header != frames_header(n_acc // 3):
        raise SchemaError(f"{path}: expected header t,a1x,a1y,a1z,...; got {','.join(header)}")
    return data[:, 0], data[:, 1:]


def read_rates(path: str | os.PathLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Time and (K, 3) rates from a truth, estimate or ground-truth CSV."""
    header, data = read_csv(path, expect_prefix="t")
    if header[1:4] != ["wx", "wy", "wz"]:
        raise SchemaError(f"{path}: expected columns t,wx,wy,wz")
    return data[:, 0], data[:, 1:4]


def read_markers(path: str | os.PathLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    header, data = read_csv(path, expect_prefix="t")
    n = len(header) - 1
    if n % 3 or header != marker_header(n // 3):
        raise SchemaError(f"{path}: expected header t,m1x,m1y,m1z,...")
    return data[:, 0], data[:, 1:].reshape(data.shape[0], n // 3, 3)


def read_calibration_csv(path: str | os.PathLike) -> dict[str, list[tuple[str, NDArray[np.float64]]]]:
    """Rows ``sensor_id,orientation,vx,vy,vz`` grouped by sensor id."""
    import csv

    out: dict[str, list[tuple[str, NDArray[np.float64]]]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["sensor_id", "orientation", "vx", "vy", "vz"]:
            raise SchemaError(f"{path}: expected header sensor_id,orientation,vx,vy,vz")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise SchemaError(f"{path}:{lineno}: expected 5 fields")
            try:
                v = np.array([float(x) for x in row[2:]])
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
            out.setdefault(row[0].strip(), []).append((row[1].strip(), v))
    return out


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int | None = None
    geometry_id: str | None = None
    variant: str | None = None
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    def write(self, path: str | os.PathLike) -> None:
        write_json(path, asdict(self))
