"""File formats: trajectory CSV, segmentation JSON, sample CSV and estimate JSON."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .estimators import KernelEstimate, PartitionEstimate, Samples
from .gait import GaitSegmentation, Trajectory
from .manifold import Partition

AXES = ("x", "y", "z")

SEGMENTATION_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "required": ["t_p", "T_p"],
        "additionalProperties": False,
        "properties": {"t_p": {"type": "number"}, "T_p": {"type": "number", "exclusiveMinimum": 0}},
    },
}


class InputError(ValueError):
    """Malformed input file, located by line and column where possible."""

    def __init__(self, message: str, path: str | Path | None = None,
                 line: int | None = None, column: int | None = None):
        self.path, self.line, self.column = path, line, column
        where = str(path) if path is not None else "<input>"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


def fmt(v: float) -> str:
    """Shortest repr that round-trips a double exactly."""
    return repr(float(v))


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def provenance(inputs: dict[str, str | Path] | None = None, seed: int | None = None,
               **extra: Any) -> dict[str, Any]:
    block: dict[str, Any] = {
        "tool": "phasefit",
        "version": __version__,
        "seed": seed,
        "inputs": {k: file_digest(v) for k, v in sorted((inputs or {}).items())},
    }
    block.update(extra)
    return block


def _parse_header(header: list[str], path) -> list[str]:
    if not header or header[0].strip() != "t":
        raise InputError("first column must be 't'", path, 1, 1)
    names: list[str] = []
    cols = [h.strip() for h in header[1:]]
    i = 0
    while i < len(cols):
        name, sep, axis = cols[i].rpartition("_")
        if not sep or not name or axis not in AXES:
            raise InputError(f"column {cols[i]!r} is not of the form <name>_x|_y|_z", path, 1, i + 2)
        for k, ax in enumerate(AXES):
            want = f"{name}_{ax}"
            if i + k >= len(cols) or cols[i + k] != want:
                raise InputError(f"missing column {want!r}", path, 1, i + k + 2)
        names.append(name)
        i += 3
    if not names:
        raise InputError("no marker columns", path, 1)
    if len(set(names)) != len(names):
        raise InputError("duplicate marker names", path, 1)
    return names


def read_trajectory(path: str | Path) -> Trajectory:
    """Parse ``t,<name>_x,<name>_y,<name>_z,...`` with one row per frame."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(str(exc), path) from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise InputError("empty file", path)
    names = _parse_header(rows[0], path)
    width = 1 + 3 * len(names)
    data = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise InputError(f"expected {width} fields, found {len(row)}", path, ln)
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise InputError(f"non-numeric value {cell!r}", path, ln, col) from None
            if not np.isfinite(v):
                raise InputError(f"non-finite value {cell!r}", path, ln, col)
            vals.append(v)
        data.append(vals)
    if not data:
        raise InputError("no data rows", path)
    arr = np.array(data)
    try:
        return Trajectory(arr[:, 0], arr[:, 1:], tuple(names))
    except ValueError as exc:
        raise InputError(str(exc), path) from None


def write_trajectory(traj: Trajectory, path: str | Path) -> None:
    if traj.dim % 3:
        raise ValueError(f"trajectory files hold x,y,z triplets; dimension {traj.dim} is not a multiple of 3")
    header = ["t"] + [f"{n}_{a}" for n in traj.marker_names for a in AXES]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, row in zip(traj.t, traj.positions):
            w.writerow([fmt(t)] + [fmt(v) for v in row])


def read_segmentation(path: str | Path) -> GaitSegmentation:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, path, exc.lineno, exc.colno) from None
    except OSError as exc:
        raise InputError(str(exc), path) from None
    try:
        jsonschema.validate(doc, SEGMENTATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InputError(f"{exc.json_path}: {exc.message}", path) from None
    try:
        return GaitSegmentation(tuple((d["t_p"], d["T_p"]) for d in doc))
    except ValueError as exc:
        raise InputError(str(exc), path) from None


def write_segmentation(seg: GaitSegmentation, path: str | Path) -> None:
    doc = [{"t_p": tp, "T_p": Tp} for tp, Tp in seg.strides]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def write_samples(samples: Samples, path: str | Path) -> None:
    """Phase-domain samples as CSV: ``s,stride,x0,x1,...``."""
    stride = samples.stride if samples.stride is not None else np.zeros(len(samples), dtype=int)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "stride"] + [f"x{j}" for j in range(samples.dim)])
        for s, k, row in zip(samples.s, stride, samples.x):
            w.writerow([fmt(s), int(k)] + [fmt(v) for v in row])


def read_samples(path: str | Path) -> Samples:
    path = Path(path)
    try:
        rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    except OSError as exc:
        raise InputError(str(exc), path) from None
    if not rows or rows[0][:2] != ["s", "stride"] or len(rows[0]) < 3:
        raise InputError("header must start with 's,stride,x0'", path, 1)
    width = len(rows[0])
    s, st, x = [], [], []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise InputError(f"expected {width} fields, found {len(row)}", path, ln)
        try:
            s.append(float(row[0]))
            st.append(int(row[1]))
            x.append([float(v) for v in row[2:]])
        except ValueError:
            raise InputError("non-numeric value", path, ln) from None
    if not s:
        raise InputError("no data rows", path)
    try:
        return Samples(np.array(s), np.array(x), stride=np.array(st))
    except ValueError as exc:
        raise InputError(str(exc), path) from None


def estimate_to_dict(est, prov: dict[str, Any] | None = None) -> dict[str, Any]:
    if isinstance(est, PartitionEstimate):
        doc = {
            "kind": "partition",
            "level": est.partition.level,
            "representatives": est.partition.representatives.tolist(),
            "coeffs": est.coeffs.tolist(),
            "counts": est.counts.tolist(),
            "fills": [list(f) for f in est.fills],
        }
    elif isinstance(est, KernelEstimate):
        doc = {
            "kind": "kernel",
            "centers": est.centers.tolist(),
            "beta": est.beta,
            "lambda": est.lam,
            "metric": est.metric,
            "condition": est.condition,
            "coeffs": est.coeffs.tolist(),
        }
    else:
        raise TypeError(f"cannot serialize {type(est).__name__}")
    doc["provenance"] = prov or provenance()
    return doc


def estimate_from_dict(doc: dict[str, Any]):
    kind = doc.get("kind")
    coeffs = np.array(doc["coeffs"], dtype=float)
    if coeffs.ndim != 2:
        raise ValueError("coeffs must be a 2-d table")
    if kind == "partition":
        p = Partition(int(doc["level"]), np.array(doc["representatives"], dtype=float))
        return PartitionEstimate(p, coeffs, np.array(doc["counts"], dtype=np.int64),
                                 tuple((int(a), int(b)) for a, b in doc.get("fills", [])))
    if kind == "kernel":
        return KernelEstimate(np.array(doc["centers"], dtype=float), float(doc["beta"]),
                              float(doc["lambda"]), coeffs, doc.get("metric", "chordal"),
                              float(doc.get("condition", float("nan"))))
    raise ValueError(f"unknown estimate kind {kind!r}")


def save_estimate(est, path: str | Path, prov: dict[str, Any] | None = None) -> None:
    doc = estimate_to_dict(est, prov)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_estimate(path: str | Path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, path, exc.lineno, exc.colno) from None
    except OSError as exc:
        raise InputError(str(exc), path) from None
    try:
        return estimate_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid estimate: {exc}", path) from None
