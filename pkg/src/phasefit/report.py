"""CSV tables and SVG plots for experiment results.

Output bytes depend only on the report: floats are written with ``repr``,
SVG metadata carries no date and element ids are salted with a constant.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import BetaSweep, CenterSweep, EnvelopeFit, RateReport  # noqa: E402

_RC = {"svg.hashsalt": "phasefit", "svg.fonttype": "none", "path.simplify": False}
RATE_HEADER = ["n", "m", "mean_sq_err", "se", "mean_err"]


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    return v


def write_json(path: Path, doc: dict[str, Any]) -> Path:
    try:
        path.write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _save_svg(fig, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "phasefit"})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)
    return path


def _envelope_doc(env: EnvelopeFit | None) -> dict[str, Any] | None:
    if env is None:
        return None
    return {"statistic": env.statistic, "c1": env.c1, "c2": env.c2, "rate": env.rate,
            "max_holdout_ratio": env.max_holdout_ratio, "factor": env.factor, "holds": env.holds}


def rate_rows(report: RateReport):
    for i, n in enumerate(report.levels):
        for j, m in enumerate(report.ms):
            yield [n, m, report.mean_sq_err[i, j], report.se_sq_err[i, j], report.mean_err[i, j]]


def emit_rate(report: RateReport, out: Path, provenance: dict[str, Any] | None = None) -> list[Path]:
    paths = [write_csv(out / "rate.csv", RATE_HEADER, rate_rows(report))]
    detail = (
        [n, m, report.se_err[i, j], report.mean_var[i, j], report.se_var[i, j],
         report.bias_sq[i], report.failed[i, j]]
        for i, n in enumerate(report.levels) for j, m in enumerate(report.ms)
    )
    paths.append(write_csv(out / "rate_detail.csv",
                           ["n", "m", "se_err", "mean_var_sq", "se_var_sq", "bias_sq", "failed"], detail))
    paths.append(write_json(out / "rate_summary.json", {
        "trials": report.trials, "rate": report.rate,
        "bias_slope": report.bias_slope, "variance_slope": report.variance_slope,
        "envelope": _envelope_doc(report.envelope),
        "envelope_squared": _envelope_doc(report.envelope_sq),
        "provenance": provenance,
    }))
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(1, 2, figsize=(9, 4))
        N = report.n_cells
        for j, m in enumerate(report.ms):
            ax[0].loglog(N, report.mean_err[:, j], "o-", label=f"m={m}")
        ax[0].set_xlabel("N(n)")
        ax[0].set_ylabel("mean L2 error")
        ax[0].legend(fontsize=7)
        for i, n in enumerate(report.levels):
            ax[1].loglog(report.ms, report.mean_var[i, :], "s-", label=f"n={n}")
        ax[1].set_xlabel("m")
        ax[1].set_ylabel("variance component")
        ax[1].legend(fontsize=7)
        fig.tight_layout()
        paths.append(_save_svg(fig, out / "rate.svg"))
    return paths


def emit_center_sweep(sweep: CenterSweep, out: Path, provenance: dict[str, Any] | None = None) -> list[Path]:
    cols = ["n", "N", "m", "risk_partition", "risk_kernel", "l2_partition", "l2_kernel",
            "bias", "sup_bias", "sup_gap", "condition", "empty_cells", "kernel_error"]
    paths = [write_csv(out / "center_sweep.csv", cols, ([r[c] for c in cols] for r in sweep.rows))]
    counts = ([n, k, int(c)] for n, cs in sweep.counts.items() for k, c in enumerate(cs))
    paths.append(write_csv(out / "center_counts.csv", ["n", "cell", "count"], counts))
    overlay = []
    for n in sweep.partition_values:
        pv, kv = sweep.partition_values[n], sweep.kernel_values[n]
        for g, a, b in zip(sweep.grid, pv, kv):
            overlay.append([n, g, *a, *b])
    d = next(iter(sweep.partition_values.values())).shape[1]
    paths.append(write_csv(out / "center_overlay.csv",
                           ["n", "s"] + [f"partition_x{j}" for j in range(d)] + [f"kernel_x{j}" for j in range(d)],
                           overlay))
    if provenance is not None:
        paths.append(write_json(out / "center_sweep_provenance.json", {"provenance": provenance}))
    with plt.rc_context(_RC):
        levels = list(sweep.partition_values)
        fig, axes = plt.subplots(len(levels), 1, figsize=(7, 2.2 * len(levels)), squeeze=False)
        for ax, n in zip(axes[:, 0], levels):
            ax.plot(sweep.grid, sweep.partition_values[n][:, 0], label="partition")
            ax.plot(sweep.grid, sweep.kernel_values[n][:, 0], label="kernel")
            ax.set_ylabel(f"n={n}")
        axes[0, 0].legend(fontsize=7)
        axes[-1, 0].set_xlabel("phase s")
        fig.tight_layout()
        paths.append(_save_svg(fig, out / "center_sweep.svg"))
    return paths


def emit_beta_sweep(sweep: BetaSweep, out: Path, provenance: dict[str, Any] | None = None) -> list[Path]:
    cols = ["beta", "centers", "risk", "condition", "gram_condition", "total_variation", "error"]
    paths = [write_csv(out / "beta_sweep.csv", cols, ([r[c] for c in cols] for r in sweep.rows))]
    if provenance is not None:
        paths.append(write_json(out / "beta_sweep_provenance.json", {"provenance": provenance}))
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4))
        for beta, v in sweep.values.items():
            ax.plot(sweep.grid, v[:, 0], label=f"beta={beta:g}")
        ax.plot(sweep.centers, np.zeros_like(sweep.centers), "k+", label="centers")
        ax.set_xlabel("phase s")
        ax.legend(fontsize=7)
        fig.tight_layout()
        paths.append(_save_svg(fig, out / "beta_sweep.svg"))
    return paths


def emit_report(report, out_dir: str | Path, provenance: dict[str, Any] | None = None) -> list[Path]:
    """Write the CSV/JSON/SVG files for a rate report or sweep; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror or exc}") from exc
    if isinstance(report, RateReport):
        return emit_rate(report, out, provenance)
    if isinstance(report, CenterSweep):
        return emit_center_sweep(report, out, provenance)
    if isinstance(report, BetaSweep):
        return emit_beta_sweep(report, out, provenance)
    raise TypeError(f"no emitter for {type(report).__name__}")
