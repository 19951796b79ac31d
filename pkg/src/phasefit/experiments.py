"""Monte-Carlo studies on synthetic regressors.

* :func:`run_rate_study` measures the ``L^2_mu`` error of the partition
  estimator over a grid of levels ``n`` and sample counts ``m`` and fits the
  bias slope (error vs ``N`` at the largest ``m``), the variance slope
  (variance component vs ``m`` at the smallest ``n``) and the envelope
  ``C1 N^-r + C2 N log N / m``.
* :func:`run_center_sweep` fits both estimators for several center counts on
  one shared dataset.
* :func:`run_beta_sweep` fits the kernel estimator at 16 centers (by default)
  for a grid of ``beta``.

Every trial draws from its own seed stream keyed by ``(seed, n, m, trial)``,
and aggregates use exactly rounded sums, so results do not depend on the
execution order or the number of worker processes.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import jsonschema
import numpy as np
from scipy.optimize import nnls

from .estimators import (
    Samples,
    SingularSystemError,
    empirical_risk,
    estimate_approx_rate,
    fit_kernel,
    fit_partition,
    gram_condition,
    l2_error,
    l2_error_sq,
    piecewise,
    project_l2,
)
from .manifold import Measure, Partition, Quadrature, default_quadrature
from .synth import (
    AnalyticCurve,
    NoiseModel,
    measure_from_dict,
    noise_from_dict,
    sample_dataset,
)

GRID_SIZE = 4096
ENVELOPE_FACTOR = 1.25

_pos_int_list = {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["curve", "levels", "samples"],
    "additionalProperties": False,
    "properties": {
        "curve": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["fourier", "sawtooth", "step"]},
                "coeffs": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "slope": {"type": "number"},
                "dim": {"type": "integer", "minimum": 1},
                "jumps": {"type": "array", "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}},
                "levels": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            },
        },
        "measure": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["uniform", "von_mises"]},
                "mu": {"type": "number"},
                "kappa": {"type": "number", "minimum": 0},
            },
        },
        "noise": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["none", "gaussian"]},
                "sigma": {"type": "number", "minimum": 0},
            },
        },
        "levels": {"type": "array", "minItems": 1,
                   "items": {"type": "integer", "minimum": 0, "maximum": 20}},
        "samples": _pos_int_list,
        "betas": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        "lambda": {"type": "number", "minimum": 0},
        "metric": {"enum": ["chordal", "geodesic"]},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "quadrature": {"type": "integer", "minimum": 2},
        "rate": {"type": "number", "exclusiveMinimum": 0},
        "center_level": {"type": "integer", "minimum": 0, "maximum": 20},
        "sweep_samples": {"type": "integer", "minimum": 1},
        "workers": {"type": "integer", "minimum": 1},
    },
}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``path`` locates the offending entry."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    curve: AnalyticCurve
    levels: tuple[int, ...]
    samples: tuple[int, ...]
    measure: Measure = field(default_factory=Measure.uniform)
    noise: NoiseModel = field(default_factory=NoiseModel.none)
    betas: tuple[float, ...] = (25.0,)
    lam: float = 0.0
    metric: str = "chordal"
    trials: int = 50
    seed: int = 0
    quadrature: int | None = None
    rate: float | None = None
    center_level: int = 4
    sweep_samples: int | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.levels or not self.samples or not self.betas:
            raise ConfigError("levels, samples and betas must be nonempty")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1", "$.trials")

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ExperimentConfig":
        try:
            jsonschema.validate(doc, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(exc.message, exc.json_path) from None
        try:
            curve = AnalyticCurve.from_dict(doc["curve"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc), "$.curve") from None
        return cls(
            curve=curve,
            levels=tuple(doc["levels"]),
            samples=tuple(doc["samples"]),
            measure=measure_from_dict(doc.get("measure", {})),
            noise=noise_from_dict(doc.get("noise", {})),
            betas=tuple(float(b) for b in doc.get("betas", [25.0])),
            lam=float(doc.get("lambda", 0.0)),
            metric=doc.get("metric", "chordal"),
            trials=doc.get("trials", 50),
            seed=doc.get("seed", 0),
            quadrature=doc.get("quadrature"),
            rate=doc.get("rate"),
            center_level=doc.get("center_level", 4),
            sweep_samples=doc.get("sweep_samples"),
            workers=doc.get("workers", 1),
        )

    def quad_for(self, level: int) -> Quadrature:
        if self.quadrature is not None:
            return Quadrature(self.quadrature)
        return default_quadrature(level)


def trial_seed(seed: int, level: int, m: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(level, m, trial))


def _fsum_stats(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error with exactly rounded (order-free) sums."""
    v = list(values)
    k = len(v)
    if k == 0:
        return float("nan"), float("nan")
    mean = math.fsum(v) / k
    if k == 1:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in v) / (k - 1)
    return mean, math.sqrt(var / k)


def _rate_trial(args):
    curve, measure, noise, level, m, seed, quad, proj = args
    p = Partition(level)
    data = sample_dataset(curve, measure, noise, m, seed)
    try:
        est = fit_partition(data, p)
    except (ValueError, np.linalg.LinAlgError):
        return None
    err_sq = l2_error_sq(curve, est, measure, quad)
    mass = measure.cell_masses(p, quad)
    gap = proj - est.coeffs
    var_sq = float(np.dot(mass, np.sum(gap * gap, axis=1)))
    return err_sq, var_sq


@dataclass(frozen=True)
class EnvelopeFit:
    """``C1 * N**-r + C2 * N log N / m`` fitted on a checkerboard half of the grid."""

    c1: float
    c2: float
    rate: float
    statistic: str
    train: np.ndarray
    ratios: np.ndarray
    factor: float = ENVELOPE_FACTOR

    def predict(self, N, m):
        N = np.asarray(N, dtype=float)
        bias = np.zeros_like(N) if math.isinf(self.rate) else N ** (-self.rate)
        return self.c1 * bias + self.c2 * N * np.log(N) / np.asarray(m, dtype=float)

    @property
    def max_holdout_ratio(self) -> float:
        return float(np.max(self.ratios[~self.train]))

    @property
    def holds(self) -> bool:
        return self.max_holdout_ratio <= self.factor


def fit_bound_envelope(levels: Sequence[int], ms: Sequence[int], values: np.ndarray, rate: float,
                       statistic: str = "unsquared") -> EnvelopeFit:
    """Nonnegative least squares for ``C1, C2``, relative residuals, on cells with ``(i+j)`` even.

    ``ratios`` holds ``measured / predicted`` over the whole grid; the
    envelope holds when every held-out ratio is at most 1.25.
    """
    N = (2.0 ** np.asarray(levels, dtype=float))[:, None] * np.ones((1, len(ms)))
    M = np.ones((len(levels), 1)) * np.asarray(ms, dtype=float)[None, :]
    values = np.asarray(values, dtype=float)
    ii, jj = np.indices(values.shape)
    train = (ii + jj) % 2 == 0
    bias = np.zeros_like(N) if math.isinf(rate) else N ** (-rate)
    A = np.stack([bias, N * np.log(N) / M], axis=-1)
    w = 1.0 / np.maximum(values[train], np.finfo(float).tiny)
    (c1, c2), _ = nnls(A[train] * w[:, None], values[train] * w)
    pred = A @ np.array([c1, c2])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(pred > 0, values / pred, np.inf)
    return EnvelopeFit(float(c1), float(c2), float(rate), statistic, train, ratios)


def _slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


@dataclass
class RateReport:
    """Aggregates over trials, indexed ``[level, m]``."""

    levels: tuple[int, ...]
    ms: tuple[int, ...]
    trials: int
    mean_sq_err: np.ndarray
    se_sq_err: np.ndarray
    mean_err: np.ndarray
    se_err: np.ndarray
    mean_var: np.ndarray
    se_var: np.ndarray
    bias_sq: np.ndarray
    failed: np.ndarray
    rate: float
    bias_slope: float
    variance_slope: float
    envelope: EnvelopeFit | None = None
    envelope_sq: EnvelopeFit | None = None

    @property
    def n_cells(self) -> np.ndarray:
        return 2 ** np.asarray(self.levels)


def run_rate_study(cfg: ExperimentConfig) -> RateReport:
    """Partition-estimator error over the ``(n, m)`` grid, ``cfg.trials`` trials per cell.

    Per trial the squared error ``||gamma - gamma_nm||^2`` and its variance
    component ``||Pi_n gamma - gamma_nm||^2`` are measured under the true
    measure; their difference is the exact squared projection error.
    Failed fits are excluded and counted in ``failed``.
    """
    curve, measure = cfg.curve, cfg.measure
    if not measure.is_analytic:
        raise ConfigError("rate studies need an analytic sampling measure", "$.measure")
    if cfg.rate is not None:
        rate = float(cfg.rate)
    else:
        lv = sorted(set(cfg.levels))
        if len(lv) < 3:
            lv = list(range(3, 9))
        rate = estimate_approx_rate(curve, lv, measure).rate

    shape = (len(cfg.levels), len(cfg.samples))
    out = {k: np.zeros(shape) for k in ("msq", "ssq", "me", "se", "mv", "sv")}
    failed = np.zeros(shape, dtype=np.int64)
    bias_sq = np.zeros(len(cfg.levels))
    jobs, where = [], []
    for i, n in enumerate(cfg.levels):
        quad = cfg.quad_for(n)
        p = Partition(n)
        proj = project_l2(curve, p, measure, quad)
        bias_sq[i] = l2_error_sq(curve, piecewise(p, proj), measure, quad)
        for j, m in enumerate(cfg.samples):
            for t in range(cfg.trials):
                jobs.append((curve, measure, cfg.noise, n, m, trial_seed(cfg.seed, n, m, t), quad, proj))
                where.append((i, j))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_rate_trial, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        results = [_rate_trial(a) for a in jobs]

    cells: dict[tuple[int, int], list] = {}
    for key, res in zip(where, results):
        cells.setdefault(key, []).append(res)
    for (i, j), res in cells.items():
        good = [r for r in res if r is not None]
        failed[i, j] = len(res) - len(good)
        sq = [r[0] for r in good]
        out["msq"][i, j], out["ssq"][i, j] = _fsum_stats(sq)
        out["me"][i, j], out["se"][i, j] = _fsum_stats([math.sqrt(v) for v in sq])
        out["mv"][i, j], out["sv"][i, j] = _fsum_stats([r[1] for r in good])

    N = 2.0 ** np.asarray(cfg.levels, dtype=float)
    jmax = int(np.argmax(cfg.samples))
    imin = int(np.argmin(cfg.levels))
    report = RateReport(
        levels=tuple(cfg.levels), ms=tuple(cfg.samples), trials=cfg.trials,
        mean_sq_err=out["msq"], se_sq_err=out["ssq"], mean_err=out["me"], se_err=out["se"],
        mean_var=out["mv"], se_var=out["sv"], bias_sq=bias_sq, failed=failed, rate=rate,
        bias_slope=_slope(N, out["me"][:, jmax]),
        variance_slope=_slope(cfg.samples, out["mv"][imin, :]),
    )
    if shape[0] >= 2 and shape[1] >= 2 and np.all(failed == 0):
        report.envelope = fit_bound_envelope(cfg.levels, cfg.samples, out["me"], rate, "unsquared")
        report.envelope_sq = fit_bound_envelope(cfg.levels, cfg.samples, out["msq"], 2 * rate, "squared")
    return report


def dense_grid(size: int = GRID_SIZE) -> np.ndarray:
    return np.arange(size) / size


def total_variation(values: np.ndarray) -> float:
    """Discrete periodic total variation, summed over coordinates."""
    v = np.asarray(values, dtype=float).reshape(len(values), -1)
    return float(np.sum(np.abs(np.diff(np.vstack([v, v[:1]]), axis=0))))


def _sweep_data(cfg: ExperimentConfig, samples: Samples | None) -> Samples:
    if samples is not None:
        return samples
    m = cfg.sweep_samples or max(cfg.samples)
    return sample_dataset(cfg.curve, cfg.measure, cfg.noise, m, np.random.SeedSequence(cfg.seed))


@dataclass
class CenterSweep:
    rows: list[dict[str, Any]]
    counts: dict[int, np.ndarray]
    grid: np.ndarray
    partition_values: dict[int, np.ndarray]
    kernel_values: dict[int, np.ndarray]


def run_center_sweep(cfg: ExperimentConfig, samples: Samples | None = None,
                     synthetic: bool = True) -> CenterSweep:
    """Fit both estimators at every level on one shared dataset.

    Kernel centers are the partition representatives and ``beta`` is
    ``cfg.betas[0]``. With ``synthetic`` the analytic curve is the truth for
    ``L^2`` errors and biases; otherwise those columns are NaN.
    """
    data = _sweep_data(cfg, samples)
    beta = cfg.betas[0]
    grid = dense_grid()
    rows, counts, pv, kv = [], {}, {}, {}
    for n in cfg.levels:
        p = Partition(n)
        quad = cfg.quad_for(n)
        pest = fit_partition(data, p)
        counts[n] = np.asarray(pest.counts)
        pv[n] = pest(grid)
        row: dict[str, Any] = {
            "n": n, "N": p.n_cells, "m": len(data),
            "risk_partition": empirical_risk(pest, data),
            "empty_cells": len(pest.fills),
        }
        try:
            kest = fit_kernel(data, p.representatives, beta, cfg.lam, cfg.metric)
            kv[n] = kest(grid)
            row.update(risk_kernel=empirical_risk(kest, data), condition=kest.condition,
                       sup_gap=float(np.max(np.abs(pv[n] - kv[n]))), kernel_error="")
        except (SingularSystemError, ValueError) as exc:
            kest = None
            kv[n] = np.full_like(pv[n], np.nan)
            row.update(risk_kernel=float("nan"), condition=getattr(exc, "condition", float("nan")),
                       sup_gap=float("nan"), kernel_error=str(exc))
        if synthetic:
            truth = cfg.curve
            proj = piecewise(p, project_l2(truth, p, cfg.measure, quad))
            row["l2_partition"] = l2_error(truth, pest, cfg.measure, quad)
            row["l2_kernel"] = l2_error(truth, kest, cfg.measure, quad) if kest else float("nan")
            row["bias"] = l2_error(truth, proj, cfg.measure, quad)
            row["sup_bias"] = float(np.max(np.abs(truth(grid) - proj(grid))))
        else:
            for k in ("l2_partition", "l2_kernel", "bias", "sup_bias"):
                row[k] = float("nan")
        rows.append(row)
    return CenterSweep(rows, counts, grid, pv, kv)


@dataclass
class BetaSweep:
    rows: list[dict[str, Any]]
    grid: np.ndarray
    values: dict[float, np.ndarray]
    centers: np.ndarray


def run_beta_sweep(cfg: ExperimentConfig, samples: Samples | None = None) -> BetaSweep:
    """Kernel fits at ``2**cfg.center_level`` equispaced centers for each ``beta``.

    Singular solves are recorded in the ``error`` column rather than raised.
    """
    data = _sweep_data(cfg, samples)
    centers = Partition(cfg.center_level).representatives
    grid = dense_grid()
    rows, values = [], {}
    for beta in cfg.betas:
        row: dict[str, Any] = {"beta": beta, "centers": centers.size,
                               "gram_condition": gram_condition(centers, beta, cfg.metric)}
        try:
            est = fit_kernel(data, centers, beta, cfg.lam, cfg.metric)
            values[beta] = est(grid)
            row.update(risk=empirical_risk(est, data), condition=est.condition,
                       total_variation=total_variation(values[beta]), error="")
        except SingularSystemError as exc:
            values[beta] = np.full((grid.size, data.dim), np.nan)
            row.update(risk=float("nan"), condition=exc.condition,
                       total_variation=float("nan"), error=str(exc))
        rows.append(row)
    return BetaSweep(rows, grid, values, np.asarray(centers))


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)
