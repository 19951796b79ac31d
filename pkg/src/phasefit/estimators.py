"""Empirical-risk minimizers over the phase circle.

Two approximant families are supported:

* piecewise constants on a dyadic partition, whose minimizer is the table of
  per-cell sample means (:func:`fit_partition`);
* spans of Gaussian-type kernels ``exp(-beta * dist(center, s)**2)`` centred at
  a fixed set of phases, fit by (optionally ridge-regularized) least squares
  (:func:`fit_kernel`).

Any callable mapping an array of phases of shape ``(k,)`` to values of shape
``(k, d)`` is accepted wherever a curve is expected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .manifold import (
    Measure,
    Partition,
    Quadrature,
    default_quadrature,
    geodesic_distance,
    pairwise_distance,
    wrap_phase,
)

Curve = Callable[[np.ndarray], np.ndarray]

CONDITION_LIMIT = 1e12


class SingularSystemError(np.linalg.LinAlgError):
    """Kernel normal equations are numerically singular."""

    def __init__(self, condition: float, message: str | None = None):
        self.condition = condition
        super().__init__(
            message
            or f"kernel normal equations are singular to working precision "
            f"(condition estimate {condition:.3e} > {CONDITION_LIMIT:.0e}); "
            f"pass a positive ridge parameter lambda"
        )


@dataclass(frozen=True)
class Samples:
    """Phase-domain dataset: phases ``s`` of shape ``(m,)``, positions ``x`` of shape ``(m, d)``.

    ``stride`` optionally records which gait stride each sample came from.
    """

    s: np.ndarray
    x: np.ndarray
    stride: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(wrap_phase(np.atleast_1d(np.asarray(self.s, dtype=float))), dtype=float)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if s.ndim != 1 or x.ndim != 2 or x.shape[0] != s.shape[0]:
            raise ValueError(f"phases {s.shape} and positions {x.shape} do not align")
        if x.shape[1] < 1:
            raise ValueError("positions need at least one coordinate")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(x))):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "x", x)
        if self.stride is not None:
            st = np.asarray(self.stride, dtype=np.int64)
            if st.shape != s.shape:
                raise ValueError("stride labels must match the number of samples")
            object.__setattr__(self, "stride", st)

    def __len__(self) -> int:
        return self.s.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


def _eval(curve: Curve, s: np.ndarray, d: int | None = None) -> np.ndarray:
    out = np.asarray(curve(s), dtype=float)
    if out.ndim == 1:
        out = out[:, None]
    if out.shape[0] != np.shape(s)[0]:
        raise ValueError(f"curve returned {out.shape[0]} rows for {np.shape(s)[0]} phases")
    if d is not None and out.shape[1] != d:
        raise ValueError(f"curve has dimension {out.shape[1]}, samples have dimension {d}")
    return out


def empirical_risk(curve: Curve, samples: Samples) -> float:
    """Mean squared ambient residual ``(1/m) sum ||x_i - curve(s_i)||^2``."""
    if len(samples) == 0:
        raise ValueError("empirical risk needs at least one sample")
    r = samples.x - _eval(curve, samples.s, samples.dim)
    return float(np.mean(np.sum(r * r, axis=1)))


@dataclass(frozen=True)
class PartitionEstimate:
    """Piecewise-constant fit: ``coeffs[k]`` is the value on cell ``k``.

    ``fills`` lists ``(empty_cell, source_cell)`` pairs for cells that had no
    samples and copied their value from the nearest nonempty cell.
    """

    partition: Partition
    coeffs: np.ndarray
    counts: np.ndarray
    fills: tuple[tuple[int, int], ...] = ()

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def __call__(self, s) -> np.ndarray:
        return self.coeffs[self.partition.cell_index(np.atleast_1d(s))]


def _nearest_nonempty(partition: Partition, counts: np.ndarray) -> list[tuple[int, int]]:
    full = np.flatnonzero(counts > 0)
    reps = partition.representatives
    fills = []
    for k in np.flatnonzero(counts == 0):
        d = geodesic_distance(reps[k], reps[full])
        # argmin returns the first minimum, i.e. the lower index on ties
        fills.append((int(k), int(full[np.argmin(d)])))
    return fills


def fit_partition(samples: Samples, partition: Partition) -> PartitionEstimate:
    """Minimize the empirical risk over piecewise constants on ``partition``.

    The minimizer decouples per cell and per coordinate; each value is the
    arithmetic mean of the samples falling in the cell. Empty cells take the
    value of the nearest nonempty cell (geodesic distance between
    representatives, ties to the lower index) and are listed in ``fills``.
    """
    m = len(samples)
    if m == 0:
        raise ValueError("cannot fit a partition estimate without samples")
    n = partition.n_cells
    idx = partition.cell_index(samples.s)
    counts = np.bincount(idx, minlength=n)
    sums = np.stack(
        [np.bincount(idx, weights=samples.x[:, j], minlength=n) for j in range(samples.dim)],
        axis=1,
    )
    coeffs = np.zeros_like(sums)
    full = counts > 0
    coeffs[full] = sums[full] / counts[full, None]
    fills = _nearest_nonempty(partition, counts)
    for k, src in fills:
        coeffs[k] = coeffs[src]
    coeffs.setflags(write=False)
    counts.setflags(write=False)
    return PartitionEstimate(partition, coeffs, counts, tuple(fills))


@dataclass(frozen=True)
class KernelEstimate:
    """Kernel expansion ``sum_j coeffs[j] * exp(-beta * dist(centers[j], s)**2)``."""

    centers: np.ndarray
    beta: float
    lam: float
    coeffs: np.ndarray
    metric: str = "chordal"
    condition: float = field(default=float("nan"), compare=False)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def design(self, s) -> np.ndarray:
        return kernel_matrix(np.atleast_1d(s), self.centers, self.beta, self.metric)

    def __call__(self, s) -> np.ndarray:
        return self.design(s) @ self.coeffs


def kernel_matrix(s, centers, beta: float, metric: str = "chordal") -> np.ndarray:
    """``K[i, j] = exp(-beta * dist(s_i, centers_j)**2)``."""
    d = pairwise_distance(s, centers, metric)
    return np.exp(-beta * d * d)


def _check_centers(centers: np.ndarray) -> None:
    c = np.sort(centers)
    if c.size == 0:
        raise ValueError("need at least one kernel center")
    if np.any(np.diff(c) == 0.0):
        raise ValueError("kernel centers must be distinct")


def fit_kernel(samples: Samples, centers: Sequence[float], beta: float, lam: float = 0.0,
               metric: str = "chordal") -> KernelEstimate:
    """Ridge least squares in the span of kernels centred at ``centers``.

    Solves ``(K^T K + m*lam*I) a = K^T x^j`` for every coordinate ``j`` via a
    QR factorization of the stacked matrix ``[K; sqrt(m*lam) I]``, which never
    forms the normal matrix. The reported condition estimate is that of the
    normal matrix. With ``lam == 0`` a condition estimate above ``1e12``
    raises :class:`SingularSystemError`.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if metric not in ("chordal", "geodesic"):
        raise ValueError(f"unknown metric {metric!r}")
    centers = np.asarray(wrap_phase(np.atleast_1d(np.asarray(centers, dtype=float))), dtype=float)
    _check_centers(centers)
    m, n = len(samples), centers.size
    if m == 0:
        raise ValueError("cannot fit a kernel estimate without samples")
    K = kernel_matrix(samples.s, centers, beta, metric)
    A = K
    rhs = samples.x
    if lam > 0:
        A = np.vstack([K, np.sqrt(m * lam) * np.eye(n)])
        rhs = np.vstack([samples.x, np.zeros((n, samples.dim))])
    sv = linalg.svdvals(A)
    if sv.size < n or sv[-1] == 0.0:
        cond = float("inf")
    else:
        cond = float((sv[0] / sv[-1]) ** 2)
    if lam == 0 and not cond <= CONDITION_LIMIT:
        raise SingularSystemError(cond)
    Q, R = linalg.qr(A, mode="economic")
    coeffs = linalg.solve_triangular(R, Q.T @ rhs)
    coeffs.setflags(write=False)
    centers.setflags(write=False)
    return KernelEstimate(centers, float(beta), float(lam), coeffs, metric, cond)


def gram_condition(centers: Sequence[float], beta: float, metric: str = "chordal") -> float:
    """2-norm condition number of the symmetric center Gram matrix."""
    c = np.asarray(centers, dtype=float)
    ev = linalg.eigvalsh(kernel_matrix(c, c, beta, metric))
    if ev[0] <= 0:
        return float("inf")
    return float(ev[-1] / ev[0])


def project_l2(g: Curve, partition: Partition, measure: Measure | None = None,
               quad: Quadrature | None = None) -> np.ndarray:
    """Per-cell ``mu``-averages of ``g``: the ``L^2_mu`` orthogonal projection.

    Returns shape ``(N,)`` for scalar ``g`` and ``(N, d)`` for vector ``g``.
    """
    measure = measure or Measure.uniform()
    quad = quad or default_quadrature(partition.level)
    pts, w = measure.nodes(quad)
    vals = np.asarray(g(pts), dtype=float)
    scalar = vals.ndim == 1
    vals = vals.reshape(len(pts), -1)
    idx = partition.cell_index(pts)
    n = partition.n_cells
    mass = np.bincount(idx, weights=w, minlength=n)
    if np.any(mass <= 0):
        empty = np.flatnonzero(mass <= 0)
        raise ValueError(f"cells {empty.tolist()} have zero measure; projection undefined")
    coeffs = np.stack(
        [np.bincount(idx, weights=w * vals[:, j], minlength=n) for j in range(vals.shape[1])],
        axis=1,
    ) / mass[:, None]
    return coeffs[:, 0] if scalar else coeffs


def piecewise(partition: Partition, coeffs) -> Curve:
    """Curve that takes value ``coeffs[k]`` on cell ``k``."""
    c = np.asarray(coeffs, dtype=float)

    def f(s):
        return c[partition.cell_index(np.atleast_1d(s))]

    return f


def l2_error_sq(f: Curve, g: Curve, measure: Measure | None = None,
                quad: Quadrature | None = None) -> float:
    """``int ||f - g||^2 d mu`` by quadrature (empirical measures: sample mean)."""
    measure = measure or Measure.uniform()
    pts, w = measure.nodes(quad)
    a, b = _eval(f, pts), _eval(g, pts)
    if a.shape != b.shape:
        raise ValueError(f"curve dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    r = a - b
    return float(np.dot(w, np.sum(r * r, axis=1)))


def l2_error(f: Curve, g: Curve, measure: Measure | None = None,
             quad: Quadrature | None = None) -> float:
    """``L^2_mu`` distance between two curves."""
    return float(np.sqrt(l2_error_sq(f, g, measure, quad)))


@dataclass(frozen=True)
class ApproxRate:
    """Fitted ``||(I - Pi_n) g|| ~ C * N**(-r)``.

    ``exact`` is set (and ``rate`` is ``inf``) when some level reproduces
    ``g`` to rounding, i.e. ``g`` is piecewise constant on that partition.
    """

    rate: float
    constant: float
    exact: bool
    levels: tuple[int, ...]
    errors: tuple[float, ...]


def estimate_approx_rate(g: Curve, levels: Sequence[int], measure: Measure | None = None,
                         quad: Quadrature | None = None, zero_tol: float = 1e-12) -> ApproxRate:
    """Least-squares fit of ``log e_n`` against ``log N(n)`` for projection errors ``e_n``.

    One quadrature (fine enough for the deepest level) is shared by all levels.
    An error below ``zero_tol`` times the ``L^2`` norm of ``g`` counts as zero.
    """
    levels = tuple(int(n) for n in levels)
    if len(levels) < 3:
        raise ValueError("rate estimation needs at least 3 levels")
    measure = measure or Measure.uniform()
    quad = quad or default_quadrature(max(levels))
    scale = l2_error(g, lambda s: np.zeros_like(_eval(g, s)), measure, quad)
    errs = []
    for n in levels:
        p = Partition(n)
        c = project_l2(g, p, measure, quad)
        errs.append(l2_error(g, piecewise(p, c), measure, quad))
    errs_a = np.array(errs)
    if np.any(errs_a <= zero_tol * max(scale, 1.0)):
        return ApproxRate(float("inf"), 0.0, True, levels, tuple(errs))
    logN = np.log(2.0 ** np.array(levels))
    slope, intercept = np.polyfit(logN, np.log(errs_a), 1)
    return ApproxRate(float(-slope), float(np.exp(intercept)), False, levels, tuple(errs))
