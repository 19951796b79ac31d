"""Geometry of the phase circle.

Phases live in ``[0, 1)`` (one gait period); the circle is embedded in the
plane as ``(cos 2*pi*s, sin 2*pi*s)``. This module provides the metric,
sampling measures, dyadic partitions with representatives, fill distance and
a midpoint quadrature used to evaluate ``L^2_mu`` integrals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import i0e

MAX_LEVEL = 20


class ResourceLimitError(ValueError):
    """Requested object would exceed a hard size cap."""


def wrap_phase(s):
    """Map real numbers onto ``[0, 1)``.

    ``np.mod`` may return exactly 1.0 for tiny negative inputs; those are
    folded back to 0.
    """
    w = np.mod(np.asarray(s, dtype=float), 1.0)
    w = np.where(w >= 1.0, 0.0, w)
    return w if w.ndim else float(w)


def embed(s) -> np.ndarray:
    """Unit-circle embedding, shape ``(..., 2)``."""
    ang = 2.0 * np.pi * np.asarray(s, dtype=float)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def geodesic_distance(a, b):
    """Arc-length distance on the unit-period circle, in ``[0, 1/2]``."""
    d = np.abs(wrap_phase(a) - wrap_phase(b))
    out = np.minimum(d, 1.0 - d)
    return out if np.ndim(out) else float(out)


def chordal_distance(a, b):
    """Euclidean distance between the plane embeddings of two phases."""
    diff = embed(a) - embed(b)
    out = np.hypot(diff[..., 0], diff[..., 1])
    return out if np.ndim(out) else float(out)


def pairwise_distance(s, t, metric: str = "chordal") -> np.ndarray:
    """Distance matrix ``D[i, j] = dist(s[i], t[j])``."""
    s = np.asarray(s, dtype=float)[:, None]
    t = np.asarray(t, dtype=float)[None, :]
    if metric == "chordal":
        return chordal_distance(s, t)
    if metric == "geodesic":
        return geodesic_distance(s, t)
    raise ValueError(f"unknown metric {metric!r}; expected 'chordal' or 'geodesic'")


@dataclass(frozen=True)
class Partition:
    """Uniform dyadic partition of the circle into ``2**level`` half-open arcs.

    Cell ``k`` is ``[k/N, (k+1)/N)``. Representatives default to the arc
    midpoints; custom representatives must lie in their own cells.
    """

    level: int
    representatives: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not isinstance(self.level, (int, np.integer)) or self.level < 0:
            raise ValueError(f"partition level must be a nonnegative integer, got {self.level!r}")
        if self.level > MAX_LEVEL:
            raise ResourceLimitError(
                f"partition level {self.level} exceeds cap {MAX_LEVEL} "
                f"({2 ** self.level} cells)"
            )
        n = 2 ** int(self.level)
        if self.representatives is None:
            reps = (np.arange(n) + 0.5) / n
        else:
            reps = np.asarray(self.representatives, dtype=float).copy()
            if reps.shape != (n,):
                raise ValueError(f"need {n} representatives, got shape {reps.shape}")
            if not np.array_equal(self.cell_index(reps), np.arange(n)):
                raise ValueError("each representative must lie inside its own cell")
        reps.setflags(write=False)
        object.__setattr__(self, "level", int(self.level))
        object.__setattr__(self, "representatives", reps)

    @property
    def n_cells(self) -> int:
        return 2 ** self.level

    @property
    def edges(self) -> np.ndarray:
        """Cell boundaries ``k/N`` for ``k = 0..N``."""
        return np.arange(self.n_cells + 1) / self.n_cells

    def cell_index(self, s):
        """Index of the cell containing each phase: ``floor(s * N)``."""
        idx = np.floor(wrap_phase(s) * self.n_cells).astype(np.int64)
        # s * N is exact for dyadic N; the clip only guards s == 1 - ulp cases.
        idx = np.minimum(idx, self.n_cells - 1)
        return idx if idx.ndim else int(idx)

    def cell(self, k: int) -> tuple[float, float]:
        n = self.n_cells
        if not 0 <= k < n:
            raise IndexError(f"cell {k} out of range for {n} cells")
        return k / n, (k + 1) / n

    def contains(self, k: int, s) -> np.ndarray:
        return self.cell_index(s) == k

    def parent_index(self, k):
        """Index of the level ``n-1`` cell that contains cell ``k``."""
        if self.level == 0:
            raise ValueError("level-0 partition has no parent")
        return np.asarray(k) // 2


def make_partition(level: int) -> Partition:
    """Dyadic partition with ``2**level`` cells and midpoint representatives."""
    return Partition(level)


def fill_distance(reps: Sequence[float]) -> float:
    """Largest distance from any phase to its nearest representative.

    Exact: half of the largest circular gap between sorted representatives.
    """
    r = np.sort(wrap_phase(np.atleast_1d(np.asarray(reps, dtype=float))))
    if r.size == 0:
        raise ValueError("fill distance needs at least one representative")
    gaps = np.diff(np.append(r, r[0] + 1.0))
    return float(gaps.max() / 2.0)


@dataclass(frozen=True)
class Quadrature:
    """Composite midpoint rule on ``M`` equal subintervals of ``[0, 1)``."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"quadrature needs at least 2 points, got {self.size}")

    @property
    def points(self) -> np.ndarray:
        return (np.arange(self.size) + 0.5) / self.size

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)


def default_quadrature(level: int = 0) -> Quadrature:
    """``M = max(4096, 64 * 2**level)``, always a multiple of the cell count."""
    return Quadrature(max(4096, 64 * 2 ** level))


@dataclass(frozen=True)
class Measure:
    """Probability measure on the circle.

    kind is one of ``"uniform"``, ``"von_mises"`` (parameters ``mu``, the mean
    phase, and concentration ``kappa``) or ``"empirical"`` (point masses
    ``1/m`` on ``phases``).
    """

    kind: str = "uniform"
    mu: float = 0.0
    kappa: float = 0.0
    phases: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("uniform", "von_mises", "empirical"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "von_mises" and self.kappa < 0:
            raise ValueError("von Mises concentration must be nonnegative")
        if self.kind == "empirical":
            if self.phases is None or len(self.phases) == 0:
                raise ValueError("empirical measure needs at least one phase")
            ph = np.asarray(wrap_phase(np.atleast_1d(self.phases)), dtype=float)
            ph.setflags(write=False)
            object.__setattr__(self, "phases", ph)

    @classmethod
    def uniform(cls) -> "Measure":
        return cls("uniform")

    @classmethod
    def von_mises(cls, mu: float, kappa: float) -> "Measure":
        return cls("von_mises", mu=float(mu), kappa=float(kappa))

    @classmethod
    def empirical(cls, phases) -> "Measure":
        return cls("empirical", phases=phases)

    @property
    def is_analytic(self) -> bool:
        return self.kind != "empirical"

    def density(self, s) -> np.ndarray:
        """Density with respect to Lebesgue measure on ``[0, 1)``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "uniform":
            return np.ones_like(s)
        if self.kind == "von_mises":
            # exp(k cos(2 pi (s - mu))) / I0(k), scaled by e^-k for stability
            c = np.cos(2.0 * np.pi * (s - self.mu))
            return np.exp(self.kappa * (c - 1.0)) / i0e(self.kappa)
        raise TypeError("empirical measure has no density")

    def nodes(self, quad: Quadrature | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Evaluation points and weights representing integration against this measure."""
        if self.kind == "empirical":
            m = self.phases.size
            return self.phases, np.full(m, 1.0 / m)
        quad = quad or default_quadrature()
        pts = quad.points
        return pts, quad.weights * self.density(pts)

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return rng.random(m)
        if self.kind == "von_mises":
            theta = rng.vonmises(2.0 * np.pi * self.mu, self.kappa, size=m)
            return wrap_phase(theta / (2.0 * np.pi))
        return self.phases[rng.integers(0, self.phases.size, size=m)]

    def cell_masses(self, partition: Partition, quad: Quadrature | None = None) -> np.ndarray:
        pts, w = self.nodes(quad)
        return np.bincount(partition.cell_index(pts), weights=w, minlength=partition.n_cells)


def integrate(f: Callable[[np.ndarray], np.ndarray], measure: Measure,
              quad: Quadrature | None = None) -> float:
    """Integral of a scalar function of phase against ``measure``."""
    pts, w = measure.nodes(quad)
    vals = np.asarray(f(pts), dtype=float)
    return float(np.dot(w, vals))
