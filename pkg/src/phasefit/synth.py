"""Synthetic regressors and datasets with a known answer.

Three curve families with known projection-error rates on dyadic partitions:

``fourier``
    trigonometric polynomial per coordinate; smooth, so piecewise constants
    saturate at first order.
``sawtooth``
    periodic triangle wave with constant ``|slope|``; Lipschitz, kinks on
    dyadic points.
``step``
    piecewise constant with finitely many jumps; ``L^2`` rate one half when
    the jumps are off the dyadic grid.

Noise is additive and mean zero, so the regressor of every synthetic measure
is the curve itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .estimators import Samples
from .manifold import Measure, wrap_phase


@dataclass(frozen=True)
class AnalyticCurve:
    """Closed-form periodic curve ``[0, 1) -> R^d``.

    Parameters by kind:

    * ``fourier``: ``coeffs`` of shape ``(d, 2K+1)`` holding
      ``a0, a1, b1, ..., aK, bK`` so that
      ``f_j(s) = a0 + sum_k a_k cos(2 pi k s) + b_k sin(2 pi k s)``.
    * ``sawtooth``: ``slope`` and ``dim``; coordinate ``j`` is the triangle
      wave ``slope * (1/4 - |w - 1/2|)`` with ``w = s - j/(2 dim)`` wrapped
      (coordinates are shifted so they differ).
    * ``step``: sorted ``jumps`` in ``[0, 1)`` and ``levels`` of shape
      ``(len(jumps), d)``; the value on ``[jumps[i], jumps[i+1])`` (cyclically)
      is ``levels[i]``.
    """

    kind: str
    coeffs: np.ndarray | None = field(default=None, repr=False)
    slope: float = 1.0
    dim: int = 1
    jumps: np.ndarray | None = None
    levels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "fourier":
            try:
                c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
            except ValueError:
                raise ValueError("fourier coefficient rows must all have the same length") from None
            if c.shape[1] % 2 != 1:
                raise ValueError("fourier coefficients need an odd length a0, a1, b1, ...")
            object.__setattr__(self, "coeffs", c)
            object.__setattr__(self, "dim", c.shape[0])
        elif self.kind == "sawtooth":
            if self.dim < 1:
                raise ValueError("sawtooth dimension must be at least 1")
            object.__setattr__(self, "slope", float(self.slope))
        elif self.kind == "step":
            j = np.asarray(self.jumps, dtype=float)
            lv = np.asarray(self.levels, dtype=float)
            if lv.ndim == 1:
                lv = lv[:, None]
            if j.ndim != 1 or j.size < 1 or lv.shape[0] != j.size:
                raise ValueError("step curve needs one level row per jump")
            if np.any(np.diff(j) <= 0) or j[0] < 0 or j[-1] >= 1:
                raise ValueError("step jumps must be strictly increasing in [0, 1)")
            object.__setattr__(self, "jumps", j)
            object.__setattr__(self, "levels", lv)
            object.__setattr__(self, "dim", lv.shape[1])
        else:
            raise ValueError(f"unknown curve kind {self.kind!r}")

    @classmethod
    def fourier(cls, coeffs) -> "AnalyticCurve":
        return cls("fourier", coeffs=coeffs)

    @classmethod
    def sawtooth(cls, slope: float = 1.0, dim: int = 1) -> "AnalyticCurve":
        return cls("sawtooth", slope=slope, dim=dim)

    @classmethod
    def step(cls, jumps, levels) -> "AnalyticCurve":
        return cls("step", jumps=jumps, levels=levels)

    @classmethod
    def zero(cls, dim: int = 1) -> "AnalyticCurve":
        return cls.fourier(np.zeros((dim, 1)))

    def __call__(self, s) -> np.ndarray:
        s = wrap_phase(np.atleast_1d(np.asarray(s, dtype=float)))
        if self.kind == "fourier":
            K = (self.coeffs.shape[1] - 1) // 2
            k = np.arange(1, K + 1)
            ang = 2.0 * np.pi * np.outer(s, k)
            basis = np.empty((s.size, 2 * K + 1))
            basis[:, 0] = 1.0
            basis[:, 1::2] = np.cos(ang)
            basis[:, 2::2] = np.sin(ang)
            return basis @ self.coeffs.T
        if self.kind == "sawtooth":
            shift = np.arange(self.dim) / (2.0 * self.dim)
            w = wrap_phase(s[:, None] - shift[None, :])
            return self.slope * (0.25 - np.abs(w - 0.5))
        i = np.searchsorted(self.jumps, s, side="right") - 1
        # phases before the first jump belong to the last interval (cyclic)
        return self.levels[i % self.jumps.size]

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "fourier":
            return {"kind": "fourier", "coeffs": self.coeffs.tolist()}
        if self.kind == "sawtooth":
            return {"kind": "sawtooth", "slope": self.slope, "dim": self.dim}
        return {"kind": "step", "jumps": self.jumps.tolist(), "levels": self.levels.tolist()}

    @classmethod
    def from_dict(cls, spec: dict[str, Any]) -> "AnalyticCurve":
        kind = spec["kind"]
        if kind == "fourier":
            return cls.fourier(spec["coeffs"])
        if kind == "sawtooth":
            return cls.sawtooth(spec.get("slope", 1.0), spec.get("dim", 1))
        if kind == "step":
            return cls.step(spec["jumps"], spec["levels"])
        raise ValueError(f"unknown curve kind {kind!r}")


@dataclass(frozen=True)
class NoiseModel:
    """Additive isotropic noise: ``kind`` is ``"none"`` or ``"gaussian"``."""

    kind: str = "none"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("noise sigma must be nonnegative")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls("none")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls("gaussian", float(sigma))

    @property
    def active(self) -> bool:
        return self.kind == "gaussian" and self.sigma > 0


def measure_from_dict(spec: dict[str, Any]) -> Measure:
    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return Measure.uniform()
    if kind == "von_mises":
        return Measure.von_mises(spec.get("mu", 0.0), spec["kappa"])
    if kind == "empirical":
        return Measure.empirical(spec["phases"])
    raise ValueError(f"unknown measure kind {kind!r}")


def noise_from_dict(spec: dict[str, Any]) -> NoiseModel:
    kind = spec.get("kind", "none")
    if kind == "none":
        return NoiseModel.none()
    return NoiseModel.gaussian(spec["sigma"])


def sample_dataset(curve: AnalyticCurve, measure: Measure, noise: NoiseModel, m: int,
                   seed: int | np.random.SeedSequence) -> Samples:
    """Draw ``m`` i.i.d. samples ``(s_i, curve(s_i) + e_i)``.

    The seed is split into ``d + 1`` child streams: the first draws phases,
    child ``j + 1`` draws the noise of coordinate ``j``. The same seed always
    yields the same dataset.
    """
    if m < 1:
        raise ValueError("need at least one sample")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = [np.random.default_rng(c) for c in ss.spawn(curve.dim + 1)]
    s = measure.sample(m, streams[0])
    x = curve(s)
    if noise.active:
        x = x + np.stack([r.normal(0.0, noise.sigma, m) for r in streams[1:]], axis=1)
    return Samples(s, x)


def regressor_of(curve: AnalyticCurve, noise: NoiseModel) -> AnalyticCurve:
    """Conditional mean of ``x`` given ``s``; the curve itself for mean-zero noise."""
    return curve
