"""Clock time to gait phase.

A stride ``(t_p, T_p)`` maps each timestamp ``t`` inside it to the phase
``(t - t_p) / T_p``. Stride boundaries are supplied by the user.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .estimators import Samples
from .manifold import wrap_phase

JITTER_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Timestamped marker positions; ``positions`` has one row per timestamp."""

    t: np.ndarray
    positions: np.ndarray
    marker_names: tuple[str, ...] = ()

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.positions, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if t.ndim != 1 or x.shape[0] != t.shape[0]:
            raise ValueError(f"{t.shape[0]} timestamps but {x.shape[0]} position rows")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise ValueError("trajectory values must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        names = tuple(self.marker_names)
        if not names:
            d = x.shape[1]
            names = tuple(f"m{i}" for i in range(d // 3 if d % 3 == 0 else d))
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "marker_names", names)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class GaitSegmentation:
    """Ordered, non-overlapping strides given as ``(t_p, T_p)`` pairs in seconds."""

    strides: tuple[tuple[float, float], ...]

    def __post_init__(self):
        st = tuple((float(a), float(b)) for a, b in self.strides)
        if not st:
            raise ValueError("segmentation needs at least one stride")
        for i, (tp, Tp) in enumerate(st):
            if not (np.isfinite(tp) and np.isfinite(Tp)) or Tp <= 0:
                raise ValueError(f"stride {i}: period must be positive and finite, got {Tp}")
            if i and tp < st[i - 1][0] + st[i - 1][1]:
                raise ValueError(f"stride {i} starts at {tp}, before stride {i - 1} ends")
        object.__setattr__(self, "strides", st)


def stride_of(t: np.ndarray, seg: GaitSegmentation) -> np.ndarray:
    """Stride index of each timestamp, ``-1`` if it lies in no stride.

    A timestamp up to ``1e-9 * T_p`` past the end of a stride still belongs to
    it; earlier strides win.
    """
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, -1, dtype=np.int64)
    for i in range(len(seg.strides) - 1, -1, -1):
        tp, Tp = seg.strides[i]
        inside = (t >= tp) & (t < tp + Tp * (1.0 + JITTER_TOL))
        out[inside] = i
    return out


def phase_map(traj: Trajectory, seg: GaitSegmentation) -> tuple[Samples, int]:
    """Convert a trajectory to phase-domain samples.

    Returns the samples (with stride labels) and the number of timestamps
    that fell outside every stride and were dropped.
    """
    which = stride_of(traj.t, seg)
    keep = which >= 0
    if not np.any(keep):
        raise ValueError("no timestamp falls inside any stride")
    tp = np.array([seg.strides[i][0] for i in which[keep]])
    Tp = np.array([seg.strides[i][1] for i in which[keep]])
    s = wrap_phase((traj.t[keep] - tp) / Tp)
    samples = Samples(s, traj.positions[keep], stride=which[keep])
    return samples, int(np.count_nonzero(~keep))


def pool_strides(parts: Sequence[Samples]) -> Samples:
    """Concatenate per-stride datasets, stride-major, labelling each sample by its part."""
    if len(parts) == 0:
        raise ValueError("need at least one stride to pool")
    d = parts[0].dim
    for i, p in enumerate(parts):
        if p.dim != d:
            raise ValueError(f"stride {i} has dimension {p.dim}, expected {d}")
    return Samples(
        np.concatenate([p.s for p in parts]),
        np.concatenate([p.x for p in parts]),
        stride=np.concatenate([np.full(len(p), i) for i, p in enumerate(parts)]),
    )


def split_strides(samples: Samples) -> list[Samples]:
    """Inverse of :func:`pool_strides` for labelled samples."""
    if samples.stride is None:
        return [samples]
    return [Samples(samples.s[samples.stride == k], samples.x[samples.stride == k])
            for k in np.unique(samples.stride)]
