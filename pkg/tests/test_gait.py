import numpy as np
import pytest

from phasefit.estimators import fit_partition
from phasefit.gait import (
    GaitSegmentation,
    Trajectory,
    phase_map,
    pool_strides,
    split_strides,
    stride_of,
)
from phasefit.manifold import make_partition
from phasefit.synth import AnalyticCurve


def test_formula_point_check():
    traj = Trajectory([1.25], [[0.0, 0.0, 0.0]])
    samples, dropped = phase_map(traj, GaitSegmentation(((1.0, 0.5),)))
    assert samples.s[0] == 0.5 and dropped == 0


def test_stride_start_maps_to_zero():
    traj = Trajectory([1.0, 1.1], [[1.0], [2.0]])
    samples, _ = phase_map(traj, GaitSegmentation(((1.0, 0.5),)))
    assert samples.s[0] == 0.0


def test_round_trip_known_curve():
    rng = np.random.default_rng(0)
    curve = AnalyticCurve.sawtooth(1.0, 3)
    strides = ((0.3, 0.8), (1.2, 0.9), (2.5, 1.1))
    ts, xs, us = [], [], []
    for tp, Tp in strides:
        u = np.sort(rng.random(100))
        ts.append(tp + u * Tp)
        xs.append(curve(u))
        us.append(u)
    traj = Trajectory(np.concatenate(ts), np.concatenate(xs))
    samples, dropped = phase_map(traj, GaitSegmentation(strides))
    assert dropped == 0
    assert np.max(np.abs(samples.s - np.concatenate(us))) < 1e-12
    assert np.array_equal(samples.x, traj.positions)
    for k, part in enumerate(split_strides(samples)):
        assert np.max(np.abs(part.s - us[k])) < 1e-12


def test_dropped_plus_emitted_is_total():
    t = np.linspace(0, 10, 1001)
    traj = Trajectory(t, np.sin(t))
    seg = GaitSegmentation(((1.0, 2.0), (4.0, 1.5), (7.0, 1.0)))
    samples, dropped = phase_map(traj, seg)
    assert len(samples) + dropped == t.size
    assert np.all((samples.s >= 0) & (samples.s < 1))
    assert set(np.unique(samples.stride)) == {0, 1, 2}


def test_jitter_tolerance_wraps_into_current_stride():
    Tp = 0.5
    t_end = 1.0 + Tp
    traj = Trajectory([1.0, t_end + 1e-12], [[0.0], [1.0]])
    samples, dropped = phase_map(traj, GaitSegmentation(((1.0, Tp),)))
    assert dropped == 0
    assert samples.s[1] < 1e-9
    # beyond the tolerance the timestamp goes to the next stride
    seg = GaitSegmentation(((1.0, Tp), (t_end, Tp)))
    assert stride_of(np.array([t_end + 1e-6]), seg).tolist() == [1]


def test_no_timestamp_in_strides():
    traj = Trajectory([0.0, 0.1], [[0.0], [1.0]])
    with pytest.raises(ValueError, match="no timestamp"):
        phase_map(traj, GaitSegmentation(((5.0, 1.0),)))


def test_segmentation_validation():
    with pytest.raises(ValueError):
        GaitSegmentation(((0.0, 0.0),))
    with pytest.raises(ValueError):
        GaitSegmentation(((0.0, 1.0), (0.5, 1.0)))
    with pytest.raises(ValueError):
        GaitSegmentation(())


def test_trajectory_validation():
    with pytest.raises(ValueError, match="increasing"):
        Trajectory([0.0, 0.0], [[1.0], [2.0]])
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], [[1.0]])
    with pytest.raises(ValueError):
        Trajectory([0.0, np.nan], [[1.0], [2.0]])
    assert Trajectory([0.0], [[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]]).marker_names == ("m0", "m1")
    assert len(Trajectory([0.0], [[1.0, 2.0]]).marker_names) == 2


def test_pool_strides():
    rng = np.random.default_rng(1)
    curve = AnalyticCurve.fourier([[0.0, 1.0, 0.0]])
    from phasefit.estimators import Samples

    a = Samples(rng.random(10), rng.normal(size=(10, 1)))
    b = Samples(rng.random(10), rng.normal(size=(10, 1)))
    one = pool_strides([a])
    assert np.array_equal(one.s, a.s) and np.array_equal(one.x, a.x)
    both = pool_strides([a, b])
    assert len(both) == 20
    assert np.array_equal(both.s[:10], a.s) and np.array_equal(both.s[10:], b.s)
    assert both.stride.tolist() == [0] * 10 + [1] * 10
    with pytest.raises(ValueError, match="dimension"):
        pool_strides([a, Samples(rng.random(3), rng.normal(size=(3, 2)))])
    with pytest.raises(ValueError):
        pool_strides([])
    # duplicated strides leave partition coefficients unchanged
    s = rng.random(200)
    stride = Samples(s, curve(s) + rng.normal(scale=0.1, size=(200, 1)))
    p = make_partition(3)
    single = fit_partition(stride, p)
    pooled = fit_partition(pool_strides([stride, stride, stride]), p)
    assert np.max(np.abs(single.coeffs - pooled.coeffs)) < 1e-12
