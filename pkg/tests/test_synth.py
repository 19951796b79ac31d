import math

import numpy as np
import pytest

from phasefit.estimators import estimate_approx_rate, project_l2
from phasefit.manifold import Measure, make_partition
from phasefit.synth import AnalyticCurve, NoiseModel, regressor_of, sample_dataset

CURVES = {
    "fourier": AnalyticCurve.fourier([[0.5, 1.0, 0.0, 0.0, 0.4], [0.0, 0.0, 2.0, 0.3, 0.0]]),
    "sawtooth": AnalyticCurve.sawtooth(3.0, 2),
    "step": AnalyticCurve.step([0.1, 1 / 3, 0.7], [[0.0, 1.0], [2.0, -1.0], [1.0, 0.5]]),
}


@pytest.mark.parametrize("kind", ["fourier", "sawtooth"])
def test_periodic_at_wrap(kind):
    c = CURVES[kind]
    s = np.array([0.0, 1.0 - 1e-12, 1.0, -1.0, 0.375, 1.375])
    v = c(s)
    assert np.array_equal(v[0], v[2]) and np.array_equal(v[0], v[3])
    assert np.array_equal(v[4], v[5])
    assert np.max(np.abs(v[0] - v[1])) < 1e-9


def test_step_values_and_cyclic_interval():
    c = CURVES["step"]
    assert c(np.array([0.05]))[0].tolist() == [1.0, 0.5]
    assert c(np.array([0.1]))[0].tolist() == [0.0, 1.0]
    assert c(np.array([0.5]))[0].tolist() == [2.0, -1.0]
    assert c(np.array([0.9]))[0].tolist() == [1.0, 0.5]


def test_sawtooth_lipschitz_constant():
    c = CURVES["sawtooth"]
    s = np.arange(100_001) / 100_000
    v = c(s)
    slopes = np.abs(np.diff(v, axis=0)) / np.diff(s)[:, None]
    assert slopes.max() == pytest.approx(3.0, rel=1e-9)


@pytest.mark.parametrize("kind,rate", [("fourier", 1.0), ("sawtooth", 1.0), ("step", 0.5)])
def test_known_approximation_rates(kind, rate):
    res = estimate_approx_rate(CURVES[kind], range(3, 10))
    assert abs(res.rate - rate) <= 0.15


def test_noiseless_samples_lie_on_curve():
    c = CURVES["fourier"]
    data = sample_dataset(c, Measure.von_mises(0.1, 2.0), NoiseModel.none(), 500, seed=3)
    assert np.array_equal(data.x, c(data.s))


def test_same_seed_same_dataset():
    c = CURVES["sawtooth"]
    a = sample_dataset(c, Measure.uniform(), NoiseModel.gaussian(0.3), 200, seed=42)
    b = sample_dataset(c, Measure.uniform(), NoiseModel.gaussian(0.3), 200, seed=42)
    assert a.s.tobytes() == b.s.tobytes() and a.x.tobytes() == b.x.tobytes()
    other = sample_dataset(c, Measure.uniform(), NoiseModel.gaussian(0.3), 200, seed=43)
    assert not np.array_equal(a.s, other.s)


def test_noise_does_not_move_phases():
    c = CURVES["sawtooth"]
    a = sample_dataset(c, Measure.uniform(), NoiseModel.none(), 100, seed=1)
    b = sample_dataset(c, Measure.uniform(), NoiseModel.gaussian(1.0), 100, seed=1)
    assert np.array_equal(a.s, b.s)


def test_gaussian_noise_moments():
    sigma, m = 0.1, 100_000
    data = sample_dataset(AnalyticCurve.zero(), Measure.uniform(), NoiseModel.gaussian(sigma), m, seed=5)
    x = data.x[:, 0]
    assert abs(x.mean()) <= 4 * sigma / math.sqrt(m)
    assert abs(x.var(ddof=1) - sigma ** 2) <= 0.05 * sigma ** 2


def test_regressor_is_curve():
    c = CURVES["fourier"]
    assert regressor_of(c, NoiseModel.none()) is c
    assert regressor_of(c, NoiseModel.gaussian(1.0)) is c


def test_binned_means_match_projection():
    c = AnalyticCurve.fourier([[0.2, 1.0, 0.5]])
    sigma, m = 1.0, 1_000_000
    data = sample_dataset(c, Measure.uniform(), NoiseModel.gaussian(sigma), m, seed=11)
    p = make_partition(4)
    idx = p.cell_index(data.s)
    proj = project_l2(c, p)[:, 0]
    for k in range(16):
        xs = data.x[idx == k, 0]
        se = xs.std(ddof=1) / math.sqrt(xs.size)
        assert abs(xs.mean() - proj[k]) <= 3 * se


def test_invalid_specs():
    with pytest.raises(ValueError):
        AnalyticCurve.fourier([[1.0, 2.0]])
    with pytest.raises(ValueError):
        AnalyticCurve.step([0.5, 0.2], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        AnalyticCurve("spline")
    with pytest.raises(ValueError):
        NoiseModel.gaussian(-1.0)
    with pytest.raises(ValueError):
        sample_dataset(CURVES["fourier"], Measure.uniform(), NoiseModel.none(), 0, seed=0)


@pytest.mark.parametrize("kind", list(CURVES))
def test_dict_round_trip(kind):
    c = CURVES[kind]
    again = AnalyticCurve.from_dict(c.to_dict())
    s = np.linspace(0, 1, 257)
    assert np.array_equal(c(s), again(s))
