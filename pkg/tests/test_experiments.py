import math
import random

import numpy as np
import pytest

from phasefit.estimators import Samples, l2_error, piecewise, project_l2
from phasefit.experiments import (
    ConfigError,
    ExperimentConfig,
    _fsum_stats,
    fit_bound_envelope,
    run_beta_sweep,
    run_center_sweep,
    run_rate_study,
    total_variation,
)
from phasefit.manifold import Partition, make_partition
from phasefit.report import RATE_HEADER, emit_report
from phasefit.synth import AnalyticCurve, NoiseModel

SMOOTH = AnalyticCurve.fourier([[0.0, 1.0, 0.3, 0.0, -0.2]])


def test_noiseless_error_tracks_projection_error():
    cfg = ExperimentConfig(curve=SMOOTH, levels=(3,), samples=(10_000,), trials=10, seed=1)
    rep = run_rate_study(cfg)
    p = make_partition(3)
    exact = l2_error(SMOOTH, piecewise(p, project_l2(SMOOTH, p))) ** 2
    assert abs(rep.mean_sq_err[0, 0] - exact) <= 0.10 * exact
    assert rep.failed.sum() == 0


def test_pythagoras_between_components():
    cfg = ExperimentConfig(curve=SMOOTH, levels=(2, 4), samples=(500, 2000), trials=4,
                           noise=NoiseModel.gaussian(0.3), seed=2)
    rep = run_rate_study(cfg)
    # each trial: ||g - est||^2 = ||g - Pg||^2 + ||Pg - est||^2
    diff = rep.mean_sq_err - rep.mean_var
    assert np.allclose(diff, rep.bias_sq[:, None], rtol=1e-9, atol=1e-14)


def test_variance_term_scales_like_cells_over_samples():
    cfg = ExperimentConfig(curve=AnalyticCurve.zero(), noise=NoiseModel.gaussian(0.2),
                           levels=(2, 3, 4, 5), samples=(1024, 4096, 16384), trials=30, seed=3)
    rep = run_rate_study(cfg)
    N = rep.n_cells.astype(float)
    for j in range(len(cfg.samples)):
        slope = np.polyfit(np.log(N), np.log(rep.mean_sq_err[:, j]), 1)[0]
        assert abs(slope - 1.0) <= 0.2
    for i in range(len(cfg.levels)):
        slope = np.polyfit(np.log(cfg.samples), np.log(rep.mean_sq_err[i, :]), 1)[0]
        assert abs(slope + 1.0) <= 0.2
    # sigma^2 N / m within Monte-Carlo error
    pred = 0.04 * N[:, None] / np.array(cfg.samples)[None, :]
    assert np.all(np.abs(rep.mean_sq_err / pred - 1) < 0.25)


def test_bias_isolation_over_seeds():
    curve = AnalyticCurve.sawtooth(1.0)
    hits = 0
    for seed in range(20):
        n = 4
        cfg = ExperimentConfig(curve=curve, levels=(n,), samples=(100 * 2 ** n,), trials=1, seed=seed)
        rep = run_rate_study(cfg)
        bias = math.sqrt(rep.bias_sq[0])
        hits += abs(rep.mean_err[0, 0] - bias) <= 0.10 * bias
    assert hits >= 19


def test_trial_order_and_workers_do_not_matter():
    vals = list(np.random.default_rng(0).random(1000) * 1e-3 + 1.0)
    ref = _fsum_stats(vals)
    shuffled = vals[:]
    random.Random(1).shuffle(shuffled)
    assert _fsum_stats(shuffled) == ref
    cfg = ExperimentConfig(curve=SMOOTH, levels=(2, 3), samples=(300, 600), trials=6,
                           noise=NoiseModel.gaussian(0.1), seed=4)
    a = run_rate_study(cfg)
    b = run_rate_study(ExperimentConfig(**{**cfg.__dict__, "workers": 2}))
    for name in ("mean_sq_err", "se_sq_err", "mean_err", "mean_var"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_envelope_on_exact_model():
    levels, ms = (2, 3, 4, 5), (1000, 4000, 16000)
    N = 2.0 ** np.array(levels)[:, None]
    M = np.array(ms, dtype=float)[None, :]
    vals = 0.3 / N + 0.05 * N * np.log(N) / M
    env = fit_bound_envelope(levels, ms, vals, 1.0)
    assert env.c1 == pytest.approx(0.3, rel=1e-8) and env.c2 == pytest.approx(0.05, rel=1e-6)
    assert env.holds and env.max_holdout_ratio == pytest.approx(1.0, rel=1e-6)
    assert env.train.sum() == 6


def test_envelope_flags_misfit():
    levels, ms = (2, 3, 4, 5), (1000, 4000, 16000)
    N = 2.0 ** np.array(levels)[:, None]
    M = np.array(ms, dtype=float)[None, :]
    vals = np.sqrt(N / M)  # sqrt(N/m) growth cannot be tracked by N log N / m
    env = fit_bound_envelope(levels, ms, vals, 1.0)
    assert not env.holds


def test_config_validation():
    good = {"curve": {"kind": "sawtooth"}, "levels": [2, 3], "samples": [100]}
    cfg = ExperimentConfig.from_dict(good)
    assert cfg.trials == 50 and cfg.levels == (2, 3)
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({**good, "levels": []})
    assert info.value.path == "$.levels"
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({**good, "noise": {"kind": "gaussian", "sigma": -1}})
    assert info.value.path == "$.noise.sigma"
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**good, "bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"curve": {"kind": "fourier"}, "levels": [1], "samples": [1]})


def test_center_sweep_bias_monotone_and_deterministic():
    cfg = ExperimentConfig(curve=SMOOTH, levels=(1, 2, 3, 4, 5), samples=(3000,), betas=(25.0,),
                           noise=NoiseModel.gaussian(0.05), seed=5)
    a = run_center_sweep(cfg)
    biases = [r["bias"] for r in a.rows]
    assert all(b <= a_ + 1e-15 for a_, b in zip(biases, biases[1:]))
    b = run_center_sweep(cfg)
    for ra, rb in zip(a.rows, b.rows):
        assert ra == rb
    assert all(np.array_equal(a.partition_values[n], b.partition_values[n]) for n in cfg.levels)
    assert sum(a.counts[3]) == 3000


def test_center_sweep_gap_at_32_centers():
    cfg = ExperimentConfig(curve=SMOOTH, levels=(5,), samples=(20_000,), betas=(25.0,), seed=6)
    row = run_center_sweep(cfg).rows[0]
    assert row["N"] == 32 and row["kernel_error"] == ""
    assert row["sup_gap"] < 2 * row["sup_bias"]


def test_center_sweep_on_real_data_has_no_truth_columns():
    rng = np.random.default_rng(0)
    data = Samples(rng.random(400), rng.normal(size=(400, 2)))
    cfg = ExperimentConfig(curve=SMOOTH, levels=(2, 3), samples=(1,), betas=(25.0,))
    sweep = run_center_sweep(cfg, data, synthetic=False)
    assert all(math.isnan(r["bias"]) for r in sweep.rows)
    assert all(r["m"] == 400 for r in sweep.rows)


def test_beta_sweep_records_everything():
    cfg = ExperimentConfig(curve=SMOOTH, levels=(4,), samples=(2000,), betas=(400.0, 100.0, 25.0, 6.0),
                           noise=NoiseModel.gaussian(0.05), seed=7)
    sweep = run_beta_sweep(cfg)
    assert [r["beta"] for r in sweep.rows] == [400.0, 100.0, 25.0, 6.0]
    assert all(math.isfinite(r["total_variation"]) for r in sweep.rows)
    conds = [r["gram_condition"] for r in sweep.rows]
    assert all(b >= a for a, b in zip(conds, conds[1:]))


def test_beta_sweep_singular_is_recorded_not_raised():
    cfg = ExperimentConfig(curve=SMOOTH, levels=(4,), samples=(500,), betas=(25.0, 0.01), seed=8)
    sweep = run_beta_sweep(cfg)
    assert sweep.rows[0]["error"] == ""
    assert "lambda" in sweep.rows[1]["error"] and math.isnan(sweep.rows[1]["risk"])


def test_beta_sweep_sharp_kernels_reproduce_samples():
    centers = Partition(4).representatives
    x = SMOOTH(centers) + np.linspace(-0.1, 0.1, 16)[:, None]
    cfg = ExperimentConfig(curve=SMOOTH, levels=(4,), samples=(16,), betas=(1e4,))
    sweep = run_beta_sweep(cfg, Samples(centers, x))
    assert sweep.rows[0]["error"] == ""
    from phasefit.estimators import fit_kernel

    est = fit_kernel(Samples(centers, x), centers, 1e4)
    assert np.max(np.abs(est(centers) - x)) < 1e-3


def test_total_variation():
    s = np.arange(4096) / 4096
    assert total_variation(np.cos(2 * np.pi * s)) == pytest.approx(4.0, rel=1e-6)
    assert total_variation(np.ones((10, 2))) == 0.0


def test_emit_rate_report_format_and_determinism(tmp_path):
    cfg = ExperimentConfig(curve=SMOOTH, levels=(2, 3), samples=(200, 400), trials=3,
                           noise=NoiseModel.gaussian(0.1), seed=9)
    rep = run_rate_study(cfg)
    a = emit_report(rep, tmp_path / "a")
    b = emit_report(rep, tmp_path / "b")
    lines = (tmp_path / "a" / "rate.csv").read_text().splitlines()
    assert lines[0].split(",") == RATE_HEADER == ["n", "m", "mean_sq_err", "se", "mean_err"]
    assert len(lines) == 1 + 4
    for pa, pb in zip(a, b):
        assert pa.name == pb.name and pa.read_bytes() == pb.read_bytes()


def test_emit_sweeps_deterministic(tmp_path):
    cfg = ExperimentConfig(curve=SMOOTH, levels=(2, 3), samples=(300,), betas=(25.0, 6.0), seed=10)
    for runner in (run_center_sweep, run_beta_sweep):
        rep = runner(cfg)
        a = emit_report(rep, tmp_path / "a")
        b = emit_report(rep, tmp_path / "b")
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()


def test_emit_report_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = ExperimentConfig(curve=SMOOTH, levels=(2,), samples=(100,), betas=(25.0,))
    with pytest.raises(OSError, match="file"):
        emit_report(run_beta_sweep(cfg), blocker / "sub")
