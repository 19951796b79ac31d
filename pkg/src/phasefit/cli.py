"""Command-line interface.

Exit codes: 0 success, 2 invalid input (files, flags, configs), 3 numerical
failure (singular kernel solve).
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .estimators import (
    SingularSystemError,
    empirical_risk,
    fit_kernel,
    fit_partition,
    project_l2,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    dense_grid,
    run_beta_sweep,
    run_center_sweep,
    run_rate_study,
    with_overrides,
)
from .fileio import (
    InputError,
    load_estimate,
    provenance,
    read_samples,
    read_segmentation,
    read_trajectory,
    save_estimate,
    write_samples,
    write_segmentation,
    write_trajectory,
)
from .gait import GaitSegmentation, Trajectory, phase_map
from .manifold import Partition, wrap_phase
from .report import emit_report, write_csv, write_json
from .synth import sample_dataset

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class UsageError(ValueError):
    pass


def load_config(path: str | None) -> tuple[ExperimentConfig, dict[str, str]]:
    """Parse an experiment config; ``None`` selects the shipped default."""
    if path is None:
        text = resources.files("phasefit").joinpath("data/rate_default.json").read_text(encoding="utf-8")
        where, inputs = "<default config>", {}
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(str(exc), path) from None
        where, inputs = path, {"config": path}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, where, exc.lineno, exc.colno) from None
    return ExperimentConfig.from_dict(doc), inputs


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    kw = {}
    for name in ("seed", "trials", "workers"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return with_overrides(cfg, **kw) if kw else cfg


def _load_data(args):
    """Samples from --samples, --trajectory/--segmentation, or a synthetic --config."""
    if getattr(args, "samples", None):
        return read_samples(args.samples), {"samples": args.samples}, None
    if getattr(args, "trajectory", None):
        if not args.segmentation:
            raise UsageError("--trajectory needs --segmentation")
        traj = read_trajectory(args.trajectory)
        seg = read_segmentation(args.segmentation)
        try:
            samples, _ = phase_map(traj, seg)
        except ValueError as exc:
            raise InputError(str(exc), args.trajectory) from None
        return samples, {"trajectory": args.trajectory, "segmentation": args.segmentation}, None
    if getattr(args, "config", None):
        cfg, inputs = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        m = cfg.sweep_samples or max(cfg.samples)
        data = sample_dataset(cfg.curve, cfg.measure, cfg.noise, m, np.random.SeedSequence(cfg.seed))
        return data, inputs, cfg
    raise UsageError("give --samples, --trajectory/--segmentation or --config")


def cmd_synth(args) -> int:
    cfg, inputs = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    curve = cfg.curve
    if curve.dim % 3:
        raise UsageError(f"trajectory files hold x,y,z triplets; curve dimension {curve.dim} is not a multiple of 3")
    n_frames = int(round(args.strides * args.period * args.rate))
    t = args.start + np.arange(n_frames) / args.rate
    s = wrap_phase((t - args.start) / args.period)
    x = curve(s)
    if cfg.noise.active:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
        x = x + rng.normal(0.0, cfg.noise.sigma, x.shape)
    names = tuple(f"m{i}" for i in range(curve.dim // 3))
    write_trajectory(Trajectory(t, x, names), args.out)
    seg = GaitSegmentation(tuple((args.start + k * args.period, args.period) for k in range(args.strides)))
    write_segmentation(seg, args.segmentation_out)
    print(f"frames {n_frames}  strides {args.strides}  d {curve.dim}")
    return 0


def cmd_segment(args) -> int:
    traj = read_trajectory(args.trajectory)
    seg = read_segmentation(args.segmentation)
    try:
        samples, dropped = phase_map(traj, seg)
    except ValueError as exc:
        raise InputError(str(exc), args.trajectory) from None
    write_samples(samples, args.out)
    print(f"m {len(samples)}  dropped {dropped}  strides {len(seg.strides)}")
    return 0


def cmd_fit(args) -> int:
    data, inputs, cfg = _load_data(args)
    seed = cfg.seed if cfg is not None else None
    if args.method == "partition":
        if args.level is None:
            raise UsageError("--method partition needs --level")
        est = fit_partition(data, Partition(args.level))
        extra = f"counts {est.counts.tolist()}  filled {len(est.fills)}"
    else:
        if args.centers is None or args.beta is None:
            raise UsageError("--method kernel needs --centers and --beta")
        if args.centers < 1:
            raise UsageError("--centers must be positive")
        centers = (np.arange(args.centers) + 0.5) / args.centers
        est = fit_kernel(data, centers, args.beta, args.lam, args.metric)
        extra = f"condition {est.condition:.6e}"
    save_estimate(est, args.out, provenance(inputs, seed, command="fit", method=args.method))
    print(f"m {len(data)}  {extra}  risk {empirical_risk(est, data)!r}")
    return 0


def cmd_project(args) -> int:
    cfg, inputs = load_config(args.config)
    p = Partition(args.level)
    coeffs = project_l2(cfg.curve, p, cfg.measure, cfg.quad_for(args.level))
    coeffs = np.asarray(coeffs).reshape(p.n_cells, -1)
    rows = ([k, p.edges[k], p.edges[k + 1], *coeffs[k]] for k in range(p.n_cells))
    out = Path(args.out)
    write_csv(out, ["cell", "lo", "hi"] + [f"x{j}" for j in range(coeffs.shape[1])], rows)
    print(f"N {p.n_cells}  written {out}")
    return 0


def _run_study(args, runner) -> int:
    cfg, inputs = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    samples = None
    if getattr(args, "trajectory", None) or getattr(args, "samples", None):
        samples, more, _ = _load_data(args)
        inputs = {**inputs, **more}
    prov = provenance(inputs, cfg.seed, command=args.command)
    if runner is run_rate_study:
        report = runner(cfg)
    elif runner is run_center_sweep:
        report = runner(cfg, samples, synthetic=samples is None)
    else:
        report = runner(cfg, samples)
    for p in emit_report(report, args.out_dir, prov):
        print(p)
    if runner is run_rate_study:
        print(f"bias_slope {report.bias_slope:.4f}  variance_slope {report.variance_slope:.4f}")
        if report.envelope is not None:
            print(f"envelope max held-out ratio {report.envelope.max_holdout_ratio:.4f}")
    return 0


def cmd_compare(args) -> int:
    a, b = load_estimate(args.first), load_estimate(args.second)
    if a.dim != b.dim:
        raise InputError(f"estimates have different dimensions ({a.dim} vs {b.dim})", args.second)
    grid = dense_grid(args.grid)
    va, vb = a(grid), b(grid)
    gap = np.abs(va - vb)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = a.dim
    header = ["s"] + [f"a_x{j}" for j in range(d)] + [f"b_x{j}" for j in range(d)] + [f"gap_x{j}" for j in range(d)]
    write_csv(out / "compare.csv", header, ([s, *ra, *rb, *rg] for s, ra, rb, rg in zip(grid, va, vb, gap)))
    summary = {
        "sup_gap": float(gap.max()),
        "rms_gap": float(np.sqrt(np.mean(np.sum(gap * gap, axis=1)))),
        "sup_gap_per_coordinate": gap.max(axis=0).tolist(),
        "provenance": provenance({"first": args.first, "second": args.second}, None, command="compare"),
    }
    write_json(out / "compare_summary.json", summary)
    if not args.no_plot:
        from .report import _RC, _save_svg, plt
        with plt.rc_context(_RC):
            fig, ax = plt.subplots(figsize=(7, 3.5))
            ax.plot(grid, va[:, 0], label=Path(args.first).name)
            ax.plot(grid, vb[:, 0], label=Path(args.second).name)
            ax.set_xlabel("phase s")
            ax.legend(fontsize=7)
            fig.tight_layout()
            _save_svg(fig, out / "compare.svg")
    print(f"sup_gap {summary['sup_gap']!r}  rms_gap {summary['rms_gap']!r}")
    return 0


def _data_flags(p: argparse.ArgumentParser, config: bool = True) -> None:
    p.add_argument("--samples", help="phase-domain samples CSV (from `segment`)")
    p.add_argument("--trajectory", help="trajectory CSV")
    p.add_argument("--segmentation", help="segmentation JSON")
    if config:
        p.add_argument("--config", help="experiment config JSON for synthetic data")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasefit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic trajectory and its segmentation")
    p.add_argument("--config", help="curve/noise config JSON (default: shipped config)")
    p.add_argument("--strides", type=int, default=4)
    p.add_argument("--period", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=100.0, help="frames per second")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--segmentation-out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", help="map trajectory timestamps to gait phases")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--segmentation", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("fit", help="fit a partition or kernel estimate")
    _data_flags(p)
    p.add_argument("--method", choices=["partition", "kernel"], required=True)
    p.add_argument("--level", type=int)
    p.add_argument("--centers", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--metric", choices=["chordal", "geodesic"], default="chordal")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("project", help="L2 projection of the configured curve onto a partition")
    p.add_argument("--config")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    for name, runner, hlp in (("rate-study", run_rate_study, "Monte-Carlo convergence-rate study"),
                              ("center-sweep", run_center_sweep, "both estimators over center counts"),
                              ("beta-sweep", run_beta_sweep, "kernel estimator over beta")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("config", nargs="?", help="experiment config JSON (default: shipped config)")
        p.add_argument("--out-dir", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int)
        if name != "rate-study":
            _data_flags(p, config=False)
        p.set_defaults(func=lambda a, r=runner: _run_study(a, r))

    p = sub.add_parser("compare", help="evaluate two estimate files on a common grid")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SingularSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
