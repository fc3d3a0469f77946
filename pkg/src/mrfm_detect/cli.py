"""Command-line front end.

    mrfm-detect physics --k 1e-3 --f0 1e4 --b1 2e-4 --grad 2e6 --mu 9.3e-24
    mrfm-detect trace --snr-db -20 --lambda 1 --seed 1 --out run/
    mrfm-detect roc --config exp.json --workers 4
    mrfm-detect power --snr-grid=-36:-6:1.5
    mrfm-detect gibbs-study --samples 100,500,5000 --lambda 10 --snr-db -20

Precedence is command-line flags > config file > defaults.  MRFM_SEED sets
the default master seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .glr_search import SamplerConfig
from .harness import (
    DetectorSpec,
    RangeError,
    empirical_roc,
    pd_at_pf,
    power_curves,
    run_trial_batches,
    simulate_trial,
    snr_at_pd,
)
from .io import (
    ConfigError,
    config_from_dict,
    config_to_dict,
    override,
    write_power_csv,
    write_roc_csv,
    write_trace_csv,
)
from .signal_model import ParameterError, PhysicsParams, delta_omega_hz

COMMANDS = ("physics", "trace", "roc", "power", "gibbs-study")
DEFAULT_SNR_GRID = tuple(np.round(np.arange(-36.0, -6.0 + 1e-9, 1.5), 6))


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _snr_grid(text):
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        return [float(v) for v in np.round(np.arange(start, stop + step / 2, step), 6)]
    return _float_list(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--delta-omega", type=float, help="telegraph amplitude in Hz")
    common.add_argument("--lambda", dest="flip_rate", type=float, help="spin flip rate (1/s)")
    common.add_argument("--duration", type=float)
    common.add_argument("--sample-period", type=float)
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float)
    noise.add_argument("--sigma", type=float, help="per-sample noise std in Hz")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", dest="n_trials", type=int, help="trials per hypothesis")
    common.add_argument("--strategy", choices=("prior-only", "gibbs-sweep"))
    common.add_argument("--sweeps", dest="sweeps_per_sample", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("--detectors", type=lambda s: [d.strip() for d in s.split(",") if d.strip()])

    parser = argparse.ArgumentParser(prog="mrfm-detect", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")
    sub.required = True

    p = sub.add_parser("physics", parents=[common], help="frequency shift from cantilever/spin constants")
    p.add_argument("--k", type=float, default=1e-3, help="spring constant (N/m)")
    p.add_argument("--f0", type=float, default=1e4, help="resonant frequency (Hz)")
    p.add_argument("--b1", type=float, default=2e-4, help="rf field (T)")
    p.add_argument("--grad", type=float, default=2e6, help="field gradient (T/m)")
    p.add_argument("--mu", type=float, default=9.3e-24, help="magnetic moment (J/T)")

    sub.add_parser("trace", parents=[common], help="one noisy telegraph realization as CSV")
    p = sub.add_parser("roc", parents=[common], help="empirical ROC per detector")
    p.add_argument("--samples", type=int, help="GLR sampler iterations")
    p = sub.add_parser("power", parents=[common], help="P_D vs SNR at fixed P_F")
    p.add_argument("--samples", type=int)
    p.add_argument("--snr-grid", type=_snr_grid, help="start:stop:step or comma list")
    p = sub.add_parser("gibbs-study", parents=[common], help="hybrid ROC vs sampler iterations")
    p.add_argument("--samples", type=_int_list, help="comma list of sampler sizes")
    return parser


def load_config(args) -> "ExperimentConfig":
    doc = {"delta_omega_hz": 0.928, "lambda": 1.0, "snr_db": -20.0,
           "seed": int(os.environ.get("MRFM_SEED", "0"))}
    if args.config:
        try:
            text = Path(args.config).read_text()
            file_doc = json.loads(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
        if not isinstance(file_doc, dict):
            raise ConfigError("", "top-level document must be an object")
        if "physics" in file_doc:
            doc.pop("delta_omega_hz")
        if "sigma" in file_doc:
            doc.pop("snr_db")
        doc.update(file_doc)
    cfg = config_from_dict(doc)

    sampler = cfg.sampler
    samples = getattr(args, "samples", None)
    skw = {}
    if isinstance(samples, int):
        skw["samples"] = samples
    if args.strategy is not None:
        skw["strategy"] = args.strategy
    if args.sweeps_per_sample is not None:
        skw["sweeps_per_sample"] = args.sweeps_per_sample
    if skw:
        sampler = SamplerConfig(**{**sampler.__dict__, **skw})
    changes = dict(
        delta_omega=args.delta_omega, flip_rate=args.flip_rate, duration=args.duration,
        sample_period=args.sample_period, snr_db=args.snr_db, sigma=args.sigma, seed=args.seed,
        n_trials=args.n_trials, alpha=args.alpha, workers=args.workers, output_dir=args.output_dir,
        detectors=tuple(args.detectors) if args.detectors else None, sampler=sampler,
    )
    if isinstance(samples, list):
        changes["gibbs_samples"] = tuple(samples)
    if getattr(args, "snr_grid", None):
        changes["snr_grid"] = tuple(args.snr_grid)
    return override(cfg, **changes)


def _specs(cfg, sampler=None):
    return [DetectorSpec(k, (sampler or cfg.sampler) if k == "hybrid_glr" else None) for k in cfg.detectors]


def _write(path: Path, writer, *args) -> str:
    with open(path, "wb") as fh:
        writer(*args, fh)
    return str(path)


def cmd_physics(args, cfg, out):
    params = PhysicsParams.from_hz(args.k, args.f0, args.b1, args.grad, args.mu)
    shift = delta_omega_hz(params)
    print(f"{shift:.6f}")
    return {"delta_omega_hz": shift,
            "physics": {"k": args.k, "f0": args.f0, "b1": args.b1, "grad": args.grad, "mu": args.mu}}, []


def cmd_trace(args, cfg, out):
    scenario = cfg.scenario()
    y, clean = simulate_trial(scenario, cfg.seed, "trace", 0, 1)
    path = _write(out / "trace.csv", write_trace_csv, scenario.grid.times(), clean.values, y.values)
    flips = int(np.count_nonzero(np.diff(clean.values)))
    return {"sigma": scenario.sigma, "snr_db": scenario.snr, "visible_flips": flips}, [path]


def cmd_roc(args, cfg, out):
    scenario = cfg.scenario()
    batches = run_trial_batches(scenario, _specs(cfg), cfg.n_trials, cfg.seed, "roc", cfg.workers)
    metrics, files = {}, []
    for kind, batch in batches.items():
        curve = empirical_roc(batch)
        files.append(_write(out / f"roc_{kind}.csv", write_roc_csv, curve))
        metrics[kind] = {"auc": curve.auc, "pd_at_alpha": pd_at_pf(curve, cfg.alpha)}
    return metrics, files


def cmd_power(args, cfg, out):
    grid = cfg.snr_grid or DEFAULT_SNR_GRID
    curves = power_curves(cfg.scenario(), grid, _specs(cfg), cfg.alpha, cfg.n_trials, cfg.seed,
                          cfg.workers, label="power")
    metrics, files = {}, []
    for kind, curve in curves.items():
        files.append(_write(out / f"power_{kind}.csv", write_power_csv, curve))
        try:
            crossing = snr_at_pd(curve, 0.8)
        except RangeError:
            crossing = None
        metrics[kind] = {"snr_at_pd_0.8": crossing, "pd": curve.pd.tolist()}
    return metrics, files


def cmd_gibbs_study(args, cfg, out):
    scenario = cfg.scenario()
    metrics, files = {}, []
    for n in cfg.gibbs_samples:
        sampler = SamplerConfig(n, cfg.sampler.strategy, cfg.sampler.sweeps_per_sample, cfg.sampler.burn_in)
        spec = DetectorSpec("hybrid_glr", sampler)
        batch = run_trial_batches(scenario, [spec], cfg.n_trials, cfg.seed, "gibbs-study", cfg.workers)
        curve = empirical_roc(batch["hybrid_glr"])
        files.append(_write(out / f"roc_hybrid_glr_samples{n}.csv", write_roc_csv, curve))
        metrics[str(n)] = {"auc": curve.auc, "pd_at_alpha": pd_at_pf(curve, cfg.alpha)}
    return metrics, files


HANDLERS = {"physics": cmd_physics, "trace": cmd_trace, "roc": cmd_roc,
            "power": cmd_power, "gibbs-study": cmd_gibbs_study}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        metrics, files = HANDLERS[args.command](args, cfg, out)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = {
        "command": args.command,
        "version": __version__,
        "config": config_to_dict(cfg),
        "config_hash": cfg.config_hash(),
        "master_seed": cfg.seed,
        "wall_time_s": time.perf_counter() - start,
        "metrics": metrics,
        "outputs": files,
    }
    key = args.command.replace("-", "_")
    (out / f"summary_{key}.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
