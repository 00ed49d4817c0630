"""Command-line surface: simulate, recover, sweep-alpha, sweep-noise.

Exit codes: 0 success, 2 validation failure, 3 I/O failure.  The
environment variables DYNSPEC_SEED and DYNSPEC_THREADS override the
corresponding flags.
"""

from __future__ import annotations

import argparse
import os
import sys

from statistics import median

from .config import Config, ConfigError, load_config
from .experiments import (DEFAULT_SIGMAS, evaluate_instance, make_instance,
                          sweep_alpha, sweep_noise)
from .io import (FormatError, instance_from_dict, instance_to_dict, read_json,
                 result_to_dict, write_json, write_sweep_csv)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3


def _load_config(path: str | None) -> Config:
    if path is None:
        return Config()
    return load_config(path)


def _env_int(name: str, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    return int(raw)


def _resolve_seed(args, config: Config) -> int:
    if args.seed is not None:
        return args.seed
    env = _env_int("DYNSPEC_SEED", None)
    return env if env is not None else config.seed


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    return _env_int("DYNSPEC_THREADS", 1)


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    seed = _resolve_seed(args, config)
    spec, ms = make_instance(config.replace(seed=seed), seed)
    write_json(instance_to_dict(spec, ms, config.replace(seed=seed)), args.out)
    return EXIT_OK


def cmd_recover(args) -> int:
    spec, ms, config = instance_from_dict(read_json(args.input))
    if args.method is not None:
        config = config.replace(method=args.method)
    res = evaluate_instance(spec, ms, config, config.seed)
    write_json(result_to_dict(res), args.out)
    return EXIT_OK


def cmd_sweep_alpha(args) -> int:
    config = _load_config(args.config)
    # Robustness-sweep default geometry unless the config overrides it.
    if args.config is None:
        config = config.replace(d=21, m=3)
    seed = _resolve_seed(args, config)
    config = config.replace(seed=seed)
    results, aggregates = sweep_alpha(config, trials=args.trials,
                                      threads=_resolve_threads(args))
    write_sweep_csv(args.out, results, aggregates)
    _write_sidecar_json(args.out, results, aggregates)
    return EXIT_OK


def cmd_sweep_noise(args) -> int:
    config = _load_config(args.config)
    seed = _resolve_seed(args, config)
    config = config.replace(seed=seed)
    results, tables = sweep_noise(config, trials=args.trials)
    # One aggregate CSV row per (sigma, method).
    aggregates = []
    for sigma in sorted({r.config["sigma"] for r in results}):
        for method in ("proposed", "cadzow"):
            cell = [r for r in results
                    if r.config["sigma"] == sigma and r.method == method]
            if not cell:
                continue
            aggregates.append({
                "alpha": config.alpha, "c": config.c, "sigma": sigma,
                "method": method,
                "median_re": median(r.re for r in cell),
                "snr_spec": median(r.snr_spec for r in cell),
                "snr_outlier": median(r.snr_outlier for r in cell),
                "snr_gauss": median(r.snr_gauss for r in cell),
            })
    write_sweep_csv(args.out, results, aggregates)
    _write_sidecar_json(args.out, results, tables)
    return EXIT_OK


def _write_sidecar_json(csv_path: str, results, aggregates):
    """Full results document (including per-trial spectra for plotting)
    next to the CSV."""
    base, _ = os.path.splitext(csv_path)
    doc = {
        "format_version": 1,
        "kind": "sweep",
        "aggregates": aggregates,
        "trials": [result_to_dict(r) for r in results],
    }
    write_json(doc, base + ".json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynspec",
        description="Robust spectral recovery for convolutional dynamical "
                    "sampling: simulation, recovery, and experiment sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate an instance file")
    p_sim.add_argument("--config", default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("recover", help="run recovery on an instance file")
    p_rec.add_argument("--in", dest="input", required=True)
    p_rec.add_argument("--method", choices=["proposed", "cadzow"],
                       default=None)
    p_rec.add_argument("--out", required=True)
    p_rec.set_defaults(func=cmd_recover)

    p_sa = sub.add_parser("sweep-alpha",
                          help="median RE vs corruption rate (CSV + JSON)")
    p_sa.add_argument("--config", default=None)
    p_sa.add_argument("--seed", type=int, default=None)
    p_sa.add_argument("--trials", type=int, default=15)
    p_sa.add_argument("--threads", type=int, default=None)
    p_sa.add_argument("--out", required=True)
    p_sa.set_defaults(func=cmd_sweep_alpha)

    p_sn = sub.add_parser("sweep-noise",
                          help="SNR table across noise levels (CSV + JSON)")
    p_sn.add_argument("--config", default=None)
    p_sn.add_argument("--seed", type=int, default=None)
    p_sn.add_argument("--trials", type=int, default=1)
    p_sn.add_argument("--threads", type=int, default=None)
    p_sn.add_argument("--out", required=True)
    p_sn.set_defaults(func=cmd_sweep_noise)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
