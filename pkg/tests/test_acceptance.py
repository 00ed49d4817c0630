"""End-to-end acceptance gate.

Each test covers one headline claim of the library, prints a single
pass/fail line (run with ``pytest -s`` to see them inline; they are also
shown for failing tests), and enforces both the accuracy target and the
wall-clock budget.
"""

import time

import numpy as np
import pytest

from dynspec.cli import EXIT_OK, main as cli_main
from dynspec.config import Config
from dynspec.cyclic import aliased_spectrum, dft, idft, subsample
from dynspec.dynamics import generate_monotone_spectrum
from dynspec.experiments import (DEFAULT_SIGMAS, make_instance,
                                 recovery_params, run_trial, sweep_alpha,
                                 sweep_noise)
from dynspec.hankel import channel_sequences, lift, numerical_rank
from dynspec.prony import annihilating_coeffs, polynomial_roots
from dynspec.recovery import RecoveryParams, complete_channel, detect_outliers, recover_all_channels


REPORT_LINES: list[str] = []


def _report(num, name, ok, elapsed, budget, detail=""):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    extra = f" [{detail}]" if detail else ""
    line = (f"acceptance {num:>2} {name}: {status} "
            f"({elapsed:.2f}s / budget {budget:.0f}s){extra}")
    print(line, flush=True)
    REPORT_LINES.append(line)
    assert ok, f"criterion {num} ({name}) failed{extra}"
    assert elapsed < budget, (
        f"criterion {num} ({name}) exceeded time budget: "
        f"{elapsed:.2f}s >= {budget:.0f}s")


def test_criterion_01_aliasing_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for d, m in ((15, 3), (21, 3), (15, 5)):
        for _ in range(100):
            z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            lhs = dft(subsample(idft(z), m))
            rhs = aliased_spectrum(z, m)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    elapsed = time.perf_counter() - start
    _report(1, "aliasing identity", worst <= 1e-12, elapsed, 1.0,
            f"max err {worst:.2e}")


def test_criterion_02_channel_rank_structure():
    start = time.perf_counter()
    spec = generate_monotone_spectrum(15)
    cfg = Config(d=15, m=3, L=300, alpha=0.0, sigma=0.0, spectrum="monotone")
    _, ms = make_instance(cfg, 0)
    chans = channel_sequences(ms)
    ranks = {j: numerical_rank(ch.matrix(), 1e-8) for j, ch in chans.items()}
    ok = ranks[0] == 2 and all(ranks[j] == 3 for j in range(1, 5))
    assert chans[0].K == 150
    elapsed = time.perf_counter() - start
    _report(2, "channel rank structure", ok, elapsed, 5.0, f"ranks {ranks}")


def test_criterion_03_exact_noiseless_pipeline():
    start = time.perf_counter()
    cfg = Config(d=15, m=3, L=300, alpha=0.0, sigma=0.0,
                 assignment_mode="oracle")
    res = [run_trial(cfg, seed).re for seed in range(5)]
    elapsed = time.perf_counter() - start
    _report(3, "exact noiseless pipeline", max(res) <= 1e-9, elapsed, 10.0,
            f"max RE {max(res):.2e}")


def test_criterion_04_exact_outlier_support():
    start = time.perf_counter()
    cfg = Config(d=15, m=3, L=300, alpha=0.05, c=5.0, sigma=0.0)
    hits = 0
    for seed in range(15):
        _, ms = make_instance(cfg, seed)
        out = recover_all_channels(ms, cfg.m, recovery_params(cfg),
                                   method="proposed")
        true = np.sort(ms.outlier_support[ms.outlier_support
                                          <= 2 * cfg.K_eff - 2])
        hits += np.array_equal(np.sort(out.estimated_support), true)
    elapsed = time.perf_counter() - start
    _report(4, "exact outlier support", hits == 15, elapsed, 30.0,
            f"{hits}/15 exact")


def test_criterion_05_outlier_rate_sweep():
    start = time.perf_counter()
    cfg = Config(d=21, m=3, L=300, sigma=0.0, seed=0,
                 assignment_mode="oracle")
    _, aggregates = sweep_alpha(cfg, trials=15)
    prop = [a for a in aggregates if a["method"] == "proposed"]
    cadz = [a for a in aggregates if a["method"] == "cadzow"]
    worst_prop = max(a["median_re"] for a in prop)
    best_cadz = min(a["median_re"] for a in cadz)
    ok = worst_prop <= 1e-6 and best_cadz >= 1e-1
    elapsed = time.perf_counter() - start
    _report(5, "outlier rate sweep", ok, elapsed, 600.0,
            f"proposed worst {worst_prop:.2e}, cadzow best {best_cadz:.2e}")


def test_criterion_06_noise_trend_table():
    start = time.perf_counter()
    targets = {1e-3: 19.46, 1e-5: 56.66, 1e-7: 90.45, 1e-9: 128.46}
    cfg = Config(d=15, m=3, L=300, alpha=0.05, c=5.0, seed=0,
                 assignment_mode="oracle")
    _, tables = sweep_noise(cfg, sigmas=DEFAULT_SIGMAS, trials=5)
    rows = sorted(tables, key=lambda r: r["sigma"], reverse=True)
    snrs = [r["snr_proposed"] for r in rows]
    gaps = [r["snr_proposed"] - r["snr_cadzow"] for r in rows]
    offs = [abs(r["snr_proposed"] - targets[r["sigma"]]) for r in rows]
    increasing = all(b > a for a, b in zip(snrs, snrs[1:]))
    ok = increasing and all(g >= 10.0 for g in gaps) \
        and all(o <= 10.0 for o in offs)
    elapsed = time.perf_counter() - start
    _report(6, "noise trend table", ok, elapsed, 300.0,
            "snr " + "/".join(f"{s:.1f}" for s in snrs)
            + ", max offset " + f"{max(offs):.1f} dB")


def test_criterion_07_hankel_completion_oracle():
    start = time.perf_counter()
    ell = np.arange(11)
    seq = 2.0 * 0.5 ** ell + 3.0 * 0.25 ** ell
    _, cleaned, converged = complete_channel(
        seq, np.array([3, 7]), 2, RecoveryParams(max_iters=2000, tol=1e-14))
    err = float(np.linalg.norm(cleaned - seq) / np.linalg.norm(seq))
    elapsed = time.perf_counter() - start
    _report(7, "hankel completion oracle", converged and err <= 1e-8,
            elapsed, 1.0, f"relative err {err:.2e}")


def test_criterion_08_prony_micro_oracle():
    start = time.perf_counter()
    c = np.array([0.125, -0.75])
    roots = np.sort(np.real(polynomial_roots(c)))
    root_ok = np.allclose(roots, [0.25, 0.5], atol=1e-10)
    ell = np.arange(21)
    seq = 2.0 * 0.5 ** ell + 3.0 * 0.25 ** ell
    c_fit, res = annihilating_coeffs(lift(seq, 11), 2)
    elapsed = time.perf_counter() - start
    _report(8, "prony micro oracle", root_ok and res <= 1e-10, elapsed, 1.0,
            f"roots {roots}, residual {res:.2e}")


def test_criterion_09_sweep_determinism(tmp_path):
    start = time.perf_counter()
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("d = 15\nm = 3\nL = 80\nsigma = 0.0\n")
    outs = []
    for name in ("run1.csv", "run2.csv"):
        p = tmp_path / name
        code = cli_main(["sweep-alpha", "--config", str(cfg), "--seed", "7",
                         "--trials", "2", "--out", str(p)])
        assert code == EXIT_OK
        outs.append(p.read_bytes())
    elapsed = time.perf_counter() - start
    _report(9, "sweep determinism", outs[0] == outs[1], elapsed, 600.0,
            f"{len(outs[0])} bytes each")
