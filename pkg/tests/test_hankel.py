"""Hankel lifting, projections, and rank diagnostics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynspec.config import Config
from dynspec.experiments import make_instance
from dynspec.hankel import (SubspaceTracker, antidiag_extract, antidiag_means,
                            channel_sequences, compute_incoherence,
                            condition_number, hankel_project, lift,
                            numerical_rank, theoretical_rank, truncated_svd)


def test_lift_layout():
    seq = np.arange(7.0)
    H = lift(seq, 4)
    assert H.shape == (4, 4)
    for p in range(4):
        for q in range(4):
            assert H[p, q] == seq[p + q]


def test_lift_preserves_real_dtype():
    assert lift(np.arange(5.0), 3).dtype == np.float64
    assert lift(np.arange(5.0) + 0j, 3).dtype == np.complex128


def test_antidiag_means_slow_reference():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    means = antidiag_means(M)
    for s in range(11):
        vals = [M[p, s - p] for p in range(6) if 0 <= s - p < 6]
        assert abs(means[s] - np.mean(vals)) < 1e-12


def test_hankel_project_idempotent_and_orthogonal():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((8, 8))
    P = hankel_project(M)
    assert np.allclose(hankel_project(P), P, atol=1e-12)
    # Frobenius orthogonality: <M - P, any Hankel> = 0
    probe = lift(rng.standard_normal(15), 8)
    assert abs(np.sum((M - P) * probe)) < 1e-9


def test_antidiag_extract_round_trip():
    rng = np.random.default_rng(2)
    seq = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    assert np.allclose(antidiag_extract(lift(seq, 5)), seq, atol=1e-12)


def test_antidiag_extract_rejects_non_hankel():
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        antidiag_extract(rng.standard_normal((5, 5)))


def test_channel_sequences_are_dft_rows():
    cfg = Config(d=15, m=3, L=50, alpha=0.0, sigma=0.0)
    _, ms = make_instance(cfg, 0)
    chans = channel_sequences(ms)
    shat = np.fft.fft(ms.corrupted, axis=0)
    assert set(chans) == set(range(5))
    for j, ch in chans.items():
        assert ch.K == 25
        assert np.allclose(ch.sequence, shat[j, :49], atol=1e-12)


def test_theoretical_ranks():
    assert theoretical_rank(3, 0) == 2
    assert theoretical_rank(3, 1) == 3
    assert theoretical_rank(5, 0) == 3
    assert theoretical_rank(5, 2) == 5
    assert theoretical_rank(1, 0) == 1
    with pytest.raises(ValueError):
        theoretical_rank(4, 0)


def test_channel_rank_structure_monotone():
    # monotone spectrum, d=15, m=3: channel 0 rank 2, others rank 3
    cfg = Config(d=15, m=3, L=300, alpha=0.0, sigma=0.0, spectrum="monotone")
    _, ms = make_instance(cfg, 0)
    for j, ch in channel_sequences(ms).items():
        expect = 2 if j == 0 else 3
        assert numerical_rank(ch.matrix(), 1e-8) == expect


def test_truncated_svd_against_eckart_young():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((10, 10))
    U, s, Vh, A2 = truncated_svd(A, 2)
    assert U.shape == (10, 2) and Vh.shape == (2, 10) and s.size == 10
    full = np.linalg.svd(A, compute_uv=False)
    assert np.allclose(s, full, atol=1e-12)
    assert np.isclose(np.linalg.norm(A - A2),
                      np.sqrt(np.sum(full[2:] ** 2)), atol=1e-10)


def test_subspace_tracker_matches_dense_svd():
    rng = np.random.default_rng(5)
    roots = np.array([0.95, 0.5, 0.2])
    seq = (roots[None, :] ** np.arange(59)[:, None]) @ np.array([1.0, 0.7, 0.4])
    H = lift(seq, 30) + 1e-8 * rng.standard_normal((30, 30))
    tracker = SubspaceTracker(3)
    _, s_fast, _, M_fast = tracker.fit(H)
    _, s_dense, _, M_dense = truncated_svd(H, 3)
    assert np.allclose(s_fast[:3], s_dense[:3], rtol=1e-10)
    assert np.linalg.norm(M_fast - M_dense) < 1e-9 * np.linalg.norm(M_dense)
    # warm restart on a slightly perturbed matrix stays accurate
    H2 = H + 1e-9 * rng.standard_normal((30, 30))
    _, _, _, M2 = tracker.fit(H2)
    _, _, _, M2d = truncated_svd(H2, 3)
    assert np.linalg.norm(M2 - M2d) < 1e-9 * np.linalg.norm(M2d)


def test_numerical_rank_basics():
    rng = np.random.default_rng(6)
    U, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    s = np.array([1.0, 0.5, 1e-12] + [0.0] * 9)
    A = (U * s) @ U.T
    assert numerical_rank(A, 1e-8) == 2
    assert numerical_rank(np.zeros((4, 4))) == 0
    with pytest.raises(ValueError):
        numerical_rank(A, 2.0)


def test_incoherence_and_condition_number():
    roots = np.array([1.0, 0.5])
    mu = compute_incoherence(roots, 20)
    assert mu >= 1.0 / 2  # K / sigma_min scaled; just sanity: positive, finite
    assert np.isfinite(mu)
    with pytest.raises(ValueError):
        compute_incoherence(np.array([0.5, 0.5]), 20)
    seq = (roots[None, :] ** np.arange(19)[:, None]) @ np.array([1.0, 1.0])
    H = lift(seq, 10)
    kappa = condition_number(H, 2)
    assert kappa >= 1.0
    with pytest.raises(ValueError):
        condition_number(H, 5)  # sigma_5 is numerically zero


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=12),
       st.integers(0, 2 ** 31 - 1))
def test_lift_extract_inverse_pair(K, seed):
    rng = np.random.default_rng(seed)
    seq = rng.standard_normal(2 * K - 1)
    assert np.allclose(antidiag_extract(lift(seq, K)), seq, atol=1e-12)
