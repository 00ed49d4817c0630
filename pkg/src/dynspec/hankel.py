"""Hankel lifting of Fourier-channel sequences and rank diagnostics.

Each Fourier channel j of the measurements yields a scalar time sequence
s_l(j) = yhat_l(j) that is a mixture of exponentials, so its K x K
Hankel lift H[p, q] = s[p + q] is low rank.  This module provides the
lift, its inverse, the Frobenius-orthogonal projection onto the Hankel
subspace, truncated SVD, and the rank / conditioning diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import MeasurementSet

HANKEL_SPREAD_TOL = 1e-9


@dataclass
class HankelChannel:
    """Per-frequency time sequence with its Hankel lift metadata."""

    j: int
    sequence: np.ndarray  # length 2K-1 complex
    K: int
    theoretical_rank: int | None = None

    def matrix(self) -> np.ndarray:
        return lift(self.sequence, self.K)


def channel_sequences(ms: MeasurementSet, K: int | None = None,
                      corrupted: bool = True) -> dict[int, HankelChannel]:
    """DFT each snapshot on Z_J and collect coefficient j across time.

    K defaults to floor(L/2), the largest half-size with 2K <= L; for
    even L the final sample is unused by the lift.
    """
    data = ms.corrupted if corrupted else ms.clean
    J, L = data.shape
    if K is None:
        K = L // 2
    if 2 * K > L:
        raise ValueError(f"2K={2 * K} exceeds L={L}")
    shat = np.fft.fft(data, axis=0)  # shat[j, l] = s_l(j)
    return {
        j: HankelChannel(j=j, sequence=shat[j, :2 * K - 1].copy(), K=K)
        for j in range(J)
    }


def lift(seq, K: int) -> np.ndarray:
    """K x K Hankel lift: H[p, q] = seq[p + q].  Preserves real dtype."""
    seq = np.asarray(seq)
    if not np.issubdtype(seq.dtype, np.complexfloating):
        seq = seq.astype(np.float64)
    if seq.size < 2 * K - 1:
        raise ValueError(f"need {2 * K - 1} samples for K={K}, got {seq.size}")
    idx = np.arange(K)
    return seq[idx[:, None] + idx[None, :]]


@lru_cache(maxsize=32)
def _antidiag_index(K: int):
    idx = np.arange(K)
    flat = (idx[:, None] + idx[None, :]).ravel()
    counts = np.bincount(flat, minlength=2 * K - 1).astype(np.float64)
    return flat, counts


def antidiag_means(M: np.ndarray) -> np.ndarray:
    """Mean of each anti-diagonal of a square matrix, as a length-(2K-1) vector."""
    K = M.shape[0]
    flat, counts = _antidiag_index(K)
    re = np.bincount(flat, weights=M.real.ravel(), minlength=2 * K - 1)
    if not np.issubdtype(M.dtype, np.complexfloating):
        return re / counts
    im = np.bincount(flat, weights=M.imag.ravel(), minlength=2 * K - 1)
    return (re + 1j * im) / counts


def hankel_project(M: np.ndarray) -> np.ndarray:
    """Frobenius-orthogonal projection onto the Hankel subspace.

    Replaces each anti-diagonal by its arithmetic mean; idempotent.
    """
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    return lift(antidiag_means(M), M.shape[0])


def antidiag_extract(H: np.ndarray, tol: float = HANKEL_SPREAD_TOL) -> np.ndarray:
    """Inverse of ``lift`` on Hankel matrices: seq[l] = H[p, l - p].

    Rejects inputs whose anti-diagonal spread exceeds ``tol`` relative to
    the matrix scale; for near-Hankel input returns anti-diagonal means.
    """
    K = H.shape[0]
    means = antidiag_means(H)
    spread = np.abs(H - lift(means, K)).max()
    scale = max(np.abs(H).max(), 1.0)
    if spread > tol * scale:
        raise ValueError(f"input is not Hankel (anti-diagonal spread {spread:.3g})")
    return means


def truncated_svd(M: np.ndarray, r: int):
    """Best rank-r Frobenius approximation via dense SVD.

    Returns (U, s, Vh, M_r) with U, Vh restricted to the leading r
    singular directions and s the full singular value vector.
    """
    if not 1 <= r <= min(M.shape):
        raise ValueError(f"rank r={r} out of range for shape {M.shape}")
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    M_r = (U[:, :r] * s[:r]) @ Vh[:r, :]
    return U[:, :r], s, Vh[:r, :], M_r


class SubspaceTracker:
    """Warm-started top-r SVD by block subspace iteration.

    Consecutive matrices inside an alternating-projection loop differ
    very little, so the dominant subspace of the previous iterate is an
    excellent starting block: a couple of iterations plus Rayleigh-Ritz
    extraction reproduce the dense truncated SVD to machine precision at
    a fraction of the cost.  The iteration runs until the leading
    singular values stabilize (relative change below ``rtol``) or
    ``max_steps`` is hit; a cold start uses a fixed-seed random block so
    results stay deterministic.
    """

    def __init__(self, r: int, oversample: int = 4, max_steps: int = 60,
                 rtol: float = 1e-13):
        if r < 1:
            raise ValueError("rank r must be positive")
        self.r = r
        self.oversample = oversample
        self.max_steps = max_steps
        self.rtol = rtol
        self.Q = None  # right search block, shape (n, k)

    def clone(self) -> "SubspaceTracker":
        other = SubspaceTracker(self.r, self.oversample, self.max_steps,
                                self.rtol)
        other.Q = None if self.Q is None else self.Q.copy()
        return other

    def fit(self, M: np.ndarray):
        """Top-r factorization of M; same return shape as truncated_svd
        except that the singular value vector has length min(k, n)."""
        n = M.shape[1]
        k = min(self.r + self.oversample, min(M.shape))
        if self.r > min(M.shape):
            raise ValueError(f"rank r={self.r} out of range for {M.shape}")
        Q = self.Q
        if Q is None or Q.shape != (n, k) or \
                np.iscomplexobj(Q) != np.iscomplexobj(M):
            rng = np.random.default_rng(0x5eed)
            Q = rng.standard_normal((n, k))
            if np.issubdtype(M.dtype, np.complexfloating):
                Q = Q + 1j * rng.standard_normal((n, k))
            Q, _ = np.linalg.qr(Q)
        prev = None
        for _ in range(self.max_steps):
            U, _ = np.linalg.qr(M @ Q)
            Q, R = np.linalg.qr(M.conj().T @ U)
            lead = np.sort(np.abs(np.diag(R)))[::-1][:self.r]
            if prev is not None and np.all(
                    np.abs(lead - prev) <= self.rtol * (prev + 1e-300)):
                break
            prev = lead
        self.Q = Q
        # Rayleigh-Ritz on the converged block: M^H U = Q R implies
        # U^H M Q = R^H, so the small SVD of R^H rotates (U, Q) into
        # singular vectors.
        Ub, sb, Vhb = np.linalg.svd(R.conj().T)
        U_r = U @ Ub[:, :self.r]
        Vh_r = Vhb[:self.r] @ Q.conj().T
        M_r = (U_r * sb[:self.r]) @ Vh_r
        return U_r, sb, Vh_r, M_r


def numerical_rank(M: np.ndarray, tau_rel: float = 1e-8) -> int:
    """Number of singular values above tau_rel * sigma_1; 0 for the zero matrix."""
    if not 0.0 < tau_rel < 1.0:
        raise ValueError("tau_rel must be in (0, 1)")
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tau_rel * s[0]))


def theoretical_rank(m: int, j: int) -> int:
    """Rank of the channel-j Hankel matrix for a real-symmetric spectrum
    strictly decreasing on [0, (d-1)/2]: (m+1)/2 on the reference channel
    j=0, m elsewhere.  m=1 means no aliasing and rank 1 everywhere.
    """
    if m % 2 == 0:
        raise ValueError("m must be odd (d odd and d = m*J)")
    if m == 1:
        return 1
    return (m + 1) // 2 if j == 0 else m


def compute_incoherence(roots, K: int) -> float:
    """Incoherence mu = K / sigma_min(V_K^T V_K) of the Vandermonde factor
    V_K = [roots[t]^p].  Diagnostic only; roots must be distinct."""
    roots = np.asarray(roots, dtype=np.float64)
    if K < roots.size:
        raise ValueError("K must be at least the number of roots")
    if roots.size > 1 and np.min(np.abs(np.subtract.outer(roots, roots)
                                        + np.eye(roots.size))) == 0.0:
        raise ValueError("duplicate roots give a singular Gram matrix")
    V = roots[None, :] ** np.arange(K)[:, None]
    gram = V.T @ V
    smin = np.linalg.svd(gram, compute_uv=False)[-1]
    if smin <= 0:
        raise ValueError("singular Gram matrix")
    return K / smin


def condition_number(H: np.ndarray, r: int) -> float:
    """sigma_1 / sigma_r of H; requires sigma_r above 1e-14 * sigma_1."""
    s = np.linalg.svd(H, compute_uv=False)
    if not 1 <= r <= s.size:
        raise ValueError("r out of range")
    if s[r - 1] <= 1e-14 * s[0]:
        raise ValueError(f"sigma_{r} is numerically zero")
    return float(s[0] / s[r - 1])
