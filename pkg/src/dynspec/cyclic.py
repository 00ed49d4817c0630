"""Signals on cyclic groups: DFT, circular convolution, uniform subsampling.

All signals are 1-D complex numpy arrays indexed by Z_n.  The transform
convention is the unnormalized forward DFT

    zhat(k) = sum_t z(t) exp(-2*pi*1j*k*t/n)

with the 1/n factor on the inverse.  This is the unique convention under
which the aliasing identity

    dft(subsample(z, m))(j) = (1/m) * sum_n zhat(j + n*J)

holds with the 1/m prefactor.
"""

from __future__ import annotations

import numpy as np

REAL_TOL = 1e-12


def as_signal(values) -> np.ndarray:
    """Coerce input to a 1-D complex128 array."""
    z = np.asarray(values, dtype=np.complex128)
    if z.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if z.size < 1:
        raise ValueError("signal must be nonempty")
    return z


def is_real(z: np.ndarray, tol: float = REAL_TOL) -> bool:
    return bool(np.max(np.abs(np.imag(z)), initial=0.0) <= tol)


def dft(z) -> np.ndarray:
    """Unnormalized forward DFT on Z_n."""
    return np.fft.fft(as_signal(z))


def idft(zhat) -> np.ndarray:
    """Inverse DFT with the 1/n factor; idft(dft(z)) == z."""
    return np.fft.ifft(as_signal(zhat))


def circular_convolve(a, f) -> np.ndarray:
    """Circular convolution (a*f)(k) = sum_t a(t) f(k-t mod n).

    Computed in the Fourier domain; the convolution operator is
    diagonalized by the DFT.
    """
    a = as_signal(a)
    f = as_signal(f)
    if a.shape != f.shape:
        raise ValueError(f"length mismatch: {a.size} vs {f.size}")
    return idft(dft(a) * dft(f))


def subsample(z, m: int) -> np.ndarray:
    """Uniform subsampling (S_m z)(j) = z(m*j) on Z_J with J = d/m."""
    z = as_signal(z)
    d = z.size
    if m < 1 or d % m != 0:
        raise ValueError(f"m={m} does not divide d={d}")
    return z[::m].copy()


def aliased_spectrum(zhat, m: int) -> np.ndarray:
    """Fold a length-d spectrum onto Z_J: out(j) = (1/m) sum_n zhat(j+nJ).

    Equals dft(subsample(idft(zhat), m)) under this module's transform
    convention.
    """
    zhat = as_signal(zhat)
    d = zhat.size
    if m < 1 or d % m != 0:
        raise ValueError(f"m={m} does not divide d={d}")
    J = d // m
    return zhat.reshape(m, J).mean(axis=0)
