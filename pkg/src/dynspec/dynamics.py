"""Synthetic convolutional dynamical-sampling instances.

Generates a real-symmetric operator spectrum, evolves an orbit
x_{l+1} = idft(ahat * dft(x_l)), subsamples it spatially, and applies the
two corruption mechanisms (time-sparse outliers, additive Gaussian noise).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cyclic import dft, idft, subsample

SYMMETRY_TOL = 1e-12
ORBIT_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Length-d real operator spectrum with ahat(k) == ahat(d-k)."""

    d: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if self.d % 2 == 0 or self.d < 3:
            raise ValueError("d must be odd and >= 3")
        if vals.shape != (self.d,):
            raise ValueError("spectrum length does not match d")
        if np.max(np.abs(vals[1:] - vals[1:][::-1])) > SYMMETRY_TOL:
            raise ValueError("spectrum is not real-symmetric")

    def filter_taps(self) -> np.ndarray:
        """The filter a = idft(ahat); real for a symmetric spectrum."""
        a = idft(self.values.astype(np.complex128))
        return np.real(a)


@dataclass
class MeasurementSet:
    """J x L snapshot matrix with clean/corrupted variants.

    Column l holds the subsampled snapshot y_l.  Invariant:
    corrupted == clean + outliers + noise, with outlier columns zero
    outside ``outlier_support``.
    """

    clean: np.ndarray
    corrupted: np.ndarray
    outlier_support: np.ndarray = field(
        default_factory=lambda: np.empty(0, dtype=np.int64))
    outliers: np.ndarray | None = None
    noise: np.ndarray | None = None

    def __post_init__(self):
        if self.outliers is None:
            self.outliers = np.zeros_like(self.clean)
        if self.noise is None:
            self.noise = np.zeros_like(self.clean)

    @property
    def J(self) -> int:
        return self.clean.shape[0]

    @property
    def L(self) -> int:
        return self.clean.shape[1]


def generate_symmetric_spectrum(d: int, rng: np.random.Generator) -> Spectrum:
    """Random spectrum: ahat(0)=1, ahat(k) ~ Unif(0,1) mirrored.

    The sampling law on the free half keeps ahat(0) the strict maximum
    almost surely.
    """
    if d % 2 == 0:
        raise ValueError("d must be odd")
    half = rng.uniform(0.0, 1.0, size=(d - 1) // 2)
    vals = np.concatenate(([1.0], half, half[::-1]))
    return Spectrum(d=d, values=vals)


def generate_monotone_spectrum(d: int) -> Spectrum:
    """Deterministic spectrum, strictly decreasing on [0, (d-1)/2], symmetric."""
    if d % 2 == 0:
        raise ValueError("d must be odd")
    half = np.exp(-np.arange(1, (d - 1) // 2 + 1) / (d / 4.0))
    vals = np.concatenate(([1.0], half, half[::-1]))
    return Spectrum(d=d, values=vals)


def generate_orbit(spec: Spectrum, x0: np.ndarray, L: int) -> np.ndarray:
    """Evolve x_{l+1} = idft(ahat * dft(x_l)); returns a d x L real array.

    Columns are x_0, ..., x_{L-1}.  A real-symmetric spectrum preserves
    realness; the imaginary residue is checked before being discarded.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (spec.d,):
        raise ValueError("x0 length does not match d")
    if L < 1:
        raise ValueError("L must be >= 1")
    ahat = spec.values.astype(np.complex128)
    orbit = np.empty((spec.d, L), dtype=np.float64)
    x = x0.astype(np.complex128)
    scale = max(np.max(np.abs(x0)), 1.0)
    for ell in range(L):
        if np.max(np.abs(np.imag(x))) > ORBIT_IMAG_TOL * scale:
            raise ValueError("orbit column has nonnegligible imaginary part")
        orbit[:, ell] = np.real(x)
        x = idft(ahat * dft(x))
    return orbit


def measure(orbit: np.ndarray, m: int) -> MeasurementSet:
    """Subsample every orbit column: y_l = S_m x_l.  Clean part only."""
    d = orbit.shape[0]
    if m < 1 or d % m != 0:
        raise ValueError(f"m={m} does not divide d={d}")
    clean = np.real(np.stack(
        [subsample(orbit[:, ell], m) for ell in range(orbit.shape[1])],
        axis=1))
    return MeasurementSet(clean=clean, corrupted=clean.copy())


def inject_outliers(ms: MeasurementSet, alpha: float, c: float,
                    rng: np.random.Generator) -> MeasurementSet:
    """Corrupt floor(alpha*L) snapshots with uniform outliers.

    Support is drawn uniformly without replacement; on a corrupted
    column, entries are i.i.d. Unif(-c*mu_l, c*mu_l) with
    mu_l = (1/J)*||y_l||_1.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must be in [0, 1)")
    if c <= 0:
        raise ValueError("c must be positive")
    J, L = ms.clean.shape
    n_out = int(np.floor(alpha * L))
    support = np.sort(rng.choice(L, size=n_out, replace=False))
    E = np.zeros_like(ms.clean)
    for ell in support:
        mu = np.sum(np.abs(ms.clean[:, ell])) / J
        E[:, ell] = rng.uniform(-c * mu, c * mu, size=J)
    return MeasurementSet(
        clean=ms.clean,
        corrupted=ms.clean + E + ms.noise,
        outlier_support=support.astype(np.int64),
        outliers=E,
        noise=ms.noise,
    )


def inject_gaussian(ms: MeasurementSet, sigma: float,
                    rng: np.random.Generator) -> MeasurementSet:
    """Add i.i.d. N(0, sigma^2) noise to every measurement entry."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        G = np.zeros_like(ms.clean)
    else:
        G = rng.normal(0.0, sigma, size=ms.clean.shape)
    return MeasurementSet(
        clean=ms.clean,
        corrupted=ms.clean + ms.outliers + G,
        outlier_support=ms.outlier_support,
        outliers=ms.outliers,
        noise=G,
    )
