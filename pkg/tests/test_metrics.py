"""Error and SNR metric definitions."""

import numpy as np
import pytest

from dynspec.dynamics import MeasurementSet
from dynspec.metrics import measurement_snrs, relative_error, spectral_snr


def test_relative_error_direct():
    t = np.array([3.0, 4.0])
    e = np.array([3.0, 4.5])
    assert np.isclose(relative_error(e, t), 0.5 / 5.0)
    assert relative_error(t, t) == 0.0


def test_relative_error_validation():
    with pytest.raises(ValueError):
        relative_error(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        relative_error(np.ones(3), np.zeros(3))


def test_spectral_snr():
    assert np.isclose(spectral_snr(1e-3), 60.0)
    assert np.isclose(spectral_snr(1.0), 0.0)
    assert spectral_snr(0.0) == float("inf")
    with pytest.raises(ValueError):
        spectral_snr(-0.1)


def test_measurement_snrs():
    clean = np.full((2, 4), 2.0)  # ||Y||_F = sqrt(16 * 4) / ... = 4*sqrt(2)... direct below
    E = np.zeros_like(clean)
    E[0, 1] = np.linalg.norm(clean) / 10.0  # exactly -20 dB ratio -> 20 dB
    ms = MeasurementSet(clean=clean, corrupted=clean + E,
                        outlier_support=np.array([1]), outliers=E,
                        noise=np.zeros_like(clean))
    snr_out, snr_gauss = measurement_snrs(ms)
    assert np.isclose(snr_out, 20.0)
    assert snr_gauss == float("inf")
