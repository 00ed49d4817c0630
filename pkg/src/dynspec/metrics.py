"""Evaluation metrics: relative spectral error and SNR summaries."""

from __future__ import annotations

import numpy as np

from .dynamics import MeasurementSet


def relative_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Relative spectral error ||estimate - truth||_2 / ||truth||_2."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise ValueError("length mismatch")
    denom = np.linalg.norm(truth)
    if denom == 0.0:
        raise ValueError("truth vector is zero")
    return float(np.linalg.norm(estimate - truth) / denom)


def spectral_snr(re: float) -> float:
    """Spectral SNR in dB: -20*log10(RE); +inf for a zero error."""
    if re < 0:
        raise ValueError("RE must be nonnegative")
    if re == 0.0:
        return float("inf")
    return float(-20.0 * np.log10(re))


def measurement_snrs(ms: MeasurementSet) -> tuple[float, float]:
    """(SNR_outlier, SNR_gauss) = 20*log10(||Y||_F / ||E or G||_F).

    Returns +inf for a corruption matrix that is identically zero.
    """
    y_norm = np.linalg.norm(ms.clean)

    def ratio_db(corruption: np.ndarray) -> float:
        c_norm = np.linalg.norm(corruption)
        if c_norm == 0.0:
            return float("inf")
        return float(20.0 * np.log10(y_norm / c_norm))

    return ratio_db(ms.outliers), ratio_db(ms.noise)
