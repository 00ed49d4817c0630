"""Robust spectral recovery for convolutional dynamical sampling.

Pipeline: spatially subsampled snapshots of a circular-convolution orbit
are lifted per Fourier channel into low-rank Hankel matrices; time-sparse
outliers are localized on the reference channel, the remaining channels
are completed, and a Prony step recovers the operator spectrum.
"""

from .config import Config, ConfigError, load_config
from .cyclic import (aliased_spectrum, circular_convolve, dft, idft,
                     subsample)
from .dynamics import (MeasurementSet, Spectrum, generate_monotone_spectrum,
                       generate_orbit, generate_symmetric_spectrum,
                       inject_gaussian, inject_outliers, measure)
from .experiments import (TrialResult, make_instance, run_trial, sweep_alpha,
                          sweep_noise)
from .hankel import (HankelChannel, antidiag_extract, channel_sequences,
                     compute_incoherence, condition_number, hankel_project,
                     lift, numerical_rank, theoretical_rank, truncated_svd)
from .metrics import measurement_snrs, relative_error, spectral_snr
from .prony import (ChannelRoots, SpectrumEstimate, annihilating_coeffs,
                    assemble_spectrum, channel_roots, estimate_order,
                    polynomial_roots, recover_filter)
from .recovery import (RecoveryOutput, RecoveryParams, cadzow_denoise,
                       complete_channel, detect_outliers,
                       recover_all_channels)

__version__ = "0.1.0"
