"""Stably invertible wavelet transforms with uniform grid decimation.

Wavelet filter banks decimated on a uniform time grid become stable,
perfectly invertible frames once each channel's sampling grid is offset
by a quasi-random delay drawn from a low-discrepancy sequence.  This
package builds such banks (Cauchy and spline mother wavelets, linearly
spaced channels, Kronecker or digital (0,1)-sequence delays), computes
their frame bounds and canonical duals in the DFT domain, searches the
grid hyperparameters for minimal frame-bound ratio, and applies the
transform to onset detection and phaseless reconstruction.

The environment variable ``GRIDWAVE_THREADS``, when set before import,
caps the thread counts of the common BLAS backends.
"""

import os as _os

# Must happen before numpy is first imported anywhere in this process.
_threads = _os.environ.get("GRIDWAVE_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os, _threads

from .errors import FormatError, GridwaveError, NonInvertibleError, UsageError
from .sequences import (DelaySequence, band_generator_matrix,
                        check_elementary_intervals, digital_seq, golden_alpha,
                        kronecker_seq, make_delays, zero_seq)
from .wavelets import (WaveletSpec, peak_frequency, q_factor,
                       support_interval, wavelet_hat)
from .design import (FilterBankDesign, GridParams, build_design,
                     choose_decimation, frequency_response_diag,
                     geometric_design)
from .transform import CoefMatrix, analyze, synthesize
from .frame import (FrameBlocks, FrameDiagnostics, brute_force_bounds,
                    dual_design, frame_blocks, frame_bounds, real_extend)
from .search import (SearchRecord, format_table, full_search, optimize_m,
                     optimize_mc, refine_m)
from .apps import (OnsetResult, accumulated_spectrogram, cost_estimate,
                   err_ms, eval_onsets, fgla, make_reference_design,
                   pick_onsets, spectral_flux)
from .io import (AudioBuffer, CoefHeader, design_from_header, load_coefs,
                 read_wav, save_coefs, write_pgm16, write_wav)
from .estimator import WaveletFilterBank

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "CoefHeader",
    "CoefMatrix",
    "DelaySequence",
    "FilterBankDesign",
    "FormatError",
    "FrameBlocks",
    "FrameDiagnostics",
    "GridParams",
    "GridwaveError",
    "NonInvertibleError",
    "OnsetResult",
    "SearchRecord",
    "UsageError",
    "WaveletFilterBank",
    "WaveletSpec",
    "accumulated_spectrogram",
    "analyze",
    "band_generator_matrix",
    "brute_force_bounds",
    "build_design",
    "check_elementary_intervals",
    "choose_decimation",
    "cost_estimate",
    "design_from_header",
    "digital_seq",
    "dual_design",
    "err_ms",
    "eval_onsets",
    "fgla",
    "format_table",
    "frame_blocks",
    "frame_bounds",
    "frequency_response_diag",
    "full_search",
    "geometric_design",
    "golden_alpha",
    "kronecker_seq",
    "load_coefs",
    "make_delays",
    "make_reference_design",
    "optimize_m",
    "optimize_mc",
    "peak_frequency",
    "pick_onsets",
    "q_factor",
    "read_wav",
    "real_extend",
    "refine_m",
    "save_coefs",
    "spectral_flux",
    "support_interval",
    "synthesize",
    "wavelet_hat",
    "write_pgm16",
    "write_wav",
    "zero_seq",
]
