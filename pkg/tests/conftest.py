"""Shared fixtures and helpers for the gridwave test suite.

Small designs and toy banks used across modules live here, along with
the acceptance-report plumbing: acceptance tests register one line per
criterion and a terminal-summary hook prints them after the run.
"""

import os

import numpy as np
import pytest

from gridwave import (
    FilterBankDesign,
    WaveletSpec,
    analyze,
    build_design,
    dual_design,
    make_delays,
    synthesize,
)

# Set GRIDWAVE_FULL=1 to run the full-scale search examples (minutes).
requires_full = pytest.mark.skipif(
    not os.environ.get("GRIDWAVE_FULL"),
    reason="full-scale run; set GRIDWAVE_FULL=1 to enable",
)


def small_design(M=16, M_C=2, d=8, L=128, alpha=300.0, delays="kronecker"):
    """A fast Cauchy design used by most unit tests."""
    spec = WaveletSpec.cauchy(alpha)
    return build_design(spec, M, M_C, d, L, make_delays(delays, M + 1))


def toy_bank(L=60, d=6, n_ch=9, seed=0, banded=False):
    """Random dense two-sided bank, invertible on complex signals.

    With ``n_ch >= d`` and dense i.i.d. Gaussian responses every
    frequency-bin class has full rank almost surely, so complex-mode
    duals exist; one-sided wavelet designs do not have that property.
    """
    rng = np.random.default_rng(seed)
    resp = rng.standard_normal((n_ch, L)) + 1j * rng.standard_normal((n_ch, L))
    if banded:
        width = L // 2
        for j in range(n_ch):
            start = rng.integers(0, L)
            keep = np.zeros(L, dtype=bool)
            keep[(start + np.arange(width)) % L] = True
            resp[j, ~keep] = 0.0
    return FilterBankDesign.from_responses(resp, d)


def roundtrip_error(design, signal, real_mode=True):
    """Relative l2 error of analyze -> dual -> synthesize."""
    dual = dual_design(design, real_mode=real_mode)
    coefs = analyze(design, signal, real_mode=real_mode)
    recon = synthesize(dual, coefs)
    return float(np.linalg.norm(recon - signal) / np.linalg.norm(signal))


_CRITERION_LINES = {}


def record_criterion(number, passed, detail):
    """Register one acceptance-criterion result for the summary report."""
    status = "PASS" if passed else "FAIL"
    _CRITERION_LINES[number] = f"criterion {number:2d}: {status} - {detail}"
    assert passed, f"criterion {number}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERION_LINES):
        terminalreporter.write_line(_CRITERION_LINES[number])
