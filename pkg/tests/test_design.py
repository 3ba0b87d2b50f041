"""Tests for filter-bank construction on the decimation grid."""

import warnings

import mpmath as mp
import numpy as np
import pytest
from conftest import small_design

from gridwave import (
    FilterBankDesign,
    UsageError,
    WaveletSpec,
    analyze,
    build_design,
    choose_decimation,
    frequency_response_diag,
    geometric_design,
    make_delays,
    zero_seq,
)


def test_grid_params_validation():
    spec = WaveletSpec.cauchy(300.0)
    delays = make_delays("zero", 17)
    with pytest.raises(UsageError):
        build_design(spec, 16, 2, 7, 128, delays)  # 7 does not divide 128
    with pytest.raises(UsageError):
        build_design(spec, 16, 0, 8, 128, delays)  # linear needs M_C >= 1
    with pytest.raises(UsageError):
        build_design(spec, 16, 17, 8, 128, delays)  # M_C > M
    with pytest.raises(UsageError, match="delay sequence has"):
        build_design(spec, 16, 2, 8, 128, make_delays("zero", 16))
    with pytest.raises(UsageError):
        build_design(spec, 16, 2, 8, 128, delays, sample_rate=0.0)


def test_derived_grid_quantities():
    design = small_design(M=16, M_C=2, d=8, L=128)
    assert design.params.N == 16
    assert design.params.oversampling == pytest.approx(2 * 17 / 8)
    assert design.params.M == 16
    assert design.params.M_C == 2


def test_wavelet_channel_centers():
    M, sr = 16, 2.0
    design = small_design(M=M, M_C=2, d=8, L=128)
    expected = np.arange(M + 1) * sr / (2 * M)
    np.testing.assert_allclose(design.center_freqs, expected, atol=1e-12)


def test_responses_peak_near_centers():
    design = small_design(M=16, M_C=4, d=8, L=256)
    resp = design.responses
    sr = design.params.sample_rate
    L = design.params.L
    for j in range(design.n_channels):
        k_peak = int(np.argmax(np.abs(resp[j])))
        freq = k_peak * sr / L
        if k_peak > L // 2:
            freq -= sr  # wrapped tail of a low channel
        assert abs(freq - design.center_freqs[j]) <= 1.5 * sr / L


def test_scales_are_per_channel():
    design = small_design(M=16, M_C=2, d=8, L=128)
    assert design.scales.shape == (17,)
    xpk = 299.0 / (4 * np.pi)
    # Wavelet channels: scale maps the mother peak onto the channel center.
    for j in range(2, 17):
        assert design.scales[j] == pytest.approx(xpk / design.center_freqs[j])
    # Compensation channels share the base (widest-wavelet) scale.
    assert design.scales[0] == design.scales[1]
    assert design.scales[1] == pytest.approx(xpk / design.center_freqs[2])


def test_edge_channels_scaled_down():
    design = small_design(M=16, M_C=2, d=8, L=256)
    resp = np.abs(design.responses)
    # First and last channels carry 1/sqrt(2) of the amplitude their
    # profile would otherwise have; compare against neighbors after
    # removing the sqrt(scale) amplitude difference.
    peak0 = resp[0].max()
    peak1 = resp[1].max()
    assert peak0 == pytest.approx(peak1 / np.sqrt(2.0), rel=1e-10)
    peak_last = resp[16].max()
    peak_prev = resp[15].max()
    scale_ratio = np.sqrt(design.scales[16] / design.scales[15])
    assert peak_last == pytest.approx(peak_prev * scale_ratio / np.sqrt(2.0),
                                      rel=1e-3)


def test_choose_decimation():
    assert choose_decimation(253, 2.0) == 254
    assert choose_decimation(768, 4.0) == 384
    assert choose_decimation(350, 8.0) == 87
    assert choose_decimation(2, 100.0) == 1
    with pytest.raises(UsageError):
        choose_decimation(16, 0.5)


def test_truncation_guard_rejects_broadband():
    spec = WaveletSpec.cauchy(50.0)
    with pytest.raises(UsageError, match="too broadband"):
        build_design(spec, 16, 2, 8, 128, make_delays("zero", 17))


def test_bspline_overlap_warning():
    spec = WaveletSpec.bspline4(6.0)
    delays = make_delays("zero", 17)
    with pytest.warns(UserWarning, match="barely overlap"):
        build_design(spec, 16, 2, 8, 128, delays)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_design(spec, 16, 8, 8, 128, delays)


def test_design_id_stability_and_sensitivity():
    a = small_design()
    b = small_design()
    assert a.design_id == b.design_id
    assert len(a.design_id) == 16
    c = small_design(delays="digital")
    d = small_design(M_C=3)
    assert c.design_id != a.design_id
    assert d.design_id != a.design_id


def test_from_responses():
    rng = np.random.default_rng(3)
    resp = rng.standard_normal((5, 24)) + 1j * rng.standard_normal((5, 24))
    design = FilterBankDesign.from_responses(resp, 4)
    assert design.params.M == 4
    assert design.params.M_C == 0
    assert design.params.d == 4
    assert design.params.N == 6
    np.testing.assert_allclose(design.responses, resp)
    k_peak = np.argmax(np.abs(resp[2]))
    assert design.center_freqs[2] == pytest.approx(k_peak * 2.0 / 24)
    with pytest.raises(UsageError):
        FilterBankDesign.from_responses(resp[0], 4)


def test_geometric_design():
    spec = WaveletSpec.cauchy(300.0)
    design = geometric_design(spec, 9, 0.05, 0.8, 4, 64)
    assert design.n_channels == 9
    np.testing.assert_allclose(
        design.center_freqs,
        np.geomspace(0.05, 0.8, 9), rtol=1e-12)
    assert design.params.M_C == 0
    xpk = 299.0 / (4 * np.pi)
    np.testing.assert_allclose(design.scales,
                               xpk / design.center_freqs, rtol=1e-12)
    with pytest.raises(UsageError):
        geometric_design(spec, 9, 0.0, 0.8, 4, 64)
    with pytest.raises(UsageError):
        geometric_design(spec, 9, 0.5, 1.5, 4, 64)  # above Nyquist


def test_response_diag_nonnegative_and_periodic():
    design = small_design(M=16, M_C=2, d=8, L=128)
    psi = frequency_response_diag(design)
    assert psi.shape == (128,)
    assert np.all(psi >= 0.0)
    manual = np.sum(np.abs(design.responses) ** 2, axis=0)
    np.testing.assert_allclose(psi, manual, atol=1e-12)


def test_delay_ramp_shifts_time_atom():
    # With a half-bin delay the channel atom peaks d*delta samples later
    # than the zero-delay atom.
    spec = WaveletSpec.cauchy(300.0)
    M, M_C, d, L = 16, 2, 16, 256
    base = build_design(spec, M, M_C, d, L, zero_seq(M + 1))
    delayed = build_design(
        spec, M, M_C, d, L,
        make_delays("kronecker", M + 1, alpha=0.5))
    j = 8  # delta_8 = frac(8 * 0.5) = 0.0; j=9 has delta = 0.5
    atom0 = np.fft.ifft(base.responses[9])
    atom1 = np.fft.ifft(delayed.responses[9])
    # magnitudes agree after an 8-sample shift (0.5 * d)
    np.testing.assert_allclose(np.abs(atom1), np.roll(np.abs(atom0), 8),
                               atol=1e-12)
    k0 = np.argmax(np.abs(atom0))
    k1 = np.argmax(np.abs(atom1))
    assert (k1 - k0) % L == 8
    atom_j = np.fft.ifft(delayed.responses[j])
    k_j = np.argmax(np.abs(atom_j))
    k_j0 = np.argmax(np.abs(np.fft.ifft(base.responses[j])))
    assert k_j == k_j0


def test_analysis_atom_matches_closed_form():
    # Independent oracle: the Cauchy analysis atom has the exact time
    # profile norm / (2 pi (1 - i tau))**(beta + 1), sampled on the
    # delayed grid; coefficients are plain inner products against it.
    mp.mp.dps = 40
    alpha, M, M_C, d, L = 300.0, 16, 2, 16, 256
    sr = 2.0
    spec = WaveletSpec.cauchy(alpha)
    delays = make_delays("kronecker", M + 1)
    design = build_design(spec, M, M_C, d, L, delays)
    rng = np.random.default_rng(11)
    f = rng.standard_normal(L)
    coefs = analyze(design, f, real_mode=False)

    beta = mp.mpf(alpha - 1) / 2
    xpk = (mp.mpf(alpha) - 1) / (4 * mp.pi)
    norm = mp.gamma(beta + 1) / (xpk ** beta * mp.exp(-2 * mp.pi * xpk))

    def psi_time(tau):
        return norm / (2 * mp.pi * (1 - 1j * tau)) ** (beta + 1)

    j = 8
    center_j = j * sr / (2 * M)
    s_j = float(xpk) / center_j  # independent of design.scales
    delta = delays.elements[j]
    ts = np.arange(L)
    for ell in (0, 5, 12):
        offs = (ts - ell * d - d * delta + L // 2) % L - L // 2
        atom = np.array(
            [complex(psi_time(mp.mpf(o) / (s_j * sr))) for o in offs])
        atom /= sr * np.sqrt(s_j)
        oracle = np.sum(f * np.conj(atom))
        got = coefs.data[j, ell]
        assert abs(got - oracle) <= 1e-10 * abs(oracle)
