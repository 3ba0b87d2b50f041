"""Discretized filter-bank construction on a uniform translation grid.

A design places M+1 channels at equispaced center frequencies
``c_j = j * sample_rate / (2*M)`` for ``j = 0 .. M``, so channel 0 sits at DC
and channel M at Nyquist.  Channels ``j >= M_C`` are dilates of the mother
wavelet with scale ``s_j`` chosen so the response peaks at ``c_j``, weighted
by ``sqrt(s_j)`` (the L2-normalized dilation).  The M_C low-frequency
channels are *compensation* filters: translated copies of the channel-M_C
response at the fixed base scale, stepping down to DC in increments of the
channel spacing.  All channels share one decimation factor d, and channel j
carries the fractional delay ``d * delta_j`` realized exactly as a DFT-domain
linear phase.

Responses are sampled from the continuous-frequency formulas on the length-L
DFT grid over the channel's full effective support, including the part on
negative frequencies for channels near DC and the part beyond Nyquist for the
top channel; those tails land on wrap-around DFT bins.  The DC-centered and
Nyquist-centered channels are scaled by ``1/sqrt(2)`` because each coincides
with its own mirror image under the real-signal extension (module ``frame``)
and would otherwise be counted twice.  Responses are stored as compact bands
``(start_bin, values)``; the dense (M+1) x L matrix is available through
:attr:`FilterBankDesign.responses` when needed.

The delay phase of a band uses the signed frequency index, i.e. the ramp is
linear in continuous frequency across a channel's support, which keeps a
fractionally delayed bump coherent across the DC/Nyquist wrap.
"""

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .sequences import DelaySequence, zero_seq
from .wavelets import WaveletSpec, peak_frequency, support_interval, wavelet_hat

__all__ = [
    "GridParams",
    "FilterBankDesign",
    "build_design",
    "choose_decimation",
    "frequency_response_diag",
    "geometric_design",
]

#: The smallest-scale channel's response magnitude at the sampling-rate edge
#: of the evaluation grid must stay below this fraction of its peak.
TRUNCATION_TOL = 1e-4


@dataclass(frozen=True)
class GridParams:
    """Grid-level parameters of a filter bank.

    ``L`` is the signal length, ``d`` the decimation factor (``d`` divides
    ``L``; ``N = L/d`` frames), ``M`` the maximum channel index (M+1 channels
    total) and ``M_C`` the number of compensation channels.  ``spacing`` is
    ``"linear"`` for grid designs and ``"geometric"`` for the classical
    reference bank.
    """

    L: int
    M: int
    M_C: int
    d: int
    delays: DelaySequence
    spacing: str = "linear"
    f_min: float = 0.0
    f_max: float = 0.0
    sample_rate: float = 2.0

    def __post_init__(self):
        if self.d < 1 or self.L < 1:
            raise UsageError("d and L must be positive")
        if self.L % self.d != 0:
            raise UsageError(f"decimation {self.d} does not divide L = {self.L}")
        if self.M < 0:
            raise UsageError("M must be nonnegative")
        if self.spacing == "linear":
            if self.M < 1:
                raise UsageError("M must be at least 1")
            if not 1 <= self.M_C <= self.M:
                raise UsageError(
                    f"need 1 <= M_C <= M, got M_C={self.M_C}, M={self.M}"
                )
            if len(self.delays) != self.M + 1:
                raise UsageError(
                    f"delay sequence has {len(self.delays)} elements, "
                    f"need M+1 = {self.M + 1}"
                )
        if self.sample_rate <= 0:
            raise UsageError("sample_rate must be positive")

    @property
    def N(self):
        """Number of time frames, L/d."""
        return self.L // self.d

    @property
    def oversampling(self):
        """Redundancy 2(M+1)/d of the one-sided bank on real signals."""
        return 2.0 * (self.M + 1) / self.d


@dataclass(frozen=True)
class FilterBankDesign:
    """A fully sampled filter bank: grid, wavelet, and DFT-domain responses.

    Responses are held as bands: channel j's nonzero values occupy the
    ``len(values)`` consecutive DFT bins starting at ``start`` (mod L).
    ``center_freqs`` and ``scales`` are per channel and parallel to
    ``bands`` (compensation channels all carry the shared base scale).
    ``is_dual`` marks synthesis banks produced by ``frame.dual_design``;
    ``extension`` marks the two-sided real-signal extension.
    """

    params: GridParams
    wavelet: WaveletSpec | None
    center_freqs: np.ndarray
    scales: np.ndarray
    bands: list = field(repr=False)
    is_dual: bool = False
    real_dual: bool = False
    extension: bool = False
    source_id: str = ""

    @property
    def n_channels(self):
        return len(self.bands)

    @property
    def L(self):
        return self.params.L

    @property
    def d(self):
        return self.params.d

    @property
    def N(self):
        return self.params.N

    @property
    def responses(self):
        """Dense (n_channels, L) complex response matrix (built on demand)."""
        dense = np.zeros((self.n_channels, self.params.L), dtype=complex)
        for row, (start, values) in zip(dense, self.bands):
            _band_add(row, start, values)
        return dense

    @property
    def design_id(self):
        """Stable 16-hex-digit identifier of the design's defining data."""
        h = hashlib.sha1()
        p = self.params
        head = (
            f"{self.wavelet}|{p.L}|{p.M}|{p.M_C}|{p.d}|{p.sample_rate}|"
            f"{p.spacing}|{p.f_min}|{p.f_max}|{p.delays.kind}|"
            f"{self.is_dual}|{self.real_dual}|{self.extension}"
        )
        h.update(head.encode())
        h.update(np.ascontiguousarray(p.delays.elements).tobytes())
        return h.hexdigest()[:16]

    @classmethod
    def from_responses(cls, responses, d, sample_rate=2.0):
        """Wrap an explicit dense response matrix as a design (test plumbing).

        ``responses`` is any (n_channels, L) complex array with ``d | L``;
        center frequencies are taken at the per-channel magnitude argmax.
        """
        resp = np.asarray(responses, dtype=complex)
        if resp.ndim != 2:
            raise UsageError("responses must be a 2-d array")
        n_ch, L = resp.shape
        centers = np.argmax(np.abs(resp), axis=1) * (sample_rate / L)
        params = GridParams(
            L=L, M=n_ch - 1, M_C=0, d=d, delays=zero_seq(n_ch),
            spacing="raw", sample_rate=sample_rate,
        )
        bands = [(0, resp[j].copy()) for j in range(n_ch)]
        return cls(
            params=params, wavelet=None, center_freqs=centers,
            scales=np.zeros(0), bands=bands,
        )


def _band_add(row, start, values):
    """Add a contiguous (mod L) band into a dense length-L row."""
    L = row.shape[0]
    W = len(values)
    first = min(W, L - start)
    row[start:start + first] += values[:first]
    if first < W:
        row[:W - first] += values[first:]


def choose_decimation(M, target_oversampling):
    """Largest decimation factor d with redundancy ``2(M+1)/d`` at least the target.

    Callers may override d explicitly; this is the default used by the
    hyperparameter search and the CLI when only an oversampling rate is given.
    """
    if target_oversampling < 1.0:
        raise UsageError("target oversampling must be at least 1")
    return max(1, int(np.floor(2.0 * (M + 1) / target_oversampling)))


def _sample_channel(spec, amp, scale, shift, delay_shift, L, sample_rate, support):
    """Sample ``amp * psi_hat(scale * (xi + shift))`` over its support band.

    ``delay_shift`` is the time shift in samples (``d * delta_j``); the phase
    ramp is linear in the signed frequency index.  Returns ``(start, values)``
    with ``start`` reduced mod L.
    """
    xi_lo = support[0] / scale - shift
    xi_hi = support[1] / scale - shift
    kmin = -(L // 2) + 1
    kmax = L - 1
    k0 = max(kmin, int(np.ceil(xi_lo * L / sample_rate)))
    k1 = min(kmax, int(np.floor(xi_hi * L / sample_rate)))
    if k1 < k0:
        return 0, np.zeros(1, dtype=complex)
    if k1 - k0 + 1 > L:
        k1 = k0 + L - 1
    ks = np.arange(k0, k1 + 1)
    xk = ks * (sample_rate / L)
    vals = amp * wavelet_hat(spec, scale * (xk + shift))
    ramp = np.exp(-2j * np.pi * ks * (delay_shift / L))
    return k0 % L, vals.astype(complex) * ramp


def build_design(wavelet, M, M_C, d, L, delays=None, sample_rate=2.0):
    """Construct the uniform-grid filter bank design.

    Parameters
    ----------
    wavelet : WaveletSpec
        Mother wavelet family and shape parameter.
    M : int
        Maximum channel index; the bank has M+1 channels with center
        frequencies ``j * sample_rate / (2*M)``.
    M_C : int
        Number of compensation channels (indices ``0 .. M_C-1``).
    d : int
        Decimation factor; must divide L.
    L : int
        Signal length in samples.
    delays : DelaySequence, optional
        M+1 per-channel delays; defaults to all zeros.  Element j is
        assigned to channel j in ascending frequency order.
    sample_rate : float, optional
        Units of the frequency axis; Nyquist is ``sample_rate / 2``.

    Returns
    -------
    FilterBankDesign

    Raises
    ------
    UsageError
        On grid violations, or when the smallest-scale channel's response
        has not decayed below ``TRUNCATION_TOL`` of its peak at the edge of
        the evaluation grid (the wavelet is too broadband for this grid).
    """
    if delays is None:
        delays = zero_seq(M + 1)
    params = GridParams(L=int(L), M=int(M), M_C=int(M_C), d=int(d),
                        delays=delays, sample_rate=float(sample_rate))
    support = support_interval(wavelet)
    xpk = peak_frequency(wavelet)
    nyquist = sample_rate / 2.0
    spacing = sample_rate / (2.0 * M)
    centers = np.arange(M + 1) * spacing

    # Smallest scale (channel M, centered at Nyquist): require decay at the
    # grid edge xi = sample_rate, where the scaled argument is 2 * xpk.
    edge = wavelet_hat(wavelet, (xpk / nyquist) * sample_rate)
    if edge >= TRUNCATION_TOL:
        raise UsageError(
            f"wavelet {wavelet} is too broadband: response at the grid edge is "
            f"{edge:.2e} of peak (limit {TRUNCATION_TOL:.0e}); increase the "
            "shape parameter"
        )

    base_scale = xpk / (M_C * spacing)
    if wavelet.family == "bspline4" and 2.0 * M_C <= 2.2 * wavelet.param:
        warnings.warn(
            "compensation bumps barely overlap (compact B-spline support); "
            "the bank is likely ill conditioned - increase M_C",
            stacklevel=2,
        )

    bands = []
    scales = np.zeros(M + 1)
    for j in range(M + 1):
        if j >= M_C:
            scale = xpk / centers[j]
            shift = 0.0
        else:
            scale = base_scale
            shift = (M_C - j) * spacing
        scales[j] = scale
        start, vals = _sample_channel(
            wavelet, np.sqrt(scale), scale, shift,
            d * delays.elements[j], L, sample_rate, support,
        )
        if j == 0 or j == M:
            vals = vals / np.sqrt(2.0)
        bands.append((start, vals))

    return FilterBankDesign(
        params=params, wavelet=wavelet, center_freqs=centers,
        scales=scales, bands=bands,
    )


def geometric_design(wavelet, channels, f_min, f_max, d, L, sample_rate=2.0):
    """Classical wavelet bank with geometrically spaced centers (reference).

    No compensation channels and no delays; every channel is a dilate of the
    mother wavelet.  Used as the fixed reference representation for the
    spectral-error metric and as a classical-decimation baseline.

    Parameters
    ----------
    wavelet : WaveletSpec
    channels : int
        Number of channels (at least 1).
    f_min, f_max : float
        First and last center frequency; ``0 < f_min <= f_max <= Nyquist``.
    d, L : int
        Uniform decimation factor and signal length, ``d | L``.
    """
    if channels < 1:
        raise UsageError("need at least one channel")
    nyquist = sample_rate / 2.0
    if not 0.0 < f_min <= f_max <= nyquist:
        raise UsageError("need 0 < f_min <= f_max <= Nyquist")
    params = GridParams(
        L=int(L), M=channels - 1, M_C=0, d=int(d),
        delays=zero_seq(channels), spacing="geometric",
        f_min=float(f_min), f_max=float(f_max), sample_rate=float(sample_rate),
    )
    support = support_interval(wavelet)
    xpk = peak_frequency(wavelet)
    if channels == 1:
        centers = np.array([float(f_min)])
    else:
        centers = np.geomspace(f_min, f_max, channels)
    bands = []
    scales = xpk / centers
    for j in range(channels):
        start, vals = _sample_channel(
            wavelet, np.sqrt(scales[j]), scales[j], 0.0, 0.0, L, sample_rate,
            support,
        )
        if abs(centers[j] - nyquist) < 1e-12 * nyquist or centers[j] == 0.0:
            vals = vals / np.sqrt(2.0)
        bands.append((start, vals))
    return FilterBankDesign(
        params=params, wavelet=wavelet, center_freqs=centers,
        scales=scales, bands=bands,
    )


def frequency_response_diag(design):
    """Total power response ``Psi[k] = sum_j |response_j[k]|**2``.

    Delay phases drop out; for an undecimated (d = 1) bank the frame bounds
    are exactly ``min(Psi)/d`` and ``max(Psi)/d``.
    """
    psi = np.zeros(design.L)
    for start, values in design.bands:
        _band_add(psi, start, np.abs(values) ** 2)
    return psi
