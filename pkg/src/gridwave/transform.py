"""Forward and inverse transforms as DFT-domain uniform filter banks.

Analysis filters a signal's DFT with each channel's conjugated response and
subsamples by the decimation factor d.  Subsampling is performed in the
frequency domain: the filtered spectrum of length L is folded into N = L/d
aliasing classes (bin k adds into class k mod N) and one length-N inverse FFT
per channel yields the coefficient row.  The per-channel cost is dominated by
the channel's band width, so compactly supported responses make analysis
cheap; one length-L FFT of the input is shared by all channels.

Synthesis is the transpose: coefficient rows are transformed by length-N
FFTs, periodically extended to length L, multiplied by the synthesis
responses and summed over channels, followed by one length-L inverse FFT.
With the same filters this is exactly the adjoint of analysis; with the
canonical dual filters of module ``frame`` it inverts analysis.  For
real-mode coefficients the dual is computed against the two-sided extension
and the real signal is recovered as twice the real part of the one-sided
synthesis.

Everything is circular (periodic boundary), which makes decimation exact on
finite signals and matches the finite-dimensional frame analysis.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

__all__ = ["CoefMatrix", "analyze", "synthesize"]


@dataclass
class CoefMatrix:
    """Time-frequency coefficient matrix produced by :func:`analyze`.

    Attributes
    ----------
    data : numpy.ndarray
        Complex matrix, one row per channel, one column per time frame;
        column l holds the coefficients at nominal frame time ``d*l``
        (channel j's true sample point is ``d*(l + delta_j)``).
    d : int
        Decimation factor; ``data.shape[1] * d`` is the signal length.
    design_id : str
        Identifier of the producing design, checked at synthesis time.
    real_mode : bool
        Whether synthesis should use the real-signal convention.
    orig_len : int or None
        Original signal length before zero-padding (file/CLI bookkeeping).
    """

    data: np.ndarray
    d: int
    design_id: str
    real_mode: bool = False
    orig_len: int | None = None

    @property
    def n_channels(self):
        return self.data.shape[0]

    @property
    def n_frames(self):
        return self.data.shape[1]

    @property
    def L(self):
        return self.d * self.data.shape[1]


def analyze(design, signal, real_mode=None):
    """Analysis coefficients ``data[j, l] = <signal, atom_{l,j}>``.

    Parameters
    ----------
    design : FilterBankDesign
    signal : array_like
        Real or complex vector of length ``design.L`` with finite entries.
    real_mode : bool, optional
        Tag for the synthesis convention; defaults to True exactly when the
        input array is real.

    Returns
    -------
    CoefMatrix
        Shape ``(n_channels, N)`` with ``N = L/d``.
    """
    f = np.asarray(signal)
    if f.ndim != 1:
        raise UsageError("signal must be one-dimensional")
    L, N, d = design.L, design.N, design.d
    if f.shape[0] != L:
        raise UsageError(f"signal length {f.shape[0]} does not match design L = {L}")
    if not np.all(np.isfinite(f)):
        raise UsageError("signal contains non-finite samples")
    if real_mode is None:
        real_mode = bool(np.isrealobj(f))

    F = np.fft.fft(f)
    rows = np.empty((design.n_channels, N), dtype=complex)
    for j, (start, vals) in enumerate(design.bands):
        W = len(vals)
        filtered = F[(start + np.arange(W)) % L] * np.conj(vals)
        i0 = start % N
        n_blocks = (i0 + W + N - 1) // N
        folded = np.zeros(n_blocks * N, dtype=complex)
        folded[i0:i0 + W] = filtered
        rows[j] = folded.reshape(n_blocks, N).sum(axis=0)
    data = np.fft.ifft(rows, axis=1) / d
    return CoefMatrix(data=data, d=d, design_id=design.design_id,
                      real_mode=bool(real_mode))


def synthesize(design, coefs):
    """Synthesize a length-L signal from coefficients.

    With ``design.is_dual`` true (from ``frame.dual_design``) this inverts
    :func:`analyze`.  With the analysis design itself it applies the adjoint
    operator instead, which the adjointness tests rely on.

    Parameters
    ----------
    design : FilterBankDesign
        Synthesis bank; its ``L``, ``d`` and channel count must match.
    coefs : CoefMatrix
        ``coefs.real_mode`` requires a real-mode dual and yields a real
        vector (twice the real part of the one-sided synthesis); otherwise
        the complex synthesis is returned.

    Returns
    -------
    numpy.ndarray
        Length-L signal, real for real-mode synthesis.
    """
    L, N, d = design.L, design.N, design.d
    if coefs.data.shape != (design.n_channels, N) or coefs.d != d:
        raise UsageError(
            f"coefficient shape {coefs.data.shape} (d={coefs.d}) does not match "
            f"the bank's {(design.n_channels, N)} (d={d})"
        )
    expected = design.source_id if design.is_dual else design.design_id
    if coefs.design_id and expected and coefs.design_id != expected:
        raise UsageError(
            "coefficients were produced by a different design "
            f"({coefs.design_id} vs {expected})"
        )
    if coefs.real_mode and not design.real_dual:
        raise UsageError(
            "real-mode coefficients require a dual computed with real_mode=True"
        )

    S = np.fft.fft(coefs.data, axis=1)
    spectrum = np.zeros(L, dtype=complex)
    for j, (start, vals) in enumerate(design.bands):
        W = len(vals)
        contrib = S[j, (start + np.arange(W)) % N] * vals
        first = min(W, L - start)
        spectrum[start:start + first] += contrib[:first]
        if first < W:
            spectrum[:W - first] += contrib[first:]
    out = np.fft.ifft(spectrum)
    if coefs.real_mode:
        return 2.0 * np.real(out)
    return out
