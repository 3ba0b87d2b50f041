"""Scikit-learn estimator facade over the functional transform core.

``WaveletFilterBank`` wraps design construction, dual computation, and
the analysis/synthesis pair behind the familiar
``fit`` / ``transform`` / ``inverse_transform`` surface, so the wavelet
representation can sit inside pipelines and grid searches.  Rows of
``X`` are signals; the transform output flattens the coefficient matrix
channel-major into one complex feature vector per signal.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .design import build_design
from .errors import UsageError
from .frame import dual_design
from .sequences import make_delays
from .transform import CoefMatrix, analyze, synthesize
from .wavelets import WaveletSpec

__all__ = ["WaveletFilterBank"]


class WaveletFilterBank(BaseEstimator, TransformerMixin):
    """Invertible wavelet analysis as a scikit-learn transformer.

    Parameters
    ----------
    wavelet : str or WaveletSpec, default "cauchy:300"
        Mother wavelet, parseable as ``family:param``.
    m : int, default 253
        Total channel count M; the bank has M + 1 channels.
    m_c : int, default 5
        Compensation channels below the first wavelet channel.
    d : int, default 254
        Uniform decimation factor (hop size).
    delays : str, default "kronecker"
        Delay sequence kind: "kronecker", "digital", or "zero".
    real_mode : bool, default True
        Treat rows of X as real signals and reconstruct through the
        real-signal dual convention.

    Attributes
    ----------
    design_ : FilterBankDesign
        The fitted analysis bank (built on the padded length).
    dual_ : FilterBankDesign
        Its canonical dual, used by ``inverse_transform``.
    n_features_in_ : int
        Signal length seen at fit time; inputs are zero-padded to the
        next multiple of ``d`` internally and trimmed on inversion.
    """

    def __init__(self, wavelet="cauchy:300", m=253, m_c=5, d=254,
                 delays="kronecker", real_mode=True):
        self.wavelet = wavelet
        self.m = m
        self.m_c = m_c
        self.d = d
        self.delays = delays
        self.real_mode = real_mode

    def _as_matrix(self, X):
        X = np.asarray(X)
        if X.ndim != 2:
            raise UsageError("X must be 2D: one signal per row")
        return X

    def fit(self, X, y=None):
        """Build the bank and its dual for signals of ``X.shape[1]`` samples."""
        X = self._as_matrix(X)
        n = X.shape[1]
        if n < 1:
            raise UsageError("signals must have at least one sample")
        spec = (self.wavelet if isinstance(self.wavelet, WaveletSpec)
                else WaveletSpec.parse(self.wavelet))
        L = -(-n // self.d) * self.d
        self.design_ = build_design(spec, self.m, self.m_c, self.d, L,
                                    make_delays(self.delays, self.m + 1))
        self.dual_ = dual_design(self.design_, real_mode=self.real_mode)
        self.n_features_in_ = n
        return self

    def _pad(self, row):
        padded = np.zeros(self.design_.L,
                          dtype=float if self.real_mode else complex)
        padded[:row.size] = row
        return padded

    def transform(self, X):
        """Analysis coefficients, flattened channel-major per signal.

        Returns a complex array of shape
        ``(n_samples, (m + 1) * (L / d))``.
        """
        check_is_fitted(self, "design_")
        X = self._as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise UsageError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        rows = [analyze(self.design_, self._pad(row),
                        real_mode=self.real_mode).data.ravel() for row in X]
        return np.vstack(rows)

    def inverse_transform(self, Xt):
        """Reconstruct signals from flattened coefficients."""
        check_is_fitted(self, "design_")
        Xt = np.asarray(Xt)
        shape = (self.design_.n_channels, self.design_.N)
        if Xt.ndim != 2 or Xt.shape[1] != shape[0] * shape[1]:
            raise UsageError(
                f"coefficient rows must have {shape[0] * shape[1]} entries")
        out = np.empty((Xt.shape[0], self.n_features_in_),
                       dtype=float if self.real_mode else complex)
        for i, row in enumerate(Xt):
            coefs = CoefMatrix(row.reshape(shape), self.design_.d,
                               self.design_.design_id,
                               real_mode=self.real_mode)
            signal = synthesize(self.dual_, coefs)
            out[i] = signal[:self.n_features_in_]
        return out
