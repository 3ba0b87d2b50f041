"""Analytic mother wavelets: frequency responses and derived quantities.

Two families are supported, both defined directly in the frequency domain and
both vanishing for nonpositive frequencies (analytic wavelets):

* ``cauchy`` with shape parameter ``alpha > 1``: response proportional to
  ``xi**((alpha-1)/2) * exp(-2*pi*xi)``, peaking at ``(alpha-1)/(4*pi)``.
  Larger ``alpha`` narrows the relative bandwidth.
* ``bspline4`` with center ``xi_fm > 0``: a fourth-order cardinal B-spline
  bump centered at ``xi_fm``, compactly supported on ``[xi_fm-1, xi_fm+1]``.

Responses are sup-normalized (peak value exactly 1); the scale-dependent
amplitude weight of a filter bank is applied at design time.  The Cauchy
response is evaluated in log space so large ``alpha`` cannot overflow.

The Q-factor (center frequency over -3 dB bandwidth, with the crossing taken
on the squared magnitude at ``10**-0.3`` of the peak) is computed by flank
bisection to relative tolerance 1e-9.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

__all__ = [
    "WaveletSpec",
    "wavelet_hat",
    "peak_frequency",
    "q_factor",
    "support_interval",
]

FAMILIES = ("cauchy", "bspline4")

#: Relative magnitude below which a response is treated as numerically zero
#: when locating effective supports.
SUPPORT_TOL = 1e-12

#: Squared-magnitude -3 dB crossing height used for Q-factors.
_Q_CROSSING = 10.0 ** -0.3


@dataclass(frozen=True)
class WaveletSpec:
    """Mother-wavelet family plus its single shape hyperparameter.

    Attributes
    ----------
    family : str
        ``"cauchy"`` or ``"bspline4"``.
    param : float
        ``alpha`` for Cauchy (must exceed 1), ``xi_fm`` for the B-spline
        (must be positive).
    """

    family: str
    param: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown wavelet family {self.family!r}")
        if self.family == "cauchy" and not self.param > 1.0:
            raise UsageError(f"cauchy alpha must exceed 1, got {self.param}")
        if self.family == "bspline4" and not self.param > 0.0:
            raise UsageError(f"bspline4 center must be positive, got {self.param}")

    @classmethod
    def cauchy(cls, alpha):
        return cls("cauchy", float(alpha))

    @classmethod
    def bspline4(cls, xi_fm):
        return cls("bspline4", float(xi_fm))

    @classmethod
    def parse(cls, text):
        """Parse a CLI-style descriptor such as ``"cauchy:300"``."""
        family, _, value = str(text).partition(":")
        family = family.strip().lower()
        if family not in FAMILIES or not value:
            raise UsageError(
                f"wavelet descriptor {text!r} must look like 'cauchy:ALPHA' "
                "or 'bspline4:XIFM'"
            )
        try:
            return cls(family, float(value))
        except ValueError as exc:
            raise UsageError(f"bad wavelet parameter in {text!r}") from exc

    def __str__(self):
        return f"{self.family}:{self.param:g}"


def _bspline4(x):
    """Central fourth-order cardinal B-spline, support [-2, 2], peak 2/3."""
    ax = np.abs(x)
    inner = (4.0 - 6.0 * ax**2 + 3.0 * ax**3) / 6.0
    outer = (2.0 - ax) ** 3 / 6.0
    return np.where(ax <= 1.0, inner, np.where(ax <= 2.0, outer, 0.0))


def wavelet_hat(spec, xi):
    """Sup-normalized frequency response of the mother wavelet.

    Parameters
    ----------
    spec : WaveletSpec
    xi : float or array_like
        Frequencies; any real values are accepted and nonpositive ones map
        to 0 (analyticity).

    Returns
    -------
    float or numpy.ndarray
        Nonnegative response with maximum value 1 at :func:`peak_frequency`.
    """
    xi_arr = np.asarray(xi, dtype=float)
    scalar = xi_arr.ndim == 0
    xi_arr = np.atleast_1d(xi_arr)
    out = np.zeros_like(xi_arr)
    pos = xi_arr > 0.0
    if spec.family == "cauchy":
        beta = (spec.param - 1.0) / 2.0
        xpk = peak_frequency(spec)
        u = xi_arr[pos] / xpk
        # log response relative to the peak: beta*(ln u - u + 1)
        out[pos] = np.exp(beta * (np.log(u) - u + 1.0))
    else:
        # Bump halves by 2 per unit frequency away from the center.
        out[pos] = _bspline4(2.0 * (xi_arr[pos] - spec.param)) / (2.0 / 3.0)
    return float(out[0]) if scalar else out


def peak_frequency(spec):
    """Frequency at which the response attains its maximum of 1.

    ``(alpha - 1) / (4*pi)`` for Cauchy, the center ``xi_fm`` for the
    B-spline bump.
    """
    if spec.family == "cauchy":
        return (spec.param - 1.0) / (4.0 * np.pi)
    return spec.param


def support_interval(spec, tol=SUPPORT_TOL):
    """Effective support ``(xi_lo, xi_hi)`` of the prototype response.

    Outside the interval the response is below ``tol`` (Cauchy) or exactly
    zero (B-spline).  Endpoints are found by bisection on the log response,
    which for the Cauchy family is ``beta * (ln u - u + 1)`` with
    ``u = xi / xi_pk``.
    """
    if spec.family == "bspline4":
        return max(spec.param - 1.0, 0.0), spec.param + 1.0
    beta = (spec.param - 1.0) / 2.0
    xpk = peak_frequency(spec)
    target = np.log(tol) / beta  # solve ln u - u + 1 = target

    def g(u):
        return np.log(u) - u + 1.0 - target

    lo = _bisect(g, 1e-300, 1.0)
    hi_bracket = 2.0
    while g(hi_bracket) > 0.0:
        hi_bracket *= 2.0
    hi = _bisect(g, 1.0, hi_bracket)
    return lo * xpk, hi * xpk


def _bisect(fn, a, b, rel_tol=1e-13, max_iter=200):
    """Root of a monotone sign-changing function on [a, b] by bisection."""
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise UsageError("bisection bracket does not change sign")
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
        if b - a <= rel_tol * max(abs(a), abs(b)):
            break
    return 0.5 * (a + b)


def q_factor(spec):
    """Center frequency divided by the -3 dB bandwidth of the response.

    The crossing height is ``10**-0.3`` of the peak (half power on the
    squared magnitude).  Both flank crossings are located by bisection to
    relative tolerance 1e-9; the Q-factor is dilation invariant, so it
    characterizes every channel of a wavelet bank built from ``spec``.
    """
    xpk = peak_frequency(spec)

    def h(xi):
        return wavelet_hat(spec, xi) - _Q_CROSSING

    lo_bracket = xpk
    while h(lo_bracket) > 0.0 and lo_bracket > 1e-300:
        lo_bracket /= 2.0
    if h(lo_bracket) > 0.0:
        raise UsageError("cannot bracket the lower -3 dB crossing")
    xi_lo = _bisect(h, lo_bracket, xpk, rel_tol=1e-10)
    hi_bracket = 2.0 * xpk
    while h(hi_bracket) > 0.0:
        hi_bracket *= 2.0
    xi_hi = _bisect(h, xpk, hi_bracket, rel_tol=1e-10)
    return xpk / (xi_hi - xi_lo)
