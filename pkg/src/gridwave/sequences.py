"""One-dimensional low-discrepancy sequences used as per-channel delays.

A filter bank with one delay per channel needs M+1 numbers in [0, 1) that are
as evenly spread as possible; clustering delays degrades the conditioning of
the synthesis problem.  Two classic constructions are provided:

* Kronecker sequences ``frac(alpha * l)``, optimal for ``alpha`` equivalent to
  the golden ratio.  :func:`golden_alpha` returns the canonical choice
  ``(3 - sqrt(5)) / 2``.
* Digital (0,1)-sequences in base 2 built from a generator matrix over Z2.
  The default matrix is lower bidiagonal (ones on the diagonal and first
  subdiagonal), which yields the sequence 0, 0.75, 0.375, 0.625, ...  Every
  run of ``2**m`` consecutive points places exactly one point in each dyadic
  interval of length ``2**-m``; :func:`check_elementary_intervals` verifies
  that property.

All generators are pure functions of their arguments: repeated calls return
bit-identical values.  Arithmetic for the digital method is carried out on
exact integer bits and converted to floating point only on output.

Examples
--------
>>> kronecker_seq(golden_alpha(), 3).elements
array([0.        , 0.38196601, 0.76393202])
>>> digital_seq(4).elements
array([0.   , 0.75 , 0.375, 0.625])
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

__all__ = [
    "DelaySequence",
    "golden_alpha",
    "kronecker_seq",
    "digital_seq",
    "zero_seq",
    "make_delays",
    "band_generator_matrix",
    "check_elementary_intervals",
]

#: Bits of precision carried by the digital method (double-precision mantissa).
PRECISION_BITS = 53


@dataclass(frozen=True)
class DelaySequence:
    """A tagged, immutable list of per-channel delays in [0, 1).

    Attributes
    ----------
    kind : str
        One of ``"kronecker"``, ``"digital"`` or ``"zero"``.
    elements : numpy.ndarray
        Delay values, one per channel, each in the half-open unit interval.
    param : object
        The defining parameter: ``alpha`` for Kronecker sequences, the
        generator matrix for digital sequences, ``None`` for zero delays.
    """

    kind: str
    elements: np.ndarray
    param: object = field(default=None, repr=False)

    def __post_init__(self):
        elems = np.asarray(self.elements, dtype=float)
        if elems.ndim != 1 or elems.size == 0:
            raise UsageError("delay sequence must be a nonempty 1-d array")
        if np.any(elems < 0.0) or np.any(elems >= 1.0):
            raise UsageError("delays must lie in the half-open interval [0, 1)")
        object.__setattr__(self, "elements", elems)

    def __len__(self):
        return self.elements.size

    @property
    def length(self):
        return self.elements.size


def golden_alpha():
    """Return ``1 - 1/phi = (3 - sqrt(5)) / 2``, the golden Kronecker parameter.

    All numbers equivalent to the golden ratio share the optimal discrepancy
    order; this canonical representative has continued-fraction partial
    quotients bounded by 2.
    """
    return (3.0 - np.sqrt(5.0)) / 2.0


def kronecker_seq(alpha, n):
    """First ``n`` points of the Kronecker sequence ``frac(alpha * l)``.

    Parameters
    ----------
    alpha : float
        Step parameter, strictly inside (0, 1).  Irrational values give
        pairwise-distinct, well-spread points; :func:`golden_alpha` is the
        standard choice.
    n : int
        Number of points, at least 1.

    Returns
    -------
    DelaySequence
        Elements ``frac(alpha * l)`` for ``l = 0 .. n-1``.
    """
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    if n < 1:
        raise UsageError("sequence length must be at least 1")
    vals = np.mod(alpha * np.arange(n, dtype=float), 1.0)
    return DelaySequence("kronecker", vals, param=float(alpha))


def band_generator_matrix(size):
    """The default generator matrix: ones on the diagonal and first subdiagonal.

    Row ``r`` (0-based) has ones in columns ``r-1`` and ``r``; row 0 only in
    column 0.  Every leading square submatrix is unit lower triangular and
    hence non-singular over Z2.
    """
    if size < 1:
        raise UsageError("matrix size must be at least 1")
    mat = np.eye(size, dtype=np.uint8)
    idx = np.arange(1, size)
    mat[idx, idx - 1] = 1
    return mat


def _validate_generator(matrix, bits):
    """Check the leading ``bits`` x ``bits`` submatrix is non-singular over Z2."""
    m = np.array(matrix, dtype=np.uint8) & 1
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError("generator matrix must be square")
    if m.shape[0] < bits:
        raise UsageError(
            f"generator matrix of size {m.shape[0]} too small for {bits} bits"
        )
    # Gaussian elimination over Z2 on the leading submatrix.
    sub = m[:bits, :bits].copy()
    row = 0
    for col in range(bits):
        pivots = np.nonzero(sub[row:, col])[0]
        if pivots.size == 0:
            raise UsageError(
                f"generator matrix leading {bits}x{bits} submatrix is singular over Z2"
            )
        piv = row + pivots[0]
        sub[[row, piv]] = sub[[piv, row]]
        eliminate = np.nonzero(sub[row + 1:, col])[0] + row + 1
        sub[eliminate] ^= sub[row]
        row += 1
    return m


def digital_seq(n, matrix=None):
    """First ``n`` points of a digital (0,1)-sequence in base 2.

    Point ``l`` is obtained by applying the generator matrix over Z2 to the
    binary digits of ``l`` and reading the resulting digit string as a binary
    fraction: ``x_l = sum_r eta_r * 2**-(r+1)`` with
    ``eta_r = sum_k matrix[r, k] * l_k  (mod 2)``.

    Parameters
    ----------
    n : int
        Number of points, at least 1.
    matrix : array_like of 0/1, optional
        Square generator matrix; rows index output digits, columns index
        input digits of ``l``.  Defaults to :func:`band_generator_matrix`,
        whose first points are 0, 0.75, 0.375, 0.625.  The identity matrix
        yields the van der Corput sequence 0, 0.5, 0.25, 0.75, ...

    Returns
    -------
    DelaySequence

    Raises
    ------
    UsageError
        If ``n < 1`` or the leading submatrix of ``matrix`` is singular.
    """
    if n < 1:
        raise UsageError("sequence length must be at least 1")
    in_bits = max((n - 1).bit_length(), 1)
    # Output digits can run one past the input digits (subdiagonal carry).
    out_bits = min(in_bits + 1, PRECISION_BITS)
    if matrix is None:
        mat = band_generator_matrix(out_bits)
    else:
        if np.shape(matrix)[0] < in_bits:
            raise UsageError(
                f"generator matrix of size {np.shape(matrix)[0]} cannot index "
                f"{n} points ({in_bits} digits needed)"
            )
        mat = _validate_generator(matrix, in_bits)
        out_bits = min(mat.shape[0], PRECISION_BITS)
    weights = 0.5 ** (1.0 + np.arange(out_bits))
    vals = np.empty(n, dtype=float)
    for ell in range(n):
        digits = (ell >> np.arange(in_bits)) & 1
        cols = mat[:out_bits, :in_bits]
        eta = (cols @ digits) & 1
        vals[ell] = float(eta @ weights)
    return DelaySequence("digital", vals, param=mat)


def zero_seq(n):
    """All-zero delays of length ``n`` (the undelayed uniform grid)."""
    if n < 1:
        raise UsageError("sequence length must be at least 1")
    return DelaySequence("zero", np.zeros(n), param=None)


def make_delays(kind, n, alpha=None, matrix=None):
    """Build a delay sequence by kind name, as selected by ``--delays``.

    ``kind`` is one of ``"kronecker"`` (default ``alpha=golden_alpha()``),
    ``"digital"`` (default matrix from :func:`band_generator_matrix`), or
    ``"zero"``.
    """
    if kind == "kronecker":
        return kronecker_seq(golden_alpha() if alpha is None else alpha, n)
    if kind == "digital":
        return digital_seq(n, matrix)
    if kind == "zero":
        return zero_seq(n)
    raise UsageError(f"unknown delay kind {kind!r}")


def check_elementary_intervals(seq, m):
    """Verify the defining property of a (0,1)-sequence at resolution ``m``.

    Returns True iff within every block of ``2**m`` consecutive points of
    ``seq``, each dyadic interval ``[k/2**m, (k+1)/2**m)`` contains exactly
    one point.

    Parameters
    ----------
    seq : DelaySequence
        Its length must be a multiple of ``2**m``.
    m : int
        Dyadic resolution; ``m = 0`` is trivially true.
    """
    if m < 0:
        raise UsageError("resolution m must be nonnegative")
    block = 1 << m
    npts = len(seq)
    if block > npts:
        raise UsageError(f"2**m = {block} exceeds the sequence length {npts}")
    if npts % block != 0:
        raise UsageError("sequence length must be a multiple of 2**m")
    cells = np.floor(seq.elements * block).astype(np.int64)
    for start in range(0, npts, block):
        counts = np.bincount(cells[start:start + block], minlength=block)
        if np.any(counts != 1):
            return False
    return True
