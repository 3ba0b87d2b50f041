"""Frame-operator factorization: bounds, duals, and real-signal extension.

For a bank with uniform decimation d on circular signals of length L, the
frame operator block-diagonalizes over the N = L/d frequency-bin classes
``r, r+N, ..., r+(d-1)N``.  The d x d Hermitian block of class r is

    Phi(r)[m, m'] = (1/d) * sum_j G_j[r + mN] * conj(G_j[r + m'N]),

and the optimal frame bounds are the extreme eigenvalues over all classes:
``A = min_r lambda_min(Phi(r))``, ``B = max_r lambda_max(Phi(r))``.  The 1/d
constant is pinned by :func:`brute_force_bounds`, which materializes every
translated atom and takes extreme squared singular values; both routes agree
to machine precision.  The canonical dual filters solve
``Phi(r) @ [g~_j(r + m'N)]_{m'} = [g_j(r + mN)]_m`` per class, one Hermitian
linear system each.

Real signals use the two-sided extension: the channel set is augmented with
the mirror channels ``mirror(g)[k] = conj(g[(L-k) mod L])`` and the dual is
solved against the one-sided responses only; synthesis then takes twice the
real part (module ``transform``).  Because the extended channel set is closed
under mirroring, ``Phi(N-r)`` is similar to ``conj(Phi(r))`` up to a row
reversal, so real-mode bounds and duals only visit classes ``r <= N/2`` and
derive the rest, which halves the assembly and factorization work.

Blocks are assembled directly from the banded response storage in chunks of
classes, so the dense (M+1) x L response matrix is never formed for bounds or
duals of banded designs.
"""

from dataclasses import dataclass, replace

import numpy as np

from .design import FilterBankDesign
from .errors import NonInvertibleError, UsageError

__all__ = [
    "FrameDiagnostics",
    "FrameBlocks",
    "frame_blocks",
    "frame_bounds",
    "dual_design",
    "real_extend",
    "brute_force_bounds",
]

#: Relative eigenvalue floor below which a bank is declared non-invertible.
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class FrameDiagnostics:
    """Optimal frame bounds of a bank on its finite signal space.

    ``A`` and ``B`` are the extreme eigenvalues of the frame-operator blocks,
    ``R_FB = B/A`` their ratio (infinity when the bank is not invertible),
    and ``argmin_bin``/``argmax_bin`` the frequency-bin classes attaining
    the extremes.
    """

    A: float
    B: float
    R_FB: float
    argmin_bin: int
    argmax_bin: int
    invertible: bool


@dataclass(frozen=True)
class FrameBlocks:
    """Materialized frame-operator blocks, one d x d matrix per bin class."""

    blocks: np.ndarray
    d: int
    N: int
    kappa: float


def _mirror_bands(bands, L):
    """Mirror every band: response[k] -> conj(response[(L-k) mod L])."""
    out = []
    for start, vals in bands:
        end = (start + len(vals) - 1) % L
        out.append(((L - end) % L, np.conj(vals[::-1])))
    return out


def _assemble_chunk(bands, L, d, N, rr, n_rhs=0, with_phi=True):
    """Frame blocks (and optionally stacked responses) for classes ``rr``.

    Returns ``(Phi, R)`` where ``Phi[c]`` is the d x d block of class
    ``rr[c]`` (already scaled by 1/d) and ``R[c][m][j] = G_j[rr[c] + mN]``
    for the first ``n_rhs`` bands (``R`` is None when ``n_rhs`` is 0).
    ``with_phi=False`` skips the block accumulation and only gathers ``R``.
    Row/column index d of the internal scratch matrices absorbs
    out-of-support positions.
    """
    nc = len(rr)
    phi = np.zeros((nc, d + 1, d + 1), dtype=complex) if with_phi else None
    rhs = np.zeros((nc, d + 1, n_rhs), dtype=complex) if n_rhs else None
    c_idx = np.arange(nc)
    scan = bands if with_phi else bands[:n_rhs]
    for j, (start, vals) in enumerate(scan):
        W = len(vals)
        h_max = (W + N - 1) // N
        i0 = (rr - start) % N
        idx = i0[None, :] + N * np.arange(h_max)[:, None]
        valid = idx < W
        col = np.where(valid, vals[np.minimum(idx, W - 1)], 0.0)
        m_row = np.where(valid, ((start + idx) % L) // N, d)
        if with_phi:
            phi[c_idx[None, None, :], m_row[:, None, :], m_row[None, :, :]] += (
                col[:, None, :] * np.conj(col)[None, :, :]
            )
        if rhs is not None and j < n_rhs:
            rhs[c_idx[None, :], m_row, j] = col
    if with_phi:
        phi = phi[:, :d, :d] / d
    if rhs is not None:
        rhs = rhs[:, :d, :]
    return phi, rhs


def _solve_bands(design, real_mode):
    """Bands entering the frame operator, honoring the real-signal extension."""
    if design.extension and real_mode:
        raise UsageError("design is already a two-sided extension")
    bands = list(design.bands)
    if real_mode:
        bands = bands + _mirror_bands(bands, design.L)
    return bands


def frame_blocks(design, real_mode=False, max_bytes=2**31):
    """Materialize all N frame-operator blocks of a design.

    Memory grows as ``N * d**2``; a :class:`~gridwave.errors.UsageError` is
    raised beyond ``max_bytes``.  :func:`frame_bounds` and
    :func:`dual_design` stream over classes instead and have no such limit.
    """
    L, d, N = design.L, design.d, design.N
    need = N * (d + 1) ** 2 * 16
    if need > max_bytes:
        raise UsageError(
            f"materializing {N} blocks of size {d}x{d} needs ~{need:.2e} bytes; "
            "use frame_bounds/dual_design, which stream over bin classes"
        )
    bands = _solve_bands(design, real_mode)
    phi, _ = _assemble_chunk(bands, L, d, N, np.arange(N))
    return FrameBlocks(blocks=phi, d=d, N=N, kappa=1.0 / d)


def frame_bounds(design, real_mode=False, chunk=32):
    """Optimal frame bounds by Hermitian eigendecomposition per bin class.

    Parameters
    ----------
    design : FilterBankDesign
    real_mode : bool, optional
        Evaluate the bank on real signals, i.e. on the two-sided extension
        of the one-sided channel set.  The mirror symmetry of the extension
        is exploited so only classes ``r <= N/2`` are decomposed.
    chunk : int, optional
        Number of bin classes assembled and decomposed per batch.

    Returns
    -------
    FrameDiagnostics
        Non-invertibility (``A < SINGULAR_RTOL * B``) is reported through
        ``invertible=False`` and ``R_FB=inf`` rather than as noise.
    """
    L, d, N = design.L, design.d, design.N
    bands = _solve_bands(design, real_mode)
    r_all = np.arange(N // 2 + 1) if real_mode else np.arange(N)
    a_val, b_val = np.inf, -np.inf
    a_bin = b_bin = 0
    for lo in range(0, len(r_all), chunk):
        rr = r_all[lo:lo + chunk]
        phi, _ = _assemble_chunk(bands, L, d, N, rr)
        eigs = np.linalg.eigvalsh(phi)
        c_min = int(np.argmin(eigs[:, 0]))
        c_max = int(np.argmax(eigs[:, -1]))
        if eigs[c_min, 0] < a_val:
            a_val, a_bin = float(eigs[c_min, 0]), int(rr[c_min])
        if eigs[c_max, -1] > b_val:
            b_val, b_bin = float(eigs[c_max, -1]), int(rr[c_max])
    a_val = max(a_val, 0.0)
    invertible = a_val > SINGULAR_RTOL * b_val and b_val > 0.0
    ratio = b_val / a_val if invertible else np.inf
    return FrameDiagnostics(A=a_val, B=b_val, R_FB=ratio,
                            argmin_bin=a_bin, argmax_bin=b_bin,
                            invertible=invertible)


def _scatter_dual(dual, rr, x, N):
    """Write per-class solutions ``x[c][m][j] = g~_j[rr[c] + mN]`` into rows."""
    d = x.shape[1]
    offsets = N * np.arange(d)
    for c, r in enumerate(rr):
        dual[:, r + offsets] = x[c].T


def dual_design(design, real_mode=False, chunk=32):
    """Canonical dual filters, one Hermitian solve per frequency-bin class.

    The returned design has dense responses, ``is_dual=True`` and remembers
    the source via ``source_id``; pass it to ``transform.synthesize`` to
    invert ``transform.analyze``.  With ``real_mode=True`` the systems are
    formed on the two-sided extension (synthesis of real signals then takes
    twice the real part of the one-sided sum).

    Callers are expected to check invertibility first (``frame_bounds``);
    a class that is singular to working precision raises
    :class:`~gridwave.errors.NonInvertibleError` naming the bin.
    """
    if design.extension:
        raise UsageError("pass the one-sided design with real_mode=True instead")
    L, d, N = design.L, design.d, design.N
    n_ch = design.n_channels
    bands = _solve_bands(design, real_mode)
    dual = np.zeros((n_ch, L), dtype=complex)

    def solve_classes(rr, rhs_classes=None):
        """Solve classes ``rr``; optionally also their mirror partners."""
        phi, rhs = _assemble_chunk(bands, L, d, N, rr, n_rhs=n_ch)
        if rhs_classes is not None:
            _, rhs2 = _assemble_chunk(bands, L, d, N, rhs_classes,
                                      n_rhs=n_ch, with_phi=False)
            stacked = np.concatenate([rhs, np.conj(rhs2[:, ::-1, :])], axis=2)
        else:
            stacked = rhs
        # LU alone accepts numerically singular systems (pivots can round
        # to tiny nonzero values); a Cholesky factorization of the
        # Hermitian PSD blocks fails exactly when a class is singular to
        # working precision.
        try:
            np.linalg.cholesky(phi)
        except np.linalg.LinAlgError:
            for c, r in enumerate(rr):
                try:
                    np.linalg.cholesky(phi[c])
                except np.linalg.LinAlgError:
                    raise NonInvertibleError(
                        f"frame operator is singular at bin class {int(r)}",
                        bin_index=int(r),
                    ) from None
            raise
        sol = np.linalg.solve(phi, stacked)
        _scatter_dual(dual, rr, sol[:, :, :n_ch], N)
        if rhs_classes is not None:
            partner = np.conj(sol[:, :, n_ch:])[:, ::-1, :]
            _scatter_dual(dual, rhs_classes, partner, N)

    if real_mode:
        # Self-paired classes, then mirror pairs (r, N-r) for 1 <= r < N/2.
        selfs = [0] + ([N // 2] if N % 2 == 0 and N > 1 else [])
        solve_classes(np.asarray(selfs))
        half = np.arange(1, (N + 1) // 2)
        for lo in range(0, len(half), chunk):
            rr = half[lo:lo + chunk]
            solve_classes(rr, rhs_classes=(N - rr) % N)
    else:
        for lo in range(0, N, chunk):
            rr = np.arange(lo, min(lo + chunk, N))
            solve_classes(rr)

    return FilterBankDesign(
        params=design.params, wavelet=design.wavelet,
        center_freqs=design.center_freqs, scales=design.scales,
        bands=[(0, dual[j]) for j in range(n_ch)],
        is_dual=True, real_dual=bool(real_mode),
        source_id=design.design_id,
    )


def real_extend(design):
    """Two-sided extension: original channels plus their mirror images.

    The mirror of a response is ``conj(response[(L-k) mod L])``; a channel
    centered at frequency c acquires a twin at ``sample_rate - c``.  Bounds
    of the extension are exactly the real-mode bounds of the base design.
    """
    if design.extension:
        raise UsageError("design is already an extension")
    L = design.L
    rate = design.params.sample_rate
    mirrors = _mirror_bands(design.bands, L)
    centers = np.concatenate([
        design.center_freqs, np.mod(rate - design.center_freqs, rate),
    ])
    return replace(
        design,
        center_freqs=centers,
        scales=np.concatenate([design.scales, design.scales]),
        bands=list(design.bands) + mirrors,
        extension=True,
    )


def brute_force_bounds(design, max_elements=2**25):
    """Frame bounds via explicit atoms and singular values (test oracle).

    Materializes the full analysis matrix, one row per (channel, frame)
    pair, and returns the extreme squared singular values.  Guarded to
    small problems (``L <= 4096`` and a matrix-size cap); this exists to
    pin the constants of :func:`frame_bounds`, not for production use.
    """
    L, d, N = design.L, design.d, design.N
    if L > 4096:
        raise UsageError(f"brute force is limited to L <= 4096 (got {L})")
    n_rows = design.n_channels * N
    if n_rows * L > max_elements:
        raise UsageError("analysis matrix too large to materialize")
    atoms = np.fft.ifft(design.responses, axis=1)
    rows = np.empty((n_rows, L), dtype=complex)
    for j in range(design.n_channels):
        for ell in range(N):
            rows[j * N + ell] = np.conj(np.roll(atoms[j], d * ell))
    sing = np.linalg.svd(rows, compute_uv=False)
    return float(sing[-1] ** 2), float(sing[0] ** 2)
