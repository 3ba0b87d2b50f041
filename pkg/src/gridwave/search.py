"""Hyperparameter search over the channel grid at fixed wavelet and rate.

The grid of a linearly spaced bank is pinned down by the number of
compensation channels ``M_C`` and the total channel count ``M``.  This
module scores a configuration by the frame-bound ratio of the resulting
bank and optimizes the pair in three stages: a compensation-channel scan
at a fixed probe size (the optimal ``M_C`` is insensitive to ``M``), an
exhaustive scan of ``M`` over a fixed candidate list, and a
divide-and-conquer refinement around the coarse winner and its two
neighbors.  Evaluations fix the frame count, so every score is
deterministic and reproducible from its record alone.
"""

from dataclasses import dataclass

import numpy as np

from .design import build_design, choose_decimation
from .errors import UsageError
from .frame import frame_bounds
from .sequences import make_delays
from .wavelets import WaveletSpec

__all__ = [
    "CANDIDATE_MS",
    "PLATEAU_RTOL",
    "SearchRecord",
    "evaluate_config",
    "optimize_mc",
    "optimize_m",
    "refine_m",
    "full_search",
    "format_table",
]

# Exhaustive-scan candidates for the total channel count M.
CANDIDATE_MS = (128, 256, 384, 512, 640, 768, 1024, 1280, 1536, 2048)

# Relative improvement below which the M_C scan counts a plateau step.
PLATEAU_RTOL = 1e-3

# Enforces that the first wavelet center frequency is <= f_samp / 100.
MIN_CHANNEL_RATIO = 50


@dataclass(frozen=True)
class SearchRecord:
    """One evaluated configuration and its frame-bound ratio.

    Attributes
    ----------
    wavelet : WaveletSpec
        Mother wavelet of the evaluated bank.
    target_oversampling : float
        Requested redundancy; the decimation is the largest integer
        meeting it, so the achieved redundancy is at least this value.
    M_C, M, d : int
        Compensation channels, total channels, and decimation factor.
    R_FB : float
        Frame-bound ratio reported by ``frame_bounds`` on the bank.
    L_eval : int
        Signal length the bank was evaluated on.
    """

    wavelet: WaveletSpec
    target_oversampling: float
    M_C: int
    M: int
    d: int
    R_FB: float
    L_eval: int

    def as_dict(self):
        """Plain-type mapping for JSON output."""
        ratio = float(self.R_FB)
        return {
            "wavelet": str(self.wavelet),
            "oversampling": self.target_oversampling,
            "M_C": self.M_C,
            "M": self.M,
            "d": self.d,
            "R_FB": ratio if np.isfinite(ratio) else None,
            "L_eval": self.L_eval,
        }


def evaluate_config(wavelet, oversampling, M_C, M, *, delays="kronecker",
                    frames=512, real_mode=True, cache=None):
    """Score one ``(M_C, M)`` configuration by its frame-bound ratio.

    The decimation factor is derived from ``oversampling`` via
    ``choose_decimation`` and the bank is evaluated on ``d * frames``
    samples.  Results are memoized in ``cache`` when given, keyed by the
    full configuration, so repeated scans never recompute a score.
    """
    key = (str(wavelet), float(oversampling), M_C, M, delays, frames, real_mode)
    if cache is not None and key in cache:
        return cache[key]
    d = choose_decimation(M, oversampling)
    if d < 1:
        raise UsageError(
            f"oversampling {oversampling} is not reachable with M = {M}")
    L = d * frames
    design = build_design(wavelet, M, M_C, d, L, make_delays(delays, M + 1))
    diag = frame_bounds(design, real_mode=real_mode)
    record = SearchRecord(wavelet, float(oversampling), M_C, M, d,
                          float(diag.R_FB), L)
    if cache is not None:
        cache[key] = record
    return record


def optimize_mc(wavelet, oversampling, M_probe=512, *, delays="kronecker",
                frames=512, real_mode=True, cache=None):
    """Smallest compensation-channel count attaining the ratio plateau.

    Scans ``M_C = 1, 2, 3, ...`` at the fixed probe size ``M_probe`` and
    stops once the relative improvement of ``R_FB`` falls below
    ``PLATEAU_RTOL`` twice in a row.  The ratio decreases monotonically in
    ``M_C`` up to a saturation point that does not depend on ``M``, which
    is what makes a single probe size sufficient.

    Returns
    -------
    int
        The smallest scanned ``M_C`` whose ratio is within the plateau
        tolerance of the best scanned value.

    Raises
    ------
    UsageError
        If the scan reaches ``M_probe / 50`` without plateauing, or if no
        scanned configuration is invertible.
    """
    mc_cap = M_probe // MIN_CHANNEL_RATIO
    if mc_cap < 1:
        raise UsageError(f"M_probe = {M_probe} admits no valid M_C")
    ratios = []
    flat_steps = 0
    while flat_steps < 2:
        mc = len(ratios) + 1
        if mc > mc_cap:
            raise UsageError(
                f"no R_FB plateau found with M_C <= {mc_cap} (= M_probe/50)")
        record = evaluate_config(wavelet, oversampling, mc, M_probe,
                                 delays=delays, frames=frames,
                                 real_mode=real_mode, cache=cache)
        ratios.append(record.R_FB)
        if len(ratios) < 2:
            continue
        prev, cur = ratios[-2], ratios[-1]
        if not np.isfinite(prev):
            rel = 1.0
        elif not np.isfinite(cur):
            rel = -1.0
        else:
            rel = (prev - cur) / prev
        flat_steps = flat_steps + 1 if rel < PLATEAU_RTOL else 0
    floor = min(r for r in ratios if np.isfinite(r))
    for i, r in enumerate(ratios):
        if r <= floor * (1.0 + PLATEAU_RTOL):
            return i + 1
    raise UsageError("M_C scan produced no invertible configuration")


def optimize_m(wavelet, oversampling, M_C, *, candidates=CANDIDATE_MS,
               delays="kronecker", frames=512, real_mode=True, cache=None):
    """Exhaustive scan of ``M`` over the candidate list at fixed ``M_C``.

    Candidates below ``50 * M_C`` are skipped entirely.  Ties in the
    ratio are broken toward the smaller (cheaper) bank.
    """
    best = None
    for M in sorted(candidates):
        if M < MIN_CHANNEL_RATIO * M_C or choose_decimation(M, oversampling) < 1:
            continue
        record = evaluate_config(wavelet, oversampling, M_C, M, delays=delays,
                                 frames=frames, real_mode=real_mode, cache=cache)
        if best is None or record.R_FB < best.R_FB:
            best = record
    if best is None:
        raise UsageError(
            f"no candidate M is feasible for M_C = {M_C} "
            f"at oversampling {oversampling}")
    return best


def refine_m(record, *, candidates=CANDIDATE_MS, delays="kronecker",
             frames=None, real_mode=True, cache=None):
    """Divide-and-conquer refinement of ``M`` around a coarse winner.

    Brackets the winner with its two neighbors in the candidate list,
    then repeatedly evaluates the midpoints of the two half-intervals and
    shrinks the bracket around the best value seen, until the bracket
    width is at most 2.  Only improvements are accepted, so the refined
    ratio never exceeds the coarse one.  The search is local: when the
    ratio is not unimodal in ``M`` the global optimum may lie outside the
    bracket, and agreement in ``R_FB`` rather than in ``M`` is the goal.
    """
    if frames is None:
        frames = record.L_eval // record.d
    cands = sorted(candidates)
    if record.M in cands:
        i = cands.index(record.M)
        lo = cands[i - 1] if i > 0 else record.M
        hi = cands[i + 1] if i + 1 < len(cands) else record.M
    else:
        lo = hi = record.M
    lo = max(lo, MIN_CHANNEL_RATIO * record.M_C)
    lo = min(lo, record.M)

    def score(M):
        return evaluate_config(record.wavelet, record.target_oversampling,
                               record.M_C, M, delays=delays, frames=frames,
                               real_mode=real_mode, cache=cache)

    evaluated = {record.M: record}
    for _ in range(64):
        if hi - lo <= 2:
            break
        for M in (lo, hi):
            evaluated.setdefault(M, score(M))
        points = sorted(M for M in evaluated if lo <= M <= hi)
        best_m = min(points, key=lambda M: (evaluated[M].R_FB, M))
        for M in ((lo + best_m) // 2, (best_m + hi) // 2):
            evaluated.setdefault(M, score(M))
        points = sorted(M for M in evaluated if lo <= M <= hi)
        best_m = min(points, key=lambda M: (evaluated[M].R_FB, M))
        pos = points.index(best_m)
        lo = points[pos - 1] if pos > 0 else lo
        hi = points[pos + 1] if pos + 1 < len(points) else hi
    winners = [M for M in evaluated if lo <= M <= hi]
    return evaluated[min(winners, key=lambda M: (evaluated[M].R_FB, M))]


def full_search(wavelet, oversampling_list, *, M_probe=512, delays="kronecker",
                frames=512, real_mode=True):
    """Optimal ``R_FB (M_C, M)`` record per requested oversampling rate.

    Composes ``optimize_mc``, ``optimize_m`` and ``refine_m`` per rate
    with a shared evaluation cache.  An empty rate list yields an empty
    result.
    """
    cache = {}
    records = []
    for oversampling in oversampling_list:
        mc = optimize_mc(wavelet, oversampling, M_probe, delays=delays,
                         frames=frames, real_mode=real_mode, cache=cache)
        coarse = optimize_m(wavelet, oversampling, mc, delays=delays,
                            frames=frames, real_mode=real_mode, cache=cache)
        records.append(refine_m(coarse, delays=delays, frames=frames,
                                real_mode=real_mode, cache=cache))
    return records


def format_table(records):
    """Text table of search results, one row per oversampling rate.

    Cells read ``R_FB (M_C, M)``: the optimal frame-bound ratio together
    with the configuration that achieves it.  Columns are the distinct
    wavelets appearing in ``records``.
    """
    wavelets = []
    for rec in records:
        name = str(rec.wavelet)
        if name not in wavelets:
            wavelets.append(name)
    rates = sorted({rec.target_oversampling for rec in records})
    cells = {(str(r.wavelet), r.target_oversampling):
             f"{r.R_FB:.2f} ({r.M_C}, {r.M})" for r in records}
    header = ["oversampling"] + wavelets
    rows = [header]
    for rate in rates:
        rows.append([f"{rate:g}"] +
                    [cells.get((w, rate), "-") for w in wavelets])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines)
