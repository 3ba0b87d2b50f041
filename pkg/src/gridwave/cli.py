"""Command-line entry point wiring the library end to end.

Subcommands: ``design`` and ``bounds`` summarize a bank, ``analyze`` /
``synthesize`` / ``roundtrip`` move audio through it, ``search`` runs the
hyperparameter optimization, and ``onsets`` / ``fgla`` / ``coverage``
expose the applications.  Human-readable output is JSON on stdout;
binary outputs are GWFB coefficient files, float32 WAV, and 16-bit PGM.
Exit codes: 0 success, 1 usage error, 2 numerical failure
(non-invertible bank), 3 input/output failure.
"""

import argparse
import json
import sys

import numpy as np

from .apps import (accumulated_spectrogram, err_ms, fgla,
                   make_reference_design, pick_onsets, spectral_flux)
from .design import build_design
from .errors import FormatError, NonInvertibleError, UsageError
from .frame import dual_design, frame_bounds
from .io import (AudioBuffer, design_from_header, load_coefs, read_wav,
                 save_coefs, write_pgm16, write_wav)
from .search import format_table, full_search
from .sequences import make_delays
from .transform import analyze, synthesize
from .wavelets import WaveletSpec

__all__ = ["build_parser", "main"]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage failures exit 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _num(value):
    """JSON-safe float: non-finite values become None."""
    value = float(value)
    return value if np.isfinite(value) else None


def _emit(payload):
    print(json.dumps(payload, indent=2))


def _add_design_flags(parser, mc, m, d):
    parser.add_argument("--wavelet", default="cauchy:300",
                        help="mother wavelet as family:param (default %(default)s)")
    parser.add_argument("--mc", type=int, default=mc,
                        help="compensation channels (default %(default)s)")
    parser.add_argument("--m", type=int, default=m,
                        help="total channel count M (default %(default)s)")
    parser.add_argument("--d", type=int, default=d,
                        help="decimation factor (default %(default)s)")
    parser.add_argument("--delays", default="kronecker",
                        choices=("kronecker", "digital", "zero"),
                        help="delay sequence kind (default %(default)s)")


def _design_for(args, L):
    spec = WaveletSpec.parse(args.wavelet)
    delays = make_delays(args.delays, args.m + 1)
    return build_design(spec, args.m, args.mc, args.d, L, delays)


def _load_padded(args):
    """Read the input WAV and zero-pad to a multiple of the decimation."""
    buf = read_wav(getattr(args, "infile"))
    n = buf.samples.size
    if n == 0:
        raise UsageError(f"{buf.source}: empty input signal")
    L = -(-n // args.d) * args.d
    padded = np.zeros(L)
    padded[:n] = buf.samples
    return buf, padded


def _bounds_payload(diag, real_mode):
    return {
        "A": _num(diag.A),
        "B": _num(diag.B),
        "R_FB": _num(diag.R_FB),
        "argmin_bin": diag.argmin_bin,
        "argmax_bin": diag.argmax_bin,
        "invertible": diag.invertible,
        "real_mode": real_mode,
    }


def cmd_design(args):
    design = _design_for(args, args.d * args.frames)
    params = design.params
    _emit({
        "wavelet": str(design.wavelet),
        "M": params.M,
        "M_C": params.M_C,
        "d": params.d,
        "L": params.L,
        "frames": params.N,
        "channels": design.n_channels,
        "oversampling": params.oversampling,
        "delays": params.delays.kind,
        "design_id": design.design_id,
    })
    return 0


def cmd_bounds(args):
    design = _design_for(args, args.d * args.frames)
    real_mode = not args.complex
    diag = frame_bounds(design, real_mode=real_mode)
    _emit(_bounds_payload(diag, real_mode))
    return 0


def cmd_analyze(args):
    buf, padded = _load_padded(args)
    design = _design_for(args, padded.size)
    coefs = analyze(design, padded, real_mode=not args.complex)
    coefs.orig_len = buf.samples.size
    save_coefs(args.out, coefs, design)
    _emit({
        "out": str(args.out),
        "channels": coefs.n_channels,
        "frames": coefs.n_frames,
        "L": padded.size,
        "orig_len": buf.samples.size,
        "design_id": design.design_id,
    })
    return 0


def cmd_synthesize(args):
    coefs, header = load_coefs(args.infile)
    design = design_from_header(header)
    dual = dual_design(design, real_mode=header.real_mode)
    coefs.design_id = design.design_id
    signal = np.asarray(synthesize(dual, coefs)).real[:header.orig_len]
    write_wav(args.out, AudioBuffer(signal, args.sample_rate))
    _emit({"out": str(args.out), "samples": signal.size,
           "sample_rate": args.sample_rate})
    return 0


def cmd_roundtrip(args):
    buf, padded = _load_padded(args)
    design = _design_for(args, padded.size)
    real_mode = not args.complex
    diag = frame_bounds(design, real_mode=real_mode)
    if not diag.invertible:
        raise NonInvertibleError(
            f"design is not invertible (A = {diag.A:.3e} at bin class "
            f"{diag.argmin_bin})", bin_index=diag.argmin_bin)
    dual = dual_design(design, real_mode=real_mode)
    recon = synthesize(dual, analyze(design, padded, real_mode=real_mode))
    ref = np.linalg.norm(padded)
    rel = float(np.linalg.norm(np.asarray(recon).real - padded) / ref) \
        if ref > 0 else 0.0
    payload = _bounds_payload(diag, real_mode)
    payload.update({"rel_error": rel, "L": padded.size,
                    "orig_len": buf.samples.size})
    _emit(payload)
    return 0


def cmd_search(args):
    spec = WaveletSpec.parse(args.wavelet)
    rates = [float(tok) for tok in args.oversampling.split(",") if tok]
    if not rates:
        raise UsageError("no oversampling rates given")
    records = full_search(spec, rates, M_probe=args.m_probe,
                          delays=args.delays, frames=args.frames)
    if args.format == "table":
        print(format_table(records))
    else:
        _emit([rec.as_dict() for rec in records])
    return 0


def cmd_onsets(args):
    buf, padded = _load_padded(args)
    design = _design_for(args, padded.size)
    coefs = analyze(design, padded, real_mode=True)
    flux = spectral_flux(coefs, args.mc)
    result = pick_onsets(flux, lam=args.lam, median_window=args.median_window,
                         min_gap=args.min_gap,
                         frame_period=args.d / buf.sample_rate)
    _emit({
        "onsets": [round(t, 6) for t in result.onsets],
        "count": len(result.onsets),
        "frame_period": result.frame_period,
    })
    return 0


def cmd_fgla(args):
    buf, padded = _load_padded(args)
    design = _design_for(args, padded.size)
    dual = dual_design(design, real_mode=True)
    target = np.abs(analyze(design, padded, real_mode=True).data)
    signal = fgla(design, dual, target, total_iters=args.iters,
                  warmup_iters=args.warmup, n_random_inits=args.inits,
                  gamma=args.gamma)
    trimmed = signal[:buf.samples.size]
    write_wav(args.out, AudioBuffer(trimmed, buf.sample_rate))
    reference = make_reference_design(buf.samples.size)
    err = err_ms(reference, buf.samples, trimmed)
    _emit({"out": str(args.out), "err_db": _num(err), "iters": args.iters})
    return 0


def _parse_span(text, limit, what):
    """Parse an 'a:b' span into a range, clamped checks left to the callee."""
    if text is None:
        return range(limit)
    try:
        lo, hi = (int(tok) for tok in text.split(":"))
    except ValueError:
        raise UsageError(f"{what} must look like 'a:b', got {text!r}") from None
    return range(lo, hi)


def cmd_coverage(args):
    design = _design_for(args, args.d * args.frames)
    span_f = _parse_span(args.frame_range, design.N, "--frame-range")
    span_c = _parse_span(args.channel_range, design.n_channels,
                         "--channel-range")
    cov = accumulated_spectrogram(design, span_f, span_c, args.gauss_dur)
    write_pgm16(args.out, cov[::-1])
    _emit({"out": str(args.out), "rows": cov.shape[0], "cols": cov.shape[1],
           "frames": len(span_f), "channels": len(span_c)})
    return 0


def build_parser():
    parser = _Parser(prog="gridwave",
                     description="Invertible wavelet transforms on uniform "
                                 "decimation grids with quasi-random delays.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("design", help="summarize a filter bank design")
    _add_design_flags(p, mc=5, m=253, d=254)
    p.add_argument("--frames", type=int, default=256,
                   help="grid frames; L = d * frames (default %(default)s)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("bounds", help="frame bounds and invertibility")
    _add_design_flags(p, mc=5, m=253, d=254)
    p.add_argument("--frames", type=int, default=256)
    p.add_argument("--complex", action="store_true",
                   help="evaluate on complex signal space")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("analyze", help="transform a WAV into a GWFB file")
    _add_design_flags(p, mc=5, m=253, d=254)
    p.add_argument("--in", dest="infile", required=True, metavar="WAV")
    p.add_argument("--out", required=True, metavar="GWFB")
    p.add_argument("--complex", action="store_true",
                   help="store complex-mode coefficients")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="reconstruct a WAV from a GWFB file")
    p.add_argument("--in", dest="infile", required=True, metavar="GWFB")
    p.add_argument("--out", required=True, metavar="WAV")
    p.add_argument("--sample-rate", type=float, default=44100.0,
                   help="output WAV rate in Hz (default %(default)s)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("roundtrip",
                       help="analyze + synthesize and report the error")
    _add_design_flags(p, mc=5, m=253, d=254)
    p.add_argument("--in", dest="infile", required=True, metavar="WAV")
    p.add_argument("--complex", action="store_true")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("search", help="optimize (M_C, M) per oversampling rate")
    p.add_argument("--wavelet", default="cauchy:300")
    p.add_argument("--delays", default="kronecker",
                   choices=("kronecker", "digital", "zero"))
    p.add_argument("--oversampling", default="1.2,2,4,8",
                   help="comma-separated target rates (default %(default)s)")
    p.add_argument("--m-probe", type=int, default=512,
                   help="probe size for the M_C scan (default %(default)s)")
    p.add_argument("--frames", type=int, default=512,
                   help="evaluation frames per configuration")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("onsets", help="spectral-flux onset detection")
    _add_design_flags(p, mc=7, m=350, d=175)
    p.add_argument("--in", dest="infile", required=True, metavar="WAV")
    p.add_argument("--lambda", dest="lam", type=float, default=1.34,
                   help="median threshold multiplier (default %(default)s)")
    p.add_argument("--median-window", type=int, default=11)
    p.add_argument("--min-gap", type=int, default=3,
                   help="minimum frames between onsets")
    p.set_defaults(func=cmd_onsets)

    p = sub.add_parser("fgla",
                       help="phaseless reconstruction from magnitudes")
    _add_design_flags(p, mc=5, m=256, d=51)
    p.add_argument("--in", dest="infile", required=True, metavar="WAV")
    p.add_argument("--out", required=True, metavar="WAV")
    p.add_argument("--iters", type=int, default=150)
    p.add_argument("--warmup", type=int, default=20)
    p.add_argument("--inits", type=int, default=5,
                   help="random phase initializations")
    p.add_argument("--gamma", type=float, default=0.99, help="momentum")
    p.set_defaults(func=cmd_fgla)

    p = sub.add_parser("coverage",
                       help="accumulated-spectrogram coverage map as PGM")
    _add_design_flags(p, mc=5, m=253, d=254)
    p.add_argument("--frames", type=int, default=32,
                   help="grid frames; L = d * frames (default %(default)s)")
    p.add_argument("--frame-range", default=None, metavar="A:B",
                   help="atom frame span (default: all frames)")
    p.add_argument("--channel-range", default=None, metavar="A:B",
                   help="atom channel span (default: all channels)")
    p.add_argument("--gauss-dur", type=float, default=24.0,
                   help="Gaussian window sigma in samples")
    p.add_argument("--out", required=True, metavar="PGM")
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gridwave: error: {exc}", file=sys.stderr)
        return 1
    except NonInvertibleError as exc:
        print(f"gridwave: error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, OSError) as exc:
        print(f"gridwave: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
