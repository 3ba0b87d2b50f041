"""File formats: WAV audio, GWFB coefficient files, and 16-bit PGM maps.

The WAV reader and writer handle the two codecs that matter in practice,
16-bit PCM and 32-bit IEEE float, downmixing stereo to mono on read and
emitting mono float32 on write.  Coefficient matrices round-trip through
the little-endian GWFB container, whose header carries enough of the
producing design (grid, wavelet family and hyperparameter, delay kind)
to rebuild it for synthesis.  Coverage maps are written as binary PGM
with 16-bit samples.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .design import build_design
from .errors import FormatError, UsageError
from .sequences import band_generator_matrix, golden_alpha, make_delays
from .transform import CoefMatrix
from .wavelets import FAMILIES, WaveletSpec

__all__ = [
    "AudioBuffer",
    "CoefHeader",
    "read_wav",
    "write_wav",
    "save_coefs",
    "load_coefs",
    "design_from_header",
    "write_pgm16",
]

GWFB_MAGIC = b"GWFB"
GWFB_VERSION = 1

# Fixed-width header after the magic and version; see save_coefs.
_HEADER = struct.Struct("<5QBBdBQ")

_DELAY_CODES = {"zero": 0, "kronecker": 1, "digital": 2}
_DELAY_KINDS = {code: kind for kind, code in _DELAY_CODES.items()}

_PCM16 = 1
_FLOAT32 = 3


@dataclass
class AudioBuffer:
    """Mono audio samples in [-1, 1] with their sampling rate in Hz."""

    samples: np.ndarray
    sample_rate: float
    source: str = ""


def read_wav(path):
    """Read a RIFF/WAVE file into a mono :class:`AudioBuffer`.

    Supports 16-bit PCM and 32-bit IEEE float, mono or stereo; stereo is
    averaged to mono.  PCM samples are scaled by 1/32768.

    Raises
    ------
    FormatError
        On malformed or truncated files (the message names the offending
        chunk) and on unsupported codecs or channel counts.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF":
        raise FormatError(f"{path}: missing RIFF header")
    if blob[8:12] != b"WAVE":
        raise FormatError(f"{path}: missing WAVE identifier")
    chunks = {}
    pos = 12
    while pos + 8 <= len(blob):
        cid = blob[pos:pos + 4]
        size = struct.unpack_from("<I", blob, pos + 4)[0]
        body = blob[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise FormatError(
                f"{path}: truncated {cid.decode('latin1')!r} chunk")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)
    if b"fmt " not in chunks:
        raise FormatError(f"{path}: missing 'fmt ' chunk")
    if b"data" not in chunks:
        raise FormatError(f"{path}: missing 'data' chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise FormatError(f"{path}: truncated 'fmt ' chunk")
    codec, n_ch, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if n_ch not in (1, 2):
        raise FormatError(f"{path}: unsupported channel count {n_ch}")
    data = chunks[b"data"]
    if codec == _PCM16 and bits == 16:
        raw = np.frombuffer(data[:len(data) - len(data) % (2 * n_ch)],
                            dtype="<i2")
        samples = raw.astype(float) / 32768.0
    elif codec == _FLOAT32 and bits == 32:
        raw = np.frombuffer(data[:len(data) - len(data) % (4 * n_ch)],
                            dtype="<f4")
        samples = raw.astype(float)
    else:
        raise FormatError(
            f"{path}: unsupported codec (format {codec}, {bits} bits)")
    if n_ch == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise FormatError(f"{path}: non-finite samples")
    return AudioBuffer(samples, float(rate), source=str(path))


def write_wav(path, buffer):
    """Write a mono float32 WAV file; peaks above 1 are normalized away."""
    samples = np.asarray(buffer.samples, dtype=float)
    if samples.ndim != 1:
        raise UsageError("only mono buffers can be written")
    if not np.all(np.isfinite(samples)):
        raise UsageError("samples must be finite")
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    if peak > 1.0:
        samples = samples / peak
    rate = int(round(buffer.sample_rate))
    data = samples.astype("<f4").tobytes()
    fmt = struct.pack("<HHIIHH", _FLOAT32, 1, rate, rate * 4, 4, 32)
    fact = struct.pack("<I", samples.size)
    body = (b"WAVE"
            + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"fact" + struct.pack("<I", len(fact)) + fact
            + b"data" + struct.pack("<I", len(data)) + data)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)


def _delay_code(delays):
    """Map a delay sequence to its header code, rejecting what v1 cannot hold."""
    code = _DELAY_CODES.get(delays.kind)
    if code is None:
        raise UsageError(f"delay kind {delays.kind!r} has no file encoding")
    if delays.kind == "kronecker":
        golden = golden_alpha()
        if abs(float(delays.param) - golden) > 1e-14 * golden:
            raise UsageError(
                "only golden-ratio Kronecker delays are representable")
    if delays.kind == "digital":
        default = band_generator_matrix(np.shape(delays.param)[0])
        if not np.array_equal(np.asarray(delays.param), default):
            raise UsageError(
                "only the default digital generator matrix is representable")
    return code


def save_coefs(path, coefs, design):
    """Write a coefficient matrix and its design summary as a GWFB file.

    Layout, all little-endian: magic ``GWFB``, version u16, then u64
    fields L, d, M, M_C, N, a delay-kind byte (0 zero, 1 Kronecker, 2
    digital), a wavelet-family byte (0 cauchy, 1 bspline4), the wavelet
    hyperparameter as f64, a real-mode byte, the original (pre-padding)
    signal length as u64, and (M+1)*N complex64 values, channel-major.
    Values are truncated to complex64; everything else round-trips
    bit-exactly.
    """
    params = design.params
    if params.spacing != "linear":
        raise UsageError("only linear-grid designs have a file encoding")
    if design.wavelet is None:
        raise UsageError("raw response banks have no file encoding")
    if coefs.data.shape != (design.n_channels, design.N):
        raise UsageError("coefficient shape does not match the design")
    if coefs.design_id and coefs.design_id != design.design_id:
        raise UsageError("coefficients were produced by a different design")
    orig_len = design.L if coefs.orig_len is None else int(coefs.orig_len)
    header = _HEADER.pack(
        design.L, design.d, params.M, params.M_C, design.N,
        _delay_code(params.delays), FAMILIES.index(design.wavelet.family),
        float(design.wavelet.param), int(bool(coefs.real_mode)), orig_len)
    payload = np.ascontiguousarray(coefs.data, dtype=np.complex64).tobytes()
    with open(path, "wb") as fh:
        fh.write(GWFB_MAGIC + struct.pack("<H", GWFB_VERSION) + header + payload)


@dataclass(frozen=True)
class CoefHeader:
    """Decoded GWFB header: the design summary stored with coefficients."""

    L: int
    d: int
    M: int
    M_C: int
    N: int
    delay_kind: str
    family: str
    hyperparameter: float
    real_mode: bool
    orig_len: int


def load_coefs(path):
    """Read a GWFB file back as ``(CoefMatrix, CoefHeader)``.

    The coefficient data is complex64 exactly as stored; the matrix
    carries no design identifier (the header has everything needed to
    rebuild the design via :func:`design_from_header`).
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    intro = len(GWFB_MAGIC) + 2
    if len(blob) < intro + _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    if blob[:4] != GWFB_MAGIC:
        raise FormatError(f"{path}: not a GWFB file")
    version = struct.unpack_from("<H", blob, 4)[0]
    if version != GWFB_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    (L, d, M, M_C, N, delay_code, family_code, hyper, real_flag,
     orig_len) = _HEADER.unpack_from(blob, intro)
    if delay_code not in _DELAY_KINDS:
        raise FormatError(f"{path}: unknown delay kind {delay_code}")
    if family_code >= len(FAMILIES):
        raise FormatError(f"{path}: unknown wavelet family {family_code}")
    if N * d != L or orig_len > L:
        raise FormatError(f"{path}: inconsistent grid fields")
    expected = (M + 1) * N * 8
    payload = blob[intro + _HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: coefficient payload has {len(payload)} bytes, "
            f"expected {expected}")
    data = np.frombuffer(payload, dtype="<c8").reshape(M + 1, N).copy()
    header = CoefHeader(L, d, M, M_C, N, _DELAY_KINDS[delay_code],
                        FAMILIES[family_code], float(hyper), bool(real_flag),
                        int(orig_len))
    coefs = CoefMatrix(data, d, design_id="", real_mode=bool(real_flag),
                       orig_len=int(orig_len))
    return coefs, header


def design_from_header(header):
    """Rebuild the producing filter bank design from a GWFB header."""
    spec = WaveletSpec(header.family, header.hyperparameter)
    delays = make_delays(header.delay_kind, header.M + 1)
    return build_design(spec, header.M, header.M_C, header.d, header.L, delays)


def write_pgm16(path, image):
    """Write a nonnegative 2D map as a 16-bit binary PGM (big-endian).

    The map is scaled so its maximum lands on 65535; an all-zero map is
    written as-is.  Row 0 of ``image`` is the top row of the file.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise UsageError("PGM images must be 2D")
    if not np.all(np.isfinite(img)) or img.min() < 0:
        raise UsageError("PGM images must be finite and nonnegative")
    top = img.max()
    if top > 0:
        img = img / top
    pixels = np.round(img * 65535.0).astype(">u2")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n65535\n".encode()
    with open(path, "wb") as fh:
        fh.write(header + pixels.tobytes())
