"""Tests for WAV/GWFB/PGM serialization and the command line interface."""

import json
import struct

import numpy as np
import pytest
from conftest import small_design, toy_bank

from gridwave import (
    AudioBuffer,
    FormatError,
    UsageError,
    WaveletSpec,
    analyze,
    build_design,
    design_from_header,
    geometric_design,
    load_coefs,
    make_delays,
    read_wav,
    save_coefs,
    write_pgm16,
    write_wav,
)
from gridwave.cli import main


def wav_bytes(data, codec=1, n_ch=1, rate=8000, bits=16, extra_chunk=False,
              truncate_data_by=0):
    fmt = struct.pack("<HHIIHH", codec, n_ch, rate,
                      rate * n_ch * bits // 8, n_ch * bits // 8, bits)
    body = b"WAVE"
    if extra_chunk:
        body += b"LIST" + struct.pack("<I", 3) + b"abc" + b"\x00"
    body += b"fmt " + struct.pack("<I", len(fmt)) + fmt
    size = len(data) + truncate_data_by
    body += b"data" + struct.pack("<I", size) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


# ---------------------------------------------------------------------------
# WAV


def test_wav_float_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    samples = rng.uniform(-0.9, 0.9, 301)
    path = tmp_path / "sig.wav"
    write_wav(path, AudioBuffer(samples, 8000.0))
    buf = read_wav(path)
    assert buf.sample_rate == 8000.0
    assert buf.source == str(path)
    np.testing.assert_allclose(buf.samples, samples, atol=1e-6)


def test_wav_pcm16_scaling(tmp_path):
    raw = np.array([0, 16384, -32768, 32767], dtype="<i2")
    path = tmp_path / "pcm.wav"
    path.write_bytes(wav_bytes(raw.tobytes(), extra_chunk=True))
    buf = read_wav(path)
    np.testing.assert_allclose(
        buf.samples, [0.0, 0.5, -1.0, 32767.0 / 32768.0], atol=0.0)


def test_wav_stereo_downmix(tmp_path):
    raw = np.array([1000, 3000, -2000, 2000], dtype="<i2")  # two frames
    path = tmp_path / "st.wav"
    path.write_bytes(wav_bytes(raw.tobytes(), n_ch=2))
    buf = read_wav(path)
    np.testing.assert_allclose(buf.samples, [2000.0 / 32768, 0.0], atol=0.0)


def test_wav_write_normalizes_peaks(tmp_path):
    samples = np.array([0.5, -2.0, 1.0])
    path = tmp_path / "hot.wav"
    write_wav(path, AudioBuffer(samples, 8000.0))
    buf = read_wav(path)
    assert np.max(np.abs(buf.samples)) <= 1.0 + 1e-6
    np.testing.assert_allclose(buf.samples, samples / 2.0, atol=1e-7)


def test_wav_write_validations(tmp_path):
    with pytest.raises(UsageError, match="mono"):
        write_wav(tmp_path / "x.wav", AudioBuffer(np.zeros((2, 4)), 8000.0))
    with pytest.raises(UsageError, match="finite"):
        write_wav(tmp_path / "x.wav",
                  AudioBuffer(np.array([0.0, np.inf]), 8000.0))


def test_wav_format_errors(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"OGGS" + b"\x00" * 40)
    with pytest.raises(FormatError, match="missing RIFF"):
        read_wav(path)
    path.write_bytes(b"RIFF" + struct.pack("<I", 36) + b"AIFF" + b"\x00" * 32)
    with pytest.raises(FormatError, match="missing WAVE"):
        read_wav(path)
    path.write_bytes(wav_bytes(b"\x00" * 8, truncate_data_by=10))
    with pytest.raises(FormatError, match="truncated 'data'"):
        read_wav(path)
    path.write_bytes(b"RIFF" + struct.pack("<I", 4) + b"WAVE")
    with pytest.raises(FormatError, match="missing 'fmt '"):
        read_wav(path)
    path.write_bytes(wav_bytes(b"\x00" * 8, codec=2))
    with pytest.raises(FormatError, match=r"unsupported codec \(format 2"):
        read_wav(path)
    path.write_bytes(wav_bytes(b"\x00" * 12, n_ch=3))
    with pytest.raises(FormatError, match="channel count 3"):
        read_wav(path)
    bad = np.array([1.0, np.nan], dtype="<f4")
    path.write_bytes(wav_bytes(bad.tobytes(), codec=3, bits=32))
    with pytest.raises(FormatError, match="non-finite"):
        read_wav(path)


# ---------------------------------------------------------------------------
# GWFB


def test_gwfb_roundtrip_bit_exact(tmp_path):
    design = small_design(M=16, M_C=2, d=8, L=128)
    rng = np.random.default_rng(1)
    f = rng.standard_normal(128)
    coefs = analyze(design, f)
    coefs.orig_len = 100
    path = tmp_path / "c.gwfb"
    save_coefs(path, coefs, design)
    loaded, header = load_coefs(path)
    np.testing.assert_array_equal(loaded.data,
                                  coefs.data.astype(np.complex64))
    assert loaded.real_mode is True
    assert loaded.orig_len == 100
    assert loaded.design_id == ""
    assert (header.L, header.d, header.M, header.M_C, header.N) == \
        (128, 8, 16, 2, 16)
    assert header.delay_kind == "kronecker"
    assert header.family == "cauchy"
    assert header.hyperparameter == 300.0
    assert header.real_mode is True
    # Re-saving the loaded matrix reproduces the file byte for byte.
    path2 = tmp_path / "c2.gwfb"
    save_coefs(path2, loaded, design)
    assert path.read_bytes() == path2.read_bytes()


def test_gwfb_header_rebuilds_design(tmp_path):
    design = small_design(M=16, M_C=2, d=8, L=128, delays="digital")
    coefs = analyze(design, np.zeros(128))
    path = tmp_path / "d.gwfb"
    save_coefs(path, coefs, design)
    _, header = load_coefs(path)
    rebuilt = design_from_header(header)
    assert rebuilt.design_id == design.design_id
    assert header.orig_len == 128  # defaults to L when unset


def test_gwfb_format_errors(tmp_path):
    design = small_design(M=16, M_C=2, d=8, L=128)
    coefs = analyze(design, np.zeros(128))
    path = tmp_path / "c.gwfb"
    save_coefs(path, coefs, design)
    blob = bytearray(path.read_bytes())

    bad = tmp_path / "bad.gwfb"
    bad.write_bytes(blob[:10])
    with pytest.raises(FormatError, match="truncated header"):
        load_coefs(bad)

    patched = blob.copy()
    patched[:4] = b"XWFB"
    bad.write_bytes(patched)
    with pytest.raises(FormatError, match="not a GWFB file"):
        load_coefs(bad)

    patched = blob.copy()
    patched[4:6] = struct.pack("<H", 9)
    bad.write_bytes(patched)
    with pytest.raises(FormatError, match="unsupported version 9"):
        load_coefs(bad)

    patched = blob.copy()
    patched[6 + 40] = 7  # delay-kind byte
    bad.write_bytes(patched)
    with pytest.raises(FormatError, match="unknown delay kind"):
        load_coefs(bad)

    patched = blob.copy()
    patched[6 + 41] = 9  # wavelet-family byte
    bad.write_bytes(patched)
    with pytest.raises(FormatError, match="unknown wavelet family"):
        load_coefs(bad)

    patched = blob.copy()
    patched[6 + 51:6 + 59] = struct.pack("<Q", 129)  # orig_len > L
    bad.write_bytes(patched)
    with pytest.raises(FormatError, match="inconsistent grid"):
        load_coefs(bad)

    bad.write_bytes(bytes(blob) + b"\x00")
    with pytest.raises(FormatError, match="payload"):
        load_coefs(bad)


def test_gwfb_representability(tmp_path):
    spec = WaveletSpec.cauchy(300.0)
    path = tmp_path / "x.gwfb"

    custom_kron = build_design(spec, 16, 2, 8, 128,
                               make_delays("kronecker", 17, alpha=0.25))
    with pytest.raises(UsageError, match="golden-ratio"):
        save_coefs(path, analyze(custom_kron, np.zeros(128)), custom_kron)

    eye = np.eye(5, dtype=np.uint8)
    custom_dig = build_design(spec, 16, 2, 8, 128,
                              make_delays("digital", 17, matrix=eye))
    with pytest.raises(UsageError, match="generator matrix"):
        save_coefs(path, analyze(custom_dig, np.zeros(128)), custom_dig)

    geo = geometric_design(spec, 9, 0.05, 0.8, 4, 64)
    with pytest.raises(UsageError, match="file encoding"):
        save_coefs(path, analyze(geo, np.zeros(64), real_mode=False), geo)

    bank = toy_bank()
    with pytest.raises(UsageError, match="file encoding"):
        save_coefs(path, analyze(bank, np.zeros(60), real_mode=False), bank)

    design = small_design(M=16, M_C=2, d=8, L=128)
    good = analyze(design, np.zeros(128))
    other = small_design(M=16, M_C=3, d=8, L=128)
    with pytest.raises(UsageError, match="different design"):
        save_coefs(path, good, other)


# ---------------------------------------------------------------------------
# PGM


def test_pgm_bytes(tmp_path):
    img = np.array([[0.0, 1.0], [0.5, 0.25]])
    path = tmp_path / "map.pgm"
    write_pgm16(path, img)
    blob = path.read_bytes()
    header = b"P5\n2 2\n65535\n"
    assert blob.startswith(header)
    pixels = np.frombuffer(blob[len(header):], dtype=">u2").reshape(2, 2)
    np.testing.assert_array_equal(pixels, [[0, 65535], [32768, 16384]])


def test_pgm_validations(tmp_path):
    with pytest.raises(UsageError, match="2D"):
        write_pgm16(tmp_path / "x.pgm", np.zeros(4))
    with pytest.raises(UsageError, match="nonnegative"):
        write_pgm16(tmp_path / "x.pgm", np.array([[-1.0, 0.0]]))
    with pytest.raises(UsageError, match="nonnegative"):
        write_pgm16(tmp_path / "x.pgm", np.array([[np.nan, 0.0]]))
    path = tmp_path / "zero.pgm"
    write_pgm16(path, np.zeros((1, 3)))
    assert path.read_bytes().endswith(b"\x00" * 6)


# ---------------------------------------------------------------------------
# CLI

SMALL = ["--m", "16", "--mc", "2", "--d", "8"]


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith(("{", "[")) else out


def test_cli_design(capsys):
    code, payload = run_cli(capsys, ["design", *SMALL, "--frames", "16"])
    assert code == 0
    assert payload["M"] == 16 and payload["d"] == 8 and payload["L"] == 128
    assert payload["oversampling"] == pytest.approx(34 / 8)
    assert len(payload["design_id"]) == 16
    assert payload["delays"] == "kronecker"


def test_cli_bounds(capsys):
    code, payload = run_cli(capsys, ["bounds", *SMALL, "--frames", "16"])
    assert code == 0
    assert payload["invertible"] is True
    assert payload["real_mode"] is True
    assert payload["R_FB"] == pytest.approx(payload["B"] / payload["A"])
    code, payload = run_cli(
        capsys, ["bounds", *SMALL, "--frames", "16", "--complex"])
    assert code == 0
    assert payload["real_mode"] is False
    assert payload["invertible"] is False  # one-sided bank, complex signals
    assert payload["R_FB"] is None


def test_cli_analyze_synthesize_roundtrip(tmp_path, capsys):
    rng = np.random.default_rng(2)
    samples = 0.4 * rng.standard_normal(300)
    wav_in = tmp_path / "in.wav"
    write_wav(wav_in, AudioBuffer(samples, 8000.0))
    gwfb = tmp_path / "c.gwfb"
    code, payload = run_cli(capsys, [
        "analyze", *SMALL, "--in", str(wav_in), "--out", str(gwfb)])
    assert code == 0
    assert payload["orig_len"] == 300
    assert payload["L"] == 304  # padded to a multiple of d = 8
    wav_out = tmp_path / "out.wav"
    code, payload = run_cli(capsys, [
        "synthesize", "--in", str(gwfb), "--out", str(wav_out),
        "--sample-rate", "8000"])
    assert code == 0
    assert payload["samples"] == 300
    recon = read_wav(wav_out).samples
    orig = read_wav(wav_in).samples
    np.testing.assert_allclose(recon, orig, atol=1e-4)  # complex64 payload


def test_cli_analyze_deterministic(tmp_path, capsys):
    rng = np.random.default_rng(3)
    wav_in = tmp_path / "in.wav"
    write_wav(wav_in, AudioBuffer(0.3 * rng.standard_normal(256), 8000.0))
    paths = [tmp_path / "a.gwfb", tmp_path / "b.gwfb"]
    for p in paths:
        code, _ = run_cli(capsys, [
            "analyze", *SMALL, "--in", str(wav_in), "--out", str(p)])
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_cli_roundtrip_ok(tmp_path, capsys):
    rng = np.random.default_rng(4)
    wav_in = tmp_path / "in.wav"
    write_wav(wav_in, AudioBuffer(0.4 * rng.standard_normal(300), 8000.0))
    code, payload = run_cli(capsys, ["roundtrip", *SMALL,
                                     "--in", str(wav_in)])
    assert code == 0
    assert payload["invertible"] is True
    assert payload["rel_error"] < 1e-8


def test_cli_roundtrip_singular_exits_2(tmp_path, capsys):
    rng = np.random.default_rng(5)
    wav_in = tmp_path / "in.wav"
    write_wav(wav_in, AudioBuffer(0.4 * rng.standard_normal(200), 8000.0))
    code = main(["roundtrip", "--m", "64", "--mc", "2", "--d", "123",
                 "--delays", "zero", "--in", str(wav_in)])
    err = capsys.readouterr().err
    assert code == 2
    assert "not invertible" in err


def test_cli_error_exit_codes(tmp_path, capsys):
    assert main(["bounds", "--wavelet", "cauchy:abc"]) == 1
    assert "gridwave: error" in capsys.readouterr().err
    assert main(["analyze", *SMALL, "--in", str(tmp_path / "missing.wav"),
                 "--out", str(tmp_path / "x.gwfb")]) == 3
    capsys.readouterr()
    assert main([]) == 1  # no command: help on stderr
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_cli_onsets_click_pair(tmp_path, capsys):
    sr = 8000.0
    samples = np.zeros(6000)
    samples[2000] = 0.9
    samples[4000] = 0.9
    wav_in = tmp_path / "clicks.wav"
    write_wav(wav_in, AudioBuffer(samples, sr))
    code, payload = run_cli(capsys, ["onsets", "--in", str(wav_in)])
    assert code == 0
    assert payload["count"] == 2
    assert payload["frame_period"] == pytest.approx(175 / sr)
    got = payload["onsets"]
    assert abs(got[0] - 0.25) <= 0.05
    assert abs(got[1] - 0.50) <= 0.05


def test_cli_fgla_small(tmp_path, capsys):
    rng = np.random.default_rng(6)
    wav_in = tmp_path / "in.wav"
    write_wav(wav_in, AudioBuffer(0.4 * rng.standard_normal(300), 8000.0))
    wav_out = tmp_path / "rec.wav"
    code, payload = run_cli(capsys, [
        "fgla", *SMALL, "--in", str(wav_in), "--out", str(wav_out),
        "--iters", "8", "--warmup", "2", "--inits", "1"])
    assert code == 0
    assert payload["iters"] == 8
    assert isinstance(payload["err_db"], float)
    assert read_wav(wav_out).samples.size == 300


def test_cli_coverage(tmp_path, capsys):
    out = tmp_path / "cov.pgm"
    code, payload = run_cli(capsys, [
        "coverage", *SMALL, "--frames", "16", "--frame-range", "0:4",
        "--channel-range", "8:12", "--gauss-dur", "6", "--out", str(out)])
    assert code == 0
    assert (payload["rows"], payload["cols"]) == (129, 64)
    blob = out.read_bytes()
    header = b"P5\n64 129\n65535\n"
    assert blob.startswith(header)
    assert len(blob) == len(header) + 129 * 64 * 2
    code = main(["coverage", *SMALL, "--frame-range", "abc",
                 "--out", str(out)])
    assert code == 1
    capsys.readouterr()


def test_cli_search_uses_full_search(tmp_path, capsys, monkeypatch):
    import gridwave.cli as cli_mod
    from gridwave import SearchRecord

    spec = WaveletSpec.cauchy(300.0)
    recs = [SearchRecord(spec, 2.0, 5, 250, 251, 2.9412, 251 * 16)]
    seen = {}

    def fake_search(wavelet, rates, *, M_probe, delays, frames):
        seen.update(wavelet=str(wavelet), rates=rates, M_probe=M_probe,
                    delays=delays, frames=frames)
        return recs

    monkeypatch.setattr(cli_mod, "full_search", fake_search)
    code, payload = run_cli(capsys, [
        "search", "--oversampling", "2", "--m-probe", "350",
        "--frames", "16", "--format", "json"])
    assert code == 0
    assert payload == [recs[0].as_dict()]
    assert seen == {"wavelet": "cauchy:300", "rates": [2.0], "M_probe": 350,
                    "delays": "kronecker", "frames": 16}
    code, out = run_cli(capsys, [
        "search", "--oversampling", "2", "--format", "table"])
    assert code == 0
    assert "2.94 (5, 250)" in out
    assert main(["search", "--oversampling", ","]) == 1
    capsys.readouterr()
