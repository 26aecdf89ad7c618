"""Command-line front end: denoise files or streams, trace VAD, benchmark.

Audio in/out is mono 48 kHz, either WAV (16-bit PCM or float32) or raw
s16le with --raw; "-" selects stdin/stdout. The one-hop pipeline delay is
compensated at this boundary (first hop dropped, one zero-fed hop flushed),
so output files align sample-for-sample with their input.
"""

from __future__ import annotations

import argparse
import io
import sys
import time

import numpy as np
import scipy.io.wavfile

from . import _kernels
from .config import HOP_SIZE, NUM_BANDS, SAMPLE_RATE
from .denoise import Denoiser
from .nn import load_model


class CliError(Exception):
    pass


def _read_audio(path: str, raw: bool):
    """Returns (samples float64 in [-1, 1], format tag)."""
    if path == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            with open(path, "rb") as f:
                data = f.read()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}") from exc
    if raw:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
        return samples, "pcm16"
    try:
        rate, samples = scipy.io.wavfile.read(io.BytesIO(data))
    except ValueError as exc:
        raise CliError(f"cannot parse WAV input: {exc}") from exc
    if rate != SAMPLE_RATE:
        raise CliError(
            f"input is {rate} Hz; this engine requires {SAMPLE_RATE} Hz "
            "mono audio (no resampling is performed)")
    if samples.ndim != 1:
        raise CliError(f"input has {samples.shape[1]} channels; mono required")
    if samples.dtype == np.int16:
        return samples.astype(np.float64) / 32768.0, "pcm16"
    if samples.dtype == np.float32:
        return samples.astype(np.float64), "float32"
    raise CliError(f"unsupported WAV sample format {samples.dtype}; "
                   "use 16-bit PCM or float32")


def _write_audio(path: str, samples: np.ndarray, fmt: str, raw: bool):
    if fmt == "pcm16":
        pcm = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
        payload = pcm
    else:
        payload = samples.astype(np.float32)
    if raw:
        data = payload.tobytes()
    else:
        buf = io.BytesIO()
        scipy.io.wavfile.write(buf, SAMPLE_RATE, payload)
        data = buf.getvalue()
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as f:
            f.write(data)


def _read_gain_lines(path: str, frames: int) -> np.ndarray:
    gains = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != NUM_BANDS:
                raise CliError(f"{path}:{lineno}: expected {NUM_BANDS} "
                               f"comma-separated gains, got {len(parts)}")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise CliError(f"{path}:{lineno}: {exc}") from exc
            gains.append(row)
    if len(gains) < frames:
        raise CliError(f"{path}: {len(gains)} gain lines for {frames} frames")
    return np.asarray(gains)


def _process_file(args) -> int:
    signal, fmt = _read_audio(args.input, args.raw)
    n_hops = -(-len(signal) // HOP_SIZE) if len(signal) else 0
    padded = np.zeros(n_hops * HOP_SIZE)
    padded[:len(signal)] = signal

    if args.mode == "denoise":
        den = Denoiser(load_model(args.model), backend=args.backend,
                       comb_filter=not args.no_comb,
                       gain_smoothing=not args.no_smooth)
    elif args.mode == "passthrough":
        den = Denoiser(None, comb_filter=False, backend=args.backend)
    else:  # oracle
        den = Denoiser(None, comb_filter=not args.no_comb,
                       gain_smoothing=not args.no_smooth,
                       backend=args.backend)
        oracle = _read_gain_lines(args.oracle_gains, n_hops)

    ones = np.ones(NUM_BANDS)
    out = np.empty(len(padded))
    vads = []
    for i in range(n_hops + 1):  # extra zero-fed hop flushes the delay
        if i < n_hops:
            chunk = padded[i * HOP_SIZE:(i + 1) * HOP_SIZE]
        else:
            chunk = np.zeros(HOP_SIZE)
        if args.mode == "denoise":
            result = den.process(chunk)
        elif args.mode == "passthrough":
            result = den.process_with_gains(chunk, ones, smooth=False)
        else:
            row = oracle[min(i, n_hops - 1)] if n_hops else ones
            result = den.process_with_gains(chunk, row)
        if i < n_hops:
            vads.append(result.vad)
        if i > 0:  # drop the first (all-zero) delayed hop
            out[(i - 1) * HOP_SIZE:i * HOP_SIZE] = result.audio

    _write_audio(args.output, out[:len(signal)], fmt, args.raw)
    if args.vad_out:
        with open(args.vad_out, "w") as f:
            f.writelines(f"{v:.6f}\n" for v in vads)
    return 0


def make_benchmark_signal(seconds: float, seed: int = 7) -> np.ndarray:
    """Deterministic speech-ish test signal: swept harmonics plus noise."""
    rng = np.random.default_rng(seed)
    n = int(seconds * SAMPLE_RATE)
    t = np.arange(n) / SAMPLE_RATE
    f0 = 120.0 + 40.0 * np.sin(2 * np.pi * 0.5 * t)
    phase = 2 * np.pi * np.cumsum(f0) / SAMPLE_RATE
    sig = sum(np.sin(k * phase) / k for k in range(1, 6))
    sig *= 0.5 + 0.5 * np.sin(2 * np.pi * 1.3 * t) ** 2
    sig += 0.05 * rng.standard_normal(n)
    return 0.3 * sig / np.max(np.abs(sig))


def run_benchmark(model, seconds: float, backend=None) -> dict:
    """Process a synthetic signal and time the pipeline per stage."""
    den = Denoiser(model, backend=backend, collect_timing=True)
    signal = make_benchmark_signal(seconds)
    hop = HOP_SIZE
    n_hops = len(signal) // hop
    start = time.perf_counter()
    for i in range(n_hops):
        den.process(signal[i * hop:(i + 1) * hop])
    elapsed = time.perf_counter() - start
    audio_seconds = n_hops * hop / SAMPLE_RATE
    return {
        "backend": _kernels.get(backend).NAME,
        "frames": n_hops,
        "audio_seconds": audio_seconds,
        "process_seconds": elapsed,
        "frames_per_second": n_hops / elapsed,
        "real_time_factor": elapsed / audio_seconds,
        "stage_seconds": dict(den.timings),
        "weights": model.weight_count(),
        "macs_per_frame": model.macs_per_frame(),
    }


def _print_report(report: dict):
    print(f"backend:            {report['backend']}")
    print(f"audio processed:    {report['audio_seconds']:.1f} s "
          f"({report['frames']} frames)")
    print(f"processing time:    {report['process_seconds']:.3f} s")
    print(f"frames per second:  {report['frames_per_second']:.0f}")
    print(f"real-time factor:   {report['real_time_factor']:.4f}")
    print(f"network weights:    {report['weights']} "
          f"({report['macs_per_frame']} multiply-adds/frame)")
    total = sum(report["stage_seconds"].values())
    print("stage breakdown:")
    for stage, secs in report["stage_seconds"].items():
        share = 100.0 * secs / total if total else 0.0
        print(f"  {stage:<9} {secs:8.3f} s  {share:5.1f}%")


def _run_benchmark_mode(args) -> int:
    model = load_model(args.model)
    backends = (_kernels.available_backends() if args.compare_backends
                else (args.backend,))
    for backend in backends:
        report = run_benchmark(model, args.seconds, backend)
        _print_report(report)
        print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="clearband",
        description="48 kHz single-channel speech noise suppression")
    p.add_argument("input", nargs="?", help="input WAV/raw path or - for stdin")
    p.add_argument("output", nargs="?", help="output path or - for stdout")
    p.add_argument("--model", help="model file (.rnnd)")
    p.add_argument("--mode", default="denoise",
                   choices=["denoise", "passthrough", "oracle", "benchmark"])
    p.add_argument("--raw", action="store_true",
                   help="treat input/output as raw 48 kHz s16le")
    p.add_argument("--vad-out", help="write one voice probability per frame")
    p.add_argument("--oracle-gains",
                   help="file with 22 comma-separated gains per line, one "
                        "line per 10 ms frame (last line is reused for the "
                        "flush frame)")
    p.add_argument("--seconds", type=float, default=60.0,
                   help="benchmark audio length (default 60)")
    p.add_argument("--backend", choices=_kernels.available_backends(),
                   default=None, help="kernel backend (default: best available)")
    p.add_argument("--compare-backends", action="store_true",
                   help="benchmark every available backend")
    p.add_argument("--no-comb", action="store_true",
                   help="disable the pitch comb filter")
    p.add_argument("--no-smooth", action="store_true",
                   help="disable gain decay limiting")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.mode == "benchmark":
            if not args.model:
                raise CliError("benchmark mode requires --model")
            return _run_benchmark_mode(args)
        if args.input is None or args.output is None:
            raise CliError(f"mode {args.mode} requires input and output")
        if args.mode == "denoise" and not args.model:
            raise CliError("denoise mode requires --model")
        if args.mode == "oracle" and not args.oracle_gains:
            raise CliError("oracle mode requires --oracle-gains")
        return _process_file(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # model format errors etc.
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
