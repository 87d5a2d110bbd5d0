"""WAV loading, sample normalization and frame slicing.

Only uncompressed 16-bit PCM RIFF/WAVE files are read. Samples are scaled
by 1/32768 so the amplitude domain is exactly [-1, 1); multi-channel audio
is averaged down to mono. No resampling is performed anywhere: analysis
parameters given in seconds are converted to samples at the file rate.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PreconditionError, UnsupportedWavError, WavFormatError

PCM_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio as float64 amplitudes in [-1, 1] plus its sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size and (np.min(samples) < -1.0 or np.max(samples) > 1.0):
            raise ValueError("samples must lie in [-1.0, 1.0]")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class FramePlan:
    """Sliding-window geometry in samples; frame k covers [k*hop, k*hop + window_len)."""

    window_len: int
    hop: int

    def __post_init__(self):
        if self.window_len < 1:
            raise ValueError("window_len must be >= 1")
        if self.hop < 1:
            raise ValueError("hop must be >= 1")

    def frame_count(self, n_samples: int) -> int:
        if n_samples < self.window_len:
            return 0
        return (n_samples - self.window_len) // self.hop + 1


def _read_chunks(data: bytes):
    """Yield (chunk id, payload) pairs of a RIFF body, honoring pad bytes."""
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        payload = data[pos + 8 : pos + 8 + size]
        if len(payload) < size:
            raise WavFormatError(f"truncated chunk {cid!r}")
        yield cid, payload
        pos += 8 + size + (size & 1)


def load_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM RIFF/WAVE file into a normalized mono AudioBuffer.

    Raises FileNotFoundError for a missing path, WavFormatError for a
    damaged container and UnsupportedWavError for non-PCM encodings or
    bit depths other than 16.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, body in _read_chunks(data):
        if cid == b"fmt " and fmt is None:
            if len(body) < 16:
                raise WavFormatError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data" and payload is None:
            payload = body
    if fmt is None or payload is None:
        raise WavFormatError(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedWavError(f"{path}: only PCM supported, got format {audio_format}")
    if bits != 16:
        raise UnsupportedWavError(f"{path}: only 16-bit samples supported, got {bits}")
    if n_channels < 1:
        raise WavFormatError(f"{path}: channel count {n_channels}")

    frame_bytes = 2 * n_channels
    usable = len(payload) - len(payload) % frame_bytes
    raw = np.frombuffer(payload[:usable], dtype="<i2")
    samples = raw.astype(np.float64).reshape(-1, n_channels).mean(axis=1) / PCM_SCALE
    return AudioBuffer(samples=samples, sample_rate_hz=int(sample_rate))


def write_wav(path, samples, sample_rate_hz: int) -> None:
    """Write float amplitudes as mono 16-bit PCM, clipping into range."""
    samples = np.asarray(samples, dtype=np.float64)
    ints = np.clip(np.rint(samples * PCM_SCALE), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, sample_rate_hz, sample_rate_hz * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(payload))
    Path(path).write_bytes(header + payload)


def frames(buffer: AudioBuffer, plan: FramePlan):
    """Slice a buffer into complete analysis frames.

    Returns (frames, times): an (n, window_len) read-only view of the
    samples and the n frame start times in seconds. Input shorter than
    one window yields zero frames; tail samples that do not fill a full
    window are discarded.
    """
    return _frame_signal(buffer.samples, buffer.sample_rate_hz, plan.window_len, plan.hop)


def _frame_signal(samples: np.ndarray, sample_rate_hz: int, window_len: int, hop: int):
    n = FramePlan(window_len, hop).frame_count(len(samples))
    if n == 0:
        return (
            np.empty((0, window_len), dtype=np.float64),
            np.empty(0, dtype=np.float64),
        )
    windows = np.lib.stride_tricks.sliding_window_view(samples, window_len)[::hop][:n]
    times = np.arange(n) * (hop / sample_rate_hz)
    return windows, times


def plan_from_seconds(buffer: AudioBuffer, frame_len_s: float, hop_s: float) -> FramePlan:
    """Convert second-domain framing to samples at the buffer's rate."""
    window_len = int(round(frame_len_s * buffer.sample_rate_hz))
    hop = int(round(hop_s * buffer.sample_rate_hz))
    if window_len < 1 or hop < 1:
        raise PreconditionError("frame and hop must span at least one sample")
    return FramePlan(window_len=window_len, hop=hop)
