"""Per-frame fundamental-frequency estimation.

Three interchangeable detectors over a shared lag grid:

* autocorrelation: lag of the largest correlation peak,
* average magnitude difference (AMDF): first pronounced dip,
* real cepstrum: largest quefrency peak.

All three search lags tau in [ceil(fs/max_hz), floor(fs/min_hz)] and
return fs/tau, or 0.0 for frames that fail the voicing gate. The track
over a recording is computed batch-wise but is numerically identical to
calling pitch_frame per frame.

AMDF selection and voicing operate on the per-overlap-sample mean of the
raw difference sum: the raw sum shrinks with lag simply because fewer
sample pairs overlap, which would bias the minimum toward long lags and
let white noise pass the voicing gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio_io import AudioBuffer, _frame_signal, plan_from_seconds
from .errors import PreconditionError

SPECTRAL_FLOOR = 1e-10

ACF = "acf"
AMDF = "amdf"
CEPSTRAL = "cepstral"
METHODS = (ACF, AMDF, CEPSTRAL)

# AMDF dips must reach below this fraction of the range maximum to count
# as a pitch-period candidate; shallower dips are noise.
AMDF_DIP_FRACTION = 0.5

# The cepstral gate is a robust prominence score: the quefrency peak must
# stand (3.5 + 5 t) median-absolute-deviations above the search-range
# median. White noise tops out near 4.8; harmonic combs reach 5.5-18.
CEPSTRAL_Z_BASE = 3.5
CEPSTRAL_Z_SPAN = 5.0


@dataclass(frozen=True)
class PitchConfig:
    method: str = AMDF
    min_hz: float = 60.0
    max_hz: float = 400.0
    frame_len_s: float = 0.030
    hop_s: float = 0.010
    voicing_threshold: float = 0.3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown pitch method {self.method!r}")
        if not 0 < self.min_hz < self.max_hz:
            raise ValueError("need 0 < min_hz < max_hz")
        if self.frame_len_s <= 0 or self.hop_s <= 0:
            raise ValueError("frame_len_s and hop_s must be positive")
        if self.frame_len_s * self.min_hz <= 1.0:
            raise ValueError("frame_len_s too short to hold the longest search lag")
        if not 0.0 <= self.voicing_threshold <= 1.0:
            raise ValueError("voicing_threshold must lie in [0, 1]")


@dataclass(frozen=True)
class PitchTrack:
    """Frame start times and the parallel pitch estimates (0.0 = unvoiced)."""

    times: np.ndarray
    pitch_hz: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        pitch = np.asarray(self.pitch_hz, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "pitch_hz", pitch)
        if len(times) != len(pitch):
            raise ValueError("times and pitch_hz must be parallel")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)


def next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


def lag_bounds(sample_rate_hz: int, cfg: PitchConfig) -> tuple[int, int]:
    """Inclusive lag search range [ceil(fs/max_hz), floor(fs/min_hz)]."""
    lo = int(np.ceil(sample_rate_hz / cfg.max_hz))
    hi = int(np.floor(sample_rate_hz / cfg.min_hz))
    if lo < 1:
        lo = 1
    if lo > hi:
        raise PreconditionError("empty lag range; check min_hz/max_hz against the sample rate")
    return lo, hi


def acf(frame) -> np.ndarray:
    """Autocorrelation R(tau) for tau = 0..len(frame)-1, truncated sums."""
    frame = _as_frame(frame)
    return _acf_rows(frame[None, :], np.arange(len(frame)))[0]


def amdf(frame) -> np.ndarray:
    """Raw magnitude-difference sum for tau = 0..len(frame)-1 (AMDF(0) = 0)."""
    frame = _as_frame(frame)
    return _amdf_rows(frame[None, :], np.arange(len(frame)))[0]


def cepstrum(frame) -> np.ndarray:
    """Real cepstrum: inverse transform of the floored log magnitude spectrum.

    Transform length is the next power of two at or above the frame
    length; the floor keeps silent frames finite.
    """
    frame = _as_frame(frame)
    return _cepstrum_rows(frame[None, :], next_pow2(len(frame)))[0]


def _as_frame(frame) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or frame.size == 0:
        raise PreconditionError("frame must be a non-empty 1-D sequence")
    return frame


def _acf_rows(rows: np.ndarray, lags: np.ndarray) -> np.ndarray:
    n = rows.shape[1]
    out = np.empty((rows.shape[0], len(lags)))
    for j, tau in enumerate(lags):
        if tau >= n:
            out[:, j] = 0.0
        else:
            out[:, j] = np.sum(rows[:, : n - tau] * rows[:, tau:], axis=1)
    return out


def _amdf_rows(rows: np.ndarray, lags: np.ndarray) -> np.ndarray:
    n = rows.shape[1]
    out = np.empty((rows.shape[0], len(lags)))
    for j, tau in enumerate(lags):
        if tau >= n:
            out[:, j] = 0.0
        else:
            out[:, j] = np.sum(np.abs(rows[:, : n - tau] - rows[:, tau:]), axis=1)
    return out


def _cepstrum_rows(rows: np.ndarray, nfft: int) -> np.ndarray:
    spectra = np.abs(np.fft.rfft(rows, nfft, axis=1))
    return np.fft.irfft(np.log(spectra + SPECTRAL_FLOOR), nfft, axis=1)


def _select_acf(values: np.ndarray, energy: np.ndarray, threshold: float):
    """Pitch lags and voicing for rows of R(tau) restricted to the search range."""
    idx = np.argmax(values, axis=1)
    peaks = np.take_along_axis(values, idx[:, None], axis=1)[:, 0]
    voiced = (energy > 0) & (peaks >= threshold * energy)
    return idx, voiced


def _select_amdf(norm: np.ndarray, left: np.ndarray, right: np.ndarray, threshold: float):
    """First-pronounced-dip rule on the per-sample AMDF.

    A lag qualifies when it is a local minimum against both neighbors and
    at most AMDF_DIP_FRACTION of the range maximum; the first qualifying
    lag wins, otherwise the global minimum of the range.
    """
    neighbors = np.concatenate([left[:, None], norm, right[:, None]], axis=1)
    is_dip = (norm <= neighbors[:, :-2]) & (norm <= neighbors[:, 2:])
    max_in_range = np.max(norm, axis=1)
    deep = norm <= AMDF_DIP_FRACTION * max_in_range[:, None]
    qualifying = is_dip & deep
    fallback = np.argmin(norm, axis=1)
    first = np.argmax(qualifying, axis=1)
    has_dip = qualifying.any(axis=1)
    idx = np.where(has_dip, first, fallback)
    chosen = np.take_along_axis(norm, idx[:, None], axis=1)[:, 0]
    mean = np.mean(norm, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        depth = 1.0 - chosen / mean
    voiced = (mean > 0) & (depth >= threshold)
    return idx, voiced


def _select_cepstral(values: np.ndarray, threshold: float):
    idx = np.argmax(values, axis=1)
    peaks = np.take_along_axis(values, idx[:, None], axis=1)[:, 0]
    median = np.median(values, axis=1)
    mad = np.median(np.abs(values - median[:, None]), axis=1) * 1.4826
    z_required = CEPSTRAL_Z_BASE + CEPSTRAL_Z_SPAN * threshold
    with np.errstate(invalid="ignore", divide="ignore"):
        z = (peaks - median) / mad
    voiced = (mad > 0) & (z >= z_required)
    return idx, voiced


def _pitch_rows(rows: np.ndarray, sample_rate_hz: int, cfg: PitchConfig) -> np.ndarray:
    lo, hi = lag_bounds(sample_rate_hz, cfg)
    n = rows.shape[1]
    if n <= hi:
        raise PreconditionError(
            f"frame of {n} samples cannot cover the longest search lag {hi}"
        )
    if cfg.method == ACF:
        lags = np.arange(lo, hi + 1)
        values = _acf_rows(rows, lags)
        energy = np.sum(rows * rows, axis=1)
        idx, voiced = _select_acf(values, energy, cfg.voicing_threshold)
        taus = lags[idx]
    elif cfg.method == AMDF:
        lags = np.arange(lo, hi + 1)
        norm = _amdf_rows(rows, lags) / (n - lags).astype(np.float64)

        def neighbor(tau: int) -> np.ndarray:
            if 0 <= tau <= n - 1:
                return _amdf_rows(rows, np.array([tau]))[:, 0] / float(n - tau)
            return np.full(rows.shape[0], np.inf)

        idx, voiced = _select_amdf(
            norm, neighbor(lo - 1), neighbor(hi + 1), cfg.voicing_threshold
        )
        taus = lags[idx]
    else:
        nfft = next_pow2(n)
        ceps = _cepstrum_rows(rows, nfft)
        hi_q = min(hi, nfft - 1)
        values = ceps[:, lo : hi_q + 1]
        idx, voiced = _select_cepstral(values, cfg.voicing_threshold)
        taus = lo + idx
    return np.where(voiced, sample_rate_hz / taus, 0.0)


def pitch_frame(frame, sample_rate_hz: int, cfg: PitchConfig | None = None) -> float:
    """Estimate the fundamental of one frame in Hz; 0.0 when unvoiced."""
    cfg = cfg or PitchConfig()
    frame = _as_frame(frame)
    return float(_pitch_rows(frame[None, :], sample_rate_hz, cfg)[0])


def pitch_track(buffer: AudioBuffer, cfg: PitchConfig | None = None) -> PitchTrack:
    """Run the configured detector over every frame of a recording."""
    cfg = cfg or PitchConfig()
    plan = plan_from_seconds(buffer, cfg.frame_len_s, cfg.hop_s)
    rows, times = _frame_signal(
        buffer.samples, buffer.sample_rate_hz, plan.window_len, plan.hop
    )
    if len(rows) == 0:
        raise PreconditionError("audio shorter than one frame")
    pitch = _pitch_rows(np.ascontiguousarray(rows), buffer.sample_rate_hz, cfg)
    return PitchTrack(times=times, pitch_hz=pitch)


def write_track_tsv(track: PitchTrack, fp) -> None:
    """Two-column TSV (time_s, pitch_hz) for plotting."""
    fp.write("time_s\tpitch_hz\n")
    for t, p in zip(track.times, track.pitch_hz):
        fp.write(f"{t:.3f}\t{p:.3f}\n")
