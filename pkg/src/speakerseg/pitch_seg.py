"""Rapid segmentation driven by jumps in the pitch track.

The pipeline: per-frame pitch estimates, absolute first differences of
the track, power-law (gamma) correction of the normalized differences,
thresholding against a fraction of the corrected maximum, then a
statistical double-check of each surviving candidate with a small
centered BIC window. Gamma < 1 lifts small differences toward the
threshold, trading missed changes for false alarms that the BIC check
then removes.

Differences touching an unvoiced frame are zeroed: a silence boundary is
not evidence of a speaker change.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .audio_io import AudioBuffer
from .bic import verify_change
from .errors import PreconditionError
from .evaluation import ChangePointSet
from .features import MfccConfig, mfcc
from .pitch import PitchConfig, PitchTrack, pitch_track


@dataclass(frozen=True)
class PitchSegConfig:
    threshold_coef: float = 0.7
    gamma: float = 0.3
    gamma_c: float = 1.0
    verify_window_s: float = 0.4
    lam: float = 1.0
    min_gap_s: float = 0.5
    pitch: PitchConfig = field(default_factory=PitchConfig)
    mfcc: MfccConfig = field(default_factory=MfccConfig)

    def __post_init__(self):
        if not 0.0 < self.threshold_coef <= 1.0:
            raise ValueError("threshold_coef must lie in (0, 1]")
        if self.gamma <= 0 or self.gamma_c <= 0:
            raise ValueError("gamma and gamma_c must be positive")
        if self.verify_window_s <= 0:
            raise ValueError("verify_window_s must be positive")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.min_gap_s < 0:
            raise ValueError("min_gap_s must be >= 0")


@dataclass(frozen=True)
class SegmentationResult:
    change_points: ChangePointSet
    segments: list[tuple[float, float]]
    candidates_examined: int
    candidates_rejected: int
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "change_points_s": [round(float(t), 3) for t in self.change_points.times],
            "segments": [[round(a, 3), round(b, 3)] for a, b in self.segments],
            "candidates_examined": self.candidates_examined,
            "candidates_rejected": self.candidates_rejected,
            "wall_time_s": self.wall_time_s,
        }


def pitch_diff(track: PitchTrack) -> np.ndarray:
    """Absolute first difference of the track; entries touching an
    unvoiced frame are 0.0. Length is len(track) - 1."""
    if len(track) < 2:
        raise PreconditionError("need at least two pitch frames to difference")
    p = track.pitch_hz
    diffs = np.abs(np.diff(p))
    voiced_pair = (p[:-1] > 0) & (p[1:] > 0)
    return np.where(voiced_pair, diffs, 0.0)


def gamma_correct(diff, c: float, gamma: float) -> np.ndarray:
    """Normalize by the sequence maximum, then map x to c * x**gamma.

    All-zero input stays all-zero. With gamma < 1 small normalized values
    are lifted while 1.0 stays fixed (for c = 1).
    """
    if c <= 0 or gamma <= 0:
        raise ValueError("c and gamma must be positive")
    diff = np.asarray(diff, dtype=np.float64)
    peak = diff.max(initial=0.0)
    if peak <= 0.0:
        return np.zeros_like(diff)
    return c * (diff / peak) ** gamma


def candidates(
    corrected,
    times,
    threshold_coef: float,
    min_gap_s: float,
) -> list[float]:
    """Candidate change times from the corrected difference sequence.

    The threshold is threshold_coef times the sequence maximum; strictly
    super-threshold runs collapse to their maximum entry (earlier index
    on ties), each reported at the midpoint of the two frames that formed
    the difference. Candidates closer than min_gap_s are thinned keeping
    the higher-valued one (earlier on ties).
    """
    if not 0.0 < threshold_coef <= 1.0:
        raise ValueError("threshold_coef must lie in (0, 1]")
    corrected = np.asarray(corrected, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if len(corrected) != len(times) - 1:
        raise ValueError("need one corrected value per consecutive frame pair")
    if corrected.size == 0:
        return []
    threshold = threshold_coef * corrected.max()
    above = corrected > threshold
    if not above.any():
        return []

    picks = []  # (value, midpoint time) per run of consecutive indices
    run_start = None
    for i, flag in enumerate(np.append(above, False)):
        if flag and run_start is None:
            run_start = i
        elif not flag and run_start is not None:
            run = corrected[run_start:i]
            j = run_start + int(np.argmax(run))
            picks.append((corrected[j], 0.5 * (times[j] + times[j + 1])))
            run_start = None

    kept: list[tuple[float, float]] = []
    for value, t in sorted(picks, key=lambda p: (-p[0], p[1])):
        if all(abs(t - t0) >= min_gap_s for _, t0 in kept):
            kept.append((value, t))
    return sorted(t for _, t in kept)


def segment(
    buffer: AudioBuffer,
    cfg: PitchSegConfig | None = None,
    verify: bool = True,
) -> SegmentationResult:
    """Full pitch-jump segmentation of one recording.

    verify=False skips the BIC double-check and accepts every candidate;
    it exists so tests can compare the verified result against the raw
    candidate set.
    """
    cfg = cfg or PitchSegConfig()
    if buffer.duration_s <= cfg.verify_window_s:
        raise PreconditionError("audio shorter than the verification window")
    start = time.perf_counter()
    track = pitch_track(buffer, cfg.pitch)
    if len(track) < 2:
        raise PreconditionError("audio too short for a pitch difference")
    corrected = gamma_correct(pitch_diff(track), cfg.gamma_c, cfg.gamma)
    cand_times = candidates(corrected, track.times, cfg.threshold_coef, cfg.min_gap_s)

    accepted: list[float] = []
    rejected = 0
    if verify and cand_times:
        features = mfcc(buffer, cfg.mfcc)
        for t in cand_times:
            ok, _score = verify_change(features, t, cfg.verify_window_s, cfg.lam)
            if ok:
                accepted.append(t)
            else:
                rejected += 1
    else:
        accepted = list(cand_times)

    wall = time.perf_counter() - start
    points = ChangePointSet(np.asarray(accepted))
    return SegmentationResult(
        change_points=points,
        segments=segments_between(points, buffer.duration_s),
        candidates_examined=len(cand_times),
        candidates_rejected=rejected,
        wall_time_s=wall,
    )


def segments_between(points: ChangePointSet, duration_s: float) -> list[tuple[float, float]]:
    bounds = [0.0, *[float(t) for t in points.times], duration_s]
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
