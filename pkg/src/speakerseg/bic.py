"""Gaussian window modeling and BIC-difference change detection.

A window of feature rows is scored under two hypotheses: one full-rank
Gaussian for the whole window versus one Gaussian per side of a split.
The score difference

    delta_bic = (n/2) ln|cov Z| - (b/2) ln|cov X| - ((n-b)/2) ln|cov Y|
                - (lam/2) (d + d(d+1)/2) ln(n)

is positive when describing the window as two sources fits better than
one, penalized for the extra parameters. Natural logarithms throughout;
covariances are maximum-likelihood (divide by n) and regularized with
reg_epsilon * I before taking the determinant so short windows stay
positive definite.

Two sweep strategies emit multiple change points: a growing window that
restarts at each accepted change, and a fixed-size window slid at a
constant rate whose center-split score curve is peak-picked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .features import FeatureMatrix

DEFAULT_REG_EPSILON = 1e-6


@dataclass(frozen=True)
class GaussianStats:
    """ML mean/covariance of a row cloud plus the regularized log-determinant."""

    n: int
    mean: np.ndarray
    cov: np.ndarray
    log_det: float


@dataclass(frozen=True)
class BicConfig:
    lam: float = 1.0
    reg_epsilon: float = DEFAULT_REG_EPSILON
    n_ini: int = 100
    n_g: int = 50
    n_max: int = 600
    n_s: int = 50
    fixed_window: int | None = None  # None: rows spanning one second

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.reg_epsilon <= 0:
            raise ValueError("reg_epsilon must be positive")
        if self.n_g < 1 or self.n_s < 1:
            raise ValueError("n_g and n_s must be >= 1")
        if self.n_max <= self.n_ini:
            raise ValueError("n_max must exceed n_ini")
        if self.fixed_window is not None and self.fixed_window < 2:
            raise ValueError("fixed_window must hold at least two rows")


@dataclass(frozen=True)
class ChangePoint:
    time_s: float
    score: float


def fit_gaussian(rows, reg_epsilon: float = DEFAULT_REG_EPSILON) -> GaussianStats:
    """Fit the ML Gaussian of a contiguous row slice.

    Requires n >= d + 1 rows; the log-determinant is computed from the
    Cholesky factor of cov + reg_epsilon * I.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise PreconditionError("rows must be a 2-D slice")
    n, d = rows.shape
    if n < d + 1:
        raise PreconditionError(f"need at least d+1={d + 1} rows, got {n}")
    if not np.all(np.isfinite(rows)):
        raise PreconditionError("rows must be finite")
    mean = rows.mean(axis=0)
    centered = rows - mean
    cov = centered.T @ centered / n
    log_det = _log_det_regularized(cov, reg_epsilon)
    return GaussianStats(n=n, mean=mean, cov=cov, log_det=log_det)


def _log_det_regularized(cov: np.ndarray, reg_epsilon: float) -> float:
    d = cov.shape[0]
    chol = np.linalg.cholesky(cov + reg_epsilon * np.eye(d))
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def penalty(d: int, n: int, lam: float) -> float:
    """Model-complexity term: (lam/2) (d + d(d+1)/2) ln(n)."""
    if d < 1 or n < 2:
        raise PreconditionError("need d >= 1 and n >= 2")
    return 0.5 * lam * (d + 0.5 * d * (d + 1)) * math.log(n)


def delta_bic(
    rows,
    b: int,
    lam: float = 1.0,
    reg_epsilon: float = DEFAULT_REG_EPSILON,
) -> float:
    """Two-Gaussian-vs-one score of splitting rows at index b.

    Positive means the split explains the window better than a single
    Gaussian does, i.e. a change at b. Both sides must hold at least
    d + 1 rows.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise PreconditionError("rows must be a 2-D slice")
    n, d = rows.shape
    if b < d + 1 or n - b < d + 1:
        raise PreconditionError("split leaves a side with fewer than d+1 rows")
    whole = fit_gaussian(rows, reg_epsilon)
    left = fit_gaussian(rows[:b], reg_epsilon)
    right = fit_gaussian(rows[b:], reg_epsilon)
    data_term = (
        0.5 * n * whole.log_det
        - 0.5 * b * left.log_det
        - 0.5 * (n - b) * right.log_det
    )
    return data_term - penalty(d, n, lam)


def _best_split(rows: np.ndarray, lam: float, reg_epsilon: float, min_b: int = 0):
    """Max score over all admissible splits of one window; (None, -inf) if none."""
    n, d = rows.shape
    lo, hi = max(d + 1, min_b), n - d - 1
    if lo > hi:
        return None, -math.inf
    whole = fit_gaussian(rows, reg_epsilon)
    pen = penalty(d, n, lam)
    best_b, best = None, -math.inf
    for b in range(lo, hi + 1):
        left = fit_gaussian(rows[:b], reg_epsilon)
        right = fit_gaussian(rows[b:], reg_epsilon)
        score = (
            0.5 * n * whole.log_det
            - 0.5 * b * left.log_det
            - 0.5 * (n - b) * right.log_det
            - pen
        )
        if score > best:
            best_b, best = b, score
    return best_b, best


def _refine_split(
    vectors: np.ndarray, row: int, span: int, lam: float, reg_epsilon: float
) -> tuple[int, float]:
    """Re-localize a detected change in a span-row window centered on it.

    The coarse sweep can misplace a boundary by tens of rows when the
    transition sits at a window edge; the centered second pass pins it
    down. Falls back to the coarse location when the refinement window
    cannot be split.
    """
    lo = max(0, row - span // 2)
    hi = min(len(vectors), lo + span)
    lo = max(0, hi - span)
    b, score = _best_split(vectors[lo:hi], lam, reg_epsilon)
    if b is None or score <= 0:
        return row, -math.inf
    return lo + b, score


def detect_growing(features: FeatureMatrix, cfg: BicConfig | None = None) -> list[ChangePoint]:
    """Growing-window sweep: restart at each accepted change point.

    The window opens at n_ini rows and is scored at every admissible
    split. On a positive maximum the split is re-localized in an n_ini
    window centered on it, the refined row becomes a change point, and
    the sweep restarts there; otherwise the window grows by n_g rows up
    to n_max, after which it slides forward by n_s rows at constant size.
    Splits within n_ini rows of the last emitted point are inadmissible,
    which keeps consecutive detections at least n_ini rows apart.
    """
    cfg = cfg or BicConfig()
    n_rows = len(features)
    if n_rows == 0:
        return []
    d = features.dim
    if cfg.n_ini < 2 * (d + 1):
        raise PreconditionError("n_ini must hold at least 2(d+1) rows")
    points: list[ChangePoint] = []
    start = 0
    size = cfg.n_ini
    last_emit_row = None
    while start + size <= n_rows:
        window = features.vectors[start : start + size]
        min_b = 0 if last_emit_row is None else last_emit_row + cfg.n_ini - start
        b, score = _best_split(window, cfg.lam, cfg.reg_epsilon, min_b)
        if b is not None and score > 0:
            row, refined_score = _refine_split(
                features.vectors, start + b, cfg.n_ini, cfg.lam, cfg.reg_epsilon
            )
            if refined_score == -math.inf or (
                last_emit_row is not None and row - last_emit_row < cfg.n_ini
            ):
                row, refined_score = start + b, score
            points.append(ChangePoint(time_s=float(features.times[row]), score=refined_score))
            last_emit_row = row
            start = row
            size = cfg.n_ini
        elif size < cfg.n_max:
            grown = min(size + cfg.n_g, cfg.n_max)
            if start + grown > n_rows:
                break
            size = grown
        else:
            start += cfg.n_s
    return points


def _resolve_fixed_window(features: FeatureMatrix, cfg: BicConfig) -> int:
    if cfg.fixed_window is not None:
        return cfg.fixed_window
    return max(2, int(round(1.0 / features.hop_s)))


def fixed_window_scores(features: FeatureMatrix, cfg: BicConfig | None = None):
    """Center-split score curve of the sliding fixed window.

    Returns (times, scores) where each time is the center row's start
    time; exported as TSV via write_scores_tsv for inspection.
    """
    cfg = cfg or BicConfig()
    if len(features) < 2:
        return np.empty(0), np.empty(0)
    window = _resolve_fixed_window(features, cfg)
    n_rows = len(features)
    if n_rows < window:
        return np.empty(0), np.empty(0)
    half = window // 2
    d = features.dim
    times, scores = [], []
    for start in range(0, n_rows - window + 1, cfg.n_s):
        center = start + half
        if half < d + 1 or window - half < d + 1:
            score = -math.inf
        else:
            score = delta_bic(
                features.vectors[start : start + window],
                half,
                cfg.lam,
                cfg.reg_epsilon,
            )
        times.append(float(features.times[center]))
        scores.append(score)
    return np.asarray(times), np.asarray(scores)


def detect_fixed(features: FeatureMatrix, cfg: BicConfig | None = None) -> list[ChangePoint]:
    """Fixed-window sweep: positive local maxima of the center-split curve.

    Non-maximum suppression keeps only the strongest peak within one
    window span; ties break toward the earlier time.
    """
    cfg = cfg or BicConfig()
    if len(features) < 2:
        return []
    times, scores = fixed_window_scores(features, cfg)
    if len(scores) == 0:
        return []
    window = _resolve_fixed_window(features, cfg)
    span_s = window * features.hop_s

    peaks = []
    for j, s in enumerate(scores):
        if s <= 0:
            continue
        left_ok = j == 0 or s >= scores[j - 1]
        right_ok = j == len(scores) - 1 or s >= scores[j + 1]
        if left_ok and right_ok:
            peaks.append((times[j], s))

    accepted: list[tuple[float, float]] = []
    for t, s in sorted(peaks, key=lambda p: (-p[1], p[0])):
        if all(abs(t - t0) >= span_s for t0, _ in accepted):
            accepted.append((t, s))
    accepted.sort()
    return [ChangePoint(time_s=t, score=s) for t, s in accepted]


def verify_change(
    features: FeatureMatrix,
    t: float,
    window_s: float,
    lam: float = 1.0,
    reg_epsilon: float = DEFAULT_REG_EPSILON,
) -> tuple[bool, float]:
    """Score a hypothesized change at time t over a centered window.

    Takes the rows within [t - window_s/2, t + window_s/2], splits at the
    row nearest t and returns (accepted, score). Insufficient rows on
    either side verify negatively with a -inf sentinel rather than
    raising.
    """
    if window_s <= 0:
        raise PreconditionError("window_s must be positive")
    times = features.times
    mask = (times >= t - window_s / 2.0) & (times <= t + window_s / 2.0)
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return False, -math.inf
    rows = features.vectors[idx[0] : idx[-1] + 1]
    local_times = times[idx[0] : idx[-1] + 1]
    b = int(np.argmin(np.abs(local_times - t)))
    d = features.dim
    if b < d + 1 or len(rows) - b < d + 1:
        return False, -math.inf
    score = delta_bic(rows, b, lam, reg_epsilon)
    return score > 0, score


def write_scores_tsv(times, scores, fp) -> None:
    fp.write("time_s\tscore\n")
    for t, s in zip(times, scores):
        fp.write(f"{t:.3f}\t{s:.6f}\n")
