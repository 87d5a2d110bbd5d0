"""Scoring hypothesized change points against a reference, plus the
head-to-head method benchmark.

Detected and reference points are paired one-to-one within a time
tolerance, greedily by increasing pair distance. From the pairing:

    fd = false detections / total detections
    fr = missed reference points / total reference points
    f  = 2 (1-fd) (1-fr) / (2 - fd - fr)

Empty denominators score 0.0 by convention, and f is 0.0 at the
fd = fr = 1 limit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer
from .errors import FormatError

DEFAULT_TOLERANCE_S = 0.5


@dataclass(frozen=True)
class ChangePointSet:
    """Strictly increasing change times in seconds."""

    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", times)
        if times.ndim != 1:
            raise FormatError("change points must form a 1-D sequence")
        if times.size and not np.all(np.isfinite(times)):
            raise FormatError("change points must be finite")
        if times.size and np.min(times) < 0:
            raise FormatError("change points must be >= 0 seconds")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise FormatError("change points must be strictly increasing")

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class EvalReport:
    fd: float
    fr: float
    f: float
    n_hyp: int
    n_ref: int
    n_matched: int
    tolerance_s: float
    wall_time_s: float | None = None

    def to_dict(self) -> dict:
        out = {
            "fd": self.fd,
            "fr": self.fr,
            "f": self.f,
            "n_hyp": self.n_hyp,
            "n_ref": self.n_ref,
            "n_matched": self.n_matched,
            "tolerance_s": self.tolerance_s,
        }
        if self.wall_time_s is not None:
            out["wall_time_s"] = self.wall_time_s
        return out


def match_points(
    reference: ChangePointSet, hypothesis: ChangePointSet, tolerance_s: float
) -> list[tuple[int, int]]:
    """One-to-one pairing within tolerance, greedy by pair distance.

    Ties in distance break toward the earlier reference, then earlier
    hypothesis time. Returns (reference index, hypothesis index) pairs.
    """
    if tolerance_s < 0:
        raise ValueError("tolerance_s must be >= 0")
    ref, hyp = reference.times, hypothesis.times
    candidates = [
        (abs(ref[i] - hyp[j]), i, j)
        for i in range(len(ref))
        for j in range(len(hyp))
        if abs(ref[i] - hyp[j]) <= tolerance_s
    ]
    candidates.sort()
    used_ref: set[int] = set()
    used_hyp: set[int] = set()
    pairs = []
    for _, i, j in candidates:
        if i in used_ref or j in used_hyp:
            continue
        pairs.append((i, j))
        used_ref.add(i)
        used_hyp.add(j)
    return pairs


def fd_rate(n_hyp: int, n_matched: int) -> float:
    """False detections over total detections; 0.0 with no detections."""
    if n_hyp < 0 or n_matched < 0 or n_matched > n_hyp:
        raise ValueError("need 0 <= n_matched <= n_hyp")
    if n_hyp == 0:
        return 0.0
    return (n_hyp - n_matched) / n_hyp


def fr_rate(n_ref: int, n_matched: int) -> float:
    """Missed reference points over total reference points; 0.0 with none."""
    if n_ref < 0 or n_matched < 0 or n_matched > n_ref:
        raise ValueError("need 0 <= n_matched <= n_ref")
    if n_ref == 0:
        return 0.0
    return (n_ref - n_matched) / n_ref


def f_measure(fd: float, fr: float) -> float:
    """Combined accuracy score; 1.0 only at fd = fr = 0."""
    if not (0.0 <= fd <= 1.0 and 0.0 <= fr <= 1.0):
        raise ValueError("fd and fr must lie in [0, 1]")
    denom = 2.0 - fd - fr
    if denom == 0.0:
        return 0.0
    return 2.0 * (1.0 - fd) * (1.0 - fr) / denom


def evaluate(
    reference: ChangePointSet,
    hypothesis: ChangePointSet,
    tolerance_s: float = DEFAULT_TOLERANCE_S,
    wall_time_s: float | None = None,
) -> EvalReport:
    pairs = match_points(reference, hypothesis, tolerance_s)
    n_matched = len(pairs)
    fd = fd_rate(len(hypothesis), n_matched)
    fr = fr_rate(len(reference), n_matched)
    return EvalReport(
        fd=fd,
        fr=fr,
        f=f_measure(fd, fr),
        n_hyp=len(hypothesis),
        n_ref=len(reference),
        n_matched=n_matched,
        tolerance_s=tolerance_s,
        wall_time_s=wall_time_s,
    )


@dataclass
class BenchmarkRow:
    method: str
    report: EvalReport | None
    wall_time_s: float
    error: str | None = None


@dataclass
class BenchmarkResult:
    rows: list[BenchmarkRow] = field(default_factory=list)
    speedup: float | None = None  # growing-window BIC time over pitch time

    def to_csv(self) -> str:
        with_speedup = self.speedup is not None
        header = "method,fd,fr,f,wall_time_s" + (",speedup" if with_speedup else "")
        lines = [header]
        for row in self.rows:
            if row.report is None:
                cells = [row.method, "", "", "", f"{row.wall_time_s:.3f}"]
            else:
                cells = [
                    row.method,
                    f"{row.report.fd:.4f}",
                    f"{row.report.fr:.4f}",
                    f"{row.report.f:.4f}",
                    f"{row.wall_time_s:.3f}",
                ]
            if with_speedup:
                cells.append(f"{self.speedup:.2f}" if row.method == "pitch" else "")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def benchmark(
    buffer: AudioBuffer,
    reference: ChangePointSet,
    methods,
    tolerance_s: float = DEFAULT_TOLERANCE_S,
) -> BenchmarkResult:
    """Run each configured segmenter on the same buffer and score it.

    methods is a sequence of (name, callable) pairs where the callable
    maps an AudioBuffer to an object with a change_points attribute.
    Methods run sequentially so wall-clock comparisons are fair; a
    failing method is recorded in its row instead of aborting the run.
    The speedup ratio is filled when both the "bic-grow" and "pitch"
    methods are present.
    """
    if not methods:
        raise ValueError("need at least one method")
    result = BenchmarkResult()
    wall_by_name: dict[str, float] = {}
    for name, run in methods:
        start = time.perf_counter()
        try:
            seg_result = run(buffer)
            wall = time.perf_counter() - start
            report = evaluate(
                reference, seg_result.change_points, tolerance_s, wall_time_s=wall
            )
            result.rows.append(BenchmarkRow(method=name, report=report, wall_time_s=wall))
            wall_by_name[name] = wall
        except Exception as exc:  # noqa: BLE001 - per-row failure is data
            wall = time.perf_counter() - start
            result.rows.append(
                BenchmarkRow(method=name, report=None, wall_time_s=wall, error=str(exc))
            )
    if "bic-grow" in wall_by_name and "pitch" in wall_by_name and wall_by_name["pitch"] > 0:
        result.speedup = wall_by_name["bic-grow"] / wall_by_name["pitch"]
    return result


def read_change_points(path) -> ChangePointSet:
    """One decimal timestamp (seconds) per line; blank lines ignored."""
    text = Path(path).read_text(encoding="utf-8")
    times = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            times.append(float(line))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: not a timestamp: {line!r}") from exc
    try:
        return ChangePointSet(np.asarray(times))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_change_points(points: ChangePointSet, path) -> None:
    """Newline-terminated timestamps with three decimal places."""
    lines = "".join(f"{t:.3f}\n" for t in points.times)
    Path(path).write_text(lines, encoding="utf-8")
