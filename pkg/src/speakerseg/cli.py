"""Command-line front end.

Subcommands: pitch, segment, evaluate, bench, synth. Tunables resolve as
defaults, then the --config file (flat "key = value" lines, # comments),
then explicit flags; --dry-run prints the resolved configuration as JSON
and exits. Exit codes: 0 success, 1 usage, 2 missing/unreadable files,
3 malformed input, 4 input unsuitable for the requested analysis.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, load_wav
from .bic import BicConfig, detect_fixed, detect_growing
from .errors import FormatError, PreconditionError
from .evaluation import (
    ChangePointSet,
    benchmark,
    evaluate,
    read_change_points,
    write_change_points,
)
from .features import MfccConfig, mfcc, write_features_tsv
from .pitch import METHODS as PITCH_METHODS
from .pitch import PitchConfig, pitch_track, write_track_tsv
from .pitch_seg import PitchSegConfig, SegmentationResult, segment, segments_between
from .synth import SynthSpec, synth_to_files

SEG_METHODS = ("pitch", "bic-grow", "bic-fixed")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FORMAT = 3
EXIT_PRECONDITION = 4


@dataclasses.dataclass
class RunConfig:
    """Flat bag of every tunable; materialized into module configs on use."""

    method: str = "pitch"
    tolerance_s: float = 0.5
    seed: int = 0
    pitch_method: str = "amdf"
    min_hz: float = 60.0
    max_hz: float = 400.0
    pitch_frame_s: float = 0.030
    pitch_hop_s: float = 0.010
    voicing_threshold: float = 0.3
    mfcc_window: int = 200
    mfcc_overlap: int = 120
    n_coeffs: int = 13
    n_mel_filters: int = 26
    include_c0: bool = True
    lam: float = 1.0
    reg_epsilon: float = 1e-6
    n_ini: int = 100
    n_g: int = 50
    n_max: int = 600
    n_s: int = 50
    fixed_window: int | None = None
    threshold_coef: float = 0.7
    gamma: float = 0.3
    gamma_c: float = 1.0
    verify_window_s: float = 0.4
    min_gap_s: float = 0.5

    def pitch_config(self) -> PitchConfig:
        return PitchConfig(
            method=self.pitch_method,
            min_hz=self.min_hz,
            max_hz=self.max_hz,
            frame_len_s=self.pitch_frame_s,
            hop_s=self.pitch_hop_s,
            voicing_threshold=self.voicing_threshold,
        )

    def mfcc_config(self) -> MfccConfig:
        return MfccConfig(
            window_len=self.mfcc_window,
            overlap=self.mfcc_overlap,
            n_coeffs=self.n_coeffs,
            n_mel_filters=self.n_mel_filters,
            include_c0=self.include_c0,
        )

    def bic_config(self) -> BicConfig:
        return BicConfig(
            lam=self.lam,
            reg_epsilon=self.reg_epsilon,
            n_ini=self.n_ini,
            n_g=self.n_g,
            n_max=self.n_max,
            n_s=self.n_s,
            fixed_window=self.fixed_window,
        )

    def seg_config(self) -> PitchSegConfig:
        return PitchSegConfig(
            threshold_coef=self.threshold_coef,
            gamma=self.gamma,
            gamma_c=self.gamma_c,
            verify_window_s=self.verify_window_s,
            lam=self.lam,
            min_gap_s=self.min_gap_s,
            pitch=self.pitch_config(),
            mfcc=self.mfcc_config(),
        )

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["lambda"] = out.pop("lam")
        return out


# config-file key -> RunConfig field (identity unless renamed)
_KEY_ALIASES = {"lambda": "lam"}
_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(field: dataclasses.Field, raw: str, key: str):
    raw = raw.strip()
    if field.name == "fixed_window":
        return None if raw.lower() in ("none", "auto", "") else int(raw)
    if field.type in ("bool",):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise FormatError(f"config key {key}: not a boolean: {raw!r}")
    try:
        if field.type in ("int",):
            return int(raw)
        if field.type in ("float",):
            return float(raw)
    except ValueError as exc:
        raise FormatError(f"config key {key}: {exc}") from exc
    return raw


def parse_config_file(path) -> dict:
    """Flat key = value lines; # starts a comment, blank lines ignored."""
    text = Path(path).read_text(encoding="utf-8")
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        name = _KEY_ALIASES.get(key, key)
        if name not in _FIELDS:
            raise FormatError(f"{path}:{lineno}: unknown config key {key!r}")
        values[name] = _coerce(_FIELDS[name], raw, key)
    return values


def resolve_config(args) -> RunConfig:
    """defaults <- config file <- command-line flags, rightmost wins."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for flag, name in (("method", "method"), ("tolerance", "tolerance_s"), ("seed", "seed")):
        if getattr(args, flag, None) is not None:
            values[name] = getattr(args, flag)
    try:
        cfg = RunConfig(**values)
        cfg.pitch_config()
        cfg.mfcc_config()
        cfg.bic_config()
        cfg.seg_config()
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if cfg.method not in SEG_METHODS:
        raise FormatError(f"unknown segmentation method {cfg.method!r}")
    if cfg.pitch_method not in PITCH_METHODS:
        raise FormatError(f"unknown pitch method {cfg.pitch_method!r}")
    return cfg


def build_method(name: str, cfg: RunConfig):
    """Segmenter callable (AudioBuffer -> SegmentationResult) for a method name."""
    if name == "pitch":
        seg_cfg = cfg.seg_config()
        return lambda buffer: segment(buffer, seg_cfg)
    if name in ("bic-grow", "bic-fixed"):
        detect = detect_growing if name == "bic-grow" else detect_fixed
        mfcc_cfg = cfg.mfcc_config()
        bic_cfg = cfg.bic_config()

        def run(buffer: AudioBuffer) -> SegmentationResult:
            start = time.perf_counter()
            points = detect(mfcc(buffer, mfcc_cfg), bic_cfg)
            wall = time.perf_counter() - start
            cps = ChangePointSet(np.array([p.time_s for p in points]))
            return SegmentationResult(
                change_points=cps,
                segments=segments_between(cps, buffer.duration_s),
                candidates_examined=len(points),
                candidates_rejected=0,
                wall_time_s=wall,
            )

        return run
    raise FormatError(f"unknown segmentation method {name!r}")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _write_text(path, text: str) -> None:
    fp, close = _open_out(path)
    try:
        fp.write(text)
    finally:
        if close:
            fp.close()


def _maybe_dry_run(args, cfg: RunConfig) -> bool:
    if getattr(args, "dry_run", False):
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return True
    return False


def cmd_pitch(args) -> int:
    cfg = resolve_config(args)
    if _maybe_dry_run(args, cfg):
        return EXIT_OK
    buffer = load_wav(args.audio)
    track = pitch_track(buffer, cfg.pitch_config())
    fp, close = _open_out(args.out)
    try:
        write_track_tsv(track, fp)
    finally:
        if close:
            fp.close()
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = resolve_config(args)
    if _maybe_dry_run(args, cfg):
        return EXIT_OK
    buffer = load_wav(args.audio)
    features = mfcc(buffer, cfg.mfcc_config())
    fp, close = _open_out(args.out)
    try:
        write_features_tsv(features, fp)
    finally:
        if close:
            fp.close()
    return EXIT_OK


def cmd_segment(args) -> int:
    cfg = resolve_config(args)
    if _maybe_dry_run(args, cfg):
        return EXIT_OK
    buffer = load_wav(args.audio)
    run = build_method(cfg.method, cfg)
    result = run(buffer)
    if args.out:
        write_change_points(result.change_points, args.out)
    else:
        for t in result.change_points.times:
            print(f"{t:.3f}")
    if args.json:
        payload = {"method": cfg.method, "audio": str(args.audio), **result.to_dict()}
        _write_text(args.json, json.dumps(payload, indent=2) + "\n")
    print(f"wall_time_s={result.wall_time_s:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = resolve_config(args)
    if _maybe_dry_run(args, cfg):
        return EXIT_OK
    reference = read_change_points(args.reference)
    hypothesis = read_change_points(args.hypothesis)
    report = evaluate(reference, hypothesis, cfg.tolerance_s)
    if args.json:
        _write_text(args.json, json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        rows = [
            ("fd", f"{report.fd:.4f}"),
            ("fr", f"{report.fr:.4f}"),
            ("f", f"{report.f:.4f}"),
            ("n_hyp", str(report.n_hyp)),
            ("n_ref", str(report.n_ref)),
            ("n_matched", str(report.n_matched)),
            ("tolerance_s", f"{report.tolerance_s:.3f}"),
        ]
        width = max(len(k) for k, _ in rows)
        for key, value in rows:
            print(f"{key:<{width}}  {value}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    if _maybe_dry_run(args, cfg):
        return EXIT_OK
    buffer = load_wav(args.audio)
    reference = read_change_points(args.reference)
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not names:
        raise FormatError("no methods given")
    for name in names:
        if name not in SEG_METHODS:
            raise FormatError(f"unknown segmentation method {name!r}")
    methods = [(name, build_method(name, cfg)) for name in names]
    result = benchmark(buffer, reference, methods, cfg.tolerance_s)
    _write_text(args.out, result.to_csv())
    for row in result.rows:
        if row.error is not None:
            print(f"{row.method}: failed: {row.error}", file=sys.stderr)
        else:
            print(
                f"{row.method}: f={row.report.f:.4f} wall={row.wall_time_s:.3f}s",
                file=sys.stderr,
            )
    if result.speedup is not None:
        print(f"speedup={result.speedup:.2f}", file=sys.stderr)
    return EXIT_OK


def _parse_float_list(raw: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise FormatError(f"{flag}: {exc}") from exc


def cmd_synth(args) -> int:
    cfg = resolve_config(args)
    if _maybe_dry_run(args, cfg):
        return EXIT_OK
    durations = _parse_float_list(args.seconds, "--seconds")
    duration_s = durations[0] if len(durations) == 1 else durations
    f0 = _parse_float_list(args.f0, "--f0") if args.f0 else None
    try:
        spec = SynthSpec(
            n_speakers=args.speakers,
            duration_s=duration_s,
            f0_hz=f0,
            noise_level=args.noise,
            sample_rate_hz=args.rate,
            seed=cfg.seed,
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    buffer, truth = synth_to_files(spec, args.out, args.ref_out)
    print(
        f"wrote {args.out} ({buffer.duration_s:.1f}s at {buffer.sample_rate_hz} Hz) "
        f"and {args.ref_out} ({len(truth)} change points)",
        file=sys.stderr,
    )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="speakerseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--dry-run", action="store_true", help="print resolved config and exit")
        p.add_argument("--seed", type=int, help="seed for synthetic generation")
        p.add_argument("--tolerance", type=float, help="match tolerance in seconds")

    p = sub.add_parser("pitch", parents=[], help="pitch track as TSV")
    p.add_argument("audio")
    p.add_argument("--out", help="output path (default stdout)")
    common(p)
    p.set_defaults(func=cmd_pitch)

    p = sub.add_parser("features", help="MFCC matrix as TSV")
    p.add_argument("audio")
    p.add_argument("--out", help="output path (default stdout)")
    common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("segment", help="detect speaker changes")
    p.add_argument("audio")
    p.add_argument("--method", choices=SEG_METHODS, help="segmentation method")
    p.add_argument("--out", help="change-point file (default: print to stdout)")
    p.add_argument("--json", help="write the full result as JSON ('-' for stdout)")
    common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score a hypothesis against a reference")
    p.add_argument("reference")
    p.add_argument("hypothesis")
    p.add_argument("--json", help="write the report as JSON ('-' for stdout)")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="compare methods on one recording")
    p.add_argument("audio")
    p.add_argument("reference")
    p.add_argument("--methods", default="pitch,bic-grow", help="comma-separated method names")
    p.add_argument("--out", help="CSV path (default stdout)")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic multi-speaker WAV")
    p.add_argument("--out", required=True, help="WAV output path")
    p.add_argument("--ref-out", required=True, help="ground-truth change-point file")
    p.add_argument("--speakers", type=int, default=2)
    p.add_argument("--seconds", default="5.0", help="per-speaker duration, or comma list")
    p.add_argument("--f0", help="comma-separated fundamentals in Hz")
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--rate", type=int, default=8000)
    common(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_IO
    except IsADirectoryError as exc:
        print(f"error: not a file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
