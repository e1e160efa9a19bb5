"""Command-line entry point.

Two subcommands: `run` compresses a clip at several truncation ranks
and reports PSNR; `spectrum` dumps the singular tube spectrum.  Exit
codes: 0 success, 2 bad configuration, 3 unreadable or unwritable
files, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report
from .algebra import tqt_svd, truncate
from .errors import (
    ConfigError,
    DegenerateInputError,
    FixtureFormatError,
    NumericalError,
    ShapeMismatchError,
    SingularMatrixError,
)
from .media import decode, encode, load_input, psnr, save_frame_dir
from .transforms import TRANSFORM_NAMES, transform_set

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


@dataclass
class RunConfig:
    input: Path
    out: Path
    transform: str = "qdct"
    frames: int | None = None
    ranks: list[int] = field(default_factory=list)
    seed: int | None = None
    threads: int | None = None
    tol: float = 1e-8


def load_config_file(path) -> dict[str, str]:
    """Flat key=value lines; blank lines and # comments ignored."""
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        settings[key.strip()] = value.strip()
    return settings


def _parse_ranks(text: str) -> list[int]:
    try:
        ranks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad rank list {text!r}") from exc
    if not ranks:
        raise ConfigError("rank list is empty")
    return ranks


def _merge_config(args: argparse.Namespace, need_ranks: bool) -> RunConfig:
    settings = load_config_file(args.config) if args.config else {}

    def pick(flag, key, cast):
        raw = flag if flag is not None else settings.get(key)
        if raw is None:
            return None
        try:
            return cast(raw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc

    input_path = pick(args.input, "input", str)
    out_path = pick(args.out, "out", str)
    if input_path is None:
        raise ConfigError("an input path is required")
    if out_path is None:
        raise ConfigError("an output directory is required")
    cfg = RunConfig(
        input=Path(input_path),
        out=Path(out_path),
        transform=pick(args.transform, "transform", str) or "qdct",
        frames=pick(args.frames, "frames", int),
        ranks=pick(getattr(args, "ranks", None), "ranks", _parse_ranks) or [],
        seed=pick(args.seed, "seed", int),
        threads=pick(args.threads, "threads", int),
        tol=pick(args.tol, "tol", float) or 1e-8,
    )
    if cfg.transform not in TRANSFORM_NAMES:
        raise ConfigError(f"unknown transform {cfg.transform!r}; "
                          f"choose from {', '.join(TRANSFORM_NAMES)}")
    if cfg.transform == "random" and cfg.seed is None:
        raise ConfigError("the random transform requires --seed")
    if cfg.frames is not None and cfg.frames < 1:
        raise ConfigError("--frames must be positive")
    if need_ranks and not cfg.ranks:
        raise ConfigError("a rank list is required (e.g. --ranks 5,10,20)")
    return cfg


def _prepare(cfg: RunConfig):
    stack = load_input(cfg.input, last=cfg.frames)
    tensor = encode(stack)
    ts = transform_set(cfg.transform, tensor.dims, seed=cfg.seed,
                       tensor=tensor, tol=cfg.tol)
    return stack, tensor, ts


def run_experiment(cfg: RunConfig) -> list[tuple[str, int, float, float]]:
    """Decompose once, truncate at every configured rank, write frames,
    per-frame PSNR tables, a summary, and the PSNR figure."""
    stack, tensor, ts = _prepare(cfg)
    k_max = min(tensor.dims[0], tensor.dims[1])
    for s in cfg.ranks:
        if not 1 <= s <= k_max:
            raise ConfigError(f"rank {s} outside [1, {k_max}]")

    decomposition = tqt_svd(tensor, ts, threads=cfg.threads)
    out_dir = cfg.out / cfg.transform
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for s in cfg.ranks:
        approx = truncate(decomposition, s)
        error_sq = float((approx - tensor).norm() ** 2)
        rebuilt = decode(approx)
        per_frame, average = psnr(stack, rebuilt)
        rank_dir = out_dir / f"s={s}"
        save_frame_dir(rebuilt, rank_dir)
        report.write_frame_psnr_csv(rank_dir / "psnr.csv", per_frame)
        rows.append((cfg.transform, s, average, error_sq))

    report.write_summary_csv(cfg.out / "summary.csv", rows)
    report.write_summary_markdown(cfg.out / "summary.md", rows)
    report.render_psnr_figure(out_dir / "psnr_vs_rank.png",
                              [r[1] for r in rows], [r[2] for r in rows],
                              cfg.transform)
    return rows


def dump_spectrum(cfg: RunConfig) -> np.ndarray:
    """Write the tube spectrum CSV (with tail sums) and its figure."""
    _, tensor, ts = _prepare(cfg)
    decomposition = tqt_svd(tensor, ts, threads=cfg.threads)
    cfg.out.mkdir(parents=True, exist_ok=True)
    report.write_spectrum_csv(cfg.out / "spectrum.csv", decomposition.sigma)
    report.render_spectrum_figure(cfg.out / "spectrum.png", decomposition.sigma)
    return decomposition.sigma


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtsvd",
        description="Quaternion tensor compression via transform-domain SVD")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", help="frame directory or .qt tensor fixture")
        p.add_argument("--out", help="output directory")
        p.add_argument("--transform", choices=TRANSFORM_NAMES,
                       help="transform family (default qdct)")
        p.add_argument("--frames", type=int,
                       help="use only the last N frames")
        p.add_argument("--seed", type=int,
                       help="seed for the random transform family")
        p.add_argument("--threads", type=int,
                       help="slice-level worker threads (default: all cores)")
        p.add_argument("--tol", type=float,
                       help="transform validation tolerance (default 1e-8)")
        p.add_argument("--config", help="key=value config file; "
                                        "command-line flags win")

    runp = sub.add_parser("run", help="compress at several ranks and report PSNR")
    common(runp)
    runp.add_argument("--ranks", help="comma-separated truncation ranks")

    specp = sub.add_parser("spectrum", help="dump the singular tube spectrum")
    common(specp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = _merge_config(args, need_ranks=True)
            rows = run_experiment(cfg)
            for transform, s, average, _ in rows:
                print(f"{transform} s={s}: {average:.3f} dB"
                      if np.isfinite(average)
                      else f"{transform} s={s}: lossless")
        else:
            cfg = _merge_config(args, need_ranks=False)
            sigma = dump_spectrum(cfg)
            print(f"wrote spectrum with {len(sigma)} tubes to {cfg.out}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FixtureFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, SingularMatrixError, DegenerateInputError,
            ShapeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
