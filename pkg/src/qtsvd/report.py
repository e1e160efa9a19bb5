"""Delimited reports and the figures rendered next to them.

CSV files are the canonical machine-readable output and their content
is byte-deterministic for a fixed configuration and seed.  Each report
path also renders a matplotlib figure to a PNG beside the CSV for quick
visual inspection; figures are presentation only and nothing reads
them back.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(value: float) -> str:
    if np.isinf(value):
        return "inf"
    return f"{value:.6f}"


def write_frame_psnr_csv(path, per_frame) -> None:
    lines = ["frame_index,psnr_db"]
    lines += [f"{i},{_fmt(v)}" for i, v in enumerate(per_frame)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(path, rows) -> None:
    """rows: (transform, s, avg_psnr_db, error_sq) tuples."""
    lines = ["transform,s,avg_psnr_db,error_sq"]
    lines += [f"{t},{s},{_fmt(p)},{e:.12e}" for t, s, p, e in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_markdown(path, rows) -> None:
    lines = [
        "# Compression summary",
        "",
        "Average PSNR after truncating the decomposition at each rank;",
        "error_sq is the squared Frobenius error before 8-bit rounding.",
        "",
        "| transform | s | avg PSNR (dB) | error_sq |",
        "|---|---|---|---|",
    ]
    lines += [f"| {t} | {s} | {_fmt(p)} | {e:.6e} |" for t, s, p, e in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path, sigma) -> None:
    """Columns: 1-based tube index k, sigma_k, and the tail sum of
    squared values strictly beyond k."""
    sq = np.asarray(sigma, dtype=np.float64) ** 2
    tails = sq[::-1].cumsum()[::-1] - sq
    lines = ["k,sigma,tail_sq"]
    lines += [f"{k + 1},{sigma[k]:.12e},{tails[k]:.12e}"
              for k in range(len(sigma))]
    Path(path).write_text("\n".join(lines) + "\n")


def render_psnr_figure(path, s_values, psnrs, label: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    vals = np.asarray(psnrs, dtype=np.float64)
    finite = np.isfinite(vals)
    ax.plot(np.asarray(s_values)[finite], vals[finite], "o-", label=label)
    if not finite.all():
        ax.set_title(f"PSNR vs rank ({label}); lossless points omitted")
    else:
        ax.set_title(f"PSNR vs rank ({label})")
    ax.set_xlabel("truncation rank s")
    ax.set_ylabel("average PSNR (dB)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_spectrum_figure(path, sigma) -> None:
    plt = _pyplot()
    sigma = np.asarray(sigma, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    k = np.arange(1, len(sigma) + 1)
    if np.all(sigma > 0):
        ax.semilogy(k, sigma, "o-")
    else:
        ax.plot(k, sigma, "o-")
    ax.set_xlabel("tube index k")
    ax.set_ylabel("tube norm")
    ax.set_title("Singular tube spectrum")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt
