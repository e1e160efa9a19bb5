"""Color video frames as pure quaternion tensors.

A clip of F frames of size H x W maps to an H x W x F tensor whose real
plane is zero and whose i, j, k planes carry the red, green and blue
channels on the 0..255 scale.  Decoding clamps to [0, 255] and rounds
half up to 8-bit values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FixtureFormatError, ShapeMismatchError
from .qtensor import QTensor, load_qtensor

PEAK = 255.0


@dataclass(frozen=True, eq=False)
class FrameStack:
    """An (F, H, W, 3) uint8 stack of RGB frames."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 4 or self.data.shape[3] != 3:
            raise ShapeMismatchError(
                f"expected (frames, height, width, 3), got {self.data.shape}")
        if self.data.dtype != np.uint8:
            raise ShapeMismatchError("frame data must be uint8")

    @property
    def frame_count(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def frame(self, f: int) -> np.ndarray:
        return self.data[f]

    def last(self, count: int) -> "FrameStack":
        """The trailing `count` frames."""
        if not 1 <= count <= self.frame_count:
            raise ShapeMismatchError(
                f"cannot take {count} frames from {self.frame_count}")
        return FrameStack(self.data[self.frame_count - count:])


def encode(stack: FrameStack) -> QTensor:
    """Frames to a pure quaternion tensor with dims (H, W, F)."""
    rgb = stack.data.astype(np.float64)
    planes = np.zeros((4, stack.height, stack.width, stack.frame_count))
    for c in range(3):
        planes[c + 1] = np.moveaxis(rgb[..., c], 0, -1)
    return QTensor(planes, copy=False)


def decode(a: QTensor) -> FrameStack:
    """Back to 8-bit frames: clamp to [0, 255], round half up.

    The tensor's real plane is ignored; a faithful encode/decode round
    trip keeps it at zero anyway.
    """
    if a.order != 3:
        raise ShapeMismatchError(f"expected a third-order tensor, got order {a.order}")
    h, w, f = a.dims
    out = np.empty((f, h, w, 3), dtype=np.uint8)
    for c in range(3):
        chan = np.clip(a.data[c + 1], 0.0, PEAK)
        out[..., c] = np.moveaxis(np.floor(chan + 0.5), -1, 0).astype(np.uint8)
    return FrameStack(out)


def psnr(reference: FrameStack, test: FrameStack) -> tuple[np.ndarray, float]:
    """Per-frame PSNR in dB against a 255 peak, and the average.

    The mean squared error pools all H*W*3 channel samples of a frame.
    Identical frames score +inf, and any infinite frame makes the
    average infinite.
    """
    if reference.data.shape != test.data.shape:
        raise ShapeMismatchError(
            f"frame stacks differ: {reference.data.shape} vs {test.data.shape}")
    diff = reference.data.astype(np.float64) - test.data.astype(np.float64)
    mse = (diff * diff).mean(axis=(1, 2, 3))
    with np.errstate(divide="ignore"):
        per_frame = 10.0 * np.log10(PEAK * PEAK / mse)
    return per_frame, float(per_frame.mean())


def load_frame_dir(path) -> FrameStack:
    """Read every .png in a directory, sorted by file name."""
    path = Path(path)
    files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise FileNotFoundError(f"no PNG frames found in {path}")
    frames = []
    shape = None
    for f in files:
        try:
            with Image.open(f) as img:
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except UnidentifiedImageError as exc:
            raise FixtureFormatError(f"{f} is not a readable image") from exc
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise FixtureFormatError(
                f"{f} has shape {arr.shape}, expected {shape}")
        frames.append(arr)
    return FrameStack(np.stack(frames))


def save_frame_dir(stack: FrameStack, path, prefix: str = "frame_") -> list[Path]:
    """Write frames as numbered PNGs; returns the paths written."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    digits = max(3, len(str(stack.frame_count - 1)))
    written = []
    for f in range(stack.frame_count):
        target = path / f"{prefix}{f:0{digits}d}.png"
        Image.fromarray(stack.frame(f), mode="RGB").save(target)
        written.append(target)
    return written


def load_input(path, last: int | None = None) -> FrameStack:
    """A frame stack from either a PNG directory or a tensor fixture.

    Fixture tensors must be third order; their channel planes are
    rounded the same way decode() rounds.
    """
    path = Path(path)
    if path.is_dir():
        stack = load_frame_dir(path)
    elif path.is_file():
        stack = decode(load_qtensor(path))
    else:
        raise FileNotFoundError(f"input {path} does not exist")
    if last is not None:
        stack = stack.last(last)
    return stack


def synthetic_clip(height: int = 32, width: int = 32, frames: int = 8,
                   seed: int = 2024) -> FrameStack:
    """Deterministic test clip: drifting color gradients, a moving
    bright disk, and a pinch of seeded noise so no mode is degenerate."""
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    out = np.zeros((frames, height, width, 3), dtype=np.float64)
    for f in range(frames):
        t = f / max(frames - 1, 1)
        r = 96 + 80 * np.sin(2 * np.pi * (xx / width + 0.3 * t))
        g = 96 + 80 * np.cos(2 * np.pi * (yy / height - 0.2 * t))
        b = 64 + 64 * np.sin(2 * np.pi * ((xx + yy) / (width + height) + 0.5 * t))
        cy = height * (0.3 + 0.4 * t)
        cx = width * (0.7 - 0.4 * t)
        disk = ((yy - cy) ** 2 + (xx - cx) ** 2) <= (min(height, width) / 5.0) ** 2
        frame = np.stack([r, g, b], axis=-1)
        frame[disk] = [235.0, 235.0, 210.0]
        out[f] = frame
    out += rng.integers(-6, 7, size=out.shape)
    return FrameStack(np.clip(np.round(out), 0, 255).astype(np.uint8))
