"""Invertible transforms applied along the trailing tensor modes.

A TransformSet holds one square quaternion matrix per mode past the
second.  validate() caches the inverses and detects whether every
matrix is a real nonzero multiple of a unitary matrix; that property is
what makes truncated decompositions provably optimal, so downstream
code checks the flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError, SingularMatrixError
from .qmatrix import QMatrix, is_unitary, qmat_inverse, qmat_mul, qmat_qr, qmat_svd
from .qtensor import QTensor, unfold

TRANSFORM_NAMES = ("identity", "random", "qdft", "qdct", "data-driven")


@dataclass(frozen=True)
class TransformSet:
    """Transforms for modes 2..L-1 (0-based), one per trailing mode."""

    matrices: tuple[QMatrix, ...]
    inverses: tuple[QMatrix, ...] | None = None
    scaled_orthogonal: bool = False
    scales: tuple[float, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(t.rows for t in self.matrices)

    @property
    def validated(self) -> bool:
        return self.inverses is not None

    def __len__(self) -> int:
        return len(self.matrices)


def validate(ts, dims=None, *, tol: float = 1e-8) -> TransformSet:
    """Check a transform set and return it with inverses cached.

    `ts` is a TransformSet or an iterable of square QMatrix objects.
    When tensor dims are given, the matrix sizes must match dims[2:].
    Each matrix must be invertible with `inv` residual below tol; the
    scaled-orthogonal flag is set when every matrix divided by its
    first column norm passes is_unitary at tol.
    """
    matrices = tuple(ts.matrices if isinstance(ts, TransformSet) else ts)
    if not matrices:
        raise ShapeMismatchError("a transform set needs at least one matrix")
    if dims is not None:
        trailing = tuple(dims)[2:]
        if len(matrices) != len(trailing):
            raise ShapeMismatchError(
                f"{len(matrices)} transforms for {len(trailing)} trailing modes")
        for t, d in zip(matrices, trailing):
            if t.shape != (d, d):
                raise ShapeMismatchError(
                    f"transform {t.shape} does not act on a mode of size {d}")
    inverses = []
    scales = []
    all_scaled = True
    for k, t in enumerate(matrices):
        if t.rows != t.cols:
            raise ShapeMismatchError(f"transform {k} is not square: {t.shape}")
        try:
            inv = qmat_inverse(t)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"transform {k} is singular: {exc}") from exc
        eye = QMatrix.identity(t.rows)
        if (qmat_mul(t, inv) - eye).norm() >= tol:
            raise SingularMatrixError(
                f"transform {k} inverse residual exceeds {tol:g}")
        inverses.append(inv)
        c = float(np.linalg.norm(t.data[:, :, 0]))
        scales.append(c)
        if c == 0.0 or not is_unitary(t * (1.0 / c), tol):
            all_scaled = False
    return TransformSet(
        matrices=matrices,
        inverses=tuple(inverses),
        scaled_orthogonal=all_scaled,
        scales=tuple(scales) if all_scaled else (),
    )


def qdft_matrix(n: int) -> QMatrix:
    """Unitary quaternion Fourier matrix of size n.

    Entry (p, q) is exp(-mu * 2*pi*p*q/n) / sqrt(n) with the transform
    axis fixed to mu = (i + j + k)/sqrt(3); exp(mu*t) = cos t + mu sin t
    since mu is a unit pure quaternion.
    """
    grid = np.outer(np.arange(n), np.arange(n)) * (2.0 * np.pi / n)
    root = 1.0 / np.sqrt(3.0)
    planes = np.stack([
        np.cos(grid),
        -root * np.sin(grid),
        -root * np.sin(grid),
        -root * np.sin(grid),
    ]) / np.sqrt(n)
    return QMatrix(planes, copy=False)


def qdct_matrix(n: int) -> QMatrix:
    """Real orthonormal cosine transform matrix of size n.

    Entry (p, q) is a_p * cos(pi * p * (2q + 1) / (2n)) with
    a_0 = sqrt(1/n) and a_p = sqrt(2/n) otherwise.
    """
    p = np.arange(n)[:, None]
    q = np.arange(n)[None, :]
    mat = np.cos(np.pi * p * (2 * q + 1) / (2.0 * n))
    mat *= np.where(p == 0, np.sqrt(1.0 / n), np.sqrt(2.0 / n))
    return QMatrix.from_real(mat)


def random_unitary(n: int, seed: int) -> QMatrix:
    """Haar-flavored random unitary: QR of a seeded Gaussian matrix."""
    rng = np.random.default_rng(seed)
    q, _ = qmat_qr(QMatrix(rng.standard_normal((4, n, n)), copy=False))
    return q


def data_driven_transform(a: QTensor, mode: int) -> QMatrix:
    """Transform adapted to the tensor: U^H from the full SVD of the
    mode-k unfolding.  Square even when the unfolding is rank
    deficient, so it always validates."""
    m = unfold(a, mode)
    # economy output already carries a square U unless rows exceed cols
    u, _, _ = qmat_svd(m, full_matrices=m.rows > m.cols)
    return u.conjugate_transpose()


def identity_transforms(dims, *, tol: float = 1e-8) -> TransformSet:
    return validate([QMatrix.identity(d) for d in tuple(dims)[2:]], dims, tol=tol)


def qdft_transforms(dims, *, tol: float = 1e-8) -> TransformSet:
    return validate([qdft_matrix(d) for d in tuple(dims)[2:]], dims, tol=tol)


def qdct_transforms(dims, *, tol: float = 1e-8) -> TransformSet:
    return validate([qdct_matrix(d) for d in tuple(dims)[2:]], dims, tol=tol)


def random_transforms(dims, seed: int, *, tol: float = 1e-8) -> TransformSet:
    # one derived seed per mode so the matrices differ
    return validate([random_unitary(d, seed + 1000003 * k)
                     for k, d in enumerate(tuple(dims)[2:])], dims, tol=tol)


def data_driven_transforms(a: QTensor, *, tol: float = 1e-8) -> TransformSet:
    """One adapted transform per trailing mode, each computed from the
    original tensor's unfolding along that mode."""
    return validate([data_driven_transform(a, k) for k in range(2, a.order)],
                    a.dims, tol=tol)


def transform_set(name: str, dims, *, seed=None, tensor: QTensor | None = None,
                  tol: float = 1e-8) -> TransformSet:
    """Build a named transform family for the given tensor dims."""
    if name == "identity":
        return identity_transforms(dims, tol=tol)
    if name == "random":
        if seed is None:
            raise ValueError("the random transform family requires a seed")
        return random_transforms(dims, int(seed), tol=tol)
    if name == "qdft":
        return qdft_transforms(dims, tol=tol)
    if name == "qdct":
        return qdct_transforms(dims, tol=tol)
    if name == "data-driven":
        if tensor is None:
            raise ValueError("the data-driven family needs the tensor itself")
        return data_driven_transforms(tensor, tol=tol)
    raise ValueError(f"unknown transform family {name!r}")
