"""Dense quaternion tensors of order three and higher.

Storage mirrors QMatrix: a (4, N1, ..., NL) float64 component stack.
Frontal slices fix every index past the second, so A(:, :, n3, ..., nL)
is an N1 x N2 quaternion matrix.  Modes are 0-based throughout the
Python API.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FixtureFormatError, ShapeMismatchError
from .qmatrix import QMatrix, qmat_mul
from .quaternion import conjugate_planes, hamilton_matmul

_MAGIC = b"QTNSRF01"


class QTensor:
    """Immutable dense quaternion tensor, order >= 3."""

    __slots__ = ("_data",)

    def __init__(self, data, *, copy: bool = True):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim < 4 or arr.shape[0] != 4:
            raise ShapeMismatchError(
                f"expected (4, N1, ..., NL) with L >= 3, got {arr.shape}")
        if copy:
            arr = arr.copy()
        arr.flags.writeable = False
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dims(self) -> tuple[int, ...]:
        return self._data.shape[1:]

    @property
    def order(self) -> int:
        return self._data.ndim - 1

    @classmethod
    def zeros(cls, dims) -> "QTensor":
        return cls(np.zeros((4,) + tuple(dims)), copy=False)

    @classmethod
    def from_components(cls, w, x, y, z) -> "QTensor":
        return cls(np.stack([np.asarray(p, dtype=np.float64)
                             for p in (w, x, y, z)]))

    def frontal_slice(self, index) -> QMatrix:
        """The N1 x N2 quaternion matrix at the given trailing indices.

        `index` is an int for third-order tensors or a tuple with one
        0-based entry per trailing mode.
        """
        idx = _trailing_index(index, self.dims)
        return QMatrix(self._data[(slice(None), slice(None), slice(None)) + idx])

    def __add__(self, other: "QTensor") -> "QTensor":
        _check_same_dims(self, other)
        return QTensor(self._data + other._data, copy=False)

    def __sub__(self, other: "QTensor") -> "QTensor":
        _check_same_dims(self, other)
        return QTensor(self._data - other._data, copy=False)

    def __neg__(self) -> "QTensor":
        return QTensor(-self._data, copy=False)

    def __mul__(self, scalar) -> "QTensor":
        return QTensor(self._data * float(scalar), copy=False)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self._data))

    def __repr__(self) -> str:
        return f"QTensor(dims={self.dims})"


class QTensorBuilder:
    """Mutable staging area for assembling a QTensor slice by slice.

    Not thread safe; build() freezes the contents into a QTensor.
    """

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 3 or any(d < 1 for d in dims):
            raise ShapeMismatchError(f"invalid tensor dims {dims}")
        self._dims = dims
        self._data = np.zeros((4,) + dims)

    @property
    def dims(self) -> tuple[int, ...]:
        return self._dims

    def set_frontal_slice(self, index, matrix: QMatrix) -> None:
        if matrix.shape != self._dims[:2]:
            raise ShapeMismatchError(
                f"slice shape {matrix.shape} does not match {self._dims[:2]}")
        idx = _trailing_index(index, self._dims)
        self._data[(slice(None), slice(None), slice(None)) + idx] = matrix.data

    def frontal_slice(self, index) -> QMatrix:
        idx = _trailing_index(index, self._dims)
        return QMatrix(self._data[(slice(None), slice(None), slice(None)) + idx])

    def build(self) -> QTensor:
        return QTensor(self._data)


def _trailing_index(index, dims) -> tuple[int, ...]:
    if isinstance(index, (int, np.integer)):
        index = (int(index),)
    idx = tuple(int(i) for i in index)
    trailing = dims[2:]
    if len(idx) != len(trailing):
        raise ShapeMismatchError(
            f"need {len(trailing)} trailing indices, got {len(idx)}")
    for i, d in zip(idx, trailing):
        if not 0 <= i < d:
            raise ShapeMismatchError(f"index {idx} out of range for dims {dims}")
    return idx


def _check_same_dims(a: QTensor, b: QTensor) -> None:
    if a.dims != b.dims:
        raise ShapeMismatchError(f"dims mismatch: {a.dims} vs {b.dims}")


def frontal_slices(a: QTensor):
    """Iterate (trailing_index, QMatrix) over all frontal slices."""
    for idx in np.ndindex(*a.dims[2:]):
        yield idx, a.frontal_slice(idx)


def unfold(a: QTensor, mode: int) -> QMatrix:
    """Mode-k unfolding into an (N_k, prod of the rest) quaternion matrix.

    Columns cycle the remaining modes in ascending order with the
    lowest remaining mode varying fastest, so fold() is an exact
    inverse.
    """
    _check_mode(a.order, mode)
    nk = a.dims[mode]
    planes = [np.reshape(np.moveaxis(p, mode, 0), (nk, -1), order="F")
              for p in a.data]
    return QMatrix(np.stack(planes), copy=False)


def fold(m: QMatrix, mode: int, dims) -> QTensor:
    """Inverse of unfold: pure reindexing back to the given dims."""
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), mode)
    rest = dims[:mode] + dims[mode + 1:]
    if m.shape != (dims[mode], int(np.prod(rest))):
        raise ShapeMismatchError(
            f"matrix shape {m.shape} does not refold into dims {dims} at mode {mode}")
    planes = [np.moveaxis(np.reshape(p, (dims[mode],) + rest, order="F"), 0, mode)
              for p in m.data]
    return QTensor(np.stack(planes), copy=False)


def _check_mode(order: int, mode: int) -> None:
    if not 0 <= mode < order:
        raise ShapeMismatchError(f"mode {mode} out of range for order {order}")


def mode_k_product(a: QTensor, t: QMatrix, mode: int) -> QTensor:
    """Multiply the mode-k unfolding by `t` from the left and refold.

    `t` may be rectangular; the mode-k dimension becomes t.rows.
    """
    _check_mode(a.order, mode)
    if t.cols != a.dims[mode]:
        raise ShapeMismatchError(
            f"transform is {t.shape} but mode {mode} has size {a.dims[mode]}")
    product = qmat_mul(t, unfold(a, mode))
    new_dims = a.dims[:mode] + (t.rows,) + a.dims[mode + 1:]
    return fold(product, mode, new_dims)


def _batched(planes: np.ndarray) -> np.ndarray:
    # (4, N1, N2, *rest) -> (4, *rest, N1, N2) so np.matmul sees the slices
    return np.moveaxis(planes, (1, 2), (-2, -1))


def _unbatched(planes: np.ndarray) -> np.ndarray:
    return np.moveaxis(planes, (-2, -1), (1, 2))


def facewise_product(a: QTensor, b: QTensor) -> QTensor:
    """Slice-by-slice quaternion matrix product.

    Every frontal slice of the result is the product of the matching
    frontal slices of `a` and `b`.
    """
    if a.dims[1] != b.dims[0] or a.dims[2:] != b.dims[2:]:
        raise ShapeMismatchError(
            f"facewise mismatch: {a.dims} against {b.dims}")
    out = hamilton_matmul(_batched(a.data), _batched(b.data))
    return QTensor(_unbatched(out), copy=False)


def facewise_conjugate_transpose(a: QTensor) -> QTensor:
    """Hermitian-transpose every frontal slice in place of its position."""
    swapped = conjugate_planes(a.data).swapaxes(1, 2)
    return QTensor(swapped, copy=False)


def frobenius_norm(a: QTensor) -> float:
    return a.norm()


def is_f_diagonal(a: QTensor, tol: float = 1e-12) -> bool:
    """Whether every frontal slice is diagonal within tol (absolute,
    measured against the largest modulus in the tensor)."""
    n1, n2 = a.dims[:2]
    off = a.data.copy()
    k = min(n1, n2)
    off[:, np.arange(k), np.arange(k)] = 0.0
    floor = tol * max(1.0, float(np.abs(a.data).max()))
    return bool(np.all(np.abs(off) <= floor))


# ---------------------------------------------------------------------------
# Binary fixture format
# ---------------------------------------------------------------------------
# Header: 8-byte magic, then the order L and the L dims, each a 64-bit
# little-endian signed integer.  Payload: the w, x, y, z planes in that
# order, each in C order, as 64-bit little-endian floats.


def save_qtensor(a: QTensor, path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<q", a.order))
        fh.write(struct.pack(f"<{a.order}q", *a.dims))
        fh.write(np.ascontiguousarray(a.data, dtype="<f8").tobytes())


def load_qtensor(path) -> QTensor:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(_MAGIC) + 8 or raw[:len(_MAGIC)] != _MAGIC:
        raise FixtureFormatError(f"{path} is not a qtensor fixture")
    offset = len(_MAGIC)
    (order,) = struct.unpack_from("<q", raw, offset)
    offset += 8
    if order < 3 or order > 64:
        raise FixtureFormatError(f"unsupported tensor order {order}")
    if len(raw) < offset + 8 * order:
        raise FixtureFormatError("truncated fixture header")
    dims = struct.unpack_from(f"<{order}q", raw, offset)
    offset += 8 * order
    if any(d < 1 for d in dims):
        raise FixtureFormatError(f"invalid dims {dims}")
    count = 4 * int(np.prod(dims))
    if len(raw) != offset + 8 * count:
        raise FixtureFormatError("fixture payload size does not match header")
    planes = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return QTensor(planes.reshape((4,) + dims))
