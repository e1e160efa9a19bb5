"""Transform-domain tensor algebra and the slicewise decomposition.

The product of two quaternion tensors is defined through a transform
set: carry both operands into the transform domain (one mode product
per trailing mode, ascending), multiply frontal slices pairwise, and
come back with the cached inverses.  Decomposing every transformed
slice with the quaternion matrix SVD yields unitary factor tensors and
an f-diagonal core whose tube norms play the role of singular values.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from functools import cached_property

import numpy as np

from .errors import NumericalError, OptimalityWarning, ShapeMismatchError
from .qmatrix import QMatrix, qmat_svd
from .qtensor import (
    QTensor,
    facewise_conjugate_transpose,
    facewise_product,
    mode_k_product,
)
from .transforms import TransformSet, validate

RANK_TOLERANCE = 1e-10


def _require_validated(ts: TransformSet) -> TransformSet:
    return ts if ts.validated else validate(ts)


def _check_transform_sizes(a: QTensor, ts: TransformSet) -> None:
    if ts.sizes != a.dims[2:]:
        raise ShapeMismatchError(
            f"transform sizes {ts.sizes} do not match trailing dims {a.dims[2:]}")


def to_hat(a: QTensor, ts: TransformSet) -> QTensor:
    """Apply the transforms along modes 2..L-1, ascending."""
    _check_transform_sizes(a, ts)
    out = a
    for k, t in enumerate(ts.matrices):
        out = mode_k_product(out, t, k + 2)
    return out


def from_hat(a: QTensor, ts: TransformSet) -> QTensor:
    """Undo to_hat with the cached inverses.

    Inverses apply in descending mode order.  Mode products along
    distinct modes only commute when the transform entries commute with
    each other, so unwinding in reverse is what makes this an exact
    inverse for every invertible transform set.
    """
    ts = _require_validated(ts)
    _check_transform_sizes(a, ts)
    out = a
    for k in reversed(range(len(ts.inverses))):
        out = mode_k_product(out, ts.inverses[k], k + 2)
    return out


def qt_product(a: QTensor, b: QTensor, ts: TransformSet) -> QTensor:
    """Transform-domain tensor product of a (N1 x P x ...) and
    (P x N2 x ...) pair sharing trailing dims."""
    if a.dims[2:] != b.dims[2:] or a.dims[1] != b.dims[0]:
        raise ShapeMismatchError(
            f"cannot multiply tensors with dims {a.dims} and {b.dims}")
    ts = _require_validated(ts)
    return from_hat(facewise_product(to_hat(a, ts), to_hat(b, ts)), ts)


def conjugate_transpose(a: QTensor, ts: TransformSet) -> QTensor:
    """The tensor adjoint: Hermitian-transpose every transformed slice,
    then return from the transform domain.  Under identity transforms
    this is the plain slicewise Hermitian transpose."""
    ts = _require_validated(ts)
    return from_hat(facewise_conjugate_transpose(to_hat(a, ts)), ts)


def identity_tensor(p: int, trailing_dims, ts: TransformSet) -> QTensor:
    """The two-sided unit for qt_product on P x P x trailing tensors.

    Every transformed slice is the identity matrix; the spatial tensor
    is cached on the transform set since it is reused heavily."""
    ts = _require_validated(ts)
    trailing = tuple(int(d) for d in trailing_dims)
    if ts.sizes != trailing:
        raise ShapeMismatchError(
            f"transform sizes {ts.sizes} do not match trailing dims {trailing}")
    key = (p, trailing)
    cached = ts._cache.get(key)
    if cached is None:
        planes = np.zeros((4, p, p) + trailing)
        planes[0, np.arange(p), np.arange(p)] = 1.0
        cached = from_hat(QTensor(planes, copy=False), ts)
        ts._cache[key] = cached
    return cached


def is_unitary_tensor(u: QTensor, ts: TransformSet, tol: float = 1e-8) -> bool:
    """Whether u^H * u and u * u^H both equal the identity tensor
    within tol, relative to the identity tensor's norm."""
    if u.dims[0] != u.dims[1]:
        return False
    ts = _require_validated(ts)
    uh = conjugate_transpose(u, ts)
    eye = identity_tensor(u.dims[0], u.dims[2:], ts)
    ref = eye.norm()
    left = (qt_product(uh, u, ts) - eye).norm()
    right = (qt_product(u, uh, ts) - eye).norm()
    return left <= tol * ref and right <= tol * ref


class TqtSvd:
    """Decomposition result: a = U * D * V^H under the stored transforms.

    U and V are unitary tensors, D is f-diagonal.  sigma holds the
    Frobenius norms of D's diagonal tubes in slice-sorted index order
    (not globally sorted), and rank counts the tubes above
    RANK_TOLERANCE * max(sigma[0], 1).  The transform-domain factors
    are kept so repeated truncations skip the forward transforms.
    """

    def __init__(self, u_hat: np.ndarray, s_hat: np.ndarray, v_hat: np.ndarray,
                 transforms: TransformSet, sigma: np.ndarray, rank: int):
        self._u_hat = u_hat
        self._s_hat = s_hat
        self._v_hat = v_hat
        self.transforms = transforms
        self.sigma = sigma
        self.rank = rank

    @property
    def k(self) -> int:
        """Number of diagonal tubes, min(N1, N2)."""
        return self._s_hat.shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        return (self._u_hat.shape[1], self._v_hat.shape[1]) + self._u_hat.shape[3:]

    @cached_property
    def U(self) -> QTensor:
        return from_hat(QTensor(self._u_hat), self.transforms)

    @cached_property
    def D(self) -> QTensor:
        n1 = self._u_hat.shape[1]
        n2 = self._v_hat.shape[1]
        planes = np.zeros((4, n1, n2) + self._s_hat.shape[1:])
        idx = np.arange(self.k)
        planes[0, idx, idx] = self._s_hat
        return from_hat(QTensor(planes, copy=False), self.transforms)

    @cached_property
    def V(self) -> QTensor:
        return from_hat(QTensor(self._v_hat), self.transforms)


def tqt_svd(a: QTensor, ts: TransformSet, threads: int | None = None) -> TqtSvd:
    """Decompose a quaternion tensor by SVD of every transformed slice.

    Slices factor independently, so they run on a thread pool by
    default; pass threads=1 to stay serial.  The output is identical
    either way.  A slice whose SVD fails its accuracy gate raises
    NumericalError naming the offending trailing index.
    """
    ts = _require_validated(ts)
    _check_transform_sizes(a, ts)
    a_hat = to_hat(a, ts)
    n1, n2 = a.dims[:2]
    rest = a.dims[2:]
    k = min(n1, n2)
    u_hat = np.zeros((4, n1, n1) + rest)
    s_hat = np.zeros((k,) + rest)
    v_hat = np.zeros((4, n2, n2) + rest)
    lead = (slice(None), slice(None), slice(None))

    def factor(idx):
        try:
            u, s, v = qmat_svd(a_hat.frontal_slice(idx))
        except NumericalError as exc:
            raise NumericalError(f"slice {idx}: {exc}") from exc
        u_hat[lead + idx] = u.data
        s_hat[(slice(None),) + idx] = s
        v_hat[lead + idx] = v.data

    indices = list(np.ndindex(*rest))
    if threads is None:
        threads = min(len(indices), os.cpu_count() or 1)
    if threads <= 1 or len(indices) == 1:
        for idx in indices:
            factor(idx)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(factor, indices))

    sigma = _tube_norms(s_hat, ts)
    rank = int(np.count_nonzero(sigma > RANK_TOLERANCE * max(sigma[0], 1.0)))
    return TqtSvd(u_hat, s_hat, v_hat, ts, sigma, rank)


def _tube_norms(s_hat: np.ndarray, ts: TransformSet) -> np.ndarray:
    """Frobenius norm of each spatial-domain diagonal tube.

    Trailing-mode products never mix (row, col) positions, so the
    diagonal tubes can be carried back through the inverse transforms
    all at once as a K x 1 x trailing tensor.
    """
    k = s_hat.shape[0]
    planes = np.zeros((4, k, 1) + s_hat.shape[1:])
    planes[0, :, 0] = s_hat
    spatial = from_hat(QTensor(planes, copy=False), ts)
    axes = (0, 2) + tuple(range(3, spatial.data.ndim))
    return np.sqrt((spatial.data ** 2).sum(axis=axes))


def tqt_rank(svd: TqtSvd, rank_tolerance: float = RANK_TOLERANCE) -> int:
    """Number of diagonal tubes with nonnegligible norm."""
    if svd.sigma.size == 0:
        return 0
    floor = rank_tolerance * max(float(svd.sigma[0]), 1.0)
    return int(np.count_nonzero(svd.sigma > floor))


def truncate(svd: TqtSvd, s: int) -> QTensor:
    """Keep the first s diagonal tubes and rebuild the tensor.

    Equals the sum over k <= s of U(:,k,...) * D(k,k,...) * V(:,k,...)^H
    and, when the transforms are scaled-orthogonal, is the best
    approximation among tensors assembled from s tubes.  With other
    transforms an OptimalityWarning is emitted and the result is just
    the slicewise truncation.
    """
    if not 1 <= s <= svd.k:
        raise ShapeMismatchError(f"truncation index {s} outside [1, {svd.k}]")
    if not svd.transforms.scaled_orthogonal:
        warnings.warn(
            "transforms are not scaled-orthogonal; truncation has no "
            "best-approximation guarantee", OptimalityWarning, stacklevel=2)
    scaled = svd._u_hat[:, :, :s] * svd._s_hat[None, None, :s]
    left = QTensor(scaled, copy=False)
    right = facewise_conjugate_transpose(
        QTensor(svd._v_hat[:, :, :s], copy=False))
    return from_hat(facewise_product(left, right), svd.transforms)
