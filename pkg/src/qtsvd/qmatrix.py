"""Dense quaternion matrices and their linear algebra.

A quaternion matrix Q = W + X*i + Y*j + Z*k is stored as four real
planes in a (4, rows, cols) float64 array.  Writing Q = A + B*j with
complex planes A = W + X*i and B = Y + Z*i, the complex adjoint

    chi(Q) = [[ A,       B      ],
              [-conj(B), conj(A)]]

is a (2*rows, 2*cols) complex matrix.  chi is an algebra homomorphism:
chi(P @ Q) = chi(P) @ chi(Q) and chi(Q^H) = chi(Q)^H, so inversion and
the singular value decomposition can lean on well-tested complex
kernels.  Every singular value of chi(Q) occurs twice; one
representative per pair, with its invariant two-dimensional subspace,
yields the quaternion factor columns.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateInputError,
    NumericalError,
    ShapeMismatchError,
    SingularMatrixError,
)
from .quaternion import Quaternion, conjugate_planes, hamilton, hamilton_matmul

_PAIR_TOL = 1e-8        # relative gap below which adjacent adjoint values pair up
_RESIDUAL_TOL = 1e-9    # enforced reconstruction accuracy of qmat_svd


class QMatrix:
    """Immutable dense quaternion matrix."""

    __slots__ = ("_data",)

    def __init__(self, data, *, copy: bool = True):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != 4:
            raise ShapeMismatchError(
                f"expected a (4, rows, cols) component stack, got {arr.shape}")
        if copy:
            arr = arr.copy()
        arr.flags.writeable = False
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[1]

    @property
    def cols(self) -> int:
        return self._data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return (self._data.shape[1], self._data.shape[2])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(np.zeros((4, rows, cols)), copy=False)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        planes = np.zeros((4, n, n))
        planes[0] = np.eye(n)
        return cls(planes, copy=False)

    @classmethod
    def from_real(cls, mat) -> "QMatrix":
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2:
            raise ShapeMismatchError("from_real expects a 2-D array")
        planes = np.zeros((4,) + mat.shape)
        planes[0] = mat
        return cls(planes, copy=False)

    @classmethod
    def from_components(cls, w, x, y, z) -> "QMatrix":
        return cls(np.stack([np.asarray(p, dtype=np.float64)
                             for p in (w, x, y, z)]))

    def __getitem__(self, key) -> Quaternion:
        i, j = key
        return Quaternion.from_array(self._data[:, i, j])

    def __add__(self, other: "QMatrix") -> "QMatrix":
        _check_same_shape(self, other)
        return QMatrix(self._data + other._data, copy=False)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        _check_same_shape(self, other)
        return QMatrix(self._data - other._data, copy=False)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self._data, copy=False)

    def __mul__(self, scalar) -> "QMatrix":
        return QMatrix(self._data * float(scalar), copy=False)

    __rmul__ = __mul__

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return qmat_mul(self, other)

    def conjugate(self) -> "QMatrix":
        return QMatrix(conjugate_planes(self._data), copy=False)

    def conjugate_transpose(self) -> "QMatrix":
        return QMatrix(conjugate_planes(self._data).transpose(0, 2, 1), copy=False)

    @property
    def H(self) -> "QMatrix":
        return self.conjugate_transpose()

    def norm(self) -> float:
        """Frobenius norm, the root of the summed squared moduli."""
        return float(np.linalg.norm(self._data))

    def __repr__(self) -> str:
        return f"QMatrix(shape={self.shape})"


def _check_same_shape(a: QMatrix, b: QMatrix) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


def qmat_mul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Quaternion matrix product with entries of `a` on the left."""
    if a.cols != b.rows:
        raise ShapeMismatchError(
            f"cannot multiply {a.shape} by {b.shape}")
    return QMatrix(hamilton_matmul(a.data, b.data), copy=False)


def complex_adjoint(a: QMatrix) -> np.ndarray:
    """The (2*rows, 2*cols) complex adjoint of a quaternion matrix."""
    w, x, y, z = a.data
    ac = w + 1j * x
    bc = y + 1j * z
    return np.block([[ac, bc], [-bc.conj(), ac.conj()]])


def from_complex_adjoint(c: np.ndarray) -> QMatrix:
    """Inverse of complex_adjoint; reads the top block row."""
    rows2, cols2 = c.shape
    if rows2 % 2 or cols2 % 2:
        raise ShapeMismatchError("adjoint matrix must have even dimensions")
    m, n = rows2 // 2, cols2 // 2
    ac = c[:m, :n]
    bc = c[:m, n:]
    return QMatrix(np.stack([ac.real, ac.imag, bc.real, bc.imag]), copy=False)


def qmat_inverse(a: QMatrix, *, cond_tol: float = 1e-12) -> QMatrix:
    """Inverse via the complex adjoint.

    Raises SingularMatrixError when chi(a) is singular or numerically
    rank deficient (smallest singular value below cond_tol times the
    largest).
    """
    if a.rows != a.cols:
        raise ShapeMismatchError("only square matrices are invertible")
    chi = complex_adjoint(a)
    sv = np.linalg.svd(chi, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= cond_tol * sv[0]:
        raise SingularMatrixError("matrix is singular or numerically rank deficient")
    try:
        inv = np.linalg.inv(chi)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    return from_complex_adjoint(inv)


def _col_dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # <u, v> = sum_i conj(u_i) * v_i over a (4, n) column pair; quaternion valued.
    return hamilton(conjugate_planes(u), v).sum(axis=1)


def qmat_qr(a: QMatrix, *, col_tol: float = 1e-12) -> tuple[QMatrix, QMatrix]:
    """Thin QR factorization by modified Gram-Schmidt.

    Because quaternion multiplication does not commute, projection
    coefficients r = q^H v multiply the basis columns from the right:
    v <- v - q * r.  Q has orthonormal columns (q^H q = 1), R is upper
    triangular with a real nonnegative diagonal, and a = Q @ R.

    Raises DegenerateInputError when a column drops below col_tol times
    the largest original column norm.
    """
    m, n = a.shape
    if m < n:
        raise ShapeMismatchError("qr requires rows >= cols")
    v = a.data.copy()  # (4, m, n), columns orthogonalized in place
    q = np.zeros((4, m, n))
    r = np.zeros((4, n, n))
    col_norms = np.sqrt((v * v).sum(axis=(0, 1)))
    floor = col_tol * max(1.0, float(col_norms.max(initial=0.0)))
    for k in range(n):
        col = v[:, :, k]
        nk = float(np.linalg.norm(col))
        if nk <= floor:
            raise DegenerateInputError(f"column {k} is numerically dependent")
        qk = col / nk
        q[:, :, k] = qk
        r[0, k, k] = nk
        if k + 1 < n:
            # one pass of MGS: coefficients against the remaining columns
            coeffs = hamilton(conjugate_planes(qk)[:, :, None],
                              v[:, :, k + 1:]).sum(axis=1)  # (4, n-k-1)
            r[:, k, k + 1:] = coeffs
            v[:, :, k + 1:] -= hamilton(qk[:, :, None], coeffs[:, None, :])
    return QMatrix(q, copy=False), QMatrix(r, copy=False)


def is_unitary(a: QMatrix, tol: float = 1e-9) -> bool:
    """Whether a^H a and a a^H both equal the identity within tol."""
    if a.rows != a.cols:
        return False
    eye = QMatrix.identity(a.rows)
    left = (qmat_mul(a.conjugate_transpose(), a) - eye).norm()
    right = (qmat_mul(a, a.conjugate_transpose()) - eye).norm()
    return left <= tol and right <= tol


# ---------------------------------------------------------------------------
# Singular value decomposition
# ---------------------------------------------------------------------------
#
# The structure map below sends a column of chi(Q) to its partner: if
# v = [alpha; beta] is one column of the adjoint of a quaternion column
# q, then theta(v) = [-conj(beta); conj(alpha)] is the other, and
# [v, theta(v)] = chi(q) with q = alpha - conj(beta) * j.  theta
# commutes with chi(A) (chi(A) @ theta(v) = theta(chi(A) @ v)), so
# every singular subspace of the adjoint is theta-invariant and each
# quaternion singular value shows up as an adjacent pair.


def _theta(x: np.ndarray) -> np.ndarray:
    m = x.shape[0] // 2
    return np.concatenate([-x[m:].conj(), x[:m].conj()], axis=0)


def _quaternion_columns(x: np.ndarray) -> np.ndarray:
    """Map structured complex columns (2m, c) to component planes (4, m, c)."""
    m = x.shape[0] // 2
    alpha, beta = x[:m], x[m:]
    return np.stack([alpha.real, alpha.imag, -beta.real, beta.imag])


def _structured_gs(candidates: np.ndarray, need: int,
                   against: np.ndarray | None = None,
                   ordered: bool = False) -> np.ndarray:
    """Extract `need` orthonormal columns closed under the structure map.

    Gram-Schmidt over the candidate columns: each accepted x removes
    the two-dimensional span of {x, theta(x)} from the pool, so the
    result maps to quaternion-orthonormal columns.  `against` holds
    previously accepted structured pairs to stay orthogonal to.  With
    `ordered` the candidates are consumed left to right, which callers
    use to keep left and right factors paired; otherwise the largest
    residual column is taken, which is robust when the pool is a
    degenerate block.
    """
    pool = candidates.astype(np.complex128, copy=True)
    basis = [] if against is None or against.shape[1] == 0 else [against]
    if basis:
        b = basis[0]
        pool -= b @ (b.conj().T @ pool)
        pool -= b @ (b.conj().T @ pool)
    chosen = []
    for step in range(need):
        norms = np.linalg.norm(pool, axis=0)
        best = step if ordered else int(np.argmax(norms))
        if norms[best] < 1e-6:
            raise NumericalError("singular subspace lost its paired structure")
        x = pool[:, best] / norms[best]
        # second orthogonalization pass for stability
        for b in basis:
            x = x - b @ (b.conj().T @ x)
        x = x / np.linalg.norm(x)
        pair = np.column_stack([x, _theta(x)])
        chosen.append(x)
        basis.append(pair)
        pool -= pair @ (pair.conj().T @ pool)
    return np.column_stack(chosen) if chosen else np.zeros((candidates.shape[0], 0),
                                                           dtype=np.complex128)


def _pairs_to_clusters(sigma: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Group adjacent (already descending) values closer than tol."""
    clusters = []
    start = 0
    for k in range(1, len(sigma)):
        if sigma[k - 1] - sigma[k] > tol:
            clusters.append((start, k))
            start = k
    if len(sigma):
        clusters.append((start, len(sigma)))
    return clusters


def qmat_svd(a: QMatrix, *, full_matrices: bool = True
             ) -> tuple[QMatrix, np.ndarray, QMatrix]:
    """Singular value decomposition a = U @ diag(S) @ V^H.

    S is a real, nonnegative, descending vector of length min(rows,
    cols); U and V are unitary quaternion matrices (square when
    full_matrices is True, with min(rows, cols) columns otherwise).

    The adjoint's singular values must arrive in matching pairs; a pair
    gap above 1e-8 (relative) raises NumericalError.  Clusters of equal
    values are re-orthonormalized as a block so repeated singular
    values cannot produce collinear quaternion columns.  The
    reconstruction residual is checked on exit and must stay below
    1e-9 * max(1, |a|_F).
    """
    m, n = a.shape
    k_rank = min(m, n)
    chi = complex_adjoint(a)
    try:
        ut, st, vth = np.linalg.svd(chi, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"complex SVD failed: {exc}") from exc
    vt = vth.conj().T

    smax = float(st[0]) if len(st) else 0.0
    scale = max(smax, 1.0)
    gaps = np.abs(st[0::2] - st[1::2])
    if np.any(gaps > _PAIR_TOL * scale):
        raise NumericalError("adjoint singular values failed to pair up")
    sigma = 0.5 * (st[0::2] + st[1::2])  # one value per quaternion pair

    pos_tol = 1e-12 * scale
    clusters = _pairs_to_clusters(sigma, _PAIR_TOL * scale)

    u_cols: list[np.ndarray] = []   # structured complex columns, length-2m
    v_cols: list[np.ndarray] = []   # structured complex columns, length-2n
    deferred_left: list[np.ndarray] = []  # adjoint columns for sigma ~ 0 clusters

    for lo, hi in clusters:
        c = hi - lo
        sig = sigma[lo]
        if c == 1 and sig > pos_tol:
            # well separated pair: the adjoint columns are already one
            # consistent representative each
            v_cols.append(vt[:, 2 * lo])
            u_cols.append(ut[:, 2 * lo])
            continue
        acc_v = np.column_stack([np.column_stack([x, _theta(x)]) for x in v_cols]) \
            if v_cols else None
        xs = _structured_gs(vt[:, 2 * lo:2 * hi], c, acc_v)
        for i in range(c):
            v_cols.append(xs[:, i])
        if sig > pos_tol:
            # re-derive the left block through the matrix so that
            # a @ v_i = sigma_i * u_i holds column by column
            ys = chi @ xs / sigma[lo:hi][None, :]
            acc_u = np.column_stack([np.column_stack([x, _theta(x)]) for x in u_cols]) \
                if u_cols else None
            ys = _structured_gs(ys, c, acc_u, ordered=True)
            for i in range(c):
                u_cols.append(ys[:, i])
        else:
            deferred_left.append(ut[:, 2 * lo:2 * hi])

    u_need = (m if full_matrices else k_rank) - len(u_cols)
    if u_need > 0:
        cands = deferred_left
        if full_matrices and 2 * k_rank < ut.shape[1]:
            cands = cands + [ut[:, 2 * k_rank:]]
        acc_u = np.column_stack([np.column_stack([x, _theta(x)]) for x in u_cols]) \
            if u_cols else None
        extra = _structured_gs(np.column_stack(cands), u_need, acc_u)
        for i in range(u_need):
            u_cols.append(extra[:, i])

    v_need = (n if full_matrices else k_rank) - len(v_cols)
    if v_need > 0:
        acc_v = np.column_stack([np.column_stack([x, _theta(x)]) for x in v_cols]) \
            if v_cols else None
        extra = _structured_gs(vt[:, 2 * k_rank:], v_need, acc_v)
        for i in range(v_need):
            v_cols.append(extra[:, i])

    u = QMatrix(_quaternion_columns(np.column_stack(u_cols)), copy=False)
    v = QMatrix(_quaternion_columns(np.column_stack(v_cols)), copy=False)

    # mandatory accuracy gate: rebuild and compare
    core = u.data[:, :, :k_rank] * sigma[None, None, :]
    recon = hamilton_matmul(core, conjugate_planes(v.data[:, :, :k_rank]).transpose(0, 2, 1))
    residual = float(np.linalg.norm(recon - a.data)) / max(1.0, a.norm())
    if residual >= _RESIDUAL_TOL:
        raise NumericalError(
            f"svd reconstruction residual {residual:.3e} exceeds {_RESIDUAL_TOL:.0e}")
    return u, sigma, v
