"""Tests for the transform-domain algebra and the slicewise decomposition."""

import numpy as np
import pytest

from qtsvd.algebra import (
    RANK_TOLERANCE,
    conjugate_transpose,
    from_hat,
    identity_tensor,
    is_unitary_tensor,
    qt_product,
    to_hat,
    tqt_rank,
    tqt_svd,
    truncate,
)
from qtsvd.errors import NumericalError, OptimalityWarning, ShapeMismatchError
from qtsvd.qmatrix import QMatrix, qmat_mul, qmat_svd
from qtsvd.qtensor import (
    QTensor,
    facewise_conjugate_transpose,
    facewise_product,
    frontal_slices,
)
from qtsvd.quaternion import Quaternion, hamilton
from qtsvd.transforms import (
    TransformSet,
    identity_transforms,
    qdct_transforms,
    qdft_transforms,
    random_transforms,
    transform_set,
    validate,
)

FAMILIES = ("identity", "random", "qdft", "qdct", "data-driven")


def random_qtensor(rng, dims) -> QTensor:
    return QTensor(rng.standard_normal((4,) + tuple(dims)), copy=False)


def family(name, dims, tensor=None, seed=7) -> TransformSet:
    return transform_set(name, dims, seed=seed, tensor=tensor)


def crooked_transforms(dims, seed=19) -> TransformSet:
    """Well-conditioned but deliberately not scaled-orthogonal."""
    rng = np.random.default_rng(seed)
    mats = []
    for d in tuple(dims)[2:]:
        planes = 0.3 * rng.standard_normal((4, d, d))
        planes[0] += np.eye(d)
        mats.append(QMatrix(planes))
    return validate(mats, dims)


class TestHatRoundTrip:
    def test_identity_transforms_leave_unchanged(self):
        rng = np.random.default_rng(3)
        a = random_qtensor(rng, (2, 3, 4))
        ts = identity_transforms(a.dims)
        assert np.allclose(to_hat(a, ts).data, a.data, atol=1e-15)
        assert np.allclose(from_hat(a, ts).data, a.data, atol=1e-15)

    def test_zero_tensor_stays_zero(self):
        ts = qdft_transforms((2, 2, 3))
        assert to_hat(QTensor.zeros((2, 2, 3)), ts).norm() == 0.0

    def test_both_round_trips_every_family(self):
        rng = np.random.default_rng(5)
        dims = (3, 2, 3, 2)
        a = random_qtensor(rng, dims)
        for name in FAMILIES:
            ts = family(name, dims, tensor=a)
            fwd = from_hat(to_hat(a, ts), ts)
            assert (fwd - a).norm() / a.norm() < 1e-10, name
            bwd = to_hat(from_hat(a, ts), ts)
            assert (bwd - a).norm() / a.norm() < 1e-10, name

    def test_round_trip_with_noncommuting_transforms(self):
        # regression: with general quaternion transforms on two trailing
        # modes, the inverses only cancel when applied in reverse order
        rng = np.random.default_rng(7)
        dims = (2, 2, 3, 3)
        a = random_qtensor(rng, dims)
        ts = random_transforms(dims, seed=23)
        assert (from_hat(to_hat(a, ts), ts) - a).norm() / a.norm() < 1e-10
        ts_crooked = crooked_transforms(dims)
        back = from_hat(to_hat(a, ts_crooked), ts_crooked)
        assert (back - a).norm() / a.norm() < 1e-10

    def test_norm_preserved_by_unitary_transforms(self):
        rng = np.random.default_rng(11)
        a = random_qtensor(rng, (3, 2, 5))
        ts = qdft_transforms(a.dims)
        assert from_hat(a, ts).norm() == pytest.approx(a.norm(), rel=1e-10)
        assert to_hat(a, ts).norm() == pytest.approx(a.norm(), rel=1e-10)

    def test_norm_scales_with_scaled_orthogonal_factors(self):
        rng = np.random.default_rng(13)
        dims = (2, 3, 3, 4)
        a = random_qtensor(rng, dims)
        base = qdct_transforms(dims)
        ts = validate(TransformSet(matrices=(base.matrices[0] * 2.0,
                                             base.matrices[1] * 3.0)), dims)
        assert ts.scaled_orthogonal
        assert to_hat(a, ts).norm() == pytest.approx(6.0 * a.norm(), rel=1e-10)

    def test_size_mismatch_raises(self):
        ts = qdct_transforms((2, 2, 3))
        with pytest.raises(ShapeMismatchError):
            to_hat(QTensor.zeros((2, 2, 4)), ts)


class TestQtProduct:
    def test_identity_transforms_collapse_to_facewise(self):
        rng = np.random.default_rng(17)
        a = random_qtensor(rng, (2, 3, 4))
        b = random_qtensor(rng, (3, 2, 4))
        ts = identity_transforms((2, 2, 4))
        out = qt_product(a, b, ts)
        expected = facewise_product(a, b)
        assert (out - expected).norm() < 1e-12 * max(1.0, expected.norm())

    def test_scalar_transform_oracle(self):
        # single trailing mode of size 1: the product is the ordinary matrix
        # product of the slices, conjugated through the 1x1 transform t
        rng = np.random.default_rng(19)
        a = random_qtensor(rng, (3, 2, 1))
        b = random_qtensor(rng, (2, 4, 1))
        t = Quaternion.from_array(rng.standard_normal(4))

        def left_scale(q, planes):
            return hamilton(q.to_array().reshape(4, 1, 1),
                            planes)

        ts = validate([QMatrix(t.to_array().reshape(4, 1, 1))])
        out = qt_product(a, b, ts).frontal_slice(0)
        scaled = qmat_mul(QMatrix(left_scale(t, a.frontal_slice(0).data)),
                          QMatrix(left_scale(t, b.frontal_slice(0).data)))
        expected = left_scale(t.inverse(), scaled.data)
        assert np.allclose(out.data, expected, atol=1e-10)

    def test_shape_mismatch(self):
        ts = identity_transforms((2, 2, 3))
        with pytest.raises(ShapeMismatchError):
            qt_product(QTensor.zeros((2, 3, 3)), QTensor.zeros((2, 3, 3)), ts)

    def test_associative(self):
        rng = np.random.default_rng(23)
        dims3 = (3, 2)
        a = random_qtensor(rng, (2, 3) + dims3)
        b = random_qtensor(rng, (3, 3) + dims3)
        c = random_qtensor(rng, (3, 2) + dims3)
        ts = random_transforms((2, 2) + dims3, seed=31)
        left = qt_product(qt_product(a, b, ts), c, ts)
        right = qt_product(a, qt_product(b, c, ts), ts)
        assert (left - right).norm() / left.norm() < 1e-10


class TestConjugateTranspose:
    def test_involution(self):
        rng = np.random.default_rng(29)
        a = random_qtensor(rng, (3, 2, 4))
        for name in FAMILIES:
            ts = family(name, a.dims, tensor=a)
            back = conjugate_transpose(conjugate_transpose(a, ts), ts)
            assert (back - a).norm() / a.norm() < 1e-10, name

    def test_identity_transforms_slicewise(self):
        rng = np.random.default_rng(31)
        a = random_qtensor(rng, (3, 2, 4))
        ts = identity_transforms(a.dims)
        out = conjugate_transpose(a, ts)
        expected = facewise_conjugate_transpose(a)
        assert (out - expected).norm() < 1e-12

    def test_product_reversal(self):
        rng = np.random.default_rng(37)
        a = random_qtensor(rng, (2, 3, 3, 2))
        b = random_qtensor(rng, (3, 2, 3, 2))
        ts = random_transforms((2, 2, 3, 2), seed=41)
        lhs = conjugate_transpose(qt_product(a, b, ts), ts)
        rhs = qt_product(conjugate_transpose(b, ts),
                         conjugate_transpose(a, ts), ts)
        assert (lhs - rhs).norm() / max(1.0, lhs.norm()) < 1e-10


class TestIdentityTensor:
    def test_identity_transforms_give_identity_slices(self):
        ts = identity_transforms((3, 3, 2, 2))
        eye = identity_tensor(3, (2, 2), ts)
        target = QMatrix.identity(3)
        for _, s in frontal_slices(eye):
            assert np.allclose(s.data, target.data, atol=1e-12)

    def test_unit_property_every_family(self):
        rng = np.random.default_rng(43)
        dims = (3, 3, 2, 2)
        a = random_qtensor(rng, dims)
        for name in FAMILIES:
            ts = family(name, dims, tensor=a)
            eye = identity_tensor(3, dims[2:], ts)
            left = qt_product(eye, a, ts)
            right = qt_product(a, eye, ts)
            assert (left - a).norm() < 1e-10 * a.norm(), name
            assert (right - a).norm() < 1e-10 * a.norm(), name

    def test_qdft_spatial_slices_are_not_identity(self):
        # the hat-domain slices are identities; what comes back through the
        # inverse transforms is not slicewise identity
        ts = qdft_transforms((2, 2, 3))
        eye = identity_tensor(2, (3,), ts)
        target = QMatrix.identity(2)
        deviations = [(s - target).norm() for _, s in frontal_slices(eye)]
        assert max(deviations) > 0.5

    def test_cached_per_shape(self):
        ts = qdct_transforms((3, 3, 4))
        first = identity_tensor(3, (4,), ts)
        second = identity_tensor(3, (4,), ts)
        assert first is second

    def test_size_mismatch(self):
        ts = qdct_transforms((3, 3, 4))
        with pytest.raises(ShapeMismatchError):
            identity_tensor(3, (5,), ts)


class TestIsUnitaryTensor:
    def test_identity_tensor_true(self):
        ts = qdft_transforms((3, 3, 4))
        eye = identity_tensor(3, (4,), ts)
        assert is_unitary_tensor(eye, ts, tol=1e-9)

    def test_scaled_hat_slice_false(self):
        rng = np.random.default_rng(47)
        a = random_qtensor(rng, (3, 3, 2))
        ts = qdct_transforms(a.dims)
        u = tqt_svd(a, ts).U
        assert is_unitary_tensor(u, ts, tol=1e-8)
        hat = to_hat(u, ts).data.copy()
        hat[:, :, :, 1] *= 2.0
        assert not is_unitary_tensor(from_hat(QTensor(hat), ts), ts, tol=1e-8)

    def test_rectangular_false(self):
        ts = qdct_transforms((2, 3, 2))
        assert not is_unitary_tensor(QTensor.zeros((2, 3, 2)), ts)


class TestTqtSvd:
    def test_zero_tensor(self):
        ts = qdft_transforms((3, 2, 2))
        svd = tqt_svd(QTensor.zeros((3, 2, 2)), ts)
        assert np.allclose(svd.sigma, 0.0)
        assert svd.rank == 0
        assert tqt_rank(svd) == 0
        assert svd.D.norm() == 0.0

    def test_postconditions_qdft(self):
        from qtsvd.qtensor import is_f_diagonal
        rng = np.random.default_rng(53)
        a = random_qtensor(rng, (4, 3, 2))
        ts = qdft_transforms(a.dims)
        svd = tqt_svd(a, ts)
        recon = qt_product(qt_product(svd.U, svd.D, ts),
                           conjugate_transpose(svd.V, ts), ts)
        assert (recon - a).norm() / max(1.0, a.norm()) < 1e-9
        assert is_unitary_tensor(svd.U, ts, tol=1e-8)
        assert is_unitary_tensor(svd.V, ts, tol=1e-8)
        assert is_f_diagonal(to_hat(svd.D, ts), tol=1e-9)

    def test_sigma_matches_tube_norms_of_d(self):
        rng = np.random.default_rng(59)
        a = random_qtensor(rng, (3, 3, 2, 2))
        ts = qdct_transforms(a.dims)
        svd = tqt_svd(a, ts)
        d = svd.D
        for k in range(svd.k):
            tube = d.data[:, k, k, ...]
            assert np.linalg.norm(tube) == pytest.approx(svd.sigma[k],
                                                         rel=1e-9, abs=1e-12)

    def test_sigma_descending_for_scaled_orthogonal(self):
        rng = np.random.default_rng(61)
        a = random_qtensor(rng, (5, 4, 3))
        for name in ("qdft", "qdct", "random"):
            ts = family(name, a.dims)
            sig = tqt_svd(a, ts).sigma
            assert np.all(np.diff(sig) <= 1e-10 * max(sig[0], 1.0)), name

    def test_single_slice_reduces_to_matrix_svd(self):
        rng = np.random.default_rng(67)
        a = random_qtensor(rng, (4, 3, 1))
        ts = identity_transforms(a.dims)
        svd = tqt_svd(a, ts)
        _, s, _ = qmat_svd(a.frontal_slice(0))
        assert np.allclose(svd.sigma, s, rtol=1e-12, atol=1e-12)

    def test_thread_count_does_not_change_output(self):
        rng = np.random.default_rng(71)
        a = random_qtensor(rng, (3, 3, 2, 2))
        ts = qdft_transforms(a.dims)
        serial = tqt_svd(a, ts, threads=1)
        parallel = tqt_svd(a, ts, threads=4)
        assert np.array_equal(serial.sigma, parallel.sigma)
        assert np.array_equal(serial.U.data, parallel.U.data)
        assert np.array_equal(serial.D.data, parallel.D.data)
        assert np.array_equal(serial.V.data, parallel.V.data)

    def test_failure_names_the_slice(self):
        # the identity mode product still touches every slice (0 * nan is
        # nan), so serially the first slice is the one reported
        planes = np.zeros((4, 2, 2, 3))
        planes[0, :, :, 1] = np.nan
        ts = identity_transforms((2, 2, 3))
        with pytest.raises(NumericalError, match=r"slice \(0,\)"):
            tqt_svd(QTensor(planes), ts, threads=1)

    def test_dims_and_k(self):
        rng = np.random.default_rng(73)
        a = random_qtensor(rng, (3, 5, 2))
        svd = tqt_svd(a, identity_transforms(a.dims))
        assert svd.dims == (3, 5, 2)
        assert svd.k == 3


class TestTqtRank:
    def test_identity_tensor_full_rank(self):
        ts = qdft_transforms((4, 4, 3))
        eye = identity_tensor(4, (3,), ts)
        assert tqt_rank(tqt_svd(eye, ts)) == 4

    def test_planted_two_tubes(self):
        # assemble U * D * V^H in the hat domain with exactly 2 nonzero
        # tubes, then check the decomposition of the spatial tensor sees 2
        rng = np.random.default_rng(79)
        dims = (4, 4, 3)
        ts = qdct_transforms(dims)
        from qtsvd.transforms import random_unitary
        u_hat = np.zeros((4, 4, 4, 3))
        v_hat = np.zeros((4, 4, 4, 3))
        d_hat = np.zeros((4, 4, 4, 3))
        for n in range(3):
            u_hat[:, :, :, n] = random_unitary(4, seed=100 + n).data
            v_hat[:, :, :, n] = random_unitary(4, seed=200 + n).data
            d_hat[0, 0, 0, n] = 5.0 + n
            d_hat[0, 1, 1, n] = 1.0 + 0.1 * n
        product = facewise_product(
            facewise_product(QTensor(u_hat), QTensor(d_hat)),
            facewise_conjugate_transpose(QTensor(v_hat)))
        a = from_hat(product, ts)
        svd = tqt_svd(a, ts)
        assert tqt_rank(svd) == 2
        assert svd.sigma[2] < RANK_TOLERANCE * svd.sigma[0]

    def test_tolerance_override(self):
        rng = np.random.default_rng(83)
        a = random_qtensor(rng, (3, 3, 2))
        svd = tqt_svd(a, qdct_transforms(a.dims))
        assert tqt_rank(svd, rank_tolerance=1e-10) == 3
        # absurdly large tolerance counts only the dominant tube
        assert tqt_rank(svd, rank_tolerance=0.999) <= 2


class TestTruncate:
    def test_full_rank_reconstructs(self):
        rng = np.random.default_rng(89)
        a = random_qtensor(rng, (4, 3, 3))
        for name in FAMILIES:
            ts = family(name, a.dims, tensor=a)
            svd = tqt_svd(a, ts)
            full = truncate(svd, svd.k)
            assert (full - a).norm() / a.norm() < 1e-9, name

    def test_error_identity_scaled_orthogonal(self):
        rng = np.random.default_rng(97)
        a = random_qtensor(rng, (5, 4, 3))
        ts = qdct_transforms(a.dims)
        svd = tqt_svd(a, ts)
        for s in range(1, svd.k + 1):
            err_sq = (truncate(svd, s) - a).norm() ** 2
            tail_sq = float(np.sum(svd.sigma[s:] ** 2))
            assert abs(err_sq - tail_sq) <= 1e-7 * max(a.norm() ** 2, 1.0)

    def test_error_monotone_in_s(self):
        rng = np.random.default_rng(101)
        a = random_qtensor(rng, (5, 5, 4))
        svd = tqt_svd(a, qdft_transforms(a.dims))
        errors = [(truncate(svd, s) - a).norm() for s in range(1, 6)]
        assert all(e1 >= e2 - 1e-12 for e1, e2 in zip(errors, errors[1:]))

    def test_scale_invariance(self):
        rng = np.random.default_rng(103)
        dims = (4, 4, 3, 2)
        a = random_qtensor(rng, dims)
        base = qdft_transforms(dims)
        doubled = validate(TransformSet(
            matrices=tuple(m * 2.0 for m in base.matrices)), dims)
        svd_u = tqt_svd(a, base)
        svd_2u = tqt_svd(a, doubled)
        for s in (1, 2, 4):
            t_u = truncate(svd_u, s)
            t_2u = truncate(svd_2u, s)
            assert (t_u - t_2u).norm() / max(1.0, t_u.norm()) < 1e-9

    def test_out_of_range(self):
        rng = np.random.default_rng(107)
        a = random_qtensor(rng, (3, 3, 2))
        svd = tqt_svd(a, qdct_transforms(a.dims))
        with pytest.raises(ShapeMismatchError):
            truncate(svd, 0)
        with pytest.raises(ShapeMismatchError):
            truncate(svd, 4)

    def test_warns_without_scaled_orthogonality(self):
        rng = np.random.default_rng(109)
        a = random_qtensor(rng, (3, 3, 2, 2))
        ts = crooked_transforms(a.dims)
        assert not ts.scaled_orthogonal
        svd = tqt_svd(a, ts)
        with pytest.warns(OptimalityWarning):
            approx = truncate(svd, 2)
        assert approx.dims == a.dims
        # the decomposition itself is still exact at full rank
        with pytest.warns(OptimalityWarning):
            full = truncate(svd, 3)
        assert (full - a).norm() / a.norm() < 1e-9

    def test_no_warning_when_scaled_orthogonal(self, recwarn):
        rng = np.random.default_rng(113)
        a = random_qtensor(rng, (3, 3, 2))
        svd = tqt_svd(a, qdct_transforms(a.dims))
        truncate(svd, 1)
        assert not [w for w in recwarn.list
                    if issubclass(w.category, OptimalityWarning)]

    def test_matches_tube_sum_construction(self):
        # A_s equals the sum of the first s rank-one tube products built
        # from full U, D, V through the product itself
        rng = np.random.default_rng(127)
        a = random_qtensor(rng, (3, 4, 2))
        ts = qdft_transforms(a.dims)
        svd = tqt_svd(a, ts)
        s = 2
        u_hat = to_hat(svd.U, ts).data
        d_hat = to_hat(svd.D, ts).data
        v_hat = to_hat(svd.V, ts).data
        acc = None
        for k in range(s):
            uk = QTensor(u_hat[:, :, k:k + 1])
            dk = QTensor(d_hat[:, k:k + 1, k:k + 1])
            vk = facewise_conjugate_transpose(QTensor(v_hat[:, :, k:k + 1]))
            term = facewise_product(facewise_product(uk, dk), vk)
            acc = term if acc is None else acc + term
        expected = from_hat(acc, ts)
        got = truncate(svd, s)
        assert (got - expected).norm() / max(1.0, expected.norm()) < 1e-10
