import numpy as np
import numpy.testing as npt
import pytest

from lstmreg.linalg import (
    frobenius_norm,
    hadamard,
    matvec,
    spectral_norm,
    spectral_norm_grad,
)

from _oracles import top_singular_value


class TestMatvec:
    def test_identity(self):
        npt.assert_array_equal(matvec(np.eye(2), [3.0, -1.0]), [3.0, -1.0])

    def test_zero_matrix(self):
        npt.assert_array_equal(matvec(np.zeros((2, 2)), [5.0, 7.0]), [0.0, 0.0])

    def test_hand_value(self):
        npt.assert_array_equal(matvec([[1.0, 2.0], [3.0, 4.0]], [1.0, 1.0]),
                               [3.0, 7.0])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            matvec(np.eye(2), [1.0, 2.0, 3.0])


class TestHadamard:
    def test_ones_identity(self):
        npt.assert_array_equal(hadamard([1.0, 1.0], [2.5, -3.5]), [2.5, -3.5])

    def test_zero(self):
        npt.assert_array_equal(hadamard([0.0, 0.0], [9.0, -9.0]), [0.0, 0.0])

    def test_hand_value(self):
        npt.assert_array_equal(hadamard([2.0, -3.0], [4.0, 5.0]), [8.0, -15.0])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            hadamard([1.0], [1.0, 2.0])


class TestSpectralNorm:
    def test_identity(self):
        res = spectral_norm(np.eye(3))
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert not res.degenerate

    def test_diagonal(self):
        res = spectral_norm(np.diag([3.0, -5.0]))
        assert res.value == pytest.approx(5.0, abs=1e-10)

    def test_zero_matrix_degenerate(self):
        res = spectral_norm(np.zeros((2, 3)))
        assert res.value == 0.0
        assert res.degenerate
        npt.assert_array_equal(res.u, [1.0, 0.0])
        npt.assert_array_equal(res.v, [1.0, 0.0, 0.0])

    def test_start_vector_orthogonal_to_top_space(self):
        # the all-ones start lands in the kernel of W^T W here
        res = spectral_norm(np.array([[1.0, -1.0]]))
        assert res.value == pytest.approx(np.sqrt(2.0), abs=1e-10)

    def test_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            w = rng.normal(size=(4, 3))
            res = spectral_norm(w, max_iters=5000, tol=1e-13)
            assert res.value == pytest.approx(top_singular_value(w), abs=1e-8)

    def test_singular_vector_residual(self):
        rng = np.random.default_rng(8)
        w = rng.normal(size=(5, 4))
        res = spectral_norm(w, max_iters=5000, tol=1e-13)
        npt.assert_allclose(w @ res.v, res.value * res.u, atol=1e-8)
        assert np.linalg.norm(res.u) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(res.v) == pytest.approx(1.0, abs=1e-12)

    def test_scaling_homogeneity(self):
        rng = np.random.default_rng(9)
        w = rng.normal(size=(3, 3))
        base = spectral_norm(w, max_iters=5000, tol=1e-13).value
        for c in (-2.0, 0.5, 7.0):
            scaled = spectral_norm(c * w, max_iters=5000, tol=1e-13).value
            assert scaled == pytest.approx(abs(c) * base, abs=1e-8)

    def test_bounded_by_frobenius(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            w = rng.normal(size=rng.integers(1, 6, size=2))
            assert spectral_norm(w).value <= frobenius_norm(w) + 1e-8

    def test_operator_norm_property(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            m, n = rng.integers(1, 6, size=2)
            w = rng.normal(size=(m, n))
            v = rng.normal(size=n)
            value = spectral_norm(w, max_iters=5000, tol=1e-13).value
            assert np.linalg.norm(w @ v) <= value * np.linalg.norm(v) + 1e-8

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            spectral_norm(np.eye(2), max_iters=0)
        with pytest.raises(ValueError):
            spectral_norm(np.eye(2), tol=0.0)


class TestSpectralNormGrad:
    def test_diagonal_sign(self):
        grad = spectral_norm_grad(np.diag([3.0, -5.0]))
        npt.assert_allclose(grad, [[0.0, 0.0], [0.0, -1.0]], atol=1e-10)

    def test_one_by_one(self):
        npt.assert_allclose(spectral_norm_grad(np.array([[2.0]])), [[1.0]],
                            atol=1e-12)

    def test_zero_matrix_subgradient(self):
        npt.assert_array_equal(spectral_norm_grad(np.zeros((3, 2))),
                               np.zeros((3, 2)))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        checked = 0
        while checked < 10:
            w = rng.normal(size=(3, 3))
            svals = np.linalg.svd(w, compute_uv=False)
            if svals[0] - svals[1] <= 1e-4:
                continue
            checked += 1
            grad = spectral_norm_grad(w, max_iters=20000, tol=1e-14)
            step = 1e-6
            for a in range(3):
                for b in range(3):
                    wp = w.copy(); wp[a, b] += step
                    wm = w.copy(); wm[a, b] -= step
                    fd = (top_singular_value(wp) - top_singular_value(wm)) / (2 * step)
                    assert grad[a, b] == pytest.approx(
                        fd, rel=1e-5, abs=1e-7), (a, b)


class TestFrobeniusNorm:
    def test_zero(self):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_identity(self):
        assert frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2.0), abs=1e-15)

    def test_three_four_five(self):
        assert frobenius_norm(np.array([[3.0, 4.0]])) == pytest.approx(5.0, abs=1e-15)
