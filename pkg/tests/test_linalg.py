"""
Tests for the Jacobi eigensolver, reconstruction, norms and matrix files
"""
import numpy as np
import pytest

from src.linalg import (
    SpectralDecomposition,
    SymmetricMatrix,
    eigh,
    frobenius_distance,
    load_matrix_binary,
    load_matrix_csv,
    reconstruct,
    save_matrix_binary,
    save_matrix_csv,
    subspace_alignment
)
from src.utils import ConvergenceError, NumericalError, ShapeError


def random_symmetric(rng, n):
    m = rng.standard_normal((n, n))
    return (m + m.T) / 2.0


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def characteristic_roots(a, low, high, points=40001):
    """Roots of det(A - x I) by sign changes on a grid, refined by bisection"""
    n = a.shape[0]
    det = lambda x: np.linalg.det(a - x * np.eye(n))
    grid = np.linspace(low, high, points)
    values = np.array([det(x) for x in grid])
    roots = []
    for k in np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]:
        lo, hi, f_lo = grid[k], grid[k + 1], values[k]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            f_mid = det(mid)
            if np.sign(f_mid) == np.sign(f_lo):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return np.array(roots)


class TestSymmetricMatrix:

    def test_from_array_symmetrizes_exactly(self, rng):
        m = rng.standard_normal((5, 5))
        s = SymmetricMatrix.from_array(m)
        assert np.array_equal(s.entries, s.entries.T)
        np.testing.assert_allclose(s.entries, (m + m.T) / 2)

    def test_entries_are_read_only(self):
        s = SymmetricMatrix.from_array(np.eye(2))
        with pytest.raises(ValueError):
            s.entries[0, 0] = 5.0

    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros(4), np.zeros((0, 0))])
    def test_rejects_non_square(self, bad):
        with pytest.raises(ShapeError):
            SymmetricMatrix.from_array(bad)

    def test_rejects_non_finite(self):
        with pytest.raises(NumericalError):
            SymmetricMatrix.from_array([[0.0, np.nan], [np.nan, 0.0]])


class TestEigh:

    def test_identity(self):
        d = eigh(np.eye(3))
        np.testing.assert_allclose(d.eigvals, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(reconstruct(d).entries, np.eye(3), atol=1e-12)

    def test_two_by_two_swap(self):
        d = eigh([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(d.eigvals, [-1.0, 1.0], atol=1e-14)

    def test_single_entry(self):
        d = eigh([[2.5]])
        assert d.eigvals.tolist() == [2.5]
        assert d.eigvecs.tolist() == [[1.0]]

    def test_zero_matrix(self):
        d = eigh(np.zeros((4, 4)))
        np.testing.assert_array_equal(d.eigvals, np.zeros(4))

    def test_tiny_coupling_does_not_overflow(self):
        m = np.array([[0.0, 1e-300, 0.0], [1e-300, 1.0, 1.0], [0.0, 1.0, 2.0]])
        with np.errstate(over="raise", invalid="raise"):
            d = eigh(m)
        np.testing.assert_allclose(d.eigvals, np.linalg.eigvalsh(m), atol=1e-12)
        np.testing.assert_allclose(reconstruct(d).entries, m, atol=1e-12)

    def test_matches_characteristic_polynomial(self, rng):
        expected = np.array([-3.5, -2.0, -1.0, 0.2, 0.9, 1.7, 2.5, 4.0])
        q = random_orthogonal(rng, 8)
        a = (q * expected) @ q.T

        roots = characteristic_roots(a, -4.9871, 5.0137)
        d = eigh(a)

        assert len(roots) == 8
        np.testing.assert_allclose(d.eigvals, roots, atol=1e-6)
        np.testing.assert_allclose(d.eigvals, expected, atol=1e-9)

    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
    def test_round_trip_orthogonality_and_trace(self, rng, n):
        a = random_symmetric(rng, n)
        d = eigh(a)
        u = d.eigvecs

        assert np.all(np.diff(d.eigvals) >= 0)
        assert np.linalg.norm(u.T @ u - np.eye(n)) <= 1e-8 * n
        off = np.abs(u.T @ u - np.diag(np.diag(u.T @ u)))
        assert off.max() <= 1e-8
        assert np.linalg.norm(a - reconstruct(d).entries) / np.linalg.norm(a) <= 1e-8
        assert abs(d.eigvals.sum() - np.trace(a)) <= 1e-8 * n

    @pytest.mark.slow
    def test_many_random_round_trips(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 65))
            a = random_symmetric(rng, n)
            d = eigh(a)
            assert np.linalg.norm(a - reconstruct(d).entries) / np.linalg.norm(a) <= 1e-8

    def test_sign_convention(self, rng):
        d = eigh(random_symmetric(rng, 6))
        lead = np.argmax(np.abs(d.eigvecs), axis=0)
        assert np.all(d.eigvecs[lead, np.arange(6)] >= 0)

    def test_deterministic(self, rng):
        a = random_symmetric(rng, 10)
        first, second = eigh(a), eigh(a.copy())
        assert first.eigvals.tobytes() == second.eigvals.tobytes()
        assert first.eigvecs.tobytes() == second.eigvecs.tobytes()

    def test_sweep_cap_raises_with_residual(self, rng):
        with pytest.raises(ConvergenceError) as excinfo:
            eigh(random_symmetric(rng, 12), max_sweeps=1)
        assert excinfo.value.residual > 0
        assert "residual" in str(excinfo.value)


class TestReconstruct:

    def test_identity_basis(self):
        d = SpectralDecomposition(np.ones(3), np.eye(3))
        np.testing.assert_array_equal(reconstruct(d).entries, np.eye(3))

    def test_null_spectrum(self, rng):
        q = random_orthogonal(rng, 5)
        d = SpectralDecomposition(np.zeros(5), q)
        np.testing.assert_array_equal(reconstruct(d).entries, np.zeros((5, 5)))

    def test_with_eigvals_shares_basis(self, rng):
        d = eigh(random_symmetric(rng, 4))
        moved = d.with_eigvals(d.eigvals + 1.0)
        assert moved.eigvecs is d.eigvecs
        np.testing.assert_allclose(moved.eigvals, d.eigvals + 1.0)

    def test_mismatched_shapes(self):
        with pytest.raises(ShapeError):
            SpectralDecomposition(np.zeros(2), np.eye(3))


class TestFrobeniusDistance:

    def test_self_distance(self, rng):
        a = rng.standard_normal((3, 3))
        assert frobenius_distance(a, a) == 0.0

    def test_hand_computed(self):
        assert frobenius_distance([[0, 1], [1, 0]], [[0, 0], [0, 0]]) == pytest.approx(np.sqrt(2.0))

    def test_matches_direct_summation(self, rng):
        a, b = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        direct = np.sqrt(sum((a[i, j] - b[i, j]) ** 2 for i in range(4) for j in range(4)))
        assert frobenius_distance(a, b) == pytest.approx(direct, rel=1e-14)

    def test_triangle_inequality(self, rng):
        for _ in range(20):
            a, b, c = (rng.standard_normal((3, 3)) for _ in range(3))
            assert frobenius_distance(a, c) <= frobenius_distance(a, b) + frobenius_distance(b, c) + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            frobenius_distance(np.zeros((2, 2)), np.zeros((3, 3)))


class TestSubspaceAlignment:

    def test_permuted_and_flipped_basis(self, rng):
        q = random_orthogonal(rng, 5)
        candidate = -q[:, [2, 0, 4, 1, 3]]
        assert subspace_alignment(q, candidate) == pytest.approx(1.0, abs=1e-12)

    def test_rotated_basis_is_misaligned(self):
        c = s = np.sqrt(0.5)
        assert subspace_alignment(np.eye(2), np.array([[c, -s], [s, c]])) == pytest.approx(c)


class TestMatrixFiles:

    def test_binary_round_trip(self, tmp_path, rng):
        a = rng.standard_normal((3, 5))
        path = save_matrix_binary(a, tmp_path / "m.npy")
        loaded = load_matrix_binary(path)
        assert loaded.tobytes() == a.tobytes()

    def test_csv_has_shape_header(self, tmp_path, rng):
        a = rng.standard_normal((2, 3))
        path = save_matrix_csv(a, tmp_path / "m.csv")
        assert path.read_text().splitlines()[0] == "# shape: 2,3"
        np.testing.assert_array_equal(load_matrix_csv(path), a)

    def test_csv_single_row(self, tmp_path):
        path = save_matrix_csv(np.array([[1.5, -2.0]]), tmp_path / "row.csv")
        assert load_matrix_csv(path).shape == (1, 2)

    def test_csv_without_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,4\n")
        with pytest.raises(ShapeError):
            load_matrix_csv(path)

    def test_binary_rejects_vectors(self, tmp_path):
        np.save(tmp_path / "v.npy", np.zeros(3))
        with pytest.raises(ShapeError):
            load_matrix_binary(tmp_path / "v.npy")
