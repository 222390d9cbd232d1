import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from centralmap import linalg
from centralmap.linalg import (
    NumericalError,
    SingularMatrixError,
    gram,
    invert,
    jacobi_symmetric_eigen,
    multiply,
    numerical_rank,
    orthonormal_kernel_basis,
    singular_values,
)


def small_matrices(max_side=6):
    shapes = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shapes.flatmap(
        lambda s: arrays(np.float64, s, elements=st.floats(-10, 10, allow_subnormal=False))
    )


def well_conditioned(b, limit=1e3):
    s = np.linalg.svd(b, compute_uv=False)
    return s[0] > 1e-3 and s[-1] > s[0] / limit


def test_multiply_examples():
    np.testing.assert_array_equal(multiply(np.eye(2), [[1, 2], [3, 4]]), [[1, 2], [3, 4]])
    np.testing.assert_array_equal(multiply([[1, 0], [0, 0]], [[0, 0], [0, 1]]), np.zeros((2, 2)))
    np.testing.assert_array_equal(multiply([[1, 1]], [[1], [1]]), [[2]])


def test_multiply_rejects_mismatch():
    with pytest.raises(ValueError):
        multiply(np.eye(2), np.eye(3))


def test_gram_examples():
    np.testing.assert_array_equal(gram([[0, 1, 0], [0, 0, 1]]), np.eye(2))
    np.testing.assert_array_equal(gram(np.zeros((2, 3))), np.zeros((2, 2)))
    # hand multiplication: row norms 0.5 and 1, rows orthogonal
    np.testing.assert_array_equal(gram([[0.5, -0.5, 0], [0, 0, 1]]), [[0.5, 0], [0, 1]])


@given(small_matrices())
def test_gram_exactly_symmetric(b):
    g = gram(b)
    np.testing.assert_array_equal(g, g.T)
    assert np.all(np.linalg.eigvalsh(g) >= -1e-9 * max(1.0, np.abs(g).max()))


@pytest.mark.parametrize(
    "s, expected",
    [
        ([[2, 0], [0, 1]], [2, 1]),
        (np.eye(3), [1, 1, 1]),
        ([[0, 1], [1, 0]], [1, -1]),
    ],
)
def test_jacobi_examples(s, expected):
    w, q = jacobi_symmetric_eigen(s)
    np.testing.assert_allclose(w, expected, atol=1e-15)
    np.testing.assert_allclose(q.T @ q, np.eye(len(expected)), atol=1e-15)


def test_jacobi_against_lapack():
    rng = np.random.default_rng(11)
    for n in range(1, 12):
        a = rng.standard_normal((n, n))
        s = a + a.T
        w, q = jacobi_symmetric_eigen(s)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(s)[::-1], atol=1e-12)
        assert np.all(np.diff(w) <= 0)


def test_jacobi_rejects_bad_input():
    with pytest.raises(ValueError):
        jacobi_symmetric_eigen(np.ones((2, 3)))
    with pytest.raises(ValueError):
        jacobi_symmetric_eigen([[1, 2], [0, 1]])


def test_jacobi_sweep_cap():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6))
    with pytest.raises(NumericalError):
        jacobi_symmetric_eigen(a + a.T, max_sweeps=1)


def test_jacobi_zero_matrix():
    w, q = jacobi_symmetric_eigen(np.zeros((3, 3)))
    np.testing.assert_array_equal(w, 0)
    np.testing.assert_array_equal(q, np.eye(3))


def test_jacobi_widely_scaled_entries():
    s = np.diag([1e8, 1.0, 1e-8])
    s[0, 1] = s[1, 0] = 1e-3
    w, q = jacobi_symmetric_eigen(s)
    np.testing.assert_allclose(q @ np.diag(w) @ q.T, s, atol=1e-12 * 1e8)


def test_singular_values_examples():
    np.testing.assert_array_equal(singular_values([[0, 1, 0], [0, 0, 1]]), [1, 1])
    np.testing.assert_array_equal(singular_values([[0, 2, 0], [0, 0, 1]]), [2, 1])
    # Gram matrix diag(0.5, 1): characteristic polynomial (x - 0.5)(x - 1)
    sigma = singular_values([[0.5, -0.5, 0], [0, 0, 1]])
    np.testing.assert_allclose(sigma, [1.0, 0.7071067811865476], rtol=1e-15)


def test_singular_values_against_lapack():
    rng = np.random.default_rng(5)
    for rows, cols in [(2, 3), (3, 5), (4, 4), (6, 9), (5, 2)]:
        b = rng.standard_normal((rows, cols))
        np.testing.assert_allclose(
            singular_values(b), np.linalg.svd(b, compute_uv=False), rtol=1e-12
        )


def test_singular_values_clamps_rounding_negatives():
    # rank one: the second Gram eigenvalue is zero up to rounding
    b = np.outer([1.0, 3.0], [0.1, 0.7, 0.3])
    sigma = singular_values(b)
    assert sigma[1] >= 0.0
    assert sigma[1] < 1e-7 * sigma[0]


@settings(max_examples=200)
@given(small_matrices())
def test_singular_values_of_transpose_agree(b):
    assume(well_conditioned(b))
    s1 = singular_values(b)
    s2 = singular_values(b.T)
    np.testing.assert_allclose(s1, s2, rtol=1e-10, atol=1e-10 * s1[0])


def test_singular_values_of_square_transpose():
    # square case exercises B B^T against B^T B
    rng = np.random.default_rng(2)
    for n in range(2, 9):
        b = rng.standard_normal((n, n))
        s1 = singular_values(b)
        s2 = linalg.singular_values(b.T.copy())
        s3 = np.sqrt(np.clip(jacobi_symmetric_eigen(b.T @ b).eigenvalues, 0, None))
        np.testing.assert_allclose(s1, s2, rtol=1e-10)
        np.testing.assert_allclose(s1, s3, rtol=1e-10 * np.max(s1) / np.min(s1))


@settings(max_examples=200)
@given(small_matrices(), st.integers(0, 2**32 - 1))
def test_singular_values_orthogonal_invariance(b, seed):
    assume(well_conditioned(b))
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((b.shape[1],) * 2))
    s = singular_values(b)
    np.testing.assert_allclose(singular_values(b @ q), s, rtol=1e-10, atol=1e-10 * s[0])


@pytest.mark.parametrize(
    "b, expected",
    [
        (np.eye(2), 2),
        ([[1, 1], [1, 1]], 1),
        ([[1, 0], [0, 1e-14]], 1),
        (np.zeros((2, 3)), 0),
    ],
)
def test_numerical_rank_examples(b, expected):
    assert numerical_rank(b, 1e-10) == expected


def test_numerical_rank_requires_positive_tau():
    with pytest.raises(ValueError):
        numerical_rank(np.eye(2), 0.0)


@given(small_matrices(), st.randoms(use_true_random=False))
def test_numerical_rank_permutation_invariant(b, rnd):
    rows = list(range(b.shape[0]))
    cols = list(range(b.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assume(well_conditioned(b, 1e6) or not np.any(b))
    assert numerical_rank(b[rows][:, cols], 1e-10) == numerical_rank(b, 1e-10)


def _check_complement(a0, basis):
    a0 = np.asarray(a0, dtype=float)
    assert basis.shape == (a0.size - 1, a0.size)
    np.testing.assert_allclose(basis @ basis.T, np.eye(a0.size - 1), atol=1e-12)
    assert np.max(np.abs(basis @ a0)) <= 1e-12 * np.linalg.norm(a0)


@pytest.mark.parametrize("a0", [(1, 0, 0), (1, 1, 0), (0, 0, 3), (-2, 1, 0.5), (0, -1e-3, 0, 4)])
def test_kernel_basis_properties(a0):
    _check_complement(a0, orthonormal_kernel_basis(a0))


def test_kernel_basis_axis_cases():
    np.testing.assert_array_equal(orthonormal_kernel_basis([1, 0, 0]), [[0, 1, 0], [0, 0, 1]])
    np.testing.assert_array_equal(orthonormal_kernel_basis([0, 0, 3]), [[1, 0, 0], [0, 1, 0]])


def test_kernel_basis_diagonal_case():
    h = 0.7071067811865476
    np.testing.assert_allclose(orthonormal_kernel_basis([1, 1, 0]), [[h, -h, 0], [0, 0, 1]], atol=1e-16)


@given(arrays(np.float64, st.integers(2, 10), elements=st.floats(-1e3, 1e3, allow_subnormal=False)))
def test_kernel_basis_random(a0):
    assume(np.linalg.norm(a0) > 1e-6)
    _check_complement(a0, orthonormal_kernel_basis(a0))


def test_kernel_basis_deterministic():
    a0 = [0.3, -1.2, 0.8, 2.0]
    np.testing.assert_array_equal(orthonormal_kernel_basis(a0), orthonormal_kernel_basis(a0))


def test_kernel_basis_zero():
    with pytest.raises(ValueError):
        orthonormal_kernel_basis([0, 0, 0])


@pytest.mark.parametrize(
    "a, expected",
    [
        (np.eye(3), np.eye(3)),
        (np.diag([2.0, 4.0]), np.diag([0.5, 0.25])),
        ([[1, 1], [0, 1]], [[1, -1], [0, 1]]),
    ],
)
def test_invert_examples(a, expected):
    np.testing.assert_allclose(invert(a, 1e-10), expected, atol=1e-15)


def test_invert_against_lapack():
    rng = np.random.default_rng(3)
    for n in range(1, 9):
        a = rng.standard_normal((n, n))
        inv = invert(a, 1e-10)
        assert np.max(np.abs(a @ inv - np.eye(n))) <= 1e-10
        np.testing.assert_allclose(inv, np.linalg.inv(a), rtol=1e-9, atol=1e-12)


def test_invert_singular():
    with pytest.raises(SingularMatrixError):
        invert([[1, 2], [2, 4]], 1e-10)
    with pytest.raises(SingularMatrixError):
        invert(np.zeros((3, 3)), 1e-10)
    with pytest.raises(ValueError):
        invert(np.ones((2, 3)), 1e-10)


def test_householder_qr_pivoting():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((5, 4))
    q, r, perm = linalg.householder_qr(a, pivoting=True)
    np.testing.assert_allclose(q @ r, a[:, perm], atol=1e-14)
    np.testing.assert_allclose(q.T @ q, np.eye(5), atol=1e-14)
    d = np.abs(np.diag(r))
    assert np.all(np.diff(d) <= 1e-14)
    np.testing.assert_array_equal(np.tril(r, -1), 0)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        gram([[np.nan, 1.0]])
    with pytest.raises(ValueError):
        singular_values([[np.inf, 1.0]])


def test_numerical_rank_sees_exact_deficiency():
    # Gram eigenvalues would leave ~1e-8 * sigma_max here
    b = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert numerical_rank(b, 1e-10) == 2
    rng = np.random.default_rng(9)
    for k in range(1, 5):
        low = rng.standard_normal((6, k)) @ rng.standard_normal((k, 7))
        assert numerical_rank(low, 1e-10) == k


def test_one_sided_jacobi_against_lapack():
    rng = np.random.default_rng(1)
    for shape in [(2, 5), (4, 4), (7, 3)]:
        b = rng.standard_normal(shape)
        np.testing.assert_allclose(
            linalg._one_sided_jacobi_singular_values(b), np.linalg.svd(b, compute_uv=False), rtol=1e-13
        )


def test_kernel_basis_near_axis():
    # off-axis mass far below rounding of ||u||^2
    a0 = [0.0, 0.0, 1.1920929e-07, 3.0]
    _check_complement(a0, orthonormal_kernel_basis(a0))


def test_jacobi_tiny_off_diagonal():
    # the (0, 1) coupling is rotated during a sweep forced by the (1, 2) entry
    s = np.array([[1.0, 1e-300, 0.0], [1e-300, 1e10, 1.0], [0.0, 1.0, 2.0]])
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        w, q = jacobi_symmetric_eigen(s)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(s)[::-1], rtol=1e-15)


def test_singular_values_small_relative_accuracy():
    # condition 1e6: square roots of Gram eigenvalues would be off by ~1e-4 relative
    rng = np.random.default_rng(12)
    u, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    v, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    target = np.array([1.0, 1e-3, 1e-6])
    b = u @ np.diag(target) @ v[:3]
    np.testing.assert_allclose(singular_values(b), target, rtol=1e-9)
