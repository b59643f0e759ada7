import itertools

import numpy as np
import pytest

from svtail.errors import NonConvergenceError
from svtail.spectral import (
    distance_to_span,
    hs_norm,
    kernel_unit_vector,
    least_singular_pair,
    least_singular_value,
    operator_norm,
    singular_extremes,
)


def _random_complex(shape, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_diagonal_extremes():
    triple = singular_extremes(np.diag([3.0, 2.0, 1.0]))
    assert triple.sigma_max == pytest.approx(3.0, rel=1e-6)
    assert triple.sigma_min == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_extremes_match_svd(seed):
    A = _random_complex((30, 30), seed)
    s = np.linalg.svd(A, compute_uv=False)
    triple = singular_extremes(A)
    assert triple.sigma_max == pytest.approx(s[0], rel=1e-6)
    assert triple.sigma_min == pytest.approx(s[-1], rel=1e-6)
    assert triple.sigma_min <= triple.sigma_max


def test_rectangular_extremes():
    A = _random_complex((5, 6), 4)
    s = np.linalg.svd(A, compute_uv=False)
    triple = singular_extremes(A)
    assert triple.sigma_max == pytest.approx(s[0], rel=1e-6)
    assert triple.sigma_min == pytest.approx(s[-1], rel=1e-6)


def test_one_by_one():
    triple = singular_extremes(np.array([[2.0 + 0j]]))
    assert triple.sigma_max == pytest.approx(2.0)
    assert triple.sigma_min == pytest.approx(2.0)


def test_singular_matrix_falls_back_to_svd():
    A = _random_complex((8, 8), 5)
    A[:, 3] = 0.0
    triple = singular_extremes(A)
    assert triple.sigma_min <= 1e-10
    assert triple.method == "svd"


def test_zero_matrix():
    triple = singular_extremes(np.zeros((4, 4)))
    assert triple.sigma_max == 0.0
    assert triple.sigma_min == 0.0


def test_no_fallback_raises():
    A = _random_complex((20, 20), 6)
    with pytest.raises(NonConvergenceError) as e:
        singular_extremes(A, max_iterations=1, fallback=False)
    assert e.value.iterations >= 1
    assert e.value.residual > 0


def test_bad_tolerance():
    with pytest.raises(ValueError):
        singular_extremes(np.eye(2), tol=0.0)


def test_fast_paths_agree_with_svd():
    A = _random_complex((25, 25), 7)
    s = np.linalg.svd(A, compute_uv=False)
    assert least_singular_value(A) == pytest.approx(s[-1], rel=1e-6)
    assert operator_norm(A) == pytest.approx(s[0], rel=1e-6)
    assert least_singular_value(np.zeros((3, 3))) <= 1e-12


def test_least_singular_pair_attains_minimum():
    A = _random_complex((10, 10), 8)
    sigma, x = least_singular_pair(A)
    assert np.linalg.norm(x) == pytest.approx(1.0)
    assert np.linalg.norm(A @ x) == pytest.approx(sigma, rel=1e-8, abs=1e-12)


def test_hs_norm_dominates_operator_norm():
    A = _random_complex((12, 12), 9)
    assert hs_norm(A) == pytest.approx(np.sqrt(np.sum(np.abs(A) ** 2)))
    assert hs_norm(A) >= operator_norm(A)


def test_kernel_unit_vector():
    B = _random_complex((4, 5), 10)
    kernel = kernel_unit_vector(B)
    assert np.linalg.norm(kernel.vector) == pytest.approx(1.0)
    assert kernel.residual < 1e-10
    assert kernel.kernel_dim == 1
    assert not kernel.rank_deficient


def test_kernel_rank_deficient():
    B = _random_complex((4, 5), 11)
    B[2] = 0.0
    kernel = kernel_unit_vector(B)
    assert kernel.kernel_dim == 2
    assert kernel.rank_deficient
    assert kernel.residual < 1e-10


def test_kernel_needs_wide_matrix():
    with pytest.raises(ValueError):
        kernel_unit_vector(np.eye(3))


def test_distance_to_span():
    e = np.eye(3)
    assert distance_to_span(e[0], [e[1]]) == pytest.approx(1.0)
    assert distance_to_span(e[0] + e[1], [e[0], e[1]]) == pytest.approx(0.0, abs=1e-12)
    assert distance_to_span(np.array([3.0, 4.0, 0.0]), []) == pytest.approx(5.0)
    # dependent spanning vectors
    assert distance_to_span(e[2], [e[0], 2 * e[0], e[1]]) == pytest.approx(1.0)


def test_distance_to_span_complex_and_matrix_form():
    y = np.array([1.0, 1j])
    assert distance_to_span(y, [np.array([1.0, 0.0])]) == pytest.approx(1.0)
    A = _random_complex((6, 6), 12)
    W = np.delete(A, 0, axis=1)
    direct = distance_to_span(A[:, 0], W)
    listed = distance_to_span(A[:, 0], [W[:, j] for j in range(W.shape[1])])
    assert direct == pytest.approx(listed)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance_to_span(np.ones(3), [np.ones(4)])


def test_permutation_scaled_diagonal():
    triple = singular_extremes(np.array([[0.0, 2.0], [1.0, 0.0]]))
    assert triple.sigma_max == pytest.approx(2.0, rel=1e-10)
    assert triple.sigma_min == pytest.approx(1.0, rel=1e-10)
    identity = singular_extremes(np.eye(5))
    assert identity.sigma_max == pytest.approx(1.0)
    assert identity.sigma_min == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(10))
def test_two_by_two_closed_form(seed):
    A = _random_complex((2, 2), 100 + seed)
    frobenius = np.sum(np.abs(A) ** 2)
    det = abs(np.linalg.det(A))
    top = np.sqrt((frobenius + np.sqrt(frobenius ** 2 - 4.0 * det ** 2)) / 2.0)
    triple = singular_extremes(A)
    assert triple.sigma_max == pytest.approx(top, rel=1e-10)
    # product of the two singular values is |det A|
    assert triple.sigma_min == pytest.approx(det / top, rel=1e-10)


def test_scale_equivariance():
    A = _random_complex((20, 20), 13)
    c = 2.0 - 3.0j
    base, scaled = singular_extremes(A), singular_extremes(c * A)
    assert scaled.sigma_max == pytest.approx(abs(c) * base.sigma_max, rel=1e-6)
    assert scaled.sigma_min == pytest.approx(abs(c) * base.sigma_min, rel=1e-6)


def test_unitary_and_permutation_invariance():
    A = _random_complex((20, 20), 14)
    U, _ = np.linalg.qr(_random_complex((20, 20), 15))
    V, _ = np.linalg.qr(_random_complex((20, 20), 16))
    rng = np.random.default_rng(17)
    permuted = A[rng.permutation(20)][:, rng.permutation(20)]
    base = singular_extremes(A)
    for B in (U @ A @ V, permuted):
        triple = singular_extremes(B)
        assert triple.sigma_max == pytest.approx(base.sigma_max, rel=1e-6)
        assert triple.sigma_min == pytest.approx(base.sigma_min, rel=1e-6)


def test_operator_norm_splits_over_real_and_imaginary_parts():
    for seed in range(200):
        A = _random_complex((6, 6), 200 + seed)
        assert operator_norm(A) <= operator_norm(A.real) + operator_norm(A.imag) + 1e-8


def _gram_eigenvalues(A: np.ndarray) -> np.ndarray:
    """Eigenvalues of A^H A from its characteristic polynomial, ascending."""
    G = A.conj().T @ A
    k = G.shape[0]
    trace = float(np.real(np.trace(G)))
    # G has Gaussian-integer entries, so its trace and determinant are integers
    det = float(round(np.real(np.linalg.det(G)))) if k > 1 else trace
    if k == 1:
        return np.array([trace])
    if k == 2:
        root = np.sqrt(max(trace ** 2 - 4.0 * det, 0.0))
        return np.array([(trace - root) / 2.0, (trace + root) / 2.0])
    minors = sum(float(np.real(G[i, i] * G[j, j] - G[i, j] * G[j, i])) for i in range(3) for j in range(i + 1, 3))
    # lambda^3 - trace lambda^2 + minors lambda - det, shifted by trace / 3
    p = minors - trace ** 2 / 3.0
    q = -2.0 * trace ** 3 / 27.0 + trace * minors / 3.0 - det
    if p > -1e-12:
        return np.full(3, trace / 3.0)
    radius = 2.0 * np.sqrt(-p / 3.0)
    angle = np.arccos(np.clip(3.0 * q / (p * radius), -1.0, 1.0)) / 3.0
    roots = trace / 3.0 + radius * np.cos(angle - 2.0 * np.pi * np.arange(3) / 3.0)
    return np.sort(roots)


def _gaussian_unit_matrices():
    entries = np.array([0.0, 1.0, -1.0, 1j, -1j])
    for k in (1, 2):
        for combo in itertools.product(entries, repeat=k * k):
            yield np.array(combo).reshape(k, k)
    rng = np.random.default_rng(18)
    for _ in range(500):
        yield rng.choice(entries, size=(3, 3))


def test_small_gaussian_integer_matrices_match_characteristic_polynomial():
    for A in _gaussian_unit_matrices():
        eigenvalues = np.clip(_gram_eigenvalues(A), 0.0, None)
        # det(A^H A) = |det A|^2 is an integer, so a singular A has sigma_min exactly 0
        singular = round(abs(np.linalg.det(A)) ** 2) == 0
        expected_min = 0.0 if singular else np.sqrt(eigenvalues[0])
        triple = singular_extremes(A)
        assert triple.sigma_max == pytest.approx(np.sqrt(eigenvalues[-1]), abs=1e-8), A
        assert triple.sigma_min == pytest.approx(expected_min, abs=1e-8), A


def test_hs_norm_examples():
    assert hs_norm(np.eye(4)) == pytest.approx(2.0)
    assert hs_norm(np.zeros((3, 3))) == 0.0


def test_coordinate_kernel():
    kernel = kernel_unit_vector(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    assert abs(kernel.vector[2]) == pytest.approx(1.0)
    assert np.linalg.norm(kernel.vector[:2]) == pytest.approx(0.0, abs=1e-12)
