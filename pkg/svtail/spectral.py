"""
Dense complex linear algebra: extreme singular values, norms, kernel vectors
and distances to column spans.

The largest singular value comes from power iteration on the Gram operator,
the smallest from inverse iteration through a pivoted LU factorization. When
either iteration stalls (or the factorization meets an exactly zero pivot) the
answer is recomputed with a full bidiagonal SVD, so near-singular matrices,
which are the events under study, still get exact answers.
"""

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, Field, model_validator

import config as conf

from .ensemble import DenseMatrix, as_dense_matrix
from .errors import NonConvergenceError


class SingularTriple(BaseModel):
    sigma_max: float = Field(ge=0.0)
    sigma_min: float = Field(ge=0.0)
    iterations: int = Field(ge=0)
    residual: float = Field(ge=0.0)
    method: Literal["iterative", "svd"] = "iterative"

    @model_validator(mode="after")
    def _ordered(self):
        if self.sigma_min > self.sigma_max:
            raise ValueError(f"sigma_min {self.sigma_min} exceeds sigma_max {self.sigma_max}")
        return self


@dataclass(frozen=True)
class KernelVector:
    vector: np.ndarray
    kernel_dim: int
    residual: float

    @property
    def rank_deficient(self) -> bool:
        return self.kernel_dim > 1


@dataclass
class _IterationResult:
    value: float
    iterations: int
    residual: float
    converged: bool


def _start_vector(k: int) -> np.ndarray:
    # Fixed generic start so results do not depend on any trial stream
    rng = np.random.Generator(np.random.Philox(key=0x5EED))
    v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return v / np.linalg.norm(v)


def _gram_apply(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    m, n = A.shape
    if m >= n:
        return A.conj().T @ (A @ v)
    return A @ (A.conj().T @ v)


def _power_iteration(A: np.ndarray, tol: float, max_iterations: int) -> _IterationResult:
    k = min(A.shape)
    v = _start_vector(k)
    residual = np.inf
    for iteration in range(1, max_iterations + 1):
        w = _gram_apply(A, v)
        lam = float(np.real(np.vdot(v, w)))
        if lam <= 0.0:
            # Gram operator annihilates a generic vector: A is zero
            return _IterationResult(0.0, iteration, 0.0, not np.any(A))
        residual = float(np.linalg.norm(w - lam * v) / lam)
        if residual <= tol:
            return _IterationResult(np.sqrt(lam), iteration, residual, True)
        v = w / np.linalg.norm(w)
    return _IterationResult(np.sqrt(max(lam, 0.0)), max_iterations, residual, False)


def _inverse_solver(A: np.ndarray):
    """Returns a function applying the inverse Gram operator, or None when a pivot is exactly zero."""
    m, n = A.shape
    if m == n:
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
        if np.any(np.diag(lu) == 0):
            return None

        def solve(v):
            # (A^H A)^{-1} v = A^{-1} A^{-H} v
            w = scipy.linalg.lu_solve((lu, piv), v, trans=2, check_finite=False)
            return scipy.linalg.lu_solve((lu, piv), w, trans=0, check_finite=False)
        return solve

    gram = A.conj().T @ A if m > n else A @ A.conj().T
    lu, piv = scipy.linalg.lu_factor(gram, check_finite=False)
    if np.any(np.diag(lu) == 0):
        return None
    return lambda v: scipy.linalg.lu_solve((lu, piv), v, check_finite=False)


def _inverse_iteration(A: np.ndarray, tol: float, max_iterations: int) -> _IterationResult:
    with np.errstate(all="ignore"):
        solve = _inverse_solver(A)
    if solve is None:
        return _IterationResult(0.0, 0, np.inf, False)
    v = _start_vector(min(A.shape))
    residual = np.inf
    for iteration in range(1, max_iterations + 1):
        with np.errstate(all="ignore"):
            w = solve(v)
        if not np.all(np.isfinite(w)):
            return _IterationResult(0.0, iteration, np.inf, False)
        mu = float(np.real(np.vdot(v, w)))
        if mu <= 0.0:
            return _IterationResult(0.0, iteration, np.inf, False)
        residual = float(np.linalg.norm(w - mu * v) / mu)
        if residual <= tol:
            return _IterationResult(np.sqrt(1.0 / mu), iteration, residual, True)
        v = w / np.linalg.norm(w)
    return _IterationResult(np.sqrt(1.0 / mu), max_iterations, residual, False)


def _svdvals(A: np.ndarray, residual: float, iterations: int) -> np.ndarray:
    try:
        return scipy.linalg.svd(A, compute_uv=False, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    try:
        return scipy.linalg.svd(A, compute_uv=False, check_finite=False, lapack_driver="gesvd")
    except np.linalg.LinAlgError as e:
        raise NonConvergenceError(f"bidiagonal SVD failed: {e}", residual, iterations) from e


def singular_extremes(A: DenseMatrix, tol: float = None, max_iterations: int = None,
                      fallback: bool = True) -> SingularTriple:
    """
    Computes the largest and smallest singular values of A.

    Args:
        A: A square or (n-1) x n matrix.
        tol: Relative residual tolerance for both iterations.
        max_iterations: Iteration cap for each iteration before falling back.
        fallback: Whether to fall back to a full SVD when an iteration stalls.

    Returns:
        SingularTriple with the extremes, total iterations and the worst residual.

    Raises:
        NonConvergenceError: If an iteration stalls and fallback is disabled, or the SVD fails.
    """
    tol = conf.DEFAULT_TOL if tol is None else tol
    max_iterations = conf.MAX_ITERATIONS if max_iterations is None else max_iterations
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    A = as_dense_matrix(A)

    top = _power_iteration(A, tol, max_iterations)
    bottom = _inverse_iteration(A, tol, max_iterations) if top.value > 0 else _IterationResult(0.0, 0, 0.0, True)
    iterations = top.iterations + bottom.iterations

    if top.converged and bottom.converged:
        return SingularTriple(
            sigma_max=top.value,
            sigma_min=min(bottom.value, top.value),
            iterations=iterations,
            residual=max(top.residual, bottom.residual),
        )

    residual = max(top.residual, bottom.residual)
    if not fallback:
        raise NonConvergenceError("singular value iteration stalled", residual, iterations)
    s = _svdvals(A, residual, iterations)
    return SingularTriple(sigma_max=float(s[0]), sigma_min=float(s[-1]),
                          iterations=iterations, residual=0.0, method="svd")


def least_singular_value(A: DenseMatrix, tol: float = None, max_iterations: int = None) -> float:
    """Smallest singular value by inverse iteration alone, with the same SVD fallback."""
    tol = conf.DEFAULT_TOL if tol is None else tol
    max_iterations = conf.MAX_ITERATIONS if max_iterations is None else max_iterations
    A = as_dense_matrix(A)
    result = _inverse_iteration(A, tol, max_iterations)
    if result.converged:
        return result.value
    return float(_svdvals(A, result.residual, result.iterations)[-1])


def operator_norm(A: DenseMatrix, tol: float = None, max_iterations: int = None) -> float:
    """Largest singular value by power iteration alone, with the same SVD fallback."""
    tol = conf.DEFAULT_TOL if tol is None else tol
    max_iterations = conf.MAX_ITERATIONS if max_iterations is None else max_iterations
    A = as_dense_matrix(A)
    result = _power_iteration(A, tol, max_iterations)
    if result.converged:
        return result.value
    return float(_svdvals(A, result.residual, result.iterations)[0])


def least_singular_pair(A: DenseMatrix) -> tuple[float, np.ndarray]:
    """Returns sigma_n(A) and a unit vector x attaining ||Ax||_2 = sigma_n(A)."""
    A = as_dense_matrix(A)
    _, s, vh = scipy.linalg.svd(A, check_finite=False)
    return float(s[-1]), vh[-1].conj()


def hs_norm(A: DenseMatrix) -> float:
    """Hilbert-Schmidt (Frobenius) norm, an upper bound for the operator norm."""
    return float(np.linalg.norm(np.asarray(A, dtype=np.complex128)))


def kernel_unit_vector(B: DenseMatrix, tol: float = None) -> KernelVector:
    """
    A unit vector in the kernel of a wide matrix.

    Args:
        B: An (n-1) x n matrix (more columns than rows).
        tol: Singular values below tol * sigma_max count as zero when the
            kernel dimension is decided.

    Returns:
        KernelVector holding the null direction of the SVD, the numerical kernel
        dimension and ||B eta||_2. `rank_deficient` is set when the kernel has
        dimension above one; a unit null vector is still returned.
    """
    tol = conf.DEFAULT_TOL if tol is None else tol
    B = as_dense_matrix(B)
    m, n = B.shape
    if m >= n:
        raise ValueError(f"expected more columns than rows, got shape {B.shape}")
    _, s, vh = scipy.linalg.svd(B, full_matrices=True, check_finite=False)
    s_max = float(s[0])
    rank = int(np.sum(s > tol * s_max)) if s_max > 0 else 0
    eta = vh[-1].conj()
    return KernelVector(vector=eta, kernel_dim=n - rank, residual=float(np.linalg.norm(B @ eta)))


def distance_to_span(y: np.ndarray, W: Sequence[np.ndarray] | np.ndarray, rank_tol: float = None) -> float:
    """
    Euclidean distance from y to the linear span of W.

    Args:
        y: A vector of length n.
        W: A sequence of length-n vectors, or a 2-D array whose columns span the subspace.
        rank_tol: Relative threshold on the pivoted R diagonal below which a
            spanning vector is treated as dependent. Defaults to n * machine epsilon.

    Returns:
        ||y - P_W y||_2, computed with one re-orthogonalization pass.
    """
    y = np.asarray(y, dtype=np.complex128).ravel()
    if isinstance(W, np.ndarray) and W.ndim == 2:
        basis = W.astype(np.complex128)
    else:
        if len(W) == 0:
            return float(np.linalg.norm(y))
        basis = np.column_stack([np.asarray(w, dtype=np.complex128).ravel() for w in W])
    if basis.shape[1] == 0:
        return float(np.linalg.norm(y))
    if basis.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: y has {y.shape[0]} entries, W vectors have {basis.shape[0]}")

    q, r, _ = scipy.linalg.qr(basis, mode="economic", pivoting=True, check_finite=False)
    diagonal = np.abs(np.diag(r))
    if rank_tol is None:
        rank_tol = max(basis.shape) * np.finfo(float).eps
    rank = int(np.sum(diagonal > rank_tol * diagonal[0])) if diagonal[0] > 0 else 0
    q = q[:, :rank]

    residual = y - q @ (q.conj().T @ y)
    residual = residual - q @ (q.conj().T @ residual)
    return float(np.linalg.norm(residual))
