"""
Seedable sampling of the sparse complex Gaussian ensemble and its relatives.

Every random object is a pure function of a `SeedPath`. A path is turned into
a counter-based Philox generator keyed through `numpy.random.SeedSequence`, so
parallel trials reproduce serial results bit for bit. Gaussians come from
numpy's ziggurat sampler (`Generator.standard_normal`); nothing else is used.

Example:
    ```py
    spec = EnsembleSpec(n=100, delta=0.5, field=ScalarField.COMPLEX)
    A = assemble_sparse_matrix(spec, SeedPath(master_seed=42, trial_index=0, stream_label="tail"))
    ```
"""

import hashlib
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

DenseMatrix = np.ndarray

MASK_STREAM = "mask"
GAUSSIAN_STREAM = "gaussian"


class ScalarField(str, Enum):
    REAL = "real"
    COMPLEX = "complex"


class EnsembleSpec(BaseModel):
    """Law of the random matrix: dimension, sparsity exponent, scalar field and an optional shift."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    delta: float = Field(gt=0.0, lt=1.0)
    field: ScalarField = ScalarField.COMPLEX
    shift_t: float | None = Field(default=None, gt=0.0)
    shift_lambda: float | None = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _shift_pair(self):
        if (self.shift_t is None) != (self.shift_lambda is None):
            raise ValueError("shift_t and shift_lambda must be given together")
        return self

    @computed_field
    @property
    def p(self) -> float:
        return float(self.n) ** (self.delta - 1.0)

    @property
    def is_shifted(self) -> bool:
        return self.shift_t is not None


def _label_key(label: str) -> int:
    # Stable across processes, unlike hash()
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")


class SeedPath(BaseModel):
    """Address of one independent random stream."""

    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(ge=0, lt=2**64)
    trial_index: int = Field(default=0, ge=0)
    stream_label: str = Field(default="main", min_length=1, max_length=64)

    def child(self, label: str) -> "SeedPath":
        return SeedPath(
            master_seed=self.master_seed,
            trial_index=self.trial_index,
            stream_label=f"{self.stream_label}/{label}",
        )

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=[self.master_seed, self.trial_index, _label_key(self.stream_label)]
        )
        return np.random.Generator(np.random.Philox(seq))


def as_dense_matrix(a) -> DenseMatrix:
    """
    Validates and converts an array-like into the complex matrix container.

    Raises:
        ValueError: If the input is not two-dimensional or has non-finite entries.
    """
    matrix = np.asarray(a, dtype=np.complex128)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix has non-finite entries")
    return matrix


def _gaussian(shape, field: ScalarField, rng: np.random.Generator) -> np.ndarray:
    if field == ScalarField.COMPLEX:
        # Real and imaginary parts each N(0, 1/2) so that E|xi|^2 = 1
        re = rng.standard_normal(shape)
        im = rng.standard_normal(shape)
        return (re + 1j * im) * np.sqrt(0.5)
    return rng.standard_normal(shape).astype(np.complex128)


def _mask(shape, p: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return (rng.random(shape) < p).astype(np.complex128)


def sample_bernoulli_mask(n: int, p: float, seed: SeedPath) -> DenseMatrix:
    """
    Samples an n x n matrix of independent Bernoulli(p) entries.

    Args:
        n: Matrix dimension.
        p: Probability of a one.
        seed: Stream address.

    Returns:
        A 0/1 complex matrix.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return _mask((n, n), p, seed.generator())


def sample_gaussian_matrix(n: int, field: ScalarField, seed: SeedPath) -> DenseMatrix:
    """Samples an n x n matrix of i.i.d. standard Gaussians of the given field (E|xi|^2 = 1)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return _gaussian((n, n), ScalarField(field), seed.generator())


def assemble_sparse_matrix(spec: EnsembleSpec, seed: SeedPath) -> DenseMatrix:
    """
    Samples A_ij = xi_ij * delta_ij with p = n^(delta - 1).

    The Gaussian and mask layers come from the child streams "gaussian" and
    "mask" of `seed`, so either layer can be resampled with the other fixed.
    """
    gaussian = sample_gaussian_matrix(spec.n, spec.field, seed.child(GAUSSIAN_STREAM))
    mask = sample_bernoulli_mask(spec.n, spec.p, seed.child(MASK_STREAM))
    return gaussian * mask


def sample_sparse_row(spec: EnsembleSpec, seed: SeedPath) -> np.ndarray:
    """One row of the sparse ensemble, as a length-n vector."""
    gaussian = _gaussian(spec.n, spec.field, seed.child(GAUSSIAN_STREAM).generator())
    mask = _mask(spec.n, spec.p, seed.child(MASK_STREAM).generator())
    return gaussian * mask


def sample_sparse_column(spec: EnsembleSpec, seed: SeedPath) -> np.ndarray:
    """One column of the sparse ensemble. Rows and columns share a law; only the name differs."""
    return sample_sparse_row(spec, seed)


def build_shift_matrix(n: int, t: float) -> DenseMatrix:
    """
    t times the identity with the lower right corner entry zeroed out.

    Args:
        n: Matrix dimension.
        t: Diagonal value, the operator norm of the result when n >= 2.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    diagonal = np.full(n, t, dtype=np.complex128)
    diagonal[-1] = 0.0
    return np.diag(diagonal)


def build_shift_witness(A: DenseMatrix, t: float, lam: float) -> np.ndarray:
    """
    The test vector x with x_i = -(lam/t) A_in for i < n and x_n = 1.

    (M + lam A) x only sees the first n-1 columns of A when A_nn = 0, which is
    what makes sigma_n(M + lam A) small.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    A = as_dense_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    x = -(lam / t) * A[:, n - 1].copy()
    x[n - 1] = 1.0
    return x


def sample_shifted_matrix(spec: EnsembleSpec, t: float, lam: float, seed: SeedPath) -> DenseMatrix:
    """M + lam * A with M from `build_shift_matrix(spec.n, t)`."""
    return build_shift_matrix(spec.n, t) + lam * assemble_sparse_matrix(spec, seed)


def sample_matrix(spec: EnsembleSpec, seed: SeedPath) -> DenseMatrix:
    """Samples the law described by `spec`, applying its shift when one is set."""
    if spec.is_shifted:
        return sample_shifted_matrix(spec, spec.shift_t, spec.shift_lambda, seed)
    return assemble_sparse_matrix(spec, seed)
