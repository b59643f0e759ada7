"""
Geometry of the unit sphere: band masses, the compressible/incompressible
partition, the sparse-net approximation pipeline with its certificate, and the
zero-out truncation.

All band tests use the half-open convention (lo, hi] on squared moduli.
"""

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .ensemble import SeedPath
from .errors import ClassificationError, InfeasibleClassError, NotInSetError

UNIT_TOL = 1e-8
MASS_SLACK = 1e-12


class SphereVerdict(str, Enum):
    HC = "HC"
    MC = "MC"
    IC = "IC"


class ClassificationParams(BaseModel):
    """Constants (c1, c2, eps1, eps2) of the partition and the sparsity exponent."""

    model_config = ConfigDict(frozen=True)

    c1: float = Field(gt=0.0)
    c2: float = Field(gt=0.0)
    eps1: float = Field(gt=0.0, lt=1.0)
    eps2: float = Field(gt=0.0, lt=1.0)
    delta: float = Field(gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _masses_fit(self):
        if self.eps1 + self.eps2 >= 1.0:
            raise ValueError(f"eps1 + eps2 must be below 1, got {self.eps1 + self.eps2}")
        return self


class SphereClass(BaseModel):
    verdict: SphereVerdict
    small_mass: float = Field(ge=0.0, le=1.0 + UNIT_TOL)
    band_mass: float = Field(ge=0.0, le=1.0 + UNIT_TOL)
    low_mass: float = Field(ge=0.0, le=1.0 + UNIT_TOL)


class NetCertificate(BaseModel):
    """What the approximation pipeline measured for one point of V."""

    a: float = Field(gt=0.0)
    b: float = Field(gt=0.0)
    d1: float = Field(gt=0.0, lt=1.0)
    d2: float = Field(gt=0.0, lt=1.0)
    dist: float = Field(ge=0.0)
    band_mass_x3: float = Field(ge=0.0)
    support_size: int = Field(ge=0)
    step_distances: tuple[float, float, float]

    def violations(self) -> list[str]:
        """Names of the certificate invariants that fail; empty when the certificate is sound."""
        failed = []
        if self.dist > 3.0 * math.sqrt(self.d1):
            failed.append("dist <= 3 sqrt(d1)")
        if self.support_size > self.a:
            failed.append("support_size <= a")
        if self.band_mass_x3 < self.d2 - 57.0 * math.sqrt(self.d1):
            failed.append("band_mass_x3 >= d2 - 57 sqrt(d1)")
        return failed

    @property
    def sound(self) -> bool:
        return not self.violations()


def _squared_moduli(x) -> np.ndarray:
    return np.abs(np.asarray(x, dtype=np.complex128).ravel()) ** 2


def mass_in_band(x, lo: float, hi: float) -> float:
    """
    Sum of |x_i|^2 over the indices with lo < |x_i|^2 <= hi.

    An empty band (lo >= hi) has mass 0.
    """
    if lo >= hi:
        return 0.0
    sq = _squared_moduli(x)
    return float(np.sum(sq[(sq > lo) & (sq <= hi)]))


def mass_at_most(x, hi: float) -> float:
    """Sum of |x_i|^2 over the indices with |x_i|^2 <= hi."""
    sq = _squared_moduli(x)
    return float(np.sum(sq[sq <= hi]))


def band_thresholds(params: ClassificationParams, n: int) -> tuple[float, float]:
    """Returns (1/(c1 n), 1/(c2 n^(1 - delta)))."""
    return 1.0 / (params.c1 * n), 1.0 / (params.c2 * float(n) ** (1.0 - params.delta))


def _check_unit(x: np.ndarray):
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"expected a unit vector, got norm {norm}")


def classify_vector(x, params: ClassificationParams) -> SphereClass:
    """
    Places a unit vector in exactly one of the sets HC, MC and IC.

    The three sets overlap as written, so membership is tested in the order
    IC, MC, HC: IC when small_mass >= eps1, else MC when band_mass >= eps2,
    else HC, which then has to satisfy low_mass < eps1 + eps2.

    Args:
        x: A unit vector in C^n.
        params: Partition constants.

    Returns:
        SphereClass holding the verdict and the three masses.

    Raises:
        ValueError: If x is not a unit vector.
        ClassificationError: If no set accepts x.
    """
    x = np.asarray(x, dtype=np.complex128).ravel()
    _check_unit(x)
    small_thresh, low_thresh = band_thresholds(params, x.shape[0])
    small = mass_at_most(x, small_thresh)
    band = mass_in_band(x, small_thresh, low_thresh)
    low = mass_at_most(x, low_thresh)

    if small >= params.eps1:
        verdict = SphereVerdict.IC
    elif band >= params.eps2:
        verdict = SphereVerdict.MC
    elif low < params.eps1 + params.eps2 + MASS_SLACK:
        verdict = SphereVerdict.HC
    else:
        raise ClassificationError(
            f"no set accepts x: small={small}, band={band}, low={low} with eps1={params.eps1}, eps2={params.eps2}"
        )
    return SphereClass(verdict=verdict, small_mass=small, band_mass=band, low_mass=low)


def zero_out_above(x, thresh: float) -> np.ndarray:
    """Copy of x with every entry of squared modulus above `thresh` set to 0."""
    if thresh <= 0:
        raise ValueError(f"thresh must be positive, got {thresh}")
    x = np.asarray(x, dtype=np.complex128).ravel()
    return np.where(np.abs(x) ** 2 <= thresh, x, 0.0)


def in_v_set(x, a: float, b: float, d1: float, d2: float) -> bool:
    """Whether x is a unit vector with mass < d1 at or below 1/a and mass >= d2 in (1/a, 1/b]."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    if abs(float(np.linalg.norm(x)) - 1.0) > UNIT_TOL:
        return False
    return mass_at_most(x, 1.0 / a) < d1 and mass_in_band(x, 1.0 / a, 1.0 / b) >= d2


def _lattice_round(z: np.ndarray, pitch: float) -> np.ndarray:
    return pitch * (np.round(z.real / pitch) + 1j * np.round(z.imag / pitch))


def net_approximate(x, a: float, b: float, d1: float, d2: float) -> tuple[np.ndarray, NetCertificate]:
    """
    Runs the four-step approximation of a point of V by an a-sparse net point.

    x0 = x; x1 keeps the entries with |x_i|^2 > 1/a; x2 = x1 / ||x1||; x3 rounds
    the real and imaginary parts of x2 to a lattice of pitch sqrt(d1)/(2 sqrt(a))
    and renormalizes, which moves x2 by at most sqrt(d1).

    Args:
        x: A unit vector in V(a, b, d1, d2).
        a: Sparsity level (entries above 1/a are kept).
        b: Upper band parameter.
        d1: Small-mass bound, at most 0.1.
        d2: Band-mass bound with 57 sqrt(d1) < d2 < 1.

    Returns:
        The net point x3 and its certificate.

    Raises:
        ValueError: If the parameters violate 57 sqrt(d1) < d2 < 1 or d1 <= 0.1.
        NotInSetError: If x is not in V.
    """
    if not 0.0 < d1 <= 0.1:
        raise ValueError(f"d1 must lie in (0, 0.1], got {d1}")
    if not 57.0 * math.sqrt(d1) < d2 < 1.0:
        raise ValueError(f"need 57 sqrt(d1) < d2 < 1, got d1={d1}, d2={d2}")
    x = np.asarray(x, dtype=np.complex128).ravel()
    if not in_v_set(x, a, b, d1, d2):
        raise NotInSetError(f"x is not in V(a={a}, b={b}, d1={d1}, d2={d2})")

    x1 = np.where(np.abs(x) ** 2 > 1.0 / a, x, 0.0)
    norm1 = float(np.linalg.norm(x1))
    # V members carry band mass >= d2 > 0 above 1/a
    assert norm1 > 0.0, "x1 vanished for a member of V"
    x2 = x1 / norm1

    pitch = math.sqrt(d1) / (2.0 * math.sqrt(a))
    rounded = _lattice_round(x2, pitch)
    x3 = rounded / np.linalg.norm(rounded)

    steps = (
        float(np.linalg.norm(x - x1)),
        float(np.linalg.norm(x1 - x2)),
        float(np.linalg.norm(x2 - x3)),
    )
    certificate = NetCertificate(
        a=a,
        b=b,
        d1=d1,
        d2=d2,
        dist=float(np.linalg.norm(x - x3)),
        band_mass_x3=mass_in_band(x3, 1.0 / (2.0 * a), 4.0 / b),
        support_size=int(np.count_nonzero(x3)),
        step_distances=steps,
    )
    return x3, certificate


def net_cardinality_bound(n: int, a: float, d1: float) -> float:
    """Log of (3/sqrt(d1))^(2a) (ne/a)^a."""
    if a > n:
        raise ValueError(f"a must not exceed n, got a={a}, n={n}")
    if a <= 0 or not 0.0 < d1:
        raise ValueError(f"need a > 0 and d1 > 0, got a={a}, d1={d1}")
    return 2.0 * a * math.log(3.0 / math.sqrt(d1)) + a * (1.0 + math.log(n / a))


def net_loss_constants() -> tuple[float, float]:
    """The factors behind the loss-from-below and loss-from-above estimates: 1/(1 - 1/sqrt 2)^2 and 1/(sqrt(4/3) - 1)^2."""
    return (1.0 - 1.0 / math.sqrt(2.0)) ** -2, (math.sqrt(4.0 / 3.0) - 1.0) ** -2


def _random_phases(k: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return z / np.abs(z)


def _assemble(n: int, masses: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    x = np.zeros(n, dtype=np.complex128)
    positions = rng.permutation(n)[: masses.shape[0]]
    x[positions] = np.sqrt(masses) * _random_phases(masses.shape[0], rng)
    return x / np.linalg.norm(x)


def _shares(total: float, count: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    """`count` masses summing to `total`, each strictly inside (lo, hi), jittered around total / count."""
    base = total / count
    spread = 0.99 * min(base - lo, hi - base)
    jitter = rng.uniform(-0.5, 0.5, count)
    return base + spread * (jitter - jitter.mean())


def _count_range(total: float, lo: float, hi: float, n: int) -> tuple[int, int]:
    """Coordinate counts k <= n with total / k strictly inside (lo, hi)."""
    k_min = 1 if math.isinf(hi) else math.floor(total / hi) + 1
    k_max = n if lo <= 0.0 else min(n, math.ceil(total / lo) - 1)
    return k_min, k_max


def _pick(rng: np.random.Generator, lo: int, hi: int) -> int:
    return int(rng.integers(lo, hi + 1))


def _random_class_masses(verdict: SphereVerdict, params: ClassificationParams, n: int,
                         rng: np.random.Generator) -> np.ndarray | None:
    """
    A random mass profile inside the constraints of `verdict`, or None when the
    draw does not fit into n coordinates.

    IC: small mass S uniform in [eps1, S_max] spread over small coordinates, the
    rest on a few heavy ones. HC: small mass below eps1 and band mass below eps2,
    the rest above the low threshold. MC: band mass uniform in [eps2, 1 - small],
    the remainder heavy or folded into the band.
    """
    small_thresh, low_thresh = band_thresholds(params, n)
    has_band = small_thresh < low_thresh
    parts = []

    if verdict == SphereVerdict.IC:
        s_lo = params.eps1 * (1.0 + 1e-9)
        s_hi = min(1.0 - small_thresh, (n - 1) * small_thresh) * (1.0 - 1e-9)
        if s_hi <= s_lo:
            return None
        small = s_lo + (s_hi - s_lo) * rng.random()
        h_min, h_max = _count_range(1.0 - small, small_thresh, math.inf, n)
        m_min, _ = _count_range(small, 0.0, small_thresh, n)
        h_max = min(h_max, n - m_min)
        if h_max < h_min:
            return None
        h = _pick(rng, h_min, h_max)
        m = _pick(rng, m_min, n - h)
        return np.concatenate([_shares(small, m, 0.0, small_thresh, rng),
                               _shares(1.0 - small, h, small_thresh, math.inf, rng)])

    small = 0.999 * params.eps1 * rng.random()
    if verdict == SphereVerdict.HC:
        band = 0.999 * params.eps2 * rng.random() if has_band else 0.0
        rest = 1.0 - small - band
    else:
        if not has_band:
            return None
        b_lo = params.eps2 * (1.0 + 1e-9)
        if b_lo >= 1.0 - small:
            return None
        band = b_lo + (1.0 - small - b_lo) * rng.random()
        rest = 1.0 - small - band
        if rest <= low_thresh:
            band, rest = band + rest, 0.0

    # heavy coordinates must clear both thresholds
    heavy_lo = max(small_thresh, low_thresh)
    used = 0
    if rest > 0.0:
        h_min, h_max = _count_range(rest, heavy_lo, math.inf, n)
        if h_max < h_min:
            return None
        h = _pick(rng, h_min, h_max)
        parts.append(_shares(rest, h, heavy_lo, math.inf, rng))
        used += h
    if band > 0.0:
        k_min, k_max = _count_range(band, small_thresh, low_thresh, n - used)
        if k_max < k_min:
            return None
        k = _pick(rng, k_min, k_max)
        parts.append(_shares(band, k, small_thresh, low_thresh, rng))
        used += k
    if small > 0.0:
        m_min, _ = _count_range(small, 0.0, min(small_thresh, low_thresh), n)
        if m_min > n - used:
            return None
        parts.append(_shares(small, _pick(rng, m_min, n - used), 0.0, min(small_thresh, low_thresh), rng))
    return np.concatenate(parts)


def _class_masses(verdict: SphereVerdict, params: ClassificationParams, n: int) -> np.ndarray:
    small_thresh, low_thresh = band_thresholds(params, n)
    level = params.c2 * float(n) ** (1.0 - params.delta)

    if verdict == SphereVerdict.HC:
        # k equal coordinates, each strictly above the low threshold
        if level <= 1.0:
            raise InfeasibleClassError(f"HC needs c2 n^(1-delta) > 1, got {level}")
        k = max(1, math.ceil(level) - 1)
        return np.full(k, 1.0 / k)

    if verdict == SphereVerdict.IC:
        if params.c1 <= 1.0:
            return np.full(n, 1.0 / n)
        if n < 2:
            raise InfeasibleClassError(f"IC needs n >= 2 when c1 > 1, got n={n}")
        share = (1.0 - 1e-9) * small_thresh
        small = (n - 1) * share
        if small < params.eps1:
            raise InfeasibleClassError(f"IC needs (n-1)/(c1 n) >= eps1, got small mass {small}")
        return np.concatenate([np.full(n - 1, share), [1.0 - small]])

    k_lo = math.ceil(level * (1.0 + 1e-9))
    k_hi = min(n, math.floor(params.c1 * n * (1.0 - 1e-9)))
    if k_lo > k_hi:
        raise InfeasibleClassError(f"MC needs c2 n^(1-delta) <= k < c1 n for some k <= n, got range [{k_lo}, {k_hi}]")
    k = (k_lo + k_hi) // 2
    if 1.0 / k <= small_thresh or 1.0 / k > low_thresh:
        raise InfeasibleClassError(f"MC coordinates 1/{k} fall outside the band")
    return np.full(k, 1.0 / k)


def sample_class_member(verdict: SphereVerdict, params: ClassificationParams, n: int, seed: SeedPath,
                        randomize: bool = True) -> np.ndarray:
    """
    A unit vector that `classify_vector` places in the requested set.

    With `randomize` the mass profile is drawn inside the class constraints
    (random small, band and heavy masses, random coordinate counts, jittered
    shares). When that draw does not fit, or with randomize=False, the fixed
    profile is used: equal heavy coordinates for HC, a uniform or near-uniform
    spread for IC, equal band coordinates for MC. Positions and phases are
    always random.

    Raises:
        InfeasibleClassError: If the class cannot be realized for (params, n).
    """
    verdict = SphereVerdict(verdict)
    rng = seed.generator()
    if randomize:
        masses = _random_class_masses(verdict, params, n, rng)
        if masses is not None:
            x = _assemble(n, masses, rng)
            if classify_vector(x, params).verdict == verdict:
                return x
    x = _assemble(n, _class_masses(verdict, params, n), rng)
    got = classify_vector(x, params).verdict
    if got != verdict:
        raise InfeasibleClassError(f"requested {verdict.value} but construction landed in {got.value}")
    return x


def sample_v_member(n: int, a: float, b: float, d1: float, d2: float, seed: SeedPath) -> np.ndarray:
    """
    A random member of V(a, b, d1, d2).

    Small mass u is uniform in [0, d1), band mass B uniform in [d2, 1 - u],
    and the rest sits on coordinates above 1/b (folded into the band when it
    cannot fill one). Band coordinates get random shares inside (1/a, 1/b].

    Raises:
        InfeasibleClassError: If no band allocation fits in n coordinates.
    """
    if not b < a:
        raise ValueError(f"need b < a so the band (1/a, 1/b] is nonempty, got a={a}, b={b}")
    rng = seed.generator()

    small = 0.999 * d1 * rng.random()
    band = d2 + (1.0 - small - d2) * rng.random()
    rest = 1.0 - small - band
    if rest * b <= 1.0:
        band, rest = band + rest, 0.0

    k_lo = max(1, math.ceil(band * b))
    k_hi = math.ceil(band * a) - 1
    if k_lo > k_hi:
        raise InfeasibleClassError(f"band mass {band} does not split into shares inside (1/{a}, 1/{b}]")
    k = int(rng.integers(k_lo, k_hi + 1))
    base = band / k
    spread = 0.99 * min(base - 1.0 / a, 1.0 / b - base)
    jitter = rng.uniform(-0.5, 0.5, k)
    band_masses = base + spread * (jitter - jitter.mean())

    heavy = math.ceil(rest * b) - 1 if rest > 0.0 else 0
    heavy_masses = np.full(heavy, rest / heavy) if heavy else np.empty(0)

    count_small = math.ceil(small * a) + 1 if small > 0.0 else 0
    small_masses = np.full(count_small, small / count_small) if count_small else np.empty(0)

    if k + heavy + count_small > n:
        raise InfeasibleClassError(f"V member needs {k + heavy + count_small} coordinates, only {n} available")
    x = _assemble(n, np.concatenate([small_masses, band_masses, heavy_masses]), rng)
    if not in_v_set(x, a, b, d1, d2):
        raise InfeasibleClassError("sampled vector left V after normalization")
    return x
