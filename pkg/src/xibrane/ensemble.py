"""Monte Carlo over the Gaussian Hermitian ensemble with density proportional to e^{-Tr M^2}.

Every estimate is reproducible from (seed, samples, N): the generator is a
counter-based Philox stream keyed by the seed and N, and samples are drawn in
fixed-size chunks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples, McDomainError, NonMonotoneRegion, SingularResolvent

CONVENTION = "exp(-Tr M^2)"
MAX_N = 64
MIN_SAMPLES = 1000
_CHUNK = 1000


def _generator(seed: int, N: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, N, stream])))


def _draw(rng: np.random.Generator, N: int, count: int) -> np.ndarray:
    """``count`` Hermitian matrices: diagonal N(0, 1/2), off-diagonal parts N(0, 1/4)."""
    diag = rng.normal(0.0, np.sqrt(0.5), size=(count, N))
    re = rng.normal(0.0, 0.5, size=(count, N, N))
    im = rng.normal(0.0, 0.5, size=(count, N, N))
    upper = np.triu(re + 1j * im, k=1)
    m = upper + np.conj(np.swapaxes(upper, 1, 2))
    idx = np.arange(N)
    m[:, idx, idx] = diag
    return m


@dataclass(frozen=True)
class EnsembleSample:
    N: int
    matrix: np.ndarray
    seed: int
    convention: str = CONVENTION


def _check_N(N):
    if not 1 <= N <= MAX_N:
        raise McDomainError(f"N must lie in [1, {MAX_N}]")


def sample_ensemble(N: int, seed: int = 0) -> EnsembleSample:
    _check_N(N)
    return EnsembleSample(N, _draw(_generator(seed, N), N, 1)[0], seed)


def eigenvalue_batches(N: int, samples: int, seed: int = 0, stream: int = 0):
    """Yield arrays of sorted spectra, chunk by chunk, for the (seed, N, stream) family."""
    _check_N(N)
    rng = _generator(seed, N, stream)
    left = samples
    while left > 0:
        count = min(_CHUNK, left)
        yield np.linalg.eigvalsh(_draw(rng, N, count))
        left -= count


def spectra(N: int, samples: int, seed: int = 0, stream: int = 0) -> np.ndarray:
    return np.concatenate(list(eigenvalue_batches(N, samples, seed, stream)))


@dataclass(frozen=True)
class Observable:
    kind: str
    z: complex | None = None
    k: int | None = None

    def __call__(self, lam: np.ndarray) -> np.ndarray:
        if self.kind == "det_shift":
            return np.prod(self.z - lam, axis=-1)
        if self.kind == "trace_power":
            return np.sum(lam**self.k, axis=-1)
        if self.kind == "resolvent":
            if np.imag(self.z) == 0 and np.min(np.abs(self.z - lam)) < 1e-8:
                raise SingularResolvent(f"a sampled eigenvalue lies within 1e-8 of z = {self.z}")
            return np.sum(1.0 / (self.z - lam), axis=-1)
        raise McDomainError(f"unknown observable {self.kind!r}")

    @property
    def label(self) -> str:
        arg = self.k if self.kind == "trace_power" else self.z
        return f"{self.kind}({arg})"


def det_shift(z) -> Observable:
    return Observable("det_shift", z=complex(z))


def trace_power(k: int) -> Observable:
    return Observable("trace_power", k=int(k))


def resolvent(z) -> Observable:
    return Observable("resolvent", z=complex(z))


@dataclass(frozen=True)
class McEstimate:
    mean: complex
    std_error: float
    samples: int
    seed: int
    N: int = 0
    observable: str = ""
    m2: float = 0.0
    convention: str = CONVENTION

    @classmethod
    def from_values(cls, values: np.ndarray, seed: int, N: int, observable: str) -> "McEstimate":
        n = len(values)
        mean = complex(np.mean(values))
        dev = np.abs(values - mean) ** 2
        m2 = float(np.sum(dev))
        sd = np.sqrt(m2 / (n - 1)) if n > 1 else float("inf")
        return cls(mean, float(sd / np.sqrt(n)), n, seed, N, observable, m2)

    def merge(self, other: "McEstimate") -> "McEstimate":
        """Pooled estimate of two disjoint sample sets (associative)."""
        n = self.samples + other.samples
        delta = other.mean - self.mean
        mean = self.mean + delta * other.samples / n
        m2 = self.m2 + other.m2 + abs(delta) ** 2 * self.samples * other.samples / n
        se = float(np.sqrt(m2 / (n - 1) / n))
        return McEstimate(mean, se, n, self.seed, self.N, self.observable, m2)

    def as_row(self) -> dict:
        mean = self.mean.real if self.mean.imag == 0 else self.mean
        return {"N": self.N, "observable": self.observable, "mean": mean, "std_error": self.std_error,
                "samples": self.samples, "seed": self.seed}


def expect_observable(N: int, obs: Observable, samples: int, seed: int = 0, stream: int = 0) -> McEstimate:
    if samples < MIN_SAMPLES:
        raise McDomainError(f"at least {MIN_SAMPLES} samples are required")
    values = np.concatenate([obs(lam) for lam in eigenvalue_batches(N, samples, seed, stream)])
    return McEstimate.from_values(values, seed, N, obs.label)


def det_shift_oracle(N: int, z, nodes: int = 12) -> complex:
    """<det(z - M)> by tensor Gauss quadrature over the matrix entries (N = 1 or 2).

    For N = 2 the integral runs over (m11, m22, |m12|^2), the phase of m12
    having been integrated out; Gauss-Hermite and Gauss-Laguerre rules are
    exact for this polynomial integrand.
    """
    z = complex(z)
    x, w = np.polynomial.hermite.hermgauss(nodes)
    w = w / np.sqrt(np.pi)
    if N == 1:
        return complex(np.sum(w * (z - x)))
    if N == 2:
        u, v = np.polynomial.laguerre.laggauss(nodes)
        # m_ii = x / sqrt(1) has density e^{-m^2}; |m12|^2 = u / 2 has density e^{-u}
        total = 0j
        for a, wa in zip(x, w):
            for b, wb in zip(x, w):
                total += wa * wb * np.sum(v * ((z - a) * (z - b) - u / 2))
        return complex(total)
    raise McDomainError("the quadrature oracle covers N = 1 and N = 2")


@dataclass(frozen=True)
class VarianceScaling:
    N_list: tuple
    variances: tuple
    slope: float
    ci: tuple
    covariances: tuple
    samples: int
    seed: int


def _slope(logN, logV):
    A = np.vstack([logN, np.ones_like(logN)]).T
    return float(np.linalg.lstsq(A, logV, rcond=None)[0][0])


def variance_scaling(N_list, samples: int = 10_000, seed: int = 0, bootstrap: int = 200,
                     max_ci_width: float = 0.6) -> VarianceScaling:
    """Slope of log Var(Tr M^2 / N^2) against log N, with a bootstrap interval.

    Also returns Cov(Tr M^2 / N^2, Tr M^4 / N^3) per N.
    """
    N_list = tuple(int(n) for n in N_list)
    if len(N_list) < 4 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise McDomainError("N_list must be strictly increasing with at least 4 entries")
    if samples < MIN_SAMPLES:
        raise McDomainError(f"at least {MIN_SAMPLES} samples are required")
    o1s, covs, variances = [], [], []
    for N in N_list:
        lam = spectra(N, samples, seed)
        o1 = np.sum(lam**2, axis=1) / N**2
        o2 = np.sum(lam**4, axis=1) / N**3
        o1s.append(o1)
        variances.append(float(np.var(o1, ddof=1)))
        covs.append(float(np.cov(o1, o2)[0, 1]))
    logN = np.log(np.array(N_list, dtype=float))
    slope = _slope(logN, np.log(variances))
    rng = _generator(seed, 0, stream=1)
    boots = []
    for _ in range(bootstrap):
        logV = [np.log(np.var(o[rng.integers(0, samples, samples)], ddof=1)) for o in o1s]
        boots.append(_slope(logN, np.array(logV)))
    lo, hi = np.percentile(boots, [2.5, 97.5])
    if hi - lo > max_ci_width:
        raise InsufficientSamples(f"bootstrap interval on the slope is {hi - lo:.3f} wide", ci=(lo, hi))
    return VarianceScaling(N_list, tuple(variances), slope, (float(lo), float(hi)), tuple(covs), samples, seed)


@dataclass
class EmpiricalResolvent:
    """r(z) = <Tr (z - M/sqrt(N))^{-1}> / N from stored spectra."""

    N: int
    eigenvalues: np.ndarray = field(repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.mean(1.0 / (z[..., None] - self.eigenvalues[None, :]), axis=-1)

    @property
    def support(self):
        return float(self.eigenvalues.min()), float(self.eigenvalues.max())


def empirical_resolvent(N: int, samples: int, seed: int = 0) -> EmpiricalResolvent:
    lam = spectra(N, samples, seed) / np.sqrt(N)
    return EmpiricalResolvent(N, lam.ravel())


@dataclass(frozen=True)
class InversionReport:
    max_inversion_gap: float
    support: tuple
    grid: tuple


def empirical_resolvent_inverse(N: int, z_grid, samples: int = 10_000, seed: int = 0,
                                margin: float = 0.5) -> InversionReport:
    """Round trip r(r^{-1}(y)) = y on the real axis outside the spectrum.

    r^{-1} is built by interpolating the grid samples (y_j, z_j); the test
    points y are midpoints of consecutive grid values, so the gap measures how
    well the sampled function is inverted between nodes.
    """
    z_grid = np.asarray(sorted(float(z) for z in z_grid))
    r = empirical_resolvent(N, samples, seed)
    lo, hi = r.support
    dist = np.minimum(np.abs(z_grid - lo), np.abs(z_grid - hi))
    inside = (z_grid > lo - margin) & (z_grid < hi + margin)
    if np.any(inside) or np.any(dist < margin):
        raise NonMonotoneRegion(f"grid comes within {margin} of the empirical support [{lo:.3f}, {hi:.3f}]")
    y = r(z_grid).real
    if not (np.all(np.diff(y) < 0) or np.all(np.diff(y) > 0)):
        raise NonMonotoneRegion("empirical resolvent is not monotone on the grid")
    order = np.argsort(y)
    ys, zs = y[order], z_grid[order]
    targets = (ys[1:] + ys[:-1]) / 2
    z_inv = np.interp(targets, ys, zs)
    gap = float(np.max(np.abs(r(z_inv).real - targets)))
    return InversionReport(gap, (lo, hi), tuple(float(z) for z in z_grid))
