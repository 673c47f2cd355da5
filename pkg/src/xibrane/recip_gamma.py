"""The reciprocal factorial 1/Pi(z) = 1/Gamma(z+1) and the Liouville kernel e^{-e^phi}."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import PoleAtZero, RangeError, RouteDomainError
from .numeric.precision import DEFAULT_DIGITS
from .numeric.quadrature import half_line, integrate
from .numeric.special import euler_gamma, gamma, rgamma

DEFAULT_N = 1000


@dataclass(frozen=True)
class RecFactValue:
    z: object
    value: object
    route: str
    tail_bound: object = None
    raw_tail_bound: object = None


def _tail_correction(z, N, digits):
    """sum_{n>N} [log(1 + z/n) - z/n] = sum_{k>=2} (-1)^{k+1} z^k zeta(k, N+1) / k, and a bound on what is dropped."""
    r = abs(z) / N
    target = mp.mpf(10) ** (-(digits + 5))
    total = mp.mpc(0)
    k = 1
    zk = z
    while True:
        k += 1
        zk = zk * z
        total += (-1) ** (k + 1) * zk * mp.zeta(k, N + 1) / k
        # zeta(k, N+1) <= N^{1-k}/(k-1), so the remainder is at most N r^{k+1} / ((k+1) k (1 - r))
        bound = N * r ** (k + 1) / ((k + 1) * k * (1 - r))
        if bound < target or zk == 0:
            return total, bound


def recfact_product(z, N: int = DEFAULT_N, digits: int = DEFAULT_DIGITS) -> RecFactValue:
    """e^{gamma z} prod_{n<=N} (1 + z/n) e^{-z/n}, with the n > N tail restored analytically."""
    if N < 100:
        raise RangeError("product route needs N >= 100")
    with mp.workdps(digits + 10):
        z = mp.mpmathify(z)
        if abs(z) >= N / 2:
            raise RangeError(f"|z| must be below N/2 = {N / 2}")
        prod = mp.mpf(1)
        harmonic = mp.mpf(0)
        for n in range(1, N + 1):
            prod *= (n + z) / n
            harmonic += mp.mpf(1) / n
        raw = abs(z) ** 2 / N
        if prod == 0:
            return RecFactValue(z, mp.mpf(0), f"product({N})", mp.mpf(0), raw)
        corr, bound = _tail_correction(z, N, digits)
        value = prod * mp.exp((euler_gamma(digits + 10) - harmonic) * z + corr)
        if mp.im(value) == 0 or mp.im(z) == 0:
            value = mp.re(value)
    with mp.workdps(digits + 5):
        return RecFactValue(z, +value, f"product({N})", abs(value) * bound * 2, raw)


def recfact_reference(z, digits: int = DEFAULT_DIGITS) -> RecFactValue:
    return RecFactValue(z, rgamma(mp.mpmathify(z) + 1, digits), "reference")


def recfact_eval(z, route: str = "product", N: int = DEFAULT_N, digits: int = DEFAULT_DIGITS) -> RecFactValue:
    if route.startswith("product"):
        return recfact_product(z, N, digits)
    if route == "reference":
        return recfact_reference(z, digits)
    raise ValueError(f"unknown route {route!r}")


@dataclass(frozen=True)
class LiouvilleValue:
    z: object
    value: object
    error_estimate: object
    reference_gamma: object
    gamma_gap: object
    recfact_mismatch: object


def liouville_fourier(z, digits: int = DEFAULT_DIGITS, tol=None) -> LiouvilleValue:
    """int e^{i z phi - e^phi} dphi, which equals Gamma(i z).

    Computed as Gamma(iz + 1)/(iz) with Gamma(iz + 1) = int_0^inf t^{iz} e^{-t} dt,
    absolutely convergent for Im z < 1, which regularizes real z.
    ``recfact_mismatch`` records the distance to 1/Pi(z).
    """
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        if z == 0:
            raise PoleAtZero("i z sits on the Gamma pole at 0")
        if mp.im(z) > 0:
            raise RouteDomainError("the Liouville transform needs Im z <= 0")
        w = 1j * z
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        res = integrate(lambda t: mp.power(t, w) * mp.exp(-t), half_line(0), tol=tol, digits=digits)
        value = res.value / w
        err = res.error_estimate / abs(w)
        ref = gamma(w, digits)
        return LiouvilleValue(z, value, err, ref, abs(value - ref), abs(value - rgamma(z + 1, digits)))
