"""Prime-power counting, the zero-sum loop W(l) and the Euler product of log zeta."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import ConvergenceDomainError, DomainError, NonConvergence, RangeError
from .numeric.precision import DEFAULT_DIGITS, to_mpf
from .numeric.quadrature import integrate, window
from .xi import ZeroList

MAX_ELL = 10**6
EXPLICIT_MIN_HEIGHT = 100


@functools.lru_cache(maxsize=8)
def sieve(n: int) -> np.ndarray:
    """Primes up to ``n`` by the sieve of Eratosthenes."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(n + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mark[p]:
            mark[p * p:: p] = False
    out = np.flatnonzero(mark).astype(np.int64)
    out.flags.writeable = False
    return out


def prime_powers(limit: int) -> list:
    """Sorted (p^n, n) pairs with p^n <= limit."""
    out = []
    for p in sieve(limit).tolist():
        q, n = p, 1
        while q <= limit:
            out.append((q, n))
            q *= p
            n += 1
    out.sort()
    return out


@dataclass(frozen=True)
class PrimePowerCount:
    ell: object
    strict: object
    weak: object

    @property
    def average(self):
        return (self.strict + self.weak) / 2


def prime_side(ell) -> PrimePowerCount:
    """Sums of 1/n over prime powers p^n < l (strict) and <= l (weak)."""
    ell = to_mpf(ell)
    if ell < 2 or ell > MAX_ELL:
        raise RangeError(f"l must lie in [2, {MAX_ELL}]")
    limit = int(mp.floor(ell))
    strict = weak = mp.mpf(0)
    for q, n in prime_powers(limit):
        w = mp.mpf(1) / int(n)
        weak += w
        if q < ell:
            strict += w
    return PrimePowerCount(ell, strict, weak)


def _check_ell(ell):
    if ell <= 1:
        raise DomainError("W(l) needs l > 1", ell=ell)
    if abs(mp.log(ell)) <= mp.mpf(10) ** -6:
        raise DomainError("log l is too close to zero", ell=ell)


def _zero_terms(ell, zeros):
    lg = mp.log(ell)
    scale = 2 / (mp.sqrt(ell) * lg)
    return [scale * mp.cos(lam * lg) for lam in zeros]


def w_loop(ell, zeros: ZeroList | list | None = None, smoothing="none", digits: int = 30):
    """W(l) = 1/log l - sum_n 2 cos(l_n log l) / (l^{1/2} log l) - 1/(l (l^2 - 1) log l).

    ``smoothing`` is "none" or ("cesaro", M): the mean of the last M partial sums
    of the zero sum, taken in increasing order of the zeros.
    """
    lams = list(zeros.zeros) if isinstance(zeros, ZeroList) else list(zeros or [])
    with mp.workdps(digits):
        ell = to_mpf(ell)
        _check_ell(ell)
        lg = mp.log(ell)
        smooth = 1 / lg - 1 / (ell * (ell**2 - 1) * lg)
        terms = _zero_terms(ell, lams)
        if smoothing == "none" or not terms:
            return smooth - mp.fsum(terms)
        kind, M = smoothing
        if kind != "cesaro" or M < 1:
            raise ValueError(f"unknown smoothing {smoothing!r}")
        M = min(M, len(terms))
        partial = mp.fsum(terms[: len(terms) - M + 1])
        acc = partial
        for t in terms[len(terms) - M + 1:]:
            partial += t
            acc += partial
        return smooth - acc / M


@dataclass(frozen=True)
class ExplicitCheck:
    ell: object
    zeros_used: int
    loop_integral: object
    prime_average: object
    gap: object
    boundary_offset: object
    corrected_gap: object
    quadrature_error: object


def explicit_check(ell, zeros: ZeroList, count: int | None = None, smoothing=("cesaro", 10), digits: int = 30,
                   require_height: bool = True) -> ExplicitCheck:
    """Compare int_2^l W with the averaged prime-power count at l.

    ``boundary_offset`` is the averaged count at the lower limit l = 2; since
    the prime count there is not zero, ``corrected_gap`` adds it back to the
    integral before comparing.
    """
    if require_height and zeros.scan_height < EXPLICIT_MIN_HEIGHT:
        raise DomainError(f"explicit check needs zeros scanned to at least T = {EXPLICIT_MIN_HEIGHT}")
    lams = list(zeros.zeros if count is None else zeros.first(count).zeros)
    with mp.workdps(digits):
        ell = to_mpf(ell)
        if ell < mp.mpf(5) / 2:
            raise RangeError("explicit check needs l >= 2.5")
        cuts = [mp.mpf(2)] + [mp.mpf(q) for q, _ in prime_powers(int(mp.floor(ell))) if 2 < q < ell] + [ell]
        total = mp.mpf(0)
        err = mp.mpf(0)
        tol = mp.mpf(10) ** (-(digits - 12))
        f = lambda x: w_loop(x, lams, smoothing, digits)
        for a, b in zip(cuts, cuts[1:]):
            res = integrate(f, window(a, b), tol=tol, digits=digits)
            if not res.converged:
                raise NonConvergence("loop integral did not converge", best=res.value)
            total += res.value
            err += res.error_estimate
        average = prime_side(ell).average
        offset = prime_side(2).average
        return ExplicitCheck(ell, len(lams), total, average, abs(total - average), offset,
                             abs(total + offset - average), err)


@dataclass(frozen=True)
class EulerLogZeta:
    value: object
    tail_bound: object
    primes_used: int
    n_cut: int


def euler_log_zeta_result(z, p_max: int = 1000, digits: int = DEFAULT_DIGITS) -> EulerLogZeta:
    """sum_{p <= p_max} sum_{n <= n_cut} p^{-n s} / n with s = i z + 1/2, plus a tail bound."""
    if p_max < 100:
        raise RangeError("p_max must be at least 100")
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        if mp.im(z) >= -mp.mpf(1) / 2:
            raise ConvergenceDomainError("Euler product needs Im z < -1/2 (Re s > 1)")
        s = 1j * z + mp.mpf(1) / 2
        sigma = mp.re(s)
        target = mp.mpf(10) ** (-(digits + 2))
        geo = 1 / (1 - mp.power(2, -sigma))

        def power_tail(n):
            # sum over p <= p_max of the n' > n terms, majorized by sum_{m >= 2} m^{-a} with a = (n+1) sigma
            a = (n + 1) * sigma
            return (mp.power(2, -a) + mp.power(2, 1 - a) / (a - 1)) * geo

        n_cut = 1
        while power_tail(n_cut) > target:
            n_cut += 1
        primes = sieve(p_max).tolist()
        total = mp.mpc(0)
        for p in primes:
            x = mp.power(p, -s)
            term, xn = mp.mpc(0), x
            for n in range(1, n_cut + 1):
                term += xn / n
                xn *= x
                if abs(xn) < target:
                    break
            total += term
        P = mp.mpf(p_max)
        # primes above p_max: sum_{m > P} m^{-sigma} / (1 - P^{-sigma}) <= P^{1-sigma} / ((sigma-1)(1 - P^{-sigma}))
        tail = P ** (1 - sigma) / ((sigma - 1) * (1 - P ** (-sigma)))
        # early exit inside the n loop drops at most target * geo per prime
        dropped = len(primes) * target * geo
        if mp.im(total) == 0:
            total = mp.re(total)
        return EulerLogZeta(total, tail + power_tail(n_cut) + dropped, len(primes), n_cut)


def euler_log_zeta(z, p_max: int = 1000, digits: int = DEFAULT_DIGITS):
    return euler_log_zeta_result(z, p_max, digits).value
