"""Gamma function (Spouge), reciprocal gamma, and Euler's constant."""

from __future__ import annotations

import functools
import math

import mpmath as mp

from .precision import DEFAULT_DIGITS


@functools.lru_cache(maxsize=32)
def _spouge_coefficients(digits: int):
    # relative error < a^{-1/2} (2 pi)^{-(a + 1/2)}
    a = math.ceil((digits + 5) / math.log10(2 * math.pi))
    work = digits + a + 10
    with mp.workdps(work):
        coeffs = [mp.sqrt(2 * mp.pi)]
        fact = mp.mpf(1)
        for k in range(1, a):
            if k > 1:
                fact *= k - 1
            c = (-1) ** (k - 1) / fact * mp.power(a - k, k - mp.mpf(1) / 2) * mp.exp(a - k)
            coeffs.append(c)
    return a, work, tuple(coeffs)


def _spouge(w, digits: int):
    """Gamma(w) for Re w >= 1."""
    a, work, coeffs = _spouge_coefficients(digits)
    with mp.workdps(work):
        z = w - 1
        s = coeffs[0]
        for k in range(1, a):
            s += coeffs[k] / (z + k)
        za = z + a
        return mp.exp((z + mp.mpf(1) / 2) * mp.log(za) - za) * s


def gamma(w, digits: int = DEFAULT_DIGITS):
    """Gamma function at real or complex ``w`` (poles raise ZeroDivisionError)."""
    with mp.workdps(digits + 10):
        w = mp.mpmathify(w)
        if mp.re(w) < mp.mpf(1) / 2:
            if mp.im(w) == 0 and mp.re(w) == mp.floor(mp.re(w)):
                raise ZeroDivisionError(f"Gamma has a pole at {w}")
            out = mp.pi / (mp.sinpi(w) * gamma(1 - w, digits))
        elif mp.re(w) < 1:
            out = _spouge(w + 1, digits) / w
        else:
            out = _spouge(w, digits)
    return +out


def rgamma(w, digits: int = DEFAULT_DIGITS):
    """1/Gamma(w); exactly zero at the non-positive integers."""
    with mp.workdps(digits + 10):
        w = mp.mpmathify(w)
        if mp.im(w) == 0 and mp.re(w) <= 0 and mp.re(w) == mp.floor(mp.re(w)):
            return mp.mpf(0)
        if mp.re(w) < mp.mpf(1) / 2:
            out = mp.sinpi(w) * gamma(1 - w, digits) / mp.pi
        else:
            out = 1 / gamma(w, digits)
    return +out


@functools.lru_cache(maxsize=16)
def euler_gamma(digits: int = DEFAULT_DIGITS):
    """Euler's constant by the Brent-McMillan series (error O(e^{-4n}))."""
    n = math.ceil((digits + 5) * math.log(10) / 4) + 1
    work = digits + math.ceil(2 * n / math.log(10)) + 10
    with mp.workdps(work):
        logn = mp.log(n)
        term = mp.mpf(1)  # (n^k / k!)^2
        harmonic = mp.mpf(0)
        A = -logn
        B = mp.mpf(1)
        k = 0
        tiny = mp.mpf(10) ** (-(work - 2))
        while True:
            k += 1
            term = term * n * n / (k * k)
            harmonic += mp.mpf(1) / k
            A += term * (harmonic - logn)
            B += term
            if k > n and term < tiny * B:
                break
        g = A / B
    with mp.workdps(digits):
        return +g
