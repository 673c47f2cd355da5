"""Working-precision helpers.

Extended-precision reals and complexes are plain :mod:`mpmath` ``mpf``/``mpc``
values. Results that leave the package are wrapped in records carrying the
decimal digit budget that produced them.
"""

from __future__ import annotations

import math

import mpmath as mp

DEFAULT_DIGITS = 50
MIN_DIGITS = 30


def check_digits(digits: int) -> int:
    digits = int(digits)
    if digits < MIN_DIGITS:
        raise ValueError(f"precision budget must be at least {MIN_DIGITS} digits, got {digits}")
    return digits


def promote(*digits: int) -> int:
    """Digit budget for an operation mixing values of several budgets."""
    return max(int(d) for d in digits)


def workdps(digits: int):
    return mp.workdps(int(digits))


def eps(digits: int):
    return mp.mpf(10) ** (-int(digits))


def to_mpc(z):
    if isinstance(z, str):
        return mp.mpc(complex(z.replace("i", "j"))) if "i" in z or "j" in z else mp.mpc(mp.mpf(z))
    return mp.mpc(z)


def to_mpf(x):
    """Convert without inheriting binary float noise (0.05 means 1/20)."""
    if isinstance(x, float):
        return mp.mpf(repr(x))
    return mp.mpf(x)


def is_real(z) -> bool:
    z = mp.mpc(z)
    return z.imag == 0


def log10_abs(x) -> float:
    """log10|x| as a float; -inf for zero. Safe for mpf exponents beyond float range."""
    x = abs(mp.mpf(x)) if not isinstance(x, mp.mpc) else abs(x)
    if x == 0:
        return -math.inf
    return float(mp.log10(x))
