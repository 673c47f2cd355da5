"""Truncated formal power series over mpmath scalars."""

from __future__ import annotations

from typing import Sequence

import mpmath as mp

from ..errors import ComposeNonzeroConstantTerm, LogOfZeroConstantTerm, OrderMismatch, OrderOverflow

DEFAULT_ORDER = 64
MAX_ORDER = 256


class PowerSeries:
    """Coefficients c[0..order] of a series truncated after ``x**order``.

    Instances are immutable; every operation returns a new series of the same
    declared order (differentiation drops one).
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence, order: int | None = None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise OrderMismatch("series order must be nonnegative")
        if order > MAX_ORDER:
            raise OrderOverflow(f"order {order} exceeds the configured maximum {MAX_ORDER}")
        if len(coeffs) > order + 1:
            if any(c != 0 for c in coeffs[order + 1:]):
                raise OrderOverflow(f"{len(coeffs)} coefficients do not fit order {order}")
            coeffs = coeffs[: order + 1]
        coeffs = [mp.mpmathify(c) for c in coeffs] + [mp.mpf(0)] * (order + 1 - len(coeffs))
        self._coeffs = tuple(coeffs)

    @classmethod
    def constant(cls, c, order: int = DEFAULT_ORDER) -> "PowerSeries":
        return cls([c], order)

    @classmethod
    def variable(cls, order: int = DEFAULT_ORDER) -> "PowerSeries":
        return cls([0, 1], order) if order >= 1 else cls([0], order)

    @classmethod
    def exponential(cls, rate, order: int = DEFAULT_ORDER) -> "PowerSeries":
        """Series of ``exp(rate * x)``."""
        rate = mp.mpmathify(rate)
        out, term = [], mp.mpf(1)
        for k in range(order + 1):
            out.append(term)
            term = term * rate / (k + 1)
        return cls(out, order)

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    def __len__(self):
        return len(self._coeffs)

    def __getitem__(self, k):
        return self._coeffs[k]

    def __iter__(self):
        return iter(self._coeffs)

    def __repr__(self):
        head = ", ".join(mp.nstr(c, 8) for c in self._coeffs[:6])
        tail = ", ..." if self.order >= 6 else ""
        return f"PowerSeries([{head}{tail}], order={self.order})"

    def _check(self, other: "PowerSeries"):
        if not isinstance(other, PowerSeries):
            raise TypeError(f"expected PowerSeries, got {type(other).__name__}")
        if other.order != self.order:
            raise OrderMismatch(f"orders differ: {self.order} vs {other.order}")

    def __add__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries([self[0] + other, *self._coeffs[1:]], self.order)
        self._check(other)
        return PowerSeries([a + b for a, b in zip(self, other)], self.order)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries([-a for a in self], self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            other = mp.mpmathify(other)
            return PowerSeries([a * other for a in self], self.order)
        self._check(other)
        n = self.order
        a, b = self._coeffs, other._coeffs
        return PowerSeries([mp.fsum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n + 1)], n)

    __rmul__ = __mul__

    def exp(self) -> "PowerSeries":
        a = self._coeffs
        n = self.order
        b = [mp.exp(a[0])]
        for k in range(1, n + 1):
            b.append(mp.fsum(j * a[j] * b[k - j] for j in range(1, k + 1)) / k)
        return PowerSeries(b, n)

    def log(self) -> "PowerSeries":
        a = self._coeffs
        if a[0] == 0:
            raise LogOfZeroConstantTerm("log of a series with zero constant term")
        n = self.order
        c = [mp.log(a[0])]
        for k in range(1, n + 1):
            acc = a[k] - mp.fsum(j * c[j] * a[k - j] for j in range(1, k)) / k
            c.append(acc / a[0])
        return PowerSeries(c, n)

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """``self(inner(x))``; ``inner`` must have zero constant term."""
        self._check(inner)
        if inner[0] != 0:
            raise ComposeNonzeroConstantTerm("inner series of a composition must vanish at 0")
        out = PowerSeries.constant(self[self.order], self.order)
        for c in reversed(self._coeffs[:-1]):
            out = out * inner + c
        return out

    def differentiate(self) -> "PowerSeries":
        n = self.order
        if n == 0:
            return PowerSeries([0], 0)
        return PowerSeries([k * self[k] for k in range(1, n + 1)], n - 1)

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise OrderOverflow(f"cannot raise order {self.order} to {order} without new information")
        return PowerSeries(self._coeffs[: order + 1], order)

    def shift(self, a) -> "PowerSeries":
        """Re-expand about ``a``: coefficients of ``p(a + y)`` in powers of ``y``.

        Exact for a polynomial of degree ``order``.
        """
        a = mp.mpmathify(a)
        n = self.order
        out = []
        for k in range(n + 1):
            out.append(mp.fsum(mp.binomial(j, k) * self[j] * a ** (j - k) for j in range(k, n + 1)))
        return PowerSeries(out, n)

    def __call__(self, x):
        acc = mp.mpf(0)
        for c in reversed(self._coeffs):
            acc = acc * x + c
        return acc


def series_op(kind: str, a: PowerSeries, b: PowerSeries | None = None) -> PowerSeries:
    """Dispatch one of add, mul, exp, log, compose, differentiate."""
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    if kind == "exp":
        return a.exp()
    if kind == "log":
        return a.log()
    if kind == "compose":
        return a.compose(b)
    if kind == "differentiate":
        return a.differentiate()
    raise ValueError(f"unknown series operation {kind!r}")
