"""Double-exponential quadrature at arbitrary precision.

Three variable transformations cover every integral in the package:

* ``window(a, b)``   tanh-sinh, ``x = tanh(pi/2 sinh t)``
* ``half_line(a)``   exp-sinh,  ``x = a + exp(pi/2 sinh t)``
* ``real_line()``    sinh-sinh, ``x = sinh(pi/2 sinh t)``

The trapezoidal step in ``t`` halves per level; each level only evaluates the
new (odd) nodes. The error estimate is the difference between successive
levels plus a rounding floor, which over-estimates the true error of the finer
level once the rule is in its double-exponential regime.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Any, Callable

import mpmath as mp

from ..errors import IntegrandEvaluationFailure, NonConvergence, XibraneError
from .precision import DEFAULT_DIGITS

_GUARD = 5
_MAX_LEVEL = 12
_H0 = mp.mpf(1) / 2


@dataclass(frozen=True)
class Domain:
    kind: str
    a: Any = None
    b: Any = None

    def __post_init__(self):
        if self.kind not in ("half_line", "real_line", "window"):
            raise ValueError(f"unknown domain kind {self.kind!r}")


def half_line(a=0) -> Domain:
    return Domain("half_line", a)


def real_line() -> Domain:
    return Domain("real_line")


def window(a, b) -> Domain:
    return Domain("window", a, b)


@dataclass(frozen=True)
class QuadratureResult:
    value: Any
    error_estimate: Any
    nodes_used: int
    converged: bool = True
    digits: int = DEFAULT_DIGITS
    levels: int = 0


def _t_cap(dps: int) -> float:
    return math.asinh(2 * (dps + 20) * math.log(10) / math.pi)


@functools.lru_cache(maxsize=200_000)
def _std_node(kind: str, dps: int, t_num: int, t_den: int):
    """Node data at ``t = t_num / t_den`` in the standard frame of ``kind``."""
    with mp.workdps(dps):
        t = mp.mpf(t_num) / t_den
        s = mp.pi / 2 * mp.sinh(t)
        ch = mp.pi / 2 * mp.cosh(t)
        if kind == "window":
            # distances to the endpoints, computed without cancellation
            e = mp.exp(-2 * abs(s))
            near = 2 * e / (1 + e)
            far = 2 - near
            w = ch * 4 * e / (1 + e) ** 2
            if t < 0:
                return near, far, w
            return far, near, w
        if kind == "half_line":
            es = mp.exp(s)
            return es, None, ch * es
        x = mp.sinh(s)
        return x, None, ch * mp.cosh(s)


def _map(domain: Domain, node):
    d1, d2, w = node
    if domain.kind == "window":
        a, b = domain.a, domain.b
        half = (b - a) / 2
        # d1 = 1 + x, d2 = 1 - x
        x = a + half * d1 if d1 <= d2 else b - half * d2
        return x, w * half
    if domain.kind == "half_line":
        return domain.a + d1, w
    return d1, w


def _as_list(v):
    if isinstance(v, (list, tuple)):
        return list(v), True
    return [v], False


def _mag(v):
    return max(abs(c) for c in v)


def rule(domain: Domain, level: int, digits: int = DEFAULT_DIGITS, t_range=None):
    """Full trapezoid rule (nodes, weights including the step) at ``level``.

    Used by tensor-product integrators that need the nodes explicitly.
    """
    dps = digits + _GUARD
    den = 2 ** (level + 1)
    lo, hi = t_range if t_range is not None else (-_t_cap(dps), _t_cap(dps))
    j_lo, j_hi = math.ceil(lo * den), math.floor(hi * den)
    with mp.workdps(dps):
        h = mp.mpf(1) / den
        dom = _coerce(domain)
        nodes, weights = [], []
        for j in range(j_lo, j_hi + 1):
            x, w = _map(dom, _std_node(dom.kind, dps, j, den))
            nodes.append(x)
            weights.append(w * h)
    return nodes, weights


def _coerce(domain: Domain) -> Domain:
    if domain.kind == "window":
        return Domain("window", mp.mpf(domain.a), mp.mpf(domain.b))
    if domain.kind == "half_line":
        return Domain("half_line", mp.mpf(domain.a))
    return domain


def integrate(
    f: Callable,
    domain: Domain,
    tol=None,
    digits: int = DEFAULT_DIGITS,
    min_level: int = 0,
    max_level: int = _MAX_LEVEL,
    raise_on_failure: bool = True,
    relative: bool = False,
) -> QuadratureResult:
    """Integrate ``f`` over ``domain``.

    ``f`` may return a scalar or a list of scalars (all components share the
    nodes; the error estimate is the worst component). ``tol`` is absolute
    unless ``relative`` is set, in which case both ``tol`` and the reported
    estimate are relative to each component's magnitude.
    """
    dps = digits + _GUARD
    with mp.workdps(dps):
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        dom = _coerce(domain)
        if dom.kind == "window" and dom.a == dom.b:
            return QuadratureResult(mp.mpf(0), mp.mpf(0), 0, True, digits, 0)
        cap = _t_cap(dps)
        vector = None
        nodes_used = 0

        def evaluate(j, den):
            nonlocal vector, nodes_used
            x, w = _map(dom, _std_node(dom.kind, dps, j, den))
            try:
                val = f(x)
            except XibraneError:
                raise
            except (ArithmeticError, ValueError, TypeError) as exc:
                raise IntegrandEvaluationFailure(f"integrand failed at node {mp.nstr(x, 15)}: {exc}", node=x) from exc
            vals, is_vec = _as_list(val)
            if vector is None:
                vector = is_vec
            nodes_used += 1
            return [w * v for v in vals]

        # level 0: walk outwards to find where the transformed integrand is negligible
        den = 2
        centre = evaluate(0, den)
        raw = list(centre)
        absraw = [abs(c) for c in centre]
        extents = []
        for direction in (1, -1):
            small = 0
            j = direction
            while abs(j) / den <= cap:
                term = evaluate(j, den)
                for i, c in enumerate(term):
                    raw[i] += c
                    absraw[i] += abs(c)
                if relative:
                    small_now = all(abs(c) <= tol * mp.mpf(10) ** -4 * abs(r) for c, r in zip(term, raw))
                else:
                    thresh = max(tol * mp.mpf(10) ** -4, mp.mpf(10) ** (-(dps + 3)) * _mag(raw))
                    small_now = _mag(term) <= thresh
                small = small + 1 if small_now else 0
                if small >= 3:
                    break
                j += direction
            extents.append(j)
        j_hi, j_lo = extents[0], extents[1]

        h = _H0
        estimates = [[h * c for c in raw]]
        err = None
        level = 0
        for level in range(1, max_level + 1):
            den = 2 ** (level + 1)
            scale = 2**level
            for j in range(j_lo * scale + 1, j_hi * scale, 2):
                term = evaluate(j, den)
                for i, c in enumerate(term):
                    raw[i] += c
                    absraw[i] += abs(c)
            h = h / 2
            current = [h * c for c in raw]
            floor = 10 * mp.mpf(10) ** (-digits) * h
            if relative:
                err = max((abs(a - b) + floor * m) / (abs(a) or 1)
                          for a, b, m in zip(current, estimates[-1], absraw))
            else:
                err = max(abs(a - b) for a, b in zip(current, estimates[-1])) + floor * max(absraw)
            estimates.append(current)
            if level > min_level and err <= tol:
                break
        value = estimates[-1] if vector else estimates[-1][0]
        converged = err is not None and err <= tol
        if not converged and raise_on_failure:
            raise NonConvergence(
                f"quadrature did not reach tolerance {mp.nstr(tol, 5)} (estimate {mp.nstr(err, 5)})",
                best=value,
                estimate=err,
            )
        return QuadratureResult(value, err, nodes_used, converged, digits, level)
