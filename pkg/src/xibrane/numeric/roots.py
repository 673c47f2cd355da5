"""Bracketed refinement of sign changes."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp


@dataclass(frozen=True)
class Root:
    value: object
    lo: object
    hi: object
    evaluations: int


def refine_bracket(f, a, b, fa=None, fb=None, bisect_to=1e-6, tol=1e-10, max_iter=200) -> Root:
    """Bisect ``[a, b]`` to width ``bisect_to`` then finish with Illinois secant steps.

    ``f(a)`` and ``f(b)`` must have opposite signs; the returned bracket always
    contains the sign change and is narrower than ``tol``.
    """
    a, b = mp.mpf(a), mp.mpf(b)
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    evals = 0
    if fa == 0:
        return Root(a, a, a, evals)
    if fb == 0:
        return Root(b, b, b, evals)
    if (fa > 0) == (fb > 0):
        raise ValueError("bracket does not contain a sign change")
    bisect_to, tol = mp.mpf(bisect_to), mp.mpf(tol)
    while b - a > bisect_to:
        m = (a + b) / 2
        fm = f(m)
        evals += 1
        if fm == 0:
            return Root(m, m, m, evals)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    side = 0
    for _ in range(max_iter):
        if b - a <= tol:
            break
        x = b - fb * (b - a) / (fb - fa)
        # keep secant iterates strictly inside and away from stagnation at an end
        guard = (b - a) * mp.mpf("1e-3")
        if not (a + guard < x < b - guard):
            x = a + guard if x <= a + guard else b - guard
        fx = f(x)
        evals += 1
        if fx == 0:
            return Root(x, x, x, evals)
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
            if side == -1:
                fb /= 2
            side = -1
        else:
            b, fb = x, fx
            if side == 1:
                fa /= 2
            side = 1
    root = a if abs(fa) < abs(fb) else b
    return Root(root, a, b, evals)
