"""The theta-type Kontsevich integrand of the Xi function.

Three evaluation variants share one summation core
``sum_q (A q^4 X^alpha - B q^2 X^beta) exp(-pi q^2 X)``:

``f_of_ell``            X = l,          A = pi^2,  alpha = 3/2, B = 3pi/2, beta = 1/2
``phi_derived``         X = e^{2u},     A = 2pi^2, alpha = 9/4, B = 3pi,   beta = 5/4
``phi_paper_literal``   X = e^{phi},    A = pi^2,  alpha = 2,   B = 3pi/2, beta = 1

``phi_derived`` is what the a_2n integrand becomes under l = e^{2u}; it is even in
u and is the kernel used for Xi. The literal variant is kept for comparison.
For X < 1 the q-sum cancels down to roughly exp(-pi/X), so the working
precision is raised by that many digits.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath as mp

from .errors import TailBudgetTooLoose, ThetaDomainError
from .numeric.fourier import KernelSpec
from .numeric.precision import DEFAULT_DIGITS
from .numeric.series import DEFAULT_ORDER, PowerSeries, series_op

VARIANTS = ("f_of_ell", "phi_derived", "phi_paper_literal")

DEFAULT_WINDOW = 3.5
TAIL_MARGIN = 20


@dataclass(frozen=True)
class ThetaTailBudget:
    """``K`` retained q-terms and a bound on everything omitted."""

    K: int
    tail_bound: object


def _params(variant):
    pi = mp.pi
    if variant == "f_of_ell":
        return pi**2, mp.mpf(3) / 2, 3 * pi / 2, mp.mpf(1) / 2
    if variant == "phi_derived":
        return 2 * pi**2, mp.mpf(9) / 4, 3 * pi, mp.mpf(5) / 4
    if variant == "phi_paper_literal":
        return pi**2, mp.mpf(2), 3 * pi / 2, mp.mpf(1)
    raise ValueError(f"unknown kernel variant {variant!r}")


def _argument(variant, point):
    if variant == "f_of_ell":
        return point
    if variant == "phi_derived":
        return mp.exp(2 * point)
    return mp.exp(point)


def cancellation_digits(X) -> int:
    """Extra digits lost to cancellation in the q-sum at argument ``X``."""
    X = float(X)
    if X >= 1:
        return 0
    return math.ceil(math.pi / X / math.log(10)) + 5


def choose_K(X, digits: int, margin: int = TAIL_MARGIN) -> int:
    """Smallest K with pi K^2 X >= digits ln 10 + margin."""
    need = digits * math.log(10) + margin
    return max(1, math.ceil(math.sqrt(need / (math.pi * float(X)))))


def tail_bound(variant, X, K):
    """Geometric majorant of the omitted terms q > K (terms taken in absolute value)."""
    A, alpha, B, beta = _params(variant)
    q = K + 1

    def majorant(q):
        return (A * q**4 * X**alpha + B * q**2 * X**beta) * mp.exp(-mp.pi * q * q * X)

    rho = (mp.mpf(q + 1) / q) ** 4 * mp.exp(-mp.pi * X * (2 * q + 1))
    if rho >= 1:
        return mp.inf
    return majorant(q) / (1 - rho)


def budget_for(variant, point, digits: int = DEFAULT_DIGITS, margin: int = TAIL_MARGIN) -> ThetaTailBudget:
    with mp.workdps(digits + 10):
        X = _argument(variant, mp.mpf(point))
        work = digits + cancellation_digits(X)
        K = choose_K(X, work, margin)
        return ThetaTailBudget(K, tail_bound(variant, X, K))


def _theta_sum(variant, X, K):
    A, alpha, B, beta = _params(variant)
    Xa, Xb = X**alpha, X**beta
    total = mp.mpf(0)
    for q in range(1, K + 1):
        q2 = q * q
        total += (A * q2 * q2 * Xa - B * q2 * Xb) * mp.exp(-mp.pi * q2 * X)
    return total


def kernel_eval(variant: str, point, budget: ThetaTailBudget | None = None, digits: int = DEFAULT_DIGITS, tol=None,
                margin: int = TAIL_MARGIN):
    """Evaluate one kernel variant at ``point`` (l for f_of_ell, else the phase variable)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown kernel variant {variant!r}")
    with mp.workdps(digits + 10):
        point = mp.mpf(point)
        if variant == "f_of_ell" and point < 1:
            raise ThetaDomainError(f"f(l) is defined for l >= 1, got {mp.nstr(point, 10)}")
        X = _argument(variant, point)
        work = digits + cancellation_digits(X)
    if budget is None:
        return _cached_eval(variant, point, digits, margin)
    with mp.workdps(work + 10):
        tol = mp.mpf(10) ** (-(work + 5)) if tol is None else mp.mpf(tol)
        if budget.tail_bound > tol:
            raise TailBudgetTooLoose(f"tail bound {mp.nstr(budget.tail_bound, 5)} exceeds {mp.nstr(tol, 5)}")
        X = _argument(variant, point)
        value = _theta_sum(variant, X, budget.K)
    with mp.workdps(digits):
        return +value


@functools.lru_cache(maxsize=100_000)
def _cached_eval(variant, point, digits, margin=TAIL_MARGIN):
    with mp.workdps(digits + 10):
        X = _argument(variant, point)
        work = digits + cancellation_digits(X)
    with mp.workdps(work + 10):
        X = _argument(variant, point)
        K = choose_K(X, work + 10, margin)
        value = _theta_sum(variant, X, K)
    with mp.workdps(digits + 5):
        return +value


def phi_derived(u, digits: int = DEFAULT_DIGITS):
    return kernel_eval("phi_derived", u, digits=digits)


def phi_paper_literal(phi, digits: int = DEFAULT_DIGITS):
    return kernel_eval("phi_paper_literal", phi, digits=digits)


def f_of_ell(ell, digits: int = DEFAULT_DIGITS):
    return kernel_eval("f_of_ell", ell, digits=digits)


def phi_decay_bound(R):
    """Bound on |phi_derived(u)| for |u| >= R >= 0 of the form c e^{9R/2} e^{-pi e^{2R}}."""
    R = mp.mpf(max(R, 0))
    c = 2 * mp.pi**2 * (1 + 3 / (2 * mp.pi)) * mp.mpf("1.01")
    return c * mp.exp(mp.mpf(9) / 2 * R - mp.pi * mp.exp(2 * R))


def _series_tail_bound(K, order, r=mp.mpf(1) / 2):
    """Cauchy-estimate bound on every coefficient (k <= order) of the q > K terms."""
    # on |u| = r: |e^{2u}| <= e^{2r}, Re e^{2u} >= e^{-2r} cos 2r
    lo = mp.exp(-2 * r) * mp.cos(2 * r)

    def m(q):
        return (2 * mp.pi**2 * q**4 * mp.exp(9 * r / 2) + 3 * mp.pi * q**2 * mp.exp(5 * r / 2)) * mp.exp(-mp.pi * q * q * lo)

    q = K + 1
    rho = (mp.mpf(q + 1) / q) ** 4 * mp.exp(-mp.pi * lo * (2 * q + 1))
    if rho >= 1:
        return mp.inf
    return m(q) / (1 - rho) / r**order


def series_budget(order: int, digits: int) -> ThetaTailBudget:
    with mp.workdps(digits + 10):
        target = mp.mpf(10) ** (-(digits + 5))
        K = 1
        while _series_tail_bound(K, order) > target:
            K += 1
        return ThetaTailBudget(K, _series_tail_bound(K, order))


@functools.lru_cache(maxsize=64)
def kernel_series(variant: str = "phi_derived", order: int = DEFAULT_ORDER, digits: int = DEFAULT_DIGITS,
                  K: int | None = None) -> PowerSeries:
    """Taylor coefficients of the derived kernel about u = 0.

    Each q-term is assembled from the series of e^{9u/2}, e^{5u/2} and
    exp(-pi q^2 e^{2u}) and the terms are summed.
    """
    if variant != "phi_derived":
        raise ValueError("series are provided for the phi_derived kernel only")
    budget = series_budget(order, digits)
    if K is not None:
        if K < budget.K:
            raise TailBudgetTooLoose(f"K={K} leaves coefficient tail above 1e-{digits + 5} (need K >= {budget.K})")
        budget = ThetaTailBudget(K, _series_tail_bound(K, order))
    work = digits + 20
    with mp.workdps(work):
        e2 = PowerSeries.exponential(2, order)
        e92 = PowerSeries.exponential(mp.mpf(9) / 2, order)
        e52 = PowerSeries.exponential(mp.mpf(5) / 2, order)
        total = PowerSeries.constant(0, order)
        for q in range(1, budget.K + 1):
            q2 = q * q
            damp = series_op("exp", e2 * (-mp.pi * q2))
            prefactor = series_op("add", e92 * (2 * mp.pi**2 * q2 * q2), e52 * (-3 * mp.pi * q2))
            total = series_op("add", total, series_op("mul", prefactor, damp))
    with mp.workdps(digits + 5):
        return PowerSeries([+c for c in total], order)


def _derived_taylor(order):
    return kernel_series("phi_derived", order)


def xi_kernel(window: float = DEFAULT_WINDOW, digits: int = DEFAULT_DIGITS, margin: int = TAIL_MARGIN) -> KernelSpec:
    return KernelSpec(
        id="xi_derived",
        eval=functools.partial(_phi_at, digits=digits, margin=margin),
        decay_bound=phi_decay_bound,
        even=True,
        taylor=lambda order: kernel_series("phi_derived", order, digits),
        window=window,
    )


def _phi_at(u, digits, margin=TAIL_MARGIN):
    return kernel_eval("phi_derived", u, digits=digits, margin=margin)


def literal_kernel(window: float = 7.0, digits: int = DEFAULT_DIGITS) -> KernelSpec:
    def bound(R):
        # literal(phi) = e^{-phi/4} phi_derived(phi/2) / 2, so a bound at |phi| >= R
        R = mp.mpf(max(R, 0))
        return mp.exp(R / 4) * phi_decay_bound(R / 2) / 2

    return KernelSpec(
        id="xi_paper_literal",
        eval=lambda phi: kernel_eval("phi_paper_literal", phi, digits=digits),
        decay_bound=bound,
        even=False,
        window=window,
    )


def kernel_gap(points=None, digits: int = DEFAULT_DIGITS):
    """Pointwise comparison of the derived and literal kernels on a grid."""
    if points is None:
        points = [mp.mpf(k) / 20 for k in range(-60, 61)]
    rows = []
    with mp.workdps(digits):
        for p in points:
            d = kernel_eval("phi_derived", p, digits=digits)
            lit = kernel_eval("phi_paper_literal", p, digits=digits)
            rows.append((p, d, lit, abs(d - lit)))
    return rows
