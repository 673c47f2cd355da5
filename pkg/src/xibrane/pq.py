"""Generalized (p,1) couplings from the log of the theta kernel.

Write log Phi(phi) = sum_k L_k phi^k. Truncating after phi^{p+1} gives T_{p+1}
and the model Xi_p(z) = c int e^{i z phi + T_{p+1}(phi)} dphi (c the same
constant that relates the untruncated transform to Xi). Matching
T_{p+1} = sum_k s_k (i phi)^{k+1} / (k+1) fixes the couplings

    s_k = (k + 1) L_{k+1} i^{-(k+1)}.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import mpmath as mp

from .errors import NonConvergence, NonDecayingTruncation, OrderOverflow
from .numeric.fourier import KernelSpec, check_window
from .numeric.precision import DEFAULT_DIGITS
from .numeric.quadrature import integrate, window
from .numeric.series import MAX_ORDER, PowerSeries, series_op
from .theta import DEFAULT_WINDOW, kernel_eval, kernel_series
from .xi import calibration_constant, xi_reference

MAX_POLY_DEGREE = 12


@dataclass(frozen=True)
class CouplingSet:
    p: int
    s: dict
    leading_coeff: object
    constant: object
    log_coeffs: tuple
    derivative_variant: dict = field(default_factory=dict)
    convention: str = "series_matching"


@functools.lru_cache(maxsize=32)
def log_kernel_series(order: int, digits: int = DEFAULT_DIGITS, K: int | None = None) -> PowerSeries:
    if order > MAX_ORDER:
        raise OrderOverflow(f"order {order} exceeds {MAX_ORDER}")
    with mp.workdps(digits + 10):
        return series_op("log", kernel_series("phi_derived", order, digits + 5, K))


def admissible(p: int, digits: int = DEFAULT_DIGITS) -> bool:
    if p < 1 or (p + 1) % 2:
        return False
    return log_kernel_series(p + 1, digits)[p + 1] < 0


def admissible_orders(p_max: int, digits: int = DEFAULT_DIGITS) -> list:
    return [p for p in range(1, p_max + 1) if admissible(p, digits)]


def extract_sk(p: int, digits: int = DEFAULT_DIGITS, K: int | None = None) -> CouplingSet:
    if p < 1:
        raise ValueError("p must be at least 1")
    if p + 1 > MAX_ORDER:
        raise OrderOverflow(f"p + 1 = {p + 1} exceeds the kernel series maximum {MAX_ORDER}")
    L = log_kernel_series(p + 1, digits, K)
    lead = L[p + 1]
    if (p + 1) % 2 or lead >= 0:
        raise NonDecayingTruncation(f"coefficient of phi^{p + 1} in log Phi is {mp.nstr(lead, 6)}, not negative",
                                    p=p, leading=lead)
    I = mp.mpc(0, 1)
    with mp.workdps(digits + 5):
        s, deriv = {}, {}
        for k in range(1, p - 1):
            val = (k + 1) * L[k + 1] * I ** (-(k + 1))
            s[k] = mp.re(val) if mp.im(val) == 0 else val
            # the printed derivative display: i^{-(k+1)}/k! d^k log Phi = i^{-(k+1)} L_k
            dv = L[k] * I ** (-(k + 1))
            deriv[k] = mp.re(dv) if mp.im(dv) == 0 else dv
        return CouplingSet(p, s, mp.re(lead), mp.re(L[0]), tuple(L.coeffs), deriv)


def reconstruct_log(cs: CouplingSet) -> list:
    """T_{p+1} coefficients rebuilt from (constant, s_k, leading_coeff)."""
    I = mp.mpc(0, 1)
    out = [mp.mpf(0)] * (cs.p + 2)
    out[0] = cs.constant
    for k, sk in cs.s.items():
        out[k + 1] = sk * I ** (k + 1) / (k + 1)
    out[cs.p + 1] = cs.leading_coeff
    return out


def _poly(coeffs, x):
    acc = mp.mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def truncated_log_kernel(p: int, digits: int = DEFAULT_DIGITS, window_: float = DEFAULT_WINDOW) -> KernelSpec:
    """Kernel e^{T_{p+1}(phi)} for an admissible p."""
    cs = extract_sk(p, digits)
    T = [mp.re(c) for c in cs.log_coeffs[: p + 2]]
    absT = [abs(c) for c in T[:-1]]

    def bound(R):
        # for |phi| >= R with R past the last turning point of the majorant
        R = mp.mpf(R)
        return mp.exp(min(T[-1] * R ** (p + 1) + _poly(absT, R), 0))

    return KernelSpec(
        id=f"truncated_log({p})",
        eval=lambda phi: mp.exp(_poly(T, phi)),
        decay_bound=bound,
        even=True,
        window=window_,
        meta={"coeffs": T},
    )


def xi_p_eval_result(z, p: int, digits: int = DEFAULT_DIGITS, tol=None):
    kernel = truncated_log_kernel(p, digits)
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        c = calibration_constant(digits)
        check_window(kernel, z, tol, digits)
        W = mp.mpf(kernel.window)
        res = integrate(lambda u: kernel.eval(u) * (mp.expj(z * u) + mp.expj(-z * u)), window(0, W), tol=tol / c,
                        digits=digits)
        value = c * res.value
        if mp.im(z) == 0:
            value = mp.mpc(mp.re(value), 0)
        return value, c * res.error_estimate


def xi_p_eval(z, p: int, digits: int = DEFAULT_DIGITS, tol=None):
    return xi_p_eval_result(z, p, digits, tol)[0]


def convergence_sweep(p_values, zs=range(6), digits: int = DEFAULT_DIGITS) -> dict:
    """sup_z |Xi_p(z) - Xi(z)| for each p."""
    out = {}
    for p in p_values:
        out[p] = max(abs(xi_p_eval(z, p, digits) - xi_reference(z, digits)) for z in zs)
    return out


def window_saturation(p: int, digits: int = DEFAULT_DIGITS, tol=None, samples: int = 71) -> dict:
    """Largest |T_{p+1} - log Phi| on the window grid, and whether it is below tol.

    Where Phi is negligible e^T and Phi are compared instead, since log Phi is
    then irrelevant to the transform.
    """
    cs = extract_sk(p, digits)
    T = [mp.re(c) for c in cs.log_coeffs[: p + 2]]
    with mp.workdps(digits + 5):
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        worst = mp.mpf(0)
        for j in range(samples):
            u = mp.mpf(DEFAULT_WINDOW) * j / (samples - 1)
            phi = kernel_eval("phi_derived", u, digits=digits)
            worst = max(worst, abs(mp.exp(_poly(T, u)) - phi))
        return {"p": p, "max_gap": worst, "saturated": worst < tol}


def _moments(z, p, digits, tol):
    kernel = truncated_log_kernel(p, digits)
    W = mp.mpf(kernel.window)
    T = kernel.meta["coeffs"]
    c = calibration_constant(digits)

    def integrand(u):
        e = mp.exp(_poly(T, u) + 1j * z * u)
        return [e * (-1j * u) ** k for k in range(p + 1)]

    res = integrate(integrand, window(-W, W), tol=tol, digits=digits)
    if not res.converged:
        raise NonConvergence("moment quadrature did not converge", best=res.value, estimate=res.error_estimate)
    boundary = mp.exp(_poly(T, W) + 1j * z * W) - mp.exp(_poly(T, -W) - 1j * z * W)
    return [c * m for m in res.value], c * boundary, c * res.error_estimate


@dataclass(frozen=True)
class AiryResidual:
    residual: object
    quadrature_error: object
    boundary: object
    q: tuple


def gen_airy_residual_result(z, p: int, digits: int = DEFAULT_DIGITS, tol=None, perturb=None) -> AiryResidual:
    """Integration-by-parts residual of Q(P) Xi_p = z Xi_p with P = -d/dz.

    Q has coefficients q_k = (k+1) L_{k+1} i^{k+1}, so Q(-i phi) = i T'(phi) and
    sum_k q_k M_k = z Xi_p + i B with M_k = c int (-i phi)^k e^{i z phi + T}
    and B the boundary term of e^{i z phi + T} at the window ends.
    ``perturb = (k, delta)`` shifts one coefficient of Q.
    """
    cs = extract_sk(p, digits)
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        L = cs.log_coeffs
        I = mp.mpc(0, 1)
        q = [(k + 1) * L[k + 1] * I ** (k + 1) for k in range(p + 1)]
        if perturb is not None:
            k, delta = perturb
            q[k] += delta
        M, B, err = _moments(z, p, digits, tol)
        lhs = mp.fsum(qk * mk for qk, mk in zip(q, M))
        residual = abs(lhs - z * M[0] - I * B)
        combined = err * (mp.fsum(abs(qk) for qk in q) + abs(z) + 1)
        return AiryResidual(residual, combined, B, tuple(q))


def gen_airy_residual(z, p: int, digits: int = DEFAULT_DIGITS, tol=None, perturb=None):
    return gen_airy_residual_result(z, p, digits, tol, perturb).residual


# -- orthogonal polynomials ----------------------------------------------------


def template_potential(k: int, order: int) -> PowerSeries:
    """V_k(M) = sum_{j=1}^{k} (M^j - 1) / j as a polynomial in M."""
    if k > order:
        raise OrderOverflow(f"V_{k} needs order >= {k}")
    coeffs = [mp.mpf(0)] * (order + 1)
    for j in range(1, k + 1):
        coeffs[j] += mp.mpf(1) / j
        coeffs[0] -= mp.mpf(1) / j
    return PowerSeries(coeffs, order)


def build_potential(p: int, digits: int = DEFAULT_DIGITS) -> PowerSeries:
    """V_trunc(M) = V_p(M) + sum_{k=1}^{p-2} s_k V_k(M)."""
    cs = extract_sk(p, digits)
    with mp.workdps(digits + 5):
        V = template_potential(p, p)
        for k, sk in cs.s.items():
            V = V + template_potential(k, p) * sk
        return V


def quadratic_potential(order: int = 2) -> PowerSeries:
    """(M - 1)^2, whose polynomials are the physicists' Hermite polynomials."""
    return PowerSeries([1, -2, 1], max(order, 2))


def orth_poly(n: int, potential: PowerSeries) -> PowerSeries:
    """B_n(z) = n! [y^n] exp(-V(1 + y) + 2 z y) as a polynomial in z."""
    if n < 0 or n > MAX_POLY_DEGREE:
        raise OrderOverflow(f"degree {n} outside [0, {MAX_POLY_DEGREE}]")
    coeffs = list(potential.coeffs)
    # V(1 + y) truncated at y^n
    shifted = PowerSeries(coeffs, len(coeffs) - 1).shift(1)
    V1 = PowerSeries(list(shifted.coeffs)[: n + 1], n)
    e = series_op("exp", V1 * (-1))
    out = [mp.mpf(0)] * (n + 1)
    for m in range(n + 1):
        j = n - m
        out[j] += e[m] * mp.mpf(2) ** j / mp.factorial(j)
    return PowerSeries([mp.factorial(n) * c for c in out], n)
