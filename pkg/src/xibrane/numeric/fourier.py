"""Fourier-type transforms of one-dimensional Kontsevich integrands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath as mp

from ..errors import WindowTooSmall
from .precision import DEFAULT_DIGITS
from .quadrature import QuadratureResult, half_line, integrate, window


@dataclass(frozen=True)
class KernelSpec:
    """A one-dimensional integrand ``g(phi)`` for transforms ``int e^{i z phi} g(phi) dphi``.

    ``rays`` switches the integration path from the real window to a pair of
    rays from the origin: the path runs in from ``inf * exp(i rays[1])`` and out
    to ``inf * exp(i rays[0])``.
    """

    id: str
    eval: Callable
    decay_bound: Callable
    even: bool = False
    taylor: Optional[Callable] = None
    window: float = 3.5
    rays: Optional[tuple] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, phi):
        return self.eval(phi)


def gaussian_kernel() -> KernelSpec:
    return KernelSpec(
        id="gaussian",
        eval=lambda phi: mp.exp(-phi * phi),
        decay_bound=lambda R: mp.exp(-mp.mpf(R) ** 2),
        even=True,
        window=12.0,
    )


def _oscillation_level(z, width) -> int:
    """Smallest refinement level giving >= 8 nodes per period of e^{i z phi}."""
    freq = abs(complex(z).real)
    if freq == 0:
        return 0
    period = 2 * math.pi / freq
    # tanh-sinh spacing at the centre of a window is width/2 * pi/2 * h
    h_needed = period / 8 / (width / 2 * math.pi / 2)
    return max(0, math.ceil(math.log2(0.5 / h_needed)))


def check_window(kernel: KernelSpec, z, tol, digits: int = DEFAULT_DIGITS, power: int = 0):
    """Raise WindowTooSmall when the integrand outside the window may exceed ``tol``."""
    if kernel.rays is not None:
        return
    with mp.workdps(digits + 5):
        R = mp.mpf(kernel.window)
        growth = mp.exp(abs(mp.mpc(z).imag) * R) * max(R, 1) ** power
        # tail integral bounded by bound(R) * growth * (unit-length margin on each side)
        if 2 * kernel.decay_bound(R) * growth > tol:
            raise WindowTooSmall(
                f"kernel {kernel.id} window {kernel.window} leaves tail above tolerance",
                bound=kernel.decay_bound(R),
            )


def moment_transform_result(kernel: KernelSpec, m: int, z, tol=None, digits: int = DEFAULT_DIGITS) -> QuadratureResult:
    """``int phi^m g(phi) e^{i z phi} dphi`` along the kernel's path."""
    return moments_transform(kernel, [m], [z], tol=tol, digits=digits, vector=True)[0]


def moments_transform(kernel: KernelSpec, ms, zs, tol=None, digits: int = DEFAULT_DIGITS, vector: bool = False):
    """All ``G_m(z)`` for ``m in ms`` and ``z in zs`` from one shared node set.

    Returns a QuadratureResult whose value is a list ordered as
    ``[(m, z) for z in zs for m in ms]``; with ``vector=True`` it is wrapped in
    a one-element list for convenience.
    """
    ms = list(ms)
    with mp.workdps(digits + 5):
        zs = [mp.mpc(z) for z in zs]
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        if kernel.rays is not None:
            res = _ray_moments(kernel, ms, zs, tol, digits)
        else:
            for z in zs:
                check_window(kernel, z, tol, digits, power=max(ms))
            W = mp.mpf(kernel.window)
            width = 2 * W
            level = max(_oscillation_level(z, width) for z in zs)
            if kernel.even:
                def integrand(phi):
                    g = kernel.eval(phi)
                    out = []
                    for z in zs:
                        ep = mp.expj(z * phi)
                        em = mp.expj(-z * phi)
                        for m in ms:
                            pm = phi**m
                            out.append(g * pm * (ep + (-1) ** m * em))
                    return out
                res = integrate(integrand, window(0, W), tol=tol, digits=digits, min_level=max(0, level - 1))
            else:
                def integrand(phi):
                    g = kernel.eval(phi)
                    out = []
                    for z in zs:
                        e = mp.expj(z * phi)
                        for m in ms:
                            out.append(g * phi**m * e)
                    return out
                res = integrate(integrand, window(-W, W), tol=tol, digits=digits, min_level=level)
    if vector:
        return [res]
    return res


def _ray_moments(kernel, ms, zs, tol, digits):
    out_angle, in_angle = kernel.rays
    eo = mp.expj(out_angle)
    ei = mp.expj(in_angle)

    def integrand(r):
        po, pi_ = r * eo, r * ei
        go, gi = kernel.eval(po), kernel.eval(pi_)
        out = []
        for z in zs:
            fo = eo * go * mp.expj(z * po)
            fi = ei * gi * mp.expj(z * pi_)
            for m in ms:
                out.append(fo * po**m - fi * pi_**m)
        return out

    return integrate(integrand, half_line(0), tol=tol, digits=digits)


def fourier_transform_result(kernel: KernelSpec, z, tol=None, digits: int = DEFAULT_DIGITS) -> QuadratureResult:
    """``int e^{i z phi} g(phi) dphi`` with its quadrature record.

    An even kernel at real ``z`` is integrated as ``2 int_0^W g cos(z phi)`` and
    the value returned is exactly real.
    """
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        if kernel.rays is None and kernel.even and z.imag == 0:
            check_window(kernel, z, tol, digits)
            W = mp.mpf(kernel.window)
            zr = z.real
            level = _oscillation_level(zr, 2 * W)
            res = integrate(lambda u: 2 * kernel.eval(u) * mp.cos(zr * u), window(0, W), tol=tol, digits=digits,
                            min_level=max(0, level - 1))
            return QuadratureResult(mp.mpc(mp.re(res.value), 0), res.error_estimate, res.nodes_used, res.converged,
                                    digits, res.levels)
        res = moments_transform(kernel, [0], [z], tol=tol, digits=digits)
        return QuadratureResult(res.value[0], res.error_estimate, res.nodes_used, res.converged, digits, res.levels)


def fourier_transform(kernel: KernelSpec, z, tol=None, digits: int = DEFAULT_DIGITS):
    return fourier_transform_result(kernel, z, tol=tol, digits=digits).value
