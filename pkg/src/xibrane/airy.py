"""The Airy function as the FZZT partition function of the Gaussian model.

Reference route: Maclaurin series (with guard digits against the e^{zeta}
growth of the terms) inside a switchover radius, exponential asymptotics
outside it. Kontsevich route: the cubic-phase integral on rays in its
convergence sectors, divided by 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import ContourDivergence, RouteDomainError
from .numeric.fourier import KernelSpec, fourier_transform_result
from .numeric.precision import DEFAULT_DIGITS, to_mpf
from .numeric.roots import refine_bracket
from .numeric.special import gamma

RAYS = (math.pi / 6, 5 * math.pi / 6)


@dataclass(frozen=True)
class AiryValue:
    z: object
    value: object
    route: str
    precision: int = DEFAULT_DIGITS


def switch_radius(digits: int) -> float:
    """|z| beyond which the truncated asymptotic series meets 10^-(digits+5)."""
    return ((digits + 5) * math.log(10) * 3 / 4) ** (2 / 3)


def _maclaurin(z, digits):
    az = abs(complex(z))
    guard = math.ceil(4 / 3 * az**1.5 / math.log(10)) + 10
    work = digits + guard
    with mp.workdps(work):
        z = mp.mpmathify(z)
        c1 = mp.power(3, -mp.mpf(2) / 3) / gamma(mp.mpf(2) / 3, work)
        c2 = mp.power(3, -mp.mpf(1) / 3) / gamma(mp.mpf(1) / 3, work)
        z3 = z**3
        f = g = mp.mpf(0)
        tf, tg = mp.mpf(1), z
        k = 0
        tiny = mp.mpf(10) ** (-work)
        while True:
            f += tf
            g += tg
            k += 1
            # f: prod (3k-2) over (3k)!, g: prod (3k-1) over (3k+1)!
            tf = tf * z3 / ((3 * k - 1) * (3 * k))
            tg = tg * z3 / ((3 * k) * (3 * k + 1))
            if k > 2 and abs(tf) + abs(tg) < tiny * (abs(f) + abs(g)):
                break
        out = c1 * f - c2 * g
    with mp.workdps(digits + 5):
        return +out


def _asymptotic_sector(z, digits):
    """Ai(z) ~ e^{-zeta} / (2 sqrt(pi) z^{1/4}) sum (-1)^k u_k zeta^{-k}, |arg z| <= 2pi/3."""
    with mp.workdps(digits + 10):
        z = mp.mpc(z)
        zeta = mp.mpf(2) / 3 * z ** (mp.mpf(3) / 2)
        s = mp.mpf(0)
        u = mp.mpf(1)
        term = mp.mpf(1)
        best = None
        k = 0
        while True:
            s += term
            k += 1
            u = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
            nxt = (-1) ** k * u / zeta**k
            if best is not None and abs(nxt) >= abs(term):
                break
            best = abs(nxt)
            term = nxt
            if abs(term) < mp.mpf(10) ** (-(digits + 8)):
                s += term
                break
        return mp.exp(-zeta) / (2 * mp.sqrt(mp.pi) * z ** (mp.mpf(1) / 4)) * s


def _asymptotic(z, digits):
    with mp.workdps(digits + 10):
        z = mp.mpc(z)
        if abs(mp.arg(z)) <= 2 * mp.pi / 3:
            out = _asymptotic_sector(z, digits)
        else:
            w = mp.expj(2 * mp.pi / 3)
            out = -w * _asymptotic_sector(w * z, digits) - w * w * _asymptotic_sector(w * w * z, digits)
        if mp.im(z) == 0:
            out = mp.re(out)
    with mp.workdps(digits + 5):
        return +out


def airy_reference(z, digits: int = DEFAULT_DIGITS):
    if abs(complex(z)) < switch_radius(digits):
        return _maclaurin(z, digits)
    return _asymptotic(z, digits)


def airy_kernel() -> KernelSpec:
    """e^{i phi^3 / 3} on the rays arg phi = pi/6 (outgoing) and 5 pi/6 (incoming)."""
    return KernelSpec(
        id="airy",
        eval=lambda phi: mp.expj(phi**3 / 3),
        decay_bound=lambda R: mp.exp(-mp.mpf(R) ** 3 / 3),
        even=False,
        rays=RAYS,
    )


def airy_kontsevich(z, digits: int = DEFAULT_DIGITS, tol=None, max_imag: float = 1.0, rays=RAYS):
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        if abs(mp.im(z)) > max_imag:
            raise RouteDomainError(f"kontsevich route limited to |Im z| <= {max_imag}")
        for theta in rays:
            # e^{i phi^3/3} decays along arg phi = theta only if sin(3 theta) > 0
            if math.sin(3 * theta) <= 0:
                raise ContourDivergence(f"ray angle {theta} lies outside the cubic convergence sectors")
        base = airy_kernel()
        kernel = base if tuple(rays) == RAYS else KernelSpec("airy", base.eval, base.decay_bound, rays=tuple(rays))
        res = fourier_transform_result(kernel, z, tol=tol, digits=digits)
        value = res.value / (2 * mp.pi)
        if mp.im(z) == 0:
            # real z: the rays are mirror images, so the imaginary part is pure quadrature noise
            value = mp.mpc(mp.re(value), 0)
        return value


def airy_eval(z, route: str = "reference", digits: int = DEFAULT_DIGITS) -> AiryValue:
    if route == "reference":
        return AiryValue(z, airy_reference(z, digits), route, digits)
    if route == "kontsevich":
        return AiryValue(z, airy_kontsevich(z, digits), route, digits)
    raise ValueError(f"unknown route {route!r}")


@dataclass(frozen=True)
class AiryZeros:
    zeros: list
    brackets: list
    residuals: list
    positive_sign_changes: int


def airy_zeros(count: int, digits: int = DEFAULT_DIGITS, step=0.05) -> AiryZeros:
    """First ``count`` zeros on the negative axis by scan and bracket refinement."""
    if count > 20:
        raise ValueError("at most 20 Airy zeros are supported")
    with mp.workdps(digits + 5):
        step = to_mpf(step)
        f = lambda x: mp.re(airy_reference(x, digits))
        zeros, brackets, residuals = [], [], []
        a, fa = mp.mpf(0), f(mp.mpf(0))
        k = 0
        while len(zeros) < count:
            k += 1
            b = -k * step
            fb = f(b)
            if (fa > 0) != (fb > 0):
                root = refine_bracket(f, b, a, fb, fa, bisect_to=mp.mpf(10) ** -6,
                                      tol=mp.mpf(10) ** (-(digits // 2)))
                zeros.append(root.value)
                brackets.append((root.lo, root.hi))
                residuals.append(abs(f(root.value)))
            a, fa = b, fb
        # no sign change on [0, 10]
        pos = 0
        prev = f(mp.mpf(0))
        for j in range(1, 201):
            cur = f(j * step)
            if (cur > 0) != (prev > 0):
                pos += 1
            prev = cur
        return AiryZeros(zeros, brackets, residuals, pos)


def ode_residual(z, digits: int = DEFAULT_DIGITS, h=None):
    """|Ai''(z) - z Ai(z)| with Ai'' from the 5-point central difference."""
    with mp.workdps(digits + 5):
        z = mp.mpmathify(z)
        h = mp.mpf(10) ** -5 if h is None else mp.mpf(h)
        f = [airy_reference(z + k * h, digits) for k in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        return abs(d2 - z * f[2])
