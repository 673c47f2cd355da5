"""The Riemann Xi function on the critical line, z -> s = i z + 1/2.

Three independent evaluation routes:

* ``reference``: 1/2 s (s - 1) pi^{-s/2} Gamma(s/2) zeta(s), zeta from the
  accelerated alternating (eta) series;
* ``fourier``:   c * int e^{i z u} Phi(u) du over the theta kernel, with c fixed
  once at z = 0 against the reference route;
* ``series``:    sum_n a_2n (-1)^n z^2n / (2n)!, each a_2n a quadrature over l.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import mpmath as mp

from .errors import NearZeroSingularity, RouteDomainError, SeriesTruncationError
from .numeric.fourier import fourier_transform_result
from .numeric.precision import DEFAULT_DIGITS, to_mpf
from .numeric.quadrature import half_line, integrate
from .numeric.roots import refine_bracket
from .numeric.special import gamma
from .theta import DEFAULT_WINDOW, TAIL_MARGIN, kernel_eval, xi_kernel

log = logging.getLogger(__name__)

ROUTES = ("reference", "fourier", "series")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class XiValue:
    z: object
    value: object
    route: str
    precision: int
    error_estimate: object = None
    order: int | None = None


# -- zeta by the accelerated alternating series ------------------------------

_LOG_BASE = math.log(3 + math.sqrt(8))


@functools.lru_cache(maxsize=64)
def _borwein_weights(n: int, work: int):
    """Weights (d_k - d_n)(-1)^k / d_n of the n-term accelerated eta series."""
    with mp.workdps(work):
        d = []
        acc = mp.mpf(0)
        term = mp.mpf(1) / n  # i = 0 term of (n+i-1)! 4^i / ((n-i)! (2i)!) relative to n! ... built below
        # build the partial sums exactly with integer arithmetic, then convert
        num = 0
        ints = []
        fact_n1 = math.factorial(n - 1)
        for i in range(n + 1):
            num_i = math.factorial(n + i - 1) * 4**i
            den_i = math.factorial(n - i) * math.factorial(2 * i)
            ints.append((num_i, den_i))
        common = math.factorial(2 * n) * math.factorial(n)
        partial = 0
        for num_i, den_i in ints:
            partial += num_i * (common // den_i)
            d.append(partial)
        dn = d[-1]
        weights = tuple(mp.mpf((-1) ** k * (d[k] - dn)) / dn for k in range(n))
        logs = tuple(mp.log(k + 1) for k in range(n))
        del acc, term, num, fact_n1
    return weights, logs


def zeta_terms_needed(s, digits: int) -> int:
    t = abs(float(mp.im(s)))
    one_minus = abs(complex(1 - mp.power(2, 1 - s)))
    need = (digits + 5) * math.log(10) + math.log(3 * (1 + 2 * t)) + math.pi * t / 2 - math.log(max(one_minus, 1e-300))
    sigma = float(mp.re(s))
    n = max(4, math.ceil(need / _LOG_BASE))
    if sigma < 0.5:
        # terms grow like (k+1)^{-sigma}
        n = max(4, math.ceil((need + (0.5 - sigma) * math.log(max(n, 2))) / _LOG_BASE))
    return n


def zeta(s, digits: int = DEFAULT_DIGITS):
    """Riemann zeta for Re s > -2, s != 1, by the alternating series with binomial-weight acceleration."""
    with mp.workdps(digits + 10):
        s = mp.mpmathify(s)
        if s == 1:
            raise RouteDomainError("zeta has a pole at s = 1")
        if mp.re(s) <= -2:
            raise RouteDomainError("alternating-series zeta is restricted to Re s > -2")
        n = zeta_terms_needed(s, digits)
    work = digits + 10 + math.ceil(math.log10(n)) + max(0, math.ceil(-float(mp.re(s)) * math.log10(n)))
    weights, logs = _borwein_weights(n, work)
    with mp.workdps(work):
        s = mp.mpmathify(s)
        total = mp.mpf(0)
        for w, lg in zip(weights, logs):
            total += w * mp.exp(-s * lg)
        out = -total / (1 - mp.power(2, 1 - s))
    with mp.workdps(digits + 5):
        return +out


# -- reference route -----------------------------------------------------------


def _s_of(z):
    return mp.j * z + mp.mpf(1) / 2


def xi_reference(z, digits: int = DEFAULT_DIGITS):
    with mp.workdps(digits + 10):
        z = mp.mpc(z)
        s = _s_of(z)
        for pole in (s / 2, (1 - s) / 2):
            if abs(mp.im(pole)) < 1e-12 and mp.re(pole) <= 1e-12 and abs(mp.re(pole) - mp.nint(mp.re(pole))) < 1e-12:
                raise RouteDomainError(f"z = {mp.nstr(z, 10)} sits on a pole of the Gamma factor")
        if mp.re(s) < mp.mpf(1) / 2:
            # Xi is even: evaluate at -z where Re s > 1/2
            s = 1 - s
        if abs(s - 1) < mp.mpf(10) ** (-12):
            raise RouteDomainError("z too close to -i/2 (s = 1) for the reference route")
        value = s * (s - 1) / 2 * mp.power(mp.pi, -s / 2) * gamma(s / 2, digits + 10) * zeta(s, digits + 5)
    with mp.workdps(digits + 5):
        return +value


# -- fourier route ---------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def calibration_constant(digits: int = DEFAULT_DIGITS, window: float = DEFAULT_WINDOW,
                         margin: int = TAIL_MARGIN):
    """The constant c with Xi(0) = c * int Phi(u) du (analytically c = 2)."""
    kernel = xi_kernel(window, digits + 10, margin)
    with mp.workdps(digits + 10):
        tol = mp.mpf(10) ** (-(digits + 8))
        integral = fourier_transform_result(kernel, 0, tol=tol, digits=digits + 10).value.real
        return xi_reference(0, digits + 10).real / integral


def xi_fourier(z, digits: int = DEFAULT_DIGITS, tol=None, window: float = DEFAULT_WINDOW,
               margin: int = TAIL_MARGIN):
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
        if abs(mp.im(z)) > 2:
            raise RouteDomainError("fourier route is limited to |Im z| <= 2")
        tol = mp.mpf(10) ** (-(digits - 10)) if tol is None else mp.mpf(tol)
        c = calibration_constant(digits, window, margin)
        kernel = xi_kernel(window, digits, margin)
        res = fourier_transform_result(kernel, z, tol=tol / c, digits=digits)
        return c * res.value, c * res.error_estimate


# -- a_2n and the series route -------------------------------------------------


def _a2n_integrand(n_max, scales):
    def f(ell):
        base = 4 * ell ** (-mp.mpf(1) / 4) * kernel_eval("f_of_ell", ell, digits=mp.mp.dps)
        h2 = (mp.log(ell) / 2) ** 2
        out = []
        p = mp.mpf(1)
        for n in range(n_max + 1):
            out.append(base * p / scales[n])
            p *= h2
        return out
    return f


@functools.lru_cache(maxsize=32)
def _a2n_rough(n_max: int):
    """Low-precision a_2n used only to plan the series order and precision."""
    with mp.workdps(25):
        res = integrate(_a2n_integrand(n_max, [mp.mpf(1)] * (n_max + 1)), half_line(1), tol=mp.mpf(10) ** -15,
                        digits=25, relative=True)
        return tuple(res.value)


@functools.lru_cache(maxsize=32)
def a2n_table(n_max: int, digits: int = DEFAULT_DIGITS):
    """``a_0 .. a_{2 n_max}`` (indexed by n) to relative accuracy ~10^-digits."""
    with mp.workdps(digits + 5):
        res = integrate(_a2n_integrand(n_max, [mp.mpf(1)] * (n_max + 1)), half_line(1),
                        tol=mp.mpf(10) ** (-(digits + 3)), digits=digits + 8, relative=True)
        return tuple(res.value), res.error_estimate


_TABLES: list = []


def _table_covering(n_max: int, digits: int):
    """A cached a_2n table with at least ``n_max`` entries at ``digits`` or more."""
    for size, dig, table in _TABLES:
        if size >= n_max and dig >= digits:
            return table
    size = max(32, 32 * math.ceil(n_max / 32))
    dig = 10 * math.ceil(digits / 10)
    table, _ = a2n_table(size, dig)
    _TABLES.append((size, dig, table))
    return table


def a2n(n: int, digits: int = DEFAULT_DIGITS):
    """Coefficient a_2n = 4 int_1^inf l^{-1/4} f(l) (log(l)/2)^{2n} dl."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    value = _table_covering(n + 1, digits)[n]
    with mp.workdps(digits + 5):
        return +value


def _series_plan(z, digits):
    """Order and working precision for the series route at ``z``."""
    az = abs(complex(z))
    target = -(digits + 5) + min(0.0, -math.pi * az / 4 / math.log(10))
    size = 32
    while True:
        rough = _a2n_rough(size)
        logs = []
        lz = math.log10(az) if az > 0 else -math.inf
        for n, a in enumerate(rough):
            la = float(mp.log10(abs(a)))
            logs.append(la + 2 * n * lz - float(mp.log10(mp.factorial(2 * n))) if az > 0 else (la if n == 0 else -math.inf))
        peak = max(range(len(logs)), key=lambda k: logs[k])
        tail = [k for k in range(peak, len(logs)) if logs[k] < target]
        if tail and all(logs[k] < target for k in range(tail[0], len(logs))):
            order = tail[0]
            work = digits + max(0, math.ceil(max(logs) - target - digits)) + 10
            return order, work, logs
        size *= 2
        if size > 1024:
            raise SeriesTruncationError(f"|z| = {az} too large for the series route", estimate=max(logs))


def xi_series(z, order: int | None = None, digits: int = DEFAULT_DIGITS):
    """Series route; returns (value, truncation-error estimate, order used)."""
    with mp.workdps(digits + 5):
        z = mp.mpc(z)
    auto_order, work, logs = _series_plan(z, digits)
    if order is None:
        order = auto_order
    elif order < auto_order:
        nxt = logs[order + 1] if order + 1 < len(logs) else logs[-1]
        if nxt > -(digits - 10):
            raise SeriesTruncationError(f"order {order} too small at |z| = {mp.nstr(abs(z), 6)}",
                                        estimate=mp.mpf(10) ** nxt)
    table = _table_covering(order + 2, work)
    with mp.workdps(work):
        z2 = mp.mpc(z) ** 2
        total = mp.mpf(0)
        term_z = mp.mpf(1)
        for n in range(order + 1):
            total += table[n] * term_z
            term_z = -term_z * z2 / ((2 * n + 1) * (2 * n + 2))
        estimate = abs(table[order + 1] * term_z) * 2
    with mp.workdps(digits + 5):
        return +total, +estimate, order


def xi_eval(z, route: str = "reference", order: int | None = None, digits: int = DEFAULT_DIGITS,
            tol=None, window: float = DEFAULT_WINDOW, margin: int = TAIL_MARGIN) -> XiValue:
    """Evaluate Xi(z) by the named route; tol, window and margin apply to the fourier route."""
    if route == "reference":
        return XiValue(z, xi_reference(z, digits), route, digits)
    if route == "fourier":
        v, err = xi_fourier(z, digits, tol, window, margin)
        return XiValue(z, v, route, digits, err)
    if route == "series":
        v, err, used = xi_series(z, order, digits)
        return XiValue(z, v, route, digits, err, used)
    raise ValueError(f"unknown route {route!r}; expected one of {ROUTES}")


# -- zeros ------------------------------------------------------------------------


@dataclass
class ZeroList:
    zeros: list
    brackets: list
    residuals: list
    scan_height: object
    step: object = None
    precision_digits: int = DEFAULT_DIGITS
    complete: bool = True
    warnings: list = field(default_factory=list)
    tangential: list = field(default_factory=list)

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def up_to(self, T) -> "ZeroList":
        """Sub-list of zeros below ``T`` (scan height lowered accordingly)."""
        keep = [i for i, lam in enumerate(self.zeros) if lam <= T]
        return ZeroList(
            [self.zeros[i] for i in keep], [self.brackets[i] for i in keep], [self.residuals[i] for i in keep],
            min(mp.mpf(T), mp.mpf(self.scan_height)), self.step, self.precision_digits, self.complete,
            list(self.warnings), [t for t in self.tangential if t <= T])

    def first(self, n: int) -> "ZeroList":
        height = self.zeros[n - 1] if 0 < n <= len(self.zeros) else self.scan_height
        if n < len(self.zeros):
            height = (self.zeros[n - 1] + self.zeros[n]) / 2
        return ZeroList(self.zeros[:n], self.brackets[:n], self.residuals[:n], height, self.step,
                        self.precision_digits, self.complete, list(self.warnings), list(self.tangential))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "precision_digits": self.precision_digits,
            "scan_height": str(self.scan_height),
            "step": None if self.step is None else str(self.step),
            "complete": self.complete,
            "zeros": [mp.nstr(z, self.precision_digits) for z in self.zeros],
            "brackets": [[mp.nstr(a, self.precision_digits), mp.nstr(b, self.precision_digits)] for a, b in self.brackets],
            "residuals": [mp.nstr(r, self.precision_digits) for r in self.residuals],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ZeroList":
        if data.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported zero cache format {data.get('format_version')!r}")
        digits = int(data["precision_digits"])
        with mp.workdps(digits + 5):
            return cls(
                [mp.mpf(z) for z in data["zeros"]],
                [(mp.mpf(a), mp.mpf(b)) for a, b in data["brackets"]],
                [mp.mpf(r) for r in data["residuals"]],
                mp.mpf(data["scan_height"]),
                None if data.get("step") is None else mp.mpf(data["step"]),
                digits,
                bool(data.get("complete", True)),
            )

    @staticmethod
    def merge(a: "ZeroList", b: "ZeroList") -> "ZeroList":
        """Union of two zero lists from disjoint or overlapping scans, sorted and deduplicated."""
        items = sorted(zip(a.zeros + b.zeros, a.brackets + b.brackets, a.residuals + b.residuals), key=lambda t: t[0])
        out = []
        for item in items:
            if out and abs(item[0] - out[-1][0]) < mp.mpf(10) ** -8:
                continue
            out.append(item)
        return ZeroList(
            [i[0] for i in out], [i[1] for i in out], [i[2] for i in out],
            max(mp.mpf(a.scan_height), mp.mpf(b.scan_height)),
            max((s for s in (a.step, b.step) if s is not None), default=None),
            min(a.precision_digits, b.precision_digits),
            a.complete and b.complete,
            a.warnings + b.warnings,
            sorted(a.tangential + b.tangential),
        )


def _real_xi(t, digits):
    return mp.re(xi_reference(t, digits))


def find_zeros(T, step=0.05, digits: int = DEFAULT_DIGITS, start=0) -> ZeroList:
    """Sign-change scan of the reference route on [start, T], refined to brackets below 1e-10."""
    with mp.workdps(digits + 5):
        T, step, start = to_mpf(T), to_mpf(step), to_mpf(start)
        if T <= 0:
            raise ValueError("scan height must be positive")
        if step > mp.mpf("0.25"):
            raise ValueError("scan step must not exceed 0.25")
        warnings = []
        if step > mp.mpf("0.05"):
            warnings.append("ScanStepTooCoarse: completeness not claimed for step > 0.05")
            log.warning(warnings[-1])
        count = int(mp.ceil((T - start) / step))
        grid = [start + k * step for k in range(count)] + [T]
        values = [_real_xi(t, digits) for t in grid]
        f = functools.partial(_real_xi, digits=digits)
        zeros, brackets, residuals, tangential = [], [], [], []
        scale = abs(_real_xi(0, digits))
        refine_tol = max(mp.mpf(10) ** (-(digits // 2)), mp.mpf(10) ** -20)
        for i in range(len(grid) - 1):
            a, b, fa, fb = grid[i], grid[i + 1], values[i], values[i + 1]
            if fa == 0 or (fa > 0) != (fb > 0):
                if fa == 0 and i > 0 and values[i - 1] == 0:
                    continue
                root = refine_bracket(f, a, b, fa, fb, bisect_to=mp.mpf(10) ** -6, tol=refine_tol)
                zeros.append(root.value)
                brackets.append((root.lo, root.hi))
                residuals.append(abs(f(root.value)))
            elif 0 < i < len(grid) - 2:
                # local minimum of |Xi| without sign change: logged, never counted
                left, right = abs(values[i - 1]) if i > 0 else None, abs(fb)
                if left is not None and abs(fa) < left and abs(fa) < right and abs(fa) < scale * mp.mpf(10) ** -12:
                    tangential.append(a)
                    log.info("tangential near-zero at t = %s treated as non-zero", mp.nstr(a, 12))
        return ZeroList(zeros, brackets, residuals, T, step, digits, step <= mp.mpf("0.05"), warnings, tangential)


def product_reconstruct(z, zeros, digits: int = DEFAULT_DIGITS):
    """Xi(0) * prod (1 - z^2 / lambda_n^2) over the listed zeros."""
    lams = zeros.zeros if isinstance(zeros, ZeroList) else list(zeros)
    with mp.workdps(digits + 10):
        z = mp.mpc(z)
        value = xi_reference(0, digits).real
        z2 = z * z
        for lam in lams:
            value *= 1 - z2 / (mp.mpf(lam) ** 2)
    with mp.workdps(digits + 5):
        return +value


# -- macroscopic loop and resolvent -------------------------------------------


@dataclass(frozen=True)
class LoopObservables:
    z: object
    W: object
    R: object
    R_zero_sum: object
    zero_tail: object
    zeros_used: int


def _counting_smooth(t):
    """Riemann-von Mangoldt smooth count theta(t)/pi + 1."""
    theta = mp.im(mp.loggamma(mp.mpf(1) / 4 + mp.j * t / 2)) - t / 2 * mp.log(mp.pi)
    return theta / mp.pi + 1


def _zero_tail(z, zeros: ZeroList):
    """Estimate of sum over zeros above the scan height of 2z/(z^2 - lambda^2)."""
    T = mp.mpf(zeros.scan_height)
    if T < 20:
        return mp.mpf(0)

    def g(t):
        return 2 * z / (z * z - t * t)

    def density(t):
        return (mp.re(mp.digamma(mp.mpf(1) / 4 + mp.j * t / 2)) / 2 - mp.log(mp.pi) / 2) / mp.pi

    with mp.workdps(30):
        smooth = integrate(lambda t: g(t) * density(t), half_line(T), tol=mp.mpf(10) ** -18, digits=30).value
        S = len(zeros.zeros) - _counting_smooth(T)
        return smooth - g(T) * S


def loop_observables(z, zeros: ZeroList | None = None, digits: int = DEFAULT_DIGITS) -> LoopObservables:
    """W(z) = log zeta(i z + 1/2) and R = dW/dz, the latter also from the zero sum when zeros are given."""
    with mp.workdps(digits + 10):
        z = mp.mpc(z)
        lams = zeros.zeros if zeros is not None else []
        for lam in lams:
            if min(abs(z - lam), abs(z + lam)) < mp.mpf(10) ** -6:
                raise NearZeroSingularity(f"z = {mp.nstr(z, 12)} is within 1e-6 of the zero {mp.nstr(lam, 12)}")
        s = _s_of(z)
        zeta_s = zeta(s, digits + 5)
        if abs(zeta_s) < mp.mpf(10) ** (-(digits // 2)):
            raise NearZeroSingularity(f"zeta(i z + 1/2) vanishes at z = {mp.nstr(z, 12)}")
        W = mp.log(zeta_s)
        h = mp.mpf(10) ** (-(digits // 5))
        fp = [zeta(s + k * h, digits + 5) for k in (-2, -1, 1, 2)]
        dzeta = (fp[0] - 8 * fp[1] + 8 * fp[2] - fp[3]) / (12 * h)
        R = mp.j * dzeta / zeta_s
        R_sum, tail = None, None
        if zeros is not None:
            dlog_xi = mp.fsum(2 * z / (z * z - mp.mpf(lam) ** 2) for lam in lams)
            tail = _zero_tail(z, zeros)
            smooth = 1 / s + 1 / (s - 1) - mp.log(mp.pi) / 2 + mp.digamma(s / 2) / 2
            R_sum = dlog_xi + tail - mp.j * smooth
    with mp.workdps(digits + 5):
        return LoopObservables(z, +W, +R, R_sum, tail, len(lams))
