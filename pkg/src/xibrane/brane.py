"""Determinantal reduction of the n-FZZT-brane matrix integral.

For a unitarily invariant integrand the eigenvalue reduction gives

    Z_n(z_1..z_n) = det[G_{j-1}(z_i)] / (i^{n(n-1)/2} Delta(z)),
    G_m(z) = int phi^m g(phi) e^{i z phi} dphi,

with Delta(z) = prod_{i<j} (z_j - z_i). The phase is the one produced by the
Harish-Chandra-Itzykson-Zuber angular integral; it makes the value real for an
even real kernel at real z. Clusters of (nearly) coincident eigenvalues are
handled by divided-difference rows evaluated from a Taylor expansion about the
cluster centre, which is exact in the confluent limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
from mpmath.calculus.quadrature import GaussLegendre

from .errors import ConfluenceUnstable, NonConvergence, RouteDomainError
from .numeric.fourier import KernelSpec, check_window, moments_transform
from .numeric.precision import DEFAULT_DIGITS, to_mpf

MAX_N = 4
MAX_M = 12
DUAL_ZONE = 1e-3
_MAX_TAYLOR_TERMS = 16


@dataclass(frozen=True)
class BraneConfig:
    eigenvalues: tuple
    confluence_tol: float = 1e-6

    def __post_init__(self):
        if len(self.eigenvalues) < 1:
            raise ValueError("at least one eigenvalue is required")
        if len(self.eigenvalues) > MAX_N:
            raise ValueError(f"at most {MAX_N} branes are supported")

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass
class MomentTable:
    """Cache of G_m(z) for one kernel, keyed by (m, z)."""

    kernel_id: str
    entries: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    max_m: int = -1

    def populate(self, kernel: KernelSpec, ms, zs, digits: int = DEFAULT_DIGITS, tol=None):
        if kernel.id != self.kernel_id:
            raise ValueError("kernel does not match this table")
        ms = sorted(set(ms))
        zs = [mp.mpc(z) for z in zs]
        missing = [z for z in zs if any((m, z) not in self.entries for m in ms)]
        if not missing:
            return
        uniq = list(dict.fromkeys(missing))
        res = moments_transform(kernel, ms, uniq, tol=tol, digits=digits)
        if not res.converged:
            raise NonConvergence("moment quadrature did not converge", best=res.value, estimate=res.error_estimate)
        it = iter(res.value)
        for z in uniq:
            for m in ms:
                # idempotent: a key already present keeps its first value
                self.entries.setdefault((m, z), next(it))
                self.errors.setdefault((m, z), res.error_estimate)
        self.max_m = max(self.max_m, ms[-1])

    def get(self, m, z):
        return self.entries[(m, mp.mpc(z))]


def moment_transform(kernel: KernelSpec, m: int, z, digits: int = DEFAULT_DIGITS, tol=None):
    """G_m(z) along the kernel's path (rays for Airy, real window otherwise)."""
    if not 0 <= m <= MAX_M:
        raise ValueError(f"moment order must lie in [0, {MAX_M}]")
    res = moments_transform(kernel, [m], [z], tol=tol, digits=digits)
    if not res.converged:
        raise NonConvergence("moment quadrature did not converge", best=res.value[0], estimate=res.error_estimate)
    return res.value[0]


def _clusters(zs, thresh):
    """Single-linkage grouping of indices whose spacing is below ``thresh``."""
    n = len(zs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(zs[i] - zs[j]) < thresh:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def _complete_h(xs, dmax):
    """h_d(xs) for d = 0..dmax (complete homogeneous symmetric polynomials)."""
    h = [mp.mpf(1)] + [mp.mpf(0)] * dmax
    for x in xs:
        for d in range(1, dmax + 1):
            h[d] = h[d] + x * h[d - 1]
    return h


def _phase(n):
    return mp.mpc(0, 1) ** (n * (n - 1) // 2)


def _vandermonde(zs):
    out = mp.mpf(1)
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            out *= zs[j] - zs[i]
    return out


def _row_norms(rows):
    return [max(abs(x) for x in r) for r in rows]


def _direct(kernel, zs, table, digits, tol):
    n = len(zs)
    table.populate(kernel, range(n), zs, digits, tol)
    rows = [[table.get(m, z) for m in range(n)] for z in zs]
    delta = _vandermonde(zs)
    if delta == 0:
        return None, mp.inf
    value = mp.det(mp.matrix(rows)) / (_phase(n) * delta)
    eps = max(table.errors[(m, z)] for z in zs for m in range(n)) + mp.mpf(10) ** (-digits)
    norms = _row_norms(rows)
    bound = n * eps * mp.fprod(norms) / min(norms) / abs(delta)
    return value, bound


def _taylor(kernel, zs, groups, table, digits, tol):
    n = len(zs)
    target = mp.mpf(10) ** (-(digits + 2))
    plans = []
    centers = []
    for g in groups:
        pts = [zs[i] for i in g]
        c = mp.fsum(pts) / len(pts)
        spread = max(abs(p - c) for p in pts)
        J = 0
        if spread > 0:
            # next omitted term of the Taylor sum scales like spread^(J+1) / (J+1)!
            while J < _MAX_TAYLOR_TERMS and spread ** (J + 1) / mp.factorial(J + 1) * 10 > target:
                J += 1
        plans.append((g, pts, c, spread, J))
        centers.append(c)
    need_m = max(n - 1 + len(g) - 1 + J + 1 for g, _, _, _, J in plans)
    table.populate(kernel, range(need_m + 1), centers, digits, tol)
    G_rows, V_rows = [], []
    trunc = mp.mpf(0)
    I = mp.mpc(0, 1)
    for g, pts, c, spread, J in plans:
        deltas = [p - c for p in pts]
        for k in range(len(g)):
            hd = _complete_h(deltas[: k + 1], J)
            hz = _complete_h(pts[: k + 1], n)
            grow, vrow = [], []
            for col in range(n):
                s = mp.mpc(0)
                for j in range(k, k + J + 1):
                    s += I**j * table.get(col + j, c) / mp.factorial(j) * hd[j - k]
                grow.append(s)
                vrow.append(hz[col - k] if col >= k else mp.mpf(0))
                if spread > 0:
                    jn = k + J + 1
                    trunc = max(trunc, abs(table.get(col + jn, c)) * (len(g) * spread) ** (J + 1)
                                / mp.factorial(jn))
            G_rows.append(grow)
            V_rows.append(vrow)
    vdet = mp.det(mp.matrix(V_rows))
    value = mp.det(mp.matrix(G_rows)) / (_phase(n) * vdet)
    eps = max(table.errors[(m, c)] for c in centers for m in range(need_m + 1)) + mp.mpf(10) ** (-digits) + trunc
    norms = _row_norms(G_rows)
    bound = n * eps * mp.fprod(norms) / min(norms) / abs(vdet)
    return value, bound


@dataclass(frozen=True)
class BraneValue:
    value: object
    error_estimate: object
    branch: str


def brane_partition_result(kernel: KernelSpec, config: BraneConfig, digits: int = DEFAULT_DIGITS, tol=None,
                           table: MomentTable | None = None, accuracy=None) -> BraneValue:
    """Evaluate the reduction; ``accuracy`` (default 10^-(digits/4), relative) is what the chosen branch must meet."""
    table = MomentTable(kernel.id) if table is None else table
    with mp.workdps(digits + 5):
        zs = [mp.mpc(z) for z in config.eigenvalues]
        n = len(zs)
        if n == 1:
            table.populate(kernel, [0], zs, digits, tol)
            return BraneValue(table.get(0, zs[0]), table.errors[(0, zs[0])], "direct")
        ctol = to_mpf(config.confluence_tol)
        spacing = min(abs(zs[i] - zs[j]) for i in range(n) for j in range(i + 1, n))
        dual = max(ctol, mp.mpf(DUAL_ZONE))
        candidates = []
        if spacing >= ctol:
            candidates.append(("direct",) + _direct(kernel, zs, table, digits, tol))
        if spacing < dual:
            groups = _clusters(zs, dual)
            candidates.append(("confluent",) + _taylor(kernel, zs, groups, table, digits, tol))
        name, value, bound = min(candidates, key=lambda c: c[2])
        accuracy = mp.mpf(10) ** (-(digits // 4)) if accuracy is None else to_mpf(accuracy)
        if value is None or not mp.isfinite(bound) or bound > accuracy * max(abs(value), 1):
            raise ConfluenceUnstable("near-coincident eigenvalues defeat both branches",
                                     spacing=spacing, estimate=bound)
        return BraneValue(value, bound, name)


def brane_partition(kernel: KernelSpec, config: BraneConfig, digits: int = DEFAULT_DIGITS, tol=None,
                    table: MomentTable | None = None):
    return brane_partition_result(kernel, config, digits, tol, table).value


@dataclass(frozen=True)
class BruteCheck:
    reduced: object
    direct: object
    discrepancy: object
    level: int


def _double_sum(xs, ws, gs, z1, z2):
    a = [g * w for g, w in zip(gs, ws)]
    e1 = [mp.expj(z1 * x) for x in xs]
    e2 = [mp.expj(z2 * x) for x in xs]
    total = mp.mpc(0)
    n = len(xs)
    for k in range(n):
        ak, xk, e1k, e2k = a[k], xs[k], e1[k], e2[k]
        row = mp.mpc(0)
        for l in range(k + 1, n):
            # the integrand is symmetric in (phi_1, phi_2), so sum l > k twice
            row += a[l] * (xs[l] - xk) * (e1k * e2[l] - e1[l] * e2k)
        total += ak * row
    return 2 * total


def _effective_radius(kernel, z1, z2, digits):
    """Smallest R on a 1/8 grid beyond which the weighted integrand is below 10^-(digits+5)."""
    grow = mp.exp(max(abs(mp.im(z1)), abs(mp.im(z2))))
    R = mp.mpf(kernel.window)
    step = mp.mpf(1) / 8
    target = mp.mpf(10) ** (-(digits + 5))
    while R > step and kernel.decay_bound(R - step) * grow ** (R - step) * (R - step + 1) < target:
        R -= step
    return R


def _ray_radius(z1, z2, digits):
    """R with e^{-R^3/3 + (|z1|+|z2|) R} R^2 below 10^-(digits+5) on the cubic rays."""
    growth = abs(z1) + abs(z2)
    target = -(digits + 5) * mp.log(10)
    R = mp.mpf(1)
    while -R**3 / 3 + growth * R + 2 * mp.log(R) > target:
        R += mp.mpf(1) / 4
    return R


def _ray_nodes(kernel, R, degree):
    """Gauss-Legendre nodes on both rays, oriented in along rays[1] and out along rays[0]."""
    base = GaussLegendre(mp.mp).calc_nodes(degree, mp.mp.prec)
    out_dir, in_dir = (mp.expj(t) for t in kernel.rays)
    xs, ws = [], []
    for direction, sign in ((out_dir, 1), (in_dir, -1)):
        for x, w in base:
            t = R * (x + 1) / 2
            xs.append(t * direction)
            ws.append(sign * direction * w * R / 2)
    return xs, ws


def brane_brute_check(kernel: KernelSpec, config: BraneConfig, digits: int = DEFAULT_DIGITS, tol=1e-16,
                      max_level: int = 12) -> BruteCheck:
    """Compare the reduction with a direct double integral at n = 2.

    direct = (1 / (2! i Delta(z))) int int Delta(phi) det[e^{i z_i phi_j}] g(phi_1) g(phi_2).
    Real-line kernels are summed on a tensor-product trapezoid grid, which
    converges geometrically for integrands analytic in a strip and negligible
    at the grid ends. Ray kernels use tensor Gauss-Legendre rules along each
    ray, where the cubic decay makes a finite radius exact to working precision.
    """
    if config.n != 2:
        raise ValueError("brute-force check is defined for n = 2")
    if kernel.rays is not None and any(math.sin(3 * t) <= 0 for t in kernel.rays):
        raise RouteDomainError("brute-force check needs rays inside the cubic decay sectors")
    with mp.workdps(digits + 5):
        tol = to_mpf(tol)
        z1, z2 = (mp.mpc(z) for z in config.eigenvalues)
        reduced = brane_partition(kernel, config, digits)
        norm = 2 * _phase(2) * (z2 - z1)
        prev = None
        if kernel.rays is not None:
            R = _ray_radius(z1, z2, digits)
            for degree in range(3, max_level + 1):
                xs, ws = _ray_nodes(kernel, R, degree)
                val = _double_sum(xs, ws, [kernel.eval(x) for x in xs], z1, z2) / norm
                if prev is not None and abs(val - prev) < tol * max(1, abs(val)):
                    return BruteCheck(reduced, val, abs(reduced - val), degree)
                prev = val
            raise NonConvergence("tensor-product quadrature did not converge", best=prev)
        for z in (z1, z2):
            check_window(kernel, z, tol, digits, power=1)
        R = _effective_radius(kernel, z1, z2, digits)
        cache = {}
        for level in range(3, max_level + 1):
            n = 2**level
            h = 2 * R / n
            xs = [-R + k * h for k in range(n + 1)]
            gs = []
            for k, x in enumerate(xs):
                key = (k * 2 ** (max_level - level))
                if key not in cache:
                    cache[key] = kernel.eval(x)
                gs.append(cache[key])
            ws = [h] * (n + 1)
            ws[0] = ws[-1] = h / 2
            val = _double_sum(xs, ws, gs, z1, z2) / norm
            if prev is not None and abs(val - prev) < tol * max(1, abs(val)):
                return BruteCheck(reduced, val, abs(reduced - val), level)
            prev = val
        raise NonConvergence("tensor-product quadrature did not converge", best=prev)
