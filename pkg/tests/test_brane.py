import itertools

import mpmath as mp
import pytest

from xibrane.airy import airy_kernel, airy_reference
from xibrane.brane import BraneConfig, MomentTable, brane_brute_check, brane_partition, brane_partition_result, \
    moment_transform
from xibrane.errors import ConfluenceUnstable, RouteDomainError
from xibrane.numeric.fourier import KernelSpec, fourier_transform, gaussian_kernel
from xibrane.theta import xi_kernel

A = airy_kernel()


def test_airy_moment_zero():
    v = moment_transform(A, 0, 0)
    assert abs(v - 2 * mp.pi * airy_reference(0)) < mp.mpf(10) ** -40
    assert abs(v - mp.mpf("2.23069")) < 1e-4


def test_even_kernel_odd_moment_vanishes():
    assert abs(moment_transform(xi_kernel(), 1, 0)) < mp.mpf(10) ** -45


def test_moment_matches_derivative():
    h = mp.mpf(10) ** -4
    g = [moment_transform(A, 0, 1 + k * h) for k in (-1, 0, 1)]
    fd = -(g[0] - 2 * g[1] + g[2]) / h**2  # (-i d/dz)^2 = -d^2/dz^2
    assert abs(moment_transform(A, 2, 1) - fd) < mp.mpf(10) ** -8


def test_moment_table_idempotent_and_consistent():
    t = MomentTable(A.id)
    t.populate(A, range(4), [mp.mpf("0.5")])
    first = t.get(2, mp.mpf("0.5"))
    t.populate(A, range(4), [mp.mpf("0.5"), mp.mpf(1)])
    assert t.get(2, mp.mpf("0.5")) == first
    h = mp.mpf(10) ** -5
    d1 = (moment_transform(A, 1, 1 + h) - moment_transform(A, 1, 1 - h)) / (2 * h)
    assert abs(t.get(2, 1) - (-1j) * d1) < mp.mpf(10) ** -8


def test_n1_reduces_to_scalar_transform():
    for kernel, z in ((A, mp.mpf("0.3")), (xi_kernel(), mp.mpf(2))):
        assert abs(brane_partition(kernel, BraneConfig((z,))) - fourier_transform(kernel, z)) < mp.mpf(10) ** -40


def test_n2_swap_invariance():
    a = brane_partition(A, BraneConfig((mp.mpf("0.5"), mp.mpf("1.2"))))
    b = brane_partition(A, BraneConfig((mp.mpf("1.2"), mp.mpf("0.5"))))
    assert abs(a - b) < mp.mpf(10) ** -45


def test_n3_permutation_invariance():
    zs = (mp.mpf("-0.4"), mp.mpf("0.3"), mp.mpf("1.1"))
    vals = [brane_partition(A, BraneConfig(p)) for p in itertools.permutations(zs)]
    assert max(abs(v - vals[0]) for v in vals) < mp.mpf(10) ** -40


def richardson(hs, vals):
    """Polynomial extrapolation of vals(h) to h = 0."""
    return mp.fsum(v * mp.fprod(h2 / (h2 - h) for h2 in hs if h2 != h) for h, v in zip(hs, vals))


def test_confluent_limit_richardson():
    z = mp.mpf(1)
    hs = [mp.mpf(10) ** -k for k in (2, 3, 4)]
    vals = [brane_partition(A, BraneConfig((z, z + h))) for h in hs]
    limit = brane_partition_result(A, BraneConfig((z, z)))
    assert limit.branch == "confluent"
    assert abs(richardson(hs, vals) - limit.value) < mp.mpf(10) ** -8


def test_dual_zone_branches_agree():
    z = mp.mpf("0.7")
    h = mp.mpf(10) ** -4
    r = brane_partition_result(A, BraneConfig((z, z + h)))
    from xibrane.brane import _direct, _taylor, _clusters
    zs = [mp.mpc(z), mp.mpc(z + h)]
    t = MomentTable(A.id)
    d, _ = _direct(A, zs, t, 50, None)
    c, _ = _taylor(A, zs, _clusters(zs, 1e-3), t, 50, None)
    assert abs(d - c) < mp.mpf(10) ** -35
    assert abs(r.value - c) < mp.mpf(10) ** -35


def test_xi_kernel_real_configuration_is_real():
    v = brane_partition(xi_kernel(), BraneConfig((mp.mpf(1), mp.mpf(2), mp.mpf("3.5"))))
    assert abs(v.imag) < mp.mpf(10) ** -42 * max(1, abs(v))


def test_brute_check_xi_kernel():
    r = brane_brute_check(xi_kernel(), BraneConfig((1, 2)))
    assert r.discrepancy < 1e-10


def test_brute_check_gaussian():
    r = brane_brute_check(gaussian_kernel(), BraneConfig((0, 1)))
    assert r.discrepancy < 1e-15


def test_brute_check_close_eigenvalues():
    r = brane_brute_check(xi_kernel(), BraneConfig((1, mp.mpf("1.01"))))
    assert mp.isfinite(r.direct) and r.discrepancy < 1e-10


@pytest.mark.parametrize("zs", [(0, 1), (mp.mpf("-1.5"), mp.mpf("0.5")), (1, mp.mpf("1.01"))])
def test_brute_check_airy_rays(zs):
    r = brane_brute_check(A, BraneConfig(zs))
    assert r.discrepancy < 1e-10


def test_brute_check_rejects_divergent_rays():
    bad = KernelSpec("airy", A.eval, A.decay_bound, rays=(mp.pi / 2, 5 * mp.pi / 6))
    with pytest.raises(RouteDomainError):
        brane_brute_check(bad, BraneConfig((0, 1)))


def test_confluence_unstable_when_neither_branch_meets_accuracy():
    cfg = BraneConfig((mp.mpf(0), mp.mpf("2e-4"), mp.mpf(1)))
    with pytest.raises(ConfluenceUnstable):
        brane_partition_result(gaussian_kernel(), cfg, digits=30, accuracy=mp.mpf(10) ** -60)


def test_config_limits():
    with pytest.raises(ValueError):
        BraneConfig(())
    with pytest.raises(ValueError):
        BraneConfig((0, 1, 2, 3, 4))
