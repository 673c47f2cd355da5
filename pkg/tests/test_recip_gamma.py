import random

import mpmath as mp
import pytest

from xibrane.errors import PoleAtZero, RangeError, RouteDomainError
from xibrane.recip_gamma import liouville_fourier, recfact_eval


def test_recfact_at_zero():
    assert recfact_eval(0).value == 1


def test_recfact_zero_at_minus_one():
    assert recfact_eval(-1).value == 0


def test_recfact_three_large_n():
    r = recfact_eval(3, N=10**5)
    assert abs(r.value - mp.mpf(1) / mp.factorial(3)) < mp.mpf(10) ** -20


def test_exact_zeros_at_negative_integers():
    assert all(recfact_eval(-k).value == 0 for k in range(1, 11))


def test_product_matches_reference_within_bound():
    for z in (mp.mpf("2.5"), mp.mpc(-1.5, 2), mp.mpc(4, -3)):
        p, r = recfact_eval(z), recfact_eval(z, "reference")
        assert abs(p.value - r.value) <= p.tail_bound + mp.mpf(10) ** -45 * max(1, abs(r.value))
        assert abs(r.value - mp.rgamma(z + 1)) < mp.mpf(10) ** -45 * max(1, abs(r.value))


def test_shift_identity_random_disk():
    rng = random.Random(12345)
    worst = 0
    for _ in range(25):
        r, t = 5 * rng.random() ** 0.5, 2 * mp.pi * rng.random()
        z = mp.mpc(r * mp.cos(t), r * mp.sin(t))
        worst = max(worst, abs(recfact_eval(z - 1).value - z * recfact_eval(z).value))
    assert worst < mp.mpf(10) ** -42


def test_product_needs_n():
    with pytest.raises(RangeError):
        recfact_eval(1, N=50)


@pytest.mark.parametrize("z,expected", [(mp.mpc(0, -1), 1), (mp.mpc(0, -2), 1)])
def test_liouville_exact_cases(z, expected):
    assert abs(liouville_fourier(z).value - expected) < mp.mpf(10) ** -40


@pytest.mark.parametrize("z", [1, mp.mpf("-2.5"), mp.mpc(0.5, -0.5)])
def test_liouville_matches_gamma_iz(z):
    r = liouville_fourier(z)
    assert r.gamma_gap < mp.mpf(10) ** -15
    assert abs(r.value - mp.gamma(1j * mp.mpc(z))) < mp.mpf(10) ** -15


def test_liouville_is_not_recfact():
    # the real-line integral gives Gamma(iz); the mismatch with 1/Pi(z) is reported
    assert liouville_fourier(1).recfact_mismatch > 0.1


def test_liouville_domain():
    with pytest.raises(PoleAtZero):
        liouville_fourier(0)
    with pytest.raises(RouteDomainError):
        liouville_fourier(mp.mpc(0, 0.5))
