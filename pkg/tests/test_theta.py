import mpmath as mp
import pytest

from xibrane.errors import TailBudgetTooLoose, ThetaDomainError
from xibrane.theta import (ThetaTailBudget, budget_for, kernel_eval, kernel_gap, kernel_series, phi_decay_bound,
                           series_budget,
                           tail_bound, xi_kernel)

D = mp.mpf(10) ** -44


def direct_phi(u, K=40):
    u = mp.mpf(u)
    return mp.fsum((2 * mp.pi**2 * q**4 * mp.exp(9 * u / 2) - 3 * mp.pi * q**2 * mp.exp(5 * u / 2))
                   * mp.exp(-mp.pi * q * q * mp.exp(2 * u)) for q in range(1, K + 1))


def test_phi_derived_at_zero():
    oracle = mp.fsum((2 * mp.pi**2 * n**4 - 3 * mp.pi * n**2) * mp.exp(-mp.pi * n * n) for n in range(1, 6))
    assert abs(kernel_eval("phi_derived", 0) - oracle) < mp.mpf(10) ** -30
    assert abs(kernel_eval("phi_derived", 0) - mp.mpf("0.4467")) < 1e-4


@pytest.mark.parametrize("u", ["0.3", "1.1", "2.0"])
def test_phi_derived_is_even(u):
    assert abs(kernel_eval("phi_derived", mp.mpf(u)) - kernel_eval("phi_derived", -mp.mpf(u))) < D


def test_literal_variant_differs():
    oracle = mp.fsum((mp.pi**2 * k**4 - mp.mpf(3) / 2 * mp.pi * k**2) * mp.exp(-mp.pi * k * k) for k in range(1, 6))
    lit = kernel_eval("phi_paper_literal", 0)
    assert abs(lit - oracle) < mp.mpf(10) ** -30
    assert abs(lit - mp.mpf("0.2234")) < 1e-4
    assert abs(lit - kernel_eval("phi_derived", 0)) > 0.2


def test_f_of_ell_domain_and_value():
    with pytest.raises(ThetaDomainError):
        kernel_eval("f_of_ell", mp.mpf("0.5"))
    l = mp.mpf(2)
    oracle = mp.fsum((mp.pi**2 * q**4 * l - mp.mpf(3) / 2 * mp.pi * q * q) * mp.sqrt(l) * mp.exp(-mp.pi * q * q * l)
                     for q in range(1, 30))
    assert abs(kernel_eval("f_of_ell", l) - oracle) < D


def test_matches_direct_sum_across_window():
    for u in ("-1.5", "-0.4", "0.7", "1.6"):
        with mp.workdps(200):
            ref = direct_phi(u, 60)
        assert abs(kernel_eval("phi_derived", mp.mpf(u)) - ref) < D


def test_budget_too_loose():
    with pytest.raises(TailBudgetTooLoose):
        kernel_eval("phi_derived", mp.mpf("0.5"), budget=ThetaTailBudget(1, mp.mpf(1)))


def test_tail_bound_dominates_omitted_terms():
    for u in ("-0.5", "0", "0.8"):
        u = mp.mpf(u)
        X = mp.exp(2 * u)
        for K in (1, 2, 3):
            with mp.workdps(120):
                partial = lambda k: mp.fsum((2 * mp.pi**2 * q**4 * mp.exp(9 * u / 2) - 3 * mp.pi * q**2
                                             * mp.exp(5 * u / 2)) * mp.exp(-mp.pi * q * q * X) for q in range(1, k + 1))
                diff = abs(partial(K + 3) - partial(K))
            assert diff <= tail_bound("phi_derived", X, K)


def test_budget_meets_request():
    b = budget_for("phi_derived", 0)
    assert b.tail_bound < mp.mpf(10) ** -50


def test_positivity_evenness_and_decay_on_grid():
    grid = [mp.mpf(k) / 100 for k in range(-300, 301, 5)]
    vals = {u: kernel_eval("phi_derived", u) for u in grid}
    assert all(v > 0 for v in vals.values())
    assert max(abs(vals[u] - vals[-u]) for u in grid) < mp.mpf(10) ** -44
    assert all(vals[u] <= phi_decay_bound(abs(u)) for u in grid)


def test_decay_bound_monotone():
    rs = [mp.mpf(r) / 4 for r in range(0, 16)]
    b = [phi_decay_bound(r) for r in rs]
    assert all(x >= y for x, y in zip(b, b[1:]))


def test_series_constant_and_odd_coefficients():
    s = kernel_series("phi_derived", 16)
    assert abs(s[0] - kernel_eval("phi_derived", 0)) < D
    assert abs(s[1]) < D and abs(s[3]) < D


def test_series_second_coefficient_by_finite_difference():
    s = kernel_series("phi_derived", 16)
    h = mp.mpf(10) ** -8
    fd = (kernel_eval("phi_derived", h) - 2 * kernel_eval("phi_derived", 0) + kernel_eval("phi_derived", -h)) / h**2
    assert abs(s[2] - fd / 2) < mp.mpf(10) ** -12


def test_series_stable_under_more_terms():
    a = kernel_series("phi_derived", 24)
    b = kernel_series("phi_derived", 24, K=series_budget(24, 50).K + 3)
    assert max(abs(x - y) for x, y in zip(a, b)) < mp.mpf(10) ** -42


def test_xi_kernel_spec_is_even():
    k = xi_kernel()
    assert k.even and k.id == "xi_derived"
    for u in ("0.25", "1.3"):
        assert abs(k.eval(mp.mpf(u)) - k.eval(-mp.mpf(u))) < mp.mpf(10) ** -45


def test_kernel_gap_report():
    rows = kernel_gap([mp.mpf(0), mp.mpf(1)])
    assert rows[0][3] > 0.2
