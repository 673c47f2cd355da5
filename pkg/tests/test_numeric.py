import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xibrane.errors import (ComposeNonzeroConstantTerm, IntegrandEvaluationFailure, LogOfZeroConstantTerm,
                            NonConvergence, OrderMismatch, OrderOverflow, WindowTooSmall)
from xibrane.numeric.fourier import KernelSpec, fourier_transform, fourier_transform_result, gaussian_kernel, \
    moment_transform_result
from xibrane.numeric.precision import check_digits, promote, to_mpf
from xibrane.numeric.quadrature import half_line, integrate, real_line, window
from xibrane.numeric.series import MAX_ORDER, PowerSeries, series_op
from xibrane.numeric.special import euler_gamma, gamma, rgamma


# -- precision ---------------------------------------------------------------

def test_digit_budget_floor_and_promotion():
    assert promote(30, 50, 40) == 50
    with pytest.raises(ValueError):
        check_digits(20)


def test_to_mpf_reads_float_decimal_repr():
    assert to_mpf(0.05) == mp.mpf("0.05")


# -- power series ------------------------------------------------------------

def test_log_of_one_plus_phi_is_mercator():
    s = series_op("log", PowerSeries([1, 1], 3))
    assert [float(c) for c in s] == pytest.approx([0, 1, -0.5, 1 / 3], abs=1e-40)


def test_exp_of_zero_series():
    s = series_op("exp", PowerSeries([0], 5))
    assert list(s) == [1, 0, 0, 0, 0, 0]


def test_exp_log_round_trip():
    S = PowerSeries([2, 1, 1], 8)
    back = series_op("exp", series_op("log", S))
    assert max(abs(a - b) for a, b in zip(back, S)) < mp.mpf(10) ** -45


def test_series_errors():
    with pytest.raises(LogOfZeroConstantTerm):
        series_op("log", PowerSeries([0, 1], 4))
    with pytest.raises(ComposeNonzeroConstantTerm):
        series_op("compose", PowerSeries([1, 1], 4), PowerSeries([1, 1], 4))
    with pytest.raises(OrderMismatch):
        series_op("add", PowerSeries([1], 3), PowerSeries([1], 4))
    with pytest.raises(OrderOverflow):
        PowerSeries([1], MAX_ORDER + 1)


def test_compose_and_differentiate():
    # exp(x) composed into log(1 + y) gives log(1 + x + x^2/2 + ...) ; check against exp(x) - 1 inner
    inner = series_op("add", PowerSeries.exponential(1, 6), PowerSeries.constant(-1, 6))
    out = series_op("compose", series_op("log", PowerSeries([1, 1], 6)), inner)
    assert abs(out[1] - 1) < 1e-45 and max(abs(c) for c in list(out)[2:]) < 1e-45
    d = series_op("differentiate", PowerSeries([1, 2, 3], 2))
    assert d.order == 1 and list(d) == [2, 6]


coeff = st.integers(-5, 5)


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=6, max_size=6), st.lists(coeff, min_size=6, max_size=6))
def test_multiplication_commutes_and_exp_is_a_homomorphism(a, b):
    A, B = PowerSeries(a, 5), PowerSeries(b, 5)
    assert list(A * B) == list(B * A)
    lhs = series_op("exp", A + B)
    rhs = series_op("exp", A) * series_op("exp", B)
    scale = max(1, max(abs(c) for c in lhs))
    assert max(abs(x - y) for x, y in zip(lhs, rhs)) < scale * mp.mpf(10) ** -40


# -- quadrature --------------------------------------------------------------

def test_integrate_exponential_half_line():
    r = integrate(lambda x: mp.exp(-x), half_line(0))
    assert r.converged and abs(r.value - 1) < mp.mpf(10) ** -40
    assert r.error_estimate >= 0 and abs(r.value - 1) <= max(r.error_estimate, mp.mpf(10) ** -45)


def test_integrate_gaussian_real_line():
    r = integrate(lambda x: mp.exp(-x * x), real_line())
    assert abs(r.value - mp.sqrt(mp.pi)) < mp.mpf(10) ** -40


def test_integrate_endpoint_singularity_window():
    r = integrate(lambda x: 1 / mp.sqrt(x), window(0, 1))
    assert abs(r.value - 2) < mp.mpf(10) ** -35


def test_integrate_theta_kernel_gives_quarter_a0():
    from xibrane.theta import kernel_eval
    from xibrane.xi import a2n

    r = integrate(lambda l: l ** (-mp.mpf(1) / 4) * kernel_eval("f_of_ell", l), half_line(1), tol=mp.mpf(10) ** -40)
    assert abs(r.value - a2n(0) / 4) < mp.mpf(10) ** -35


@settings(max_examples=10, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 4), st.integers(0, 4))
def test_integrate_is_linear(alpha, beta, m, n):
    f = lambda x: x**m * mp.exp(-x * x)
    g = lambda x: x**n * mp.exp(-x * x)
    rf, rg = integrate(f, real_line()), integrate(g, real_line())
    rh = integrate(lambda x: alpha * f(x) + beta * g(x), real_line())
    bound = rh.error_estimate + abs(alpha) * rf.error_estimate + abs(beta) * rg.error_estimate + mp.mpf(10) ** -45
    assert abs(rh.value - alpha * rf.value - beta * rg.value) <= bound


def test_nonconvergence_reports_best_value():
    f = lambda x: mp.sin(1 / x) / x
    r = integrate(f, window(mp.mpf(10) ** -3, 1), tol=mp.mpf(10) ** -45, max_level=3, raise_on_failure=False)
    assert not r.converged
    with pytest.raises(NonConvergence) as info:
        integrate(f, window(mp.mpf(10) ** -3, 1), tol=mp.mpf(10) ** -45, max_level=3)
    assert info.value.best is not None and info.value.estimate > mp.mpf(10) ** -45


def test_integrand_failure_is_reported():
    def bad(x):
        raise ZeroDivisionError("boom")

    with pytest.raises(IntegrandEvaluationFailure):
        integrate(bad, window(0, 1))


# -- fourier -----------------------------------------------------------------

def test_gaussian_fourier_transform():
    v = fourier_transform(gaussian_kernel(), 1)
    assert v.imag == 0
    assert abs(v - mp.sqrt(mp.pi) * mp.exp(-mp.mpf(1) / 4)) < mp.mpf(10) ** -40


def test_gaussian_fourier_transform_complex_argument():
    z = mp.mpc(1, -0.5)
    v = fourier_transform(gaussian_kernel(), z)
    assert abs(v - mp.sqrt(mp.pi) * mp.exp(-z * z / 4)) < mp.mpf(10) ** -38


def test_even_kernel_odd_moment_vanishes():
    r = moment_transform_result(gaussian_kernel(), 1, 0)
    assert abs(r.value[0]) < mp.mpf(10) ** -45


def test_window_too_small():
    k = KernelSpec("wide", lambda x: mp.exp(-x * x / 100), lambda R: mp.exp(-mp.mpf(R) ** 2 / 100), even=True,
                   window=3.0)
    with pytest.raises(WindowTooSmall):
        fourier_transform(k, 0)


def test_xi_kernel_transform_matches_reference_at_40_digits():
    from xibrane.theta import xi_kernel
    from xibrane.xi import calibration_constant, xi_reference

    v = calibration_constant(40) * fourier_transform(xi_kernel(digits=40), 0, digits=40)
    assert abs(v - xi_reference(0, 40)) < mp.mpf(10) ** -25


def test_even_real_transform_imag_below_error():
    r = fourier_transform_result(gaussian_kernel(), 2.5)
    assert abs(r.value.imag) <= 10 * r.error_estimate


def test_more_digits_never_worse():
    oracle = mp.sqrt(mp.pi) * mp.exp(-mp.mpf(9) / 4)
    e40 = abs(fourier_transform(gaussian_kernel(), 3, digits=40) - oracle)
    e60 = abs(fourier_transform(gaussian_kernel(), 3, digits=60) - oracle)
    assert e60 <= e40


# -- special functions -------------------------------------------------------

@pytest.mark.parametrize("w", [mp.mpf("0.25"), mp.mpf("2.5"), mp.mpc(1, 3), mp.mpc(-2.5, 0.5), mp.mpf(7)])
def test_gamma_against_mpmath(w):
    assert abs(gamma(w) / mp.gamma(w) - 1) < mp.mpf(10) ** -45


def test_rgamma_zero_at_nonpositive_integers():
    assert all(rgamma(-k) == 0 for k in range(0, 6))


def test_euler_gamma_against_mpmath():
    assert abs(euler_gamma(50) - mp.euler) < mp.mpf(10) ** -50
