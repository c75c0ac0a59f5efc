import numpy as np
import pytest

from opmean.utils.exceptions import ExceptionInvalidData
from opmean.v1._shared.schemas import BetaOrientation
from opmean.v1.hermat.palette import DEFAULT_PALETTE, get_function
from opmean.v1.scalar.service import (
    beta_bounds_check,
    beta_value,
    bracket_coefs,
    bracket_coefs_quadrature,
    r_coef,
    ratio_bounds,
    rep_function_bb,
    rep_function_bold,
    rep_function_pal,
    scalar_derivative_bracket,
    scalar_hh_chain,
)

GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
POINTS = np.array([0.2, 0.5, 0.9, 1.5, 2.0, 4.0, 9.0])


def test_r_coef():
    assert r_coef(0.5, 0.3) == pytest.approx(0.5)
    assert r_coef(0.0, 0.7) == pytest.approx(0.7)
    assert r_coef(1.0, 1.0) == pytest.approx(0.0)
    with pytest.raises(ExceptionInvalidData):
        r_coef(1.5, 0.2)


def test_ratio_bounds_bracket_one():
    t = np.linspace(0.0, 1.0, 41)
    m, M = ratio_bounds(0.35, t)
    assert np.all(m <= 1.0 + 1e-15)
    assert np.all(M >= 1.0 - 1e-15)
    assert ratio_bounds(0.35, 0.35) == pytest.approx((1.0, 1.0))


@pytest.mark.parametrize("s", GRID)
@pytest.mark.parametrize("lam", GRID)
def test_bracket_coefs_match_quadrature(s, lam, spec):
    pair = bracket_coefs(s, lam)
    lower, upper = bracket_coefs_quadrature(s, lam, spec)
    assert pair.alpha_coef == pytest.approx(lower, abs=1e-8)
    assert pair.mu_coef == pytest.approx(upper, abs=1e-8)


@pytest.mark.parametrize("s", GRID)
@pytest.mark.parametrize("lam", GRID)
def test_bracket_coefs_sum(s, lam):
    # m + M = t/s + (1-t)/(1-s), whose eta_lambda mean is lam/s + (1-lam)/(1-s)
    pair = bracket_coefs(s, lam)
    assert pair.alpha_coef + pair.mu_coef == pytest.approx(lam / s + (1.0 - lam) / (1.0 - s), abs=1e-12)
    assert pair.alpha_coef <= 1.0 + 1e-12 <= pair.mu_coef + 2e-12


@pytest.mark.parametrize("lam", GRID)
def test_bracket_coefs_on_the_diagonal(lam):
    pair = bracket_coefs(lam, lam)
    shape = lam / (1.0 - lam)
    assert pair.alpha_coef == pytest.approx(1.0 - lam ** shape, abs=1e-12)
    assert pair.mu_coef == pytest.approx(1.0 + lam ** shape, abs=1e-12)


def test_bracket_coefs_reject_endpoints():
    with pytest.raises(ExceptionInvalidData):
        bracket_coefs(0.0, 0.5)
    with pytest.raises(ExceptionInvalidData):
        bracket_coefs(0.5, 1.0)


def test_representative_functions_agree_at_half(spec):
    logarithmic = (POINTS - 1.0) / np.log(np.where(POINTS == 1.0, 2.0, POINTS))
    np.testing.assert_allclose(rep_function_bold(0.5, POINTS, spec), logarithmic, rtol=1e-9)
    np.testing.assert_allclose(rep_function_bb(0.5, POINTS, spec), logarithmic, rtol=1e-9)
    np.testing.assert_allclose(rep_function_pal(0.5, POINTS), logarithmic, rtol=1e-12)


def test_representative_functions_at_point_masses(spec):
    np.testing.assert_allclose(rep_function_bold(1.0, POINTS, spec), POINTS)
    np.testing.assert_allclose(rep_function_bb(0.0, POINTS, spec), np.ones_like(POINTS))


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_representative_slopes_at_one(lam, spec):
    h = 1e-4
    for rep in (
        lambda x: rep_function_bold(lam, x, spec),
        lambda x: rep_function_bb(lam, x, spec),
        lambda x: rep_function_pal(lam, x),
    ):
        assert rep(1.0) == pytest.approx(1.0, abs=1e-12)
        slope = (rep(1.0 + h) - rep(1.0 - h)) / (2.0 * h)
        assert slope == pytest.approx(lam, abs=1e-5)


def test_rep_function_pal_is_continuous_at_one():
    lam = 0.3
    inside = rep_function_pal(lam, 1.0 + 0.5e-6)
    outside = rep_function_pal(lam, 1.0 + 2e-6)
    assert abs(inside - outside) < 1e-6


def test_representative_functions_scalar_in_scalar_out(spec):
    assert isinstance(rep_function_bb(0.75, 2.0, spec), float)
    assert rep_function_bb(0.75, 2.0, spec) == pytest.approx(1.696427, abs=1e-5)
    assert rep_function_bold(0.75, 2.0, spec) == pytest.approx(1.725800, abs=1e-5)
    assert rep_function_pal(0.75, 2.0) == pytest.approx(1.705101, abs=1e-5)


def test_representative_functions_reject_nonpositive():
    with pytest.raises(ExceptionInvalidData):
        rep_function_pal(0.5, np.array([1.0, 0.0]))


def test_beta_value():
    assert beta_value(2.0, 3.0) == pytest.approx(1.0 / 12.0)
    assert beta_value(1.0, 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("x", np.linspace(0.25, 5.0, 20))
def test_beta_bounds_standard(x):
    for y in np.linspace(2.0, 10.0, 17):
        bounds = beta_bounds_check(float(x), float(y))
        assert bounds.orientation == BetaOrientation.STANDARD
        assert bounds.holds


@pytest.mark.parametrize("x", np.linspace(0.25, 5.0, 20))
def test_beta_bounds_reversed(x):
    for y in np.linspace(1.0, 2.0, 11):
        bounds = beta_bounds_check(float(x), float(y))
        assert bounds.holds
        if y < 2.0:
            assert bounds.orientation == BetaOrientation.REVERSED


def test_beta_bounds_validation():
    with pytest.raises(ExceptionInvalidData):
        beta_bounds_check(0.0, 2.0)
    with pytest.raises(ExceptionInvalidData):
        beta_bounds_check(1.0, 0.5)


def test_scalar_hh_chain_inverse_example(spec):
    left, middle, right = scalar_hh_chain(get_function("inv"), 1.0, 2.0, 0.75, spec)
    assert left == pytest.approx(0.5714286, abs=1e-7)
    assert middle == pytest.approx(0.5794415, abs=1e-7)
    assert right == pytest.approx(0.625, abs=1e-12)


@pytest.mark.parametrize("function_id", DEFAULT_PALETTE)
def test_scalar_hh_chain_orders(function_id, spec):
    f = get_function(function_id)
    for lam in (0.2, 0.5, 0.8):
        left, middle, right = scalar_hh_chain(f, 0.7, 3.1, lam, spec)
        if f.is_concave:
            left, right = right, left
        assert left <= middle + 1e-12
        assert middle <= right + 1e-12


@pytest.mark.parametrize("function_id", ["inv", "square", "xlogx", "pow_1.5"])
def test_scalar_derivative_bracket(function_id, spec):
    f = get_function(function_id)
    zero, gap, bound = scalar_derivative_bracket(f, 0.5, 2.5, 0.4, spec)
    assert zero == 0.0
    assert zero <= gap + 1e-12
    assert gap <= bound + 1e-10


def test_scalar_chain_rejects_outside_domain(spec):
    with pytest.raises(ExceptionInvalidData):
        scalar_hh_chain(get_function("log"), -1.0, 2.0, 0.5, spec)
