import logging
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import gammaln

from opmean.utils.exceptions import ExceptionInvalidData
from opmean.v1._shared.schemas import (
    BetaBounds,
    BetaOrientation,
    CoefficientPair,
    EtaMeasure,
    QuadratureSpec,
    TestFunction,
)
from opmean.v1.measure.service import integrate_eta

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# |x - 1| below this uses the series of rep_function_pal
PAL_SERIES_RADIUS = 1e-6


def _check_unit(name: str, value: float, open_: bool = False) -> None:
    if open_:
        if not 0.0 < value < 1.0:
            raise ExceptionInvalidData(f"{name} must lie in (0,1), got {value}")
    elif not 0.0 <= value <= 1.0:
        raise ExceptionInvalidData(f"{name} must lie in [0,1], got {value}")


def _check_positive(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ExceptionInvalidData("x must be positive and finite")
    return arr


def _output(arr: np.ndarray) -> ArrayLike:
    return float(arr) if arr.ndim == 0 else arr


def r_coef(nu: float, alpha: float) -> float:
    """r(nu, alpha) = nu + alpha - 2*nu*alpha."""
    _check_unit("nu", nu)
    _check_unit("alpha", alpha)
    return nu + alpha - 2.0 * nu * alpha


def ratio_bounds(s: float, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """m = min(t/s, (1-t)/(1-s)) and M = max(...); m <= 1 <= M."""
    _check_unit("s", s, open_=True)
    t_arr = np.asarray(t, dtype=float)
    left = t_arr / s
    right = (1.0 - t_arr) / (1.0 - s)
    return _output(np.minimum(left, right)), _output(np.maximum(left, right))


def bracket_coefs(s: float, lam: float) -> CoefficientPair:
    """
    Closed forms of the integrals of m(s,.) and M(s,.) against eta_lambda.

    Args:
        s: Reference weight in (0,1)
        lam: Weight of eta_lambda in (0,1)

    Returns:
        alpha = ((1-lam)/(1-s)) * (1 - s^(lam/(1-lam))), mu = (1-lam)/(1-s) + lam/s - alpha
    """
    _check_unit("s", s, open_=True)
    _check_unit("lambda", lam, open_=True)
    shape = lam / (1.0 - lam)
    alpha = (1.0 - lam) / (1.0 - s) * -np.expm1(shape * np.log(s))
    mu = (1.0 - lam) / (1.0 - s) + lam / s - alpha
    return CoefficientPair(alpha_coef=float(alpha), mu_coef=float(mu), s=s, lam=lam)


def bracket_coefs_quadrature(
    s: float, lam: float, spec: Optional[QuadratureSpec] = None
) -> Tuple[float, float]:
    """The same two integrals by quadrature, split at the kink t = s."""
    _check_unit("s", s, open_=True)
    measure = EtaMeasure(lam=lam)

    def m(t):
        return ratio_bounds(s, t)[0]

    def M(t):
        return ratio_bounds(s, t)[1]

    lower = integrate_eta(m, measure, spec, vectorized=True, breakpoints=[s])
    upper = integrate_eta(M, measure, spec, vectorized=True, breakpoints=[s])
    return float(lower), float(upper)


def _eta_average(kernel, lam: float, x: np.ndarray, spec: Optional[QuadratureSpec]) -> np.ndarray:
    """Integral over t of kernel(t, x) against eta_lambda, for every entry of x."""
    flat = x.reshape(-1)
    values = integrate_eta(
        lambda t: kernel(t[:, None], flat[None, :]),
        EtaMeasure(lam=lam),
        spec,
        vectorized=True,
    )
    return np.asarray(values).reshape(x.shape)


def rep_function_bold(lam: float, x: ArrayLike, spec: Optional[QuadratureSpec] = None) -> ArrayLike:
    """f_lambda(x) = (integral of (1 nabla_t x)^{-1} d eta_lambda)^{-1}."""
    _check_unit("lambda", lam)
    arr = _check_positive(x)
    average = _eta_average(lambda t, v: 1.0 / ((1.0 - t) + t * v), lam, arr, spec)
    return _output(1.0 / average)


def rep_function_bb(lam: float, x: ArrayLike, spec: Optional[QuadratureSpec] = None) -> ArrayLike:
    """g_lambda(x) = integral of x^t d eta_lambda(t)."""
    _check_unit("lambda", lam)
    arr = _check_positive(x)
    return _output(_eta_average(lambda t, v: np.exp(t * np.log(v)), lam, arr, spec))


def rep_function_pal(lam: float, x: ArrayLike) -> ArrayLike:
    """
    Representative function of the weighted logarithmic mean L_lambda:
    (1/log x) * (((1-lam)/lam)(x^lam - 1) + (lam/(1-lam)) x^lam (x^(1-lam) - 1)).
    """
    _check_unit("lambda", lam, open_=True)
    arr = _check_positive(x)
    y = np.log(arr)
    near_one = np.abs(arr - 1.0) < PAL_SERIES_RADIUS
    safe_y = np.where(near_one, 1.0, y)
    exact = (
        (1.0 - lam) / lam * np.expm1(lam * safe_y)
        + lam / (1.0 - lam) * np.exp(lam * safe_y) * np.expm1((1.0 - lam) * safe_y)
    ) / safe_y
    series = 1.0 + lam * y + (lam + 2.0 * lam * lam) * y * y / 6.0
    return _output(np.where(near_one, series, exact))


def beta_value(x: float, y: float) -> float:
    """B(x, y) through log-gamma."""
    return float(np.exp(gammaln(x) + gammaln(y) - gammaln(x + y)))


def beta_bounds_check(x: float, y: float) -> BetaBounds:
    """
    1/(x(1+x)^(y-1)) <= B(x,y) <= 1/(x(1+x)) for y >= 2, reversed for 1 <= y <= 2.
    """
    if not x > 0.0:
        raise ExceptionInvalidData(f"x must be positive, got {x}")
    if not y >= 1.0:
        raise ExceptionInvalidData(f"y must be >= 1, got {y}")
    lower = 1.0 / (x * (1.0 + x) ** (y - 1.0))
    upper = 1.0 / (x * (1.0 + x))
    orientation = BetaOrientation.STANDARD if y >= 2.0 else BetaOrientation.REVERSED
    return BetaBounds(
        x=x, y=y, lower=lower, value=beta_value(x, y), upper=upper, orientation=orientation
    )


def _check_scalar_domain(f: TestFunction, *points: float) -> None:
    if np.any(f.outside_domain(np.asarray(points, dtype=float))):
        raise ExceptionInvalidData(f"{points} not inside the domain {f.domain} of {f.id}")


def scalar_hh_chain(
    f: TestFunction, a: float, b: float, lam: float, spec: Optional[QuadratureSpec] = None
) -> Tuple[float, float, float]:
    """(f(a nabla_lam b), integral of f(a nabla_t b) d eta_lam, f(a) nabla_lam f(b))."""
    _check_unit("lambda", lam)
    _check_scalar_domain(f, a, b)
    left = float(f.value(np.asarray((1.0 - lam) * a + lam * b)))
    middle = integrate_eta(
        lambda t: f.value((1.0 - t) * a + t * b), EtaMeasure(lam=lam), spec, vectorized=True
    )
    right = float((1.0 - lam) * f.value(np.asarray(a, dtype=float)) + lam * f.value(np.asarray(b, dtype=float)))
    return left, float(middle), right


def scalar_derivative_bracket(
    f: TestFunction, a: float, b: float, lam: float, spec: Optional[QuadratureSpec] = None
) -> Tuple[float, float, float]:
    """
    (0, integral of f(a nabla_t b) - f(a nabla_lam b), (b-a) * integral of (t-lam) f'(a nabla_t b)),
    all against eta_lambda.
    """
    left, middle, _ = scalar_hh_chain(f, a, b, lam, spec)
    bound = integrate_eta(
        lambda t: (t - lam) * f.derivative((1.0 - t) * a + t * b),
        EtaMeasure(lam=lam),
        spec,
        vectorized=True,
    )
    return 0.0, middle - left, float((b - a) * bound)
