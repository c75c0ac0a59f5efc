"""
The registry of inequality chains.

Every chain builds its terms under the operator convex orientation; links
(lo, hi) say T_lo <= T_hi. Chains marked orientation sensitive are compared
the other way round when f is operator concave.
"""
import logging
from typing import Dict, List, Optional

import numpy as np

from opmean.v1._shared.base_chain import (
    OPEN_UNIT,
    UNIT,
    BaseChain,
    consecutive_links,
)
from opmean.v1._shared.schemas import (
    EtaMeasure,
    HermitianMatrix,
    QuadratureSpec,
    SigmaMeasure,
    TestFunction,
)
from opmean.v1.hermat.palette import get_function
from opmean.v1.hermat.service import (
    MatrixLike,
    _apply_spectral,
    _check_dims,
    as_array,
    as_hermitian,
    frechet_derivative_batch,
    inverse,
    inverse_derivative,
)
from opmean.v1.means.service import (
    CongruenceFrame,
    eta_average,
    harm_mean,
    hh_functional,
    nabla,
    sharp_mean,
    wlog_geom,
    wlog_harm,
)
from opmean.v1.measure.service import integrate_eta, integrate_sigma, integrate_uniform
from opmean.v1.scalar.service import (
    beta_bounds_check,
    bracket_coefs,
    ratio_bounds,
    rep_function_bb,
    scalar_derivative_bracket,
)

logger = logging.getLogger(__name__)

BETA_X_GRID = [float(x) for x in np.linspace(0.25, 5.0, 20)]
BETA_Y_GRID = [float(y) for y in np.linspace(1.0, 10.0, 19)]


def _f_path(f: TestFunction, a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    """f(A nabla_lam B)."""
    return _apply_spectral(f, nabla(a, b, lam))


def _f_nabla(fa: np.ndarray, fb: np.ndarray, lam: float) -> np.ndarray:
    """f(A) nabla_lam f(B)."""
    return (1.0 - lam) * fa + lam * fb


def _jensen_gap(f: TestFunction, a: np.ndarray, b: np.ndarray, fa: np.ndarray, fb: np.ndarray, s: float) -> np.ndarray:
    return _f_nabla(fa, fb, s) - _f_path(f, a, b, s)


def _eta_path(f: TestFunction, a: np.ndarray, b: np.ndarray, lam: float, spec: QuadratureSpec) -> np.ndarray:
    return as_array(eta_average(f, a, b, lam, spec))


def classical_hh_chain(
    f: TestFunction, A: MatrixLike, B: MatrixLike, spec: Optional[QuadratureSpec] = None
) -> List[HermitianMatrix]:
    """f((A+B)/2) <= integral of f(A nabla_t B) dt <= (f(A)+f(B))/2, for operator convex f."""
    _check_dims(A, B)
    a, b = as_array(A), as_array(B)
    middle = integrate_uniform(lambda t: _apply_spectral(f, nabla(a, b, t)), spec, vectorized=True)
    return [
        as_hermitian(_f_path(f, a, b, 0.5)),
        as_hermitian(middle),
        as_hermitian(0.5 * (_apply_spectral(f, a) + _apply_spectral(f, b))),
    ]


def lwhhoi_inner_terms(
    f: TestFunction, a: np.ndarray, b: np.ndarray, lam: float, spec: QuadratureSpec
) -> List[np.ndarray]:
    """
    The two nested averages around X = A nabla_lam B:
    integral of f(X nabla (A nabla_x B)) and integral of M_(lam,1/2)(f; X, A nabla_x B),
    both against eta_lam(x).
    """
    measure = EtaMeasure(lam=lam)
    midpoint = integrate_eta(
        lambda x: _apply_spectral(f, nabla(a, b, 0.5 * (lam + x))), measure, spec, vectorized=True
    )
    mixture = SigmaMeasure(lam=lam, alpha=0.5)

    def inner(x: float) -> np.ndarray:
        # X nabla_t (A nabla_x B) = A nabla_((1-t)lam + t x) B
        value = integrate_sigma(
            lambda t: _apply_spectral(f, nabla(a, b, (1.0 - t) * lam + t * x)), mixture, spec, vectorized=True
        )
        return np.asarray(value)

    nested = integrate_eta(inner, measure, spec.outer())
    return [np.asarray(midpoint), np.asarray(nested)]


class WeightedHHChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="whhoi",
            param_ranges={"lambda": UNIT},
            links=consecutive_links(0, 3),
            anchor="f(A nabla_lam B) <= integral of f(A nabla_t B) d eta_lam <= f(A) nabla_lam f(B)",
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        return [
            _f_path(f, a, b, lam),
            _eta_path(f, a, b, lam, spec),
            _f_nabla(_apply_spectral(f, a), _apply_spectral(f, b), lam),
        ]


class RefinedHHChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rhhoi",
            param_ranges={},
            links=consecutive_links(0, 4),
            anchor="classical operator Hermite-Hadamard chain refined by averaging eta_lam over lam",
        )

    def terms(self, a, b, params, f, spec):
        uniform = integrate_uniform(lambda t: _apply_spectral(f, nabla(a, b, t)), spec, vectorized=True)
        averaged = integrate_uniform(lambda lam: _eta_path(f, a, b, lam, spec), spec.outer())
        return [
            _f_path(f, a, b, 0.5),
            np.asarray(uniform),
            np.asarray(averaged),
            0.5 * (_apply_spectral(f, a) + _apply_spectral(f, b)),
        ]


class MixtureHHChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="whhoi2",
            param_ranges={"lambda": OPEN_UNIT, "alpha": UNIT},
            links=consecutive_links(0, 5),
            anchor="five-term chain through r(lam, alpha) and the mixture sigma_(lam, alpha)",
        )

    def terms(self, a, b, params, f, spec):
        lam, alpha = params["lambda"], params["alpha"]
        r = lam + alpha - 2.0 * lam * alpha
        fa, fb = _apply_spectral(f, a), _apply_spectral(f, b)
        # r(lam, t) = lam nabla_t (1-lam)
        reflected = integrate_eta(
            lambda t: _apply_spectral(f, nabla(a, b, lam + t - 2.0 * lam * t)),
            EtaMeasure(lam=alpha),
            spec,
            vectorized=True,
        )
        return [
            _f_path(f, a, b, r),
            np.asarray(reflected),
            (1.0 - alpha) * _f_path(f, a, b, lam) + alpha * _f_path(f, a, b, 1.0 - lam),
            as_array(hh_functional(f, a, b, lam, alpha, spec)),
            _f_nabla(fa, fb, r),
        ]


class NestedHHChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="lwhhoi",
            param_ranges={"lambda": OPEN_UNIT},
            links=consecutive_links(0, 5),
            anchor="nested refinement of the left inequality around X = A nabla_lam B",
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        fX = _f_path(f, a, b, lam)
        midpoint, nested = lwhhoi_inner_terms(f, a, b, lam, spec)
        average = _eta_path(f, a, b, lam, spec)
        return [fX, midpoint, nested, 0.5 * (fX + average), average]


class JensenGapChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rocf",
            param_ranges={"s": OPEN_UNIT, "t": UNIT},
            links=consecutive_links(0, 3),
            anchor="m(s,t) D_s <= D_t <= M(s,t) D_s for the Jensen gap D_x = f(A) nabla_x f(B) - f(A nabla_x B)",
        )

    def terms(self, a, b, params, f, spec):
        s, t = params["s"], params["t"]
        fa, fb = _apply_spectral(f, a), _apply_spectral(f, b)
        low, high = ratio_bounds(s, t)
        gap_s = _jensen_gap(f, a, b, fa, fb, s)
        return [low * gap_s, _jensen_gap(f, a, b, fa, fb, t), high * gap_s]


class RightReverseChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rwhhoir",
            param_ranges={"s": OPEN_UNIT, "lambda": OPEN_UNIT},
            links=consecutive_links(0, 3),
            anchor="alpha(s,lam) D_s <= f(A) nabla_lam f(B) - integral of f d eta_lam <= mu(s,lam) D_s",
        )

    def terms(self, a, b, params, f, spec):
        s, lam = params["s"], params["lambda"]
        coefs = bracket_coefs(s, lam)
        fa, fb = _apply_spectral(f, a), _apply_spectral(f, b)
        gap_s = _jensen_gap(f, a, b, fa, fb, s)
        defect = _f_nabla(fa, fb, lam) - _eta_path(f, a, b, lam, spec)
        return [coefs.alpha_coef * gap_s, defect, coefs.mu_coef * gap_s]


class DiagonalReverseChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="cor_a",
            param_ranges={"lambda": OPEN_UNIT},
            links=consecutive_links(0, 3),
            anchor="right-defect bracket at s = lam with coefficients 1 -/+ lam^(lam/(1-lam))",
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        power = lam ** (lam / (1.0 - lam))
        fa, fb = _apply_spectral(f, a), _apply_spectral(f, b)
        gap = _jensen_gap(f, a, b, fa, fb, lam)
        defect = _f_nabla(fa, fb, lam) - _eta_path(f, a, b, lam, spec)
        return [(1.0 - power) * gap, defect, (1.0 + power) * gap]


class LeftDerivativeChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rwhhoil",
            param_ranges={"lambda": UNIT},
            links=consecutive_links(0, 3),
            anchor="0 <= integral of f d eta_lam - f(A nabla_lam B) <= integral of (t-lam) Df(A nabla_t B)(B-A) d eta_lam",
            needs_derivative=True,
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        direction = b - a

        def slope(t: np.ndarray) -> np.ndarray:
            return (t - lam)[:, None, None] * frechet_derivative_batch(f, nabla(a, b, t), direction)

        bound = integrate_eta(slope, EtaMeasure(lam=lam), spec, vectorized=True)
        defect = _eta_path(f, a, b, lam, spec) - _f_path(f, a, b, lam)
        return [np.zeros_like(defect), defect, np.asarray(bound)]


class ScalarDerivativeChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rwhhir_scalar",
            param_ranges={"lambda": UNIT},
            links=consecutive_links(0, 3),
            anchor="scalar left-defect bracket, run on the diagonal pairs (A_ii, B_ii)",
            needs_derivative=True,
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        rows = [
            scalar_derivative_bracket(f, float(np.real(a[i, i])), float(np.real(b[i, i])), lam, spec)
            for i in range(a.shape[0])
        ]
        return [np.diag([row[k] for row in rows]) for k in range(3)]


class HarmonicLogChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="nwomi1",
            param_ranges={"lambda": UNIT},
            links=consecutive_links(0, 3),
            anchor="A !_lam B <= harmonic weighted logarithmic mean <= A nabla_lam B",
            takes_function=False,
            orientation_sensitive=False,
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        return [as_array(harm_mean(a, b, lam)), as_array(wlog_harm(a, b, lam, spec)), nabla(a, b, lam)]


class GeometricLogChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="nwomi2",
            param_ranges={"lambda": UNIT},
            links=consecutive_links(0, 3),
            anchor="A #_lam B <= geometric weighted logarithmic mean <= A nabla_lam B",
            takes_function=False,
            orientation_sensitive=False,
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        return [as_array(sharp_mean(a, b, lam)), as_array(wlog_geom(a, b, lam, spec)), nabla(a, b, lam)]


class InverseGapChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="enwomi1",
            param_ranges={"s": OPEN_UNIT, "lambda": OPEN_UNIT},
            links=consecutive_links(0, 3),
            anchor="inverse harmonic gap (A !_lam B)^-1 - L_lam^-1 bracketed by alpha(s,lam) and mu(s,lam)",
            takes_function=False,
            orientation_sensitive=False,
        )

    def terms(self, a, b, params, f, spec):
        s, lam = params["s"], params["lambda"]
        coefs = bracket_coefs(s, lam)
        a_inv, b_inv = inverse(a), inverse(b)
        gap_s = nabla(a_inv, b_inv, s) - inverse(nabla(a, b, s))
        middle = nabla(a_inv, b_inv, lam) - inverse(wlog_harm(a, b, lam, spec))
        return [coefs.alpha_coef * gap_s, middle, coefs.mu_coef * gap_s]


class GeometricGapChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="enwomi2",
            param_ranges={"s": OPEN_UNIT, "lambda": OPEN_UNIT},
            links=consecutive_links(0, 3),
            anchor="A nabla_lam B minus the geometric weighted logarithmic mean, bracketed by alpha(s,lam) and mu(s,lam)",
            takes_function=False,
            orientation_sensitive=False,
        )

    def terms(self, a, b, params, f, spec):
        s, lam = params["s"], params["lambda"]
        coefs = bracket_coefs(s, lam)
        gap_s = nabla(a, b, s) - as_array(sharp_mean(a, b, s))
        middle = nabla(a, b, lam) - as_array(wlog_geom(a, b, lam, spec))
        return [coefs.alpha_coef * gap_s, middle, coefs.mu_coef * gap_s]


class DiagonalMeanChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rnwomi",
            param_ranges={"lambda": OPEN_UNIT},
            links=[link for start in (0, 3, 6, 9) for link in consecutive_links(start, 3)],
            anchor="both logarithmic means squeezed between convex combinations at s = lam, with refinements",
            takes_function=False,
            orientation_sensitive=False,
            segments=["inverse harmonic", "geometric", "harmonic refinement", "arithmetic refinement"],
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        coefs = bracket_coefs(lam, lam)
        alpha, mu = coefs.alpha_coef, coefs.mu_coef
        harm_inv = nabla(inverse(a), inverse(b), lam)
        arith = nabla(a, b, lam)
        arith_inv = inverse(arith)
        sharp = as_array(sharp_mean(a, b, lam))
        log_harm = as_array(wlog_harm(a, b, lam, spec))
        log_geom = as_array(wlog_geom(a, b, lam, spec))
        upper_inv = (1.0 - alpha) * harm_inv + alpha * arith_inv
        upper_geom = (1.0 - alpha) * arith + alpha * sharp
        return [
            (1.0 - mu) * harm_inv + mu * arith_inv, inverse(log_harm), upper_inv,
            (1.0 - mu) * arith + mu * sharp, log_geom, upper_geom,
            inverse(harm_inv), inverse(upper_inv), log_harm,
            log_geom, upper_geom, arith,
        ]


class InverseNestedChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="rnwomi3",
            param_ranges={"lambda": OPEN_UNIT},
            links=consecutive_links(0, 5),
            anchor="nested chain for f = inv from the harmonic weighted logarithmic mean up to A nabla_lam B",
            takes_function=False,
            orientation_sensitive=False,
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        X = nabla(a, b, lam)
        log_harm = as_array(wlog_harm(a, b, lam, spec))
        midpoint, nested = lwhhoi_inner_terms(get_function("inv"), a, b, lam, spec)
        return [
            log_harm,
            as_array(harm_mean(X, log_harm, 0.5)),
            inverse(nested),
            inverse(midpoint),
            X,
        ]


class InverseDerivativeChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="thm311",
            param_ranges={"lambda": OPEN_UNIT},
            links=consecutive_links(0, 3),
            anchor="0 <= L_lam^-1 - (A nabla_lam B)^-1 <= integral of (lam-t) Y_t^-1 (B-A) Y_t^-1 d eta_lam",
            takes_function=False,
            orientation_sensitive=False,
        )

    def terms(self, a, b, params, f, spec):
        lam = params["lambda"]
        measure = EtaMeasure(lam=lam)
        direction = b - a
        averaged_inverse = integrate_eta(
            lambda t: np.linalg.inv(nabla(a, b, t)), measure, spec, vectorized=True
        )
        bound = integrate_eta(
            lambda t: (t - lam) * as_array(inverse_derivative(nabla(a, b, t), direction)), measure, spec
        )
        middle = np.asarray(averaged_inverse) - inverse(nabla(a, b, lam))
        return [np.zeros_like(middle), middle, np.asarray(bound)]


class MixedMeanChain(BaseChain):
    """
    Five sub-chains mixing the geometric and the logarithmic means, all
    computed in the eigenbasis of C = A^{-1/2} B A^{-1/2}, where A <-> 1,
    A #_r B <-> c^r and the geometric weighted logarithmic mean of
    (A, A nabla_t B) <-> g_lam(1 - t + t c).

    The three brackets use the concave profiles t -> (1-t+tc)^r and
    t -> g_lam(1-t+tc), so they are compared in descending order.
    """

    def __init__(self):
        links = (
            consecutive_links(0, 3)
            + consecutive_links(3, 3)
            + consecutive_links(6, 3, descending=True)
            + consecutive_links(9, 3, descending=True)
            + consecutive_links(12, 3, descending=True)
        )
        super().__init__(
            id="mixte",
            param_ranges={"r": UNIT, "s": OPEN_UNIT, "lambda": OPEN_UNIT},
            links=links,
            anchor="mixed inequalities between A #_r B, the geometric weighted logarithmic mean and their nabla combinations",
            takes_function=False,
            orientation_sensitive=False,
            segments=["power path", "logarithmic path", "power bracket", "power bracket at s = lam", "logarithmic bracket"],
        )

    def terms(self, a, b, params, f, spec):
        r, s, lam = params["r"], params["s"], params["lambda"]
        frame = CongruenceFrame(a, b)
        c = frame.c
        measure = EtaMeasure(lam=lam)

        def g(x):
            return np.asarray(rep_function_bb(lam, x, spec))

        def segment(t):
            return 1.0 - t[:, None] + t[:, None] * c[None, :]

        power_path = np.asarray(integrate_eta(lambda t: segment(t) ** r, measure, spec, vectorized=True))
        log_path = np.asarray(integrate_eta(lambda t: g(segment(t)), measure, spec.outer(), vectorized=True))

        one = np.ones_like(c)
        power_low = (1.0 - lam) * one + lam * c ** r
        log_low = (1.0 - lam) * one + lam * g(c)
        power_gap_s = (1.0 - s) * one + s * c ** r - (1.0 - s + s * c) ** r
        power_gap_lam = power_low - (1.0 - lam + lam * c) ** r
        log_gap_s = (1.0 - s) * one + s * g(c) - g(1.0 - s + s * c)
        power_mid = power_low - power_path
        log_mid = log_low - log_path

        coefs = bracket_coefs(s, lam)
        diagonal = bracket_coefs(lam, lam)
        values = [
            power_low, power_path, (1.0 - lam + lam * c) ** r,
            log_low, log_path, g(1.0 - lam + lam * c),
            coefs.alpha_coef * power_gap_s, power_mid, coefs.mu_coef * power_gap_s,
            diagonal.alpha_coef * power_gap_lam, power_mid, diagonal.mu_coef * power_gap_lam,
            coefs.alpha_coef * log_gap_s, log_mid, coefs.mu_coef * log_gap_s,
        ]
        return [frame.lift(value) for value in values]


class BetaBoundsChain(BaseChain):
    def __init__(self):
        super().__init__(
            id="beta_scalar",
            param_ranges={"x": (0.0, np.inf, True, True), "y": (1.0, np.inf, False, True)},
            links=consecutive_links(0, 3),
            anchor="1/(x(1+x)^(y-1)) <= B(x,y) <= 1/(x(1+x)) for y >= 2, reversed for 1 <= y <= 2",
            takes_function=False,
            takes_operands=False,
            default_grid={"x": BETA_X_GRID, "y": BETA_Y_GRID},
        )

    def is_reversed(self, params: Dict[str, float], f: Optional[TestFunction]) -> bool:
        return params.get("y", 2.0) < 2.0

    def terms(self, a, b, params, f, spec):
        bounds = beta_bounds_check(params["x"], params["y"])
        return [np.array([[bounds.lower]]), np.array([[bounds.value]]), np.array([[bounds.upper]])]


CHAINS: List[BaseChain] = [
    WeightedHHChain(),
    RefinedHHChain(),
    MixtureHHChain(),
    NestedHHChain(),
    JensenGapChain(),
    RightReverseChain(),
    DiagonalReverseChain(),
    LeftDerivativeChain(),
    ScalarDerivativeChain(),
    HarmonicLogChain(),
    GeometricLogChain(),
    InverseGapChain(),
    GeometricGapChain(),
    DiagonalMeanChain(),
    InverseNestedChain(),
    InverseDerivativeChain(),
    MixedMeanChain(),
    BetaBoundsChain(),
]


class ChainRegistry:
    """Lookup over CHAINS, in registry order."""

    def __init__(self, chains: List[BaseChain]):
        self._chains = {chain.id: chain for chain in chains}

    def get_all(self) -> List[BaseChain]:
        return list(self._chains.values())

    def get_by_id(self, chain_id: str) -> Optional[BaseChain]:
        return self._chains.get(chain_id)


registry = ChainRegistry(CHAINS)
