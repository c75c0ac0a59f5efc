"""
The probability measures eta_lambda and sigma_(lambda,alpha) on [0,1] and the
quadrature engine that integrates scalar- and matrix-valued maps against them.

Two node families are available:

* ``jacobi``: Gauss-Jacobi nodes for the weight t^p (p = (2*lambda-1)/(1-lambda)),
  built by Golub-Welsch. The density is absorbed into the weights, so
  polynomials of degree < 2n are integrated exactly for every lambda.
* ``legendre``: the substitution t = u^((1-lambda)/lambda), which carries
  eta_lambda onto the uniform measure, followed by Gauss-Legendre in u.

Both refine by doubling the node count until two successive estimates are
within ``abs_tol`` (spectral norm for matrix values).
"""
import logging
from functools import lru_cache
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from opmean.utils.exceptions import (
    ExceptionInvalidData,
    ExceptionPointMass,
    ExceptionQuadratureAccuracy,
)
from opmean.v1._shared.schemas import (
    EtaMeasure,
    HermitianMatrix,
    QuadratureRule,
    QuadratureSpec,
    SigmaMeasure,
)

logger = logging.getLogger(__name__)

Integrand = Callable[[Any], Any]
Result = Union[float, np.ndarray, HermitianMatrix]

UNIFORM = EtaMeasure(lam=0.5)


def eta(lam: float) -> EtaMeasure:
    return EtaMeasure(lam=lam)


def eta_weight(measure: EtaMeasure, t: float) -> float:
    """Density of eta_lambda at t in (0,1)."""
    if measure.is_point_mass:
        raise ExceptionPointMass(measure.lam)
    if not 0.0 < t < 1.0:
        raise ExceptionInvalidData(f"t must lie in (0,1), got {t}")
    return measure.shape * t ** measure.density_exponent


def eta_moment(measure: EtaMeasure, k: int) -> float:
    """Integral of t^k against eta_lambda: lambda / (lambda + k(1-lambda))."""
    if k < 0 or int(k) != k:
        raise ExceptionInvalidData(f"k must be a nonnegative integer, got {k}")
    lam = measure.lam
    if lam == 0.0:
        return 1.0 if k == 0 else 0.0
    if lam == 1.0:
        return 1.0
    return lam / (lam + k * (1.0 - lam))


@lru_cache(maxsize=512)
def _jacobi_rule(shape: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    n-point Gauss rule on [0,1] for the probability weight shape * t^(shape-1).

    In x = 2t-1 this is the Jacobi weight (1+x)^b, b = shape-1; nodes are the
    eigenvalues of the Jacobi matrix of the monic recurrence and the weights the
    squared first components of its normalized eigenvectors.
    """
    b = shape - 1.0
    k = np.arange(1, n, dtype=float)
    diagonal = np.empty(n)
    diagonal[0] = b / (b + 2.0)
    diagonal[1:] = b * b / ((2.0 * k + b) * (2.0 * k + b + 2.0))
    offdiagonal = (2.0 * k * (k + b) / (2.0 * k + b)) / np.sqrt((2.0 * k + b + 1.0) * (2.0 * k + b - 1.0))

    x, vectors = scipy.linalg.eigh_tridiagonal(diagonal, offdiagonal)
    weights = vectors[0, :] ** 2
    weights = weights / weights.sum()
    nodes = np.clip(0.5 * (1.0 + x), 0.0, 1.0)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    logger.debug(f"Jacobi rule built: shape={shape:g}, n={n}")
    return nodes, weights


@lru_cache(maxsize=64)
def _legendre_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0,1], weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (1.0 + x)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def eta_nodes(measure: EtaMeasure, n: int, rule: QuadratureRule = QuadratureRule.JACOBI) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an n-point rule for eta_lambda, 0 < lambda < 1."""
    if measure.is_point_mass:
        raise ExceptionPointMass(measure.lam)
    if rule == QuadratureRule.JACOBI:
        return _jacobi_rule(measure.shape, n)
    u, w = _legendre_rule(n)
    return u ** (1.0 / measure.shape), w


def _piecewise_nodes(
    measure: EtaMeasure, n: int, rule: QuadratureRule, breakpoints: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes for eta_lambda split at `breakpoints`.

    [0, s1] is the exact image of eta_lambda under t = s1*v, with mass
    s1^(lambda/(1-lambda)); every later piece uses Gauss-Legendre against the
    density, which is smooth away from 0.
    """
    first = breakpoints[0]
    head_t, head_w = eta_nodes(measure, n, rule)
    nodes = [first * head_t]
    weights = [first ** measure.shape * head_w]
    u, w = _legendre_rule(n)
    edges = list(breakpoints) + [1.0]
    for left, right in zip(edges[:-1], edges[1:]):
        t = left + (right - left) * u
        nodes.append(t)
        weights.append((right - left) * w * measure.shape * t ** measure.density_exponent)
    return np.concatenate(nodes), np.concatenate(weights)


def _to_array(value: Any) -> np.ndarray:
    if isinstance(value, HermitianMatrix):
        return value.entries
    return np.asarray(value)


def _apply_rule(g: Integrand, t: np.ndarray, w: np.ndarray, vectorized: bool) -> Tuple[np.ndarray, bool]:
    if vectorized:
        return np.tensordot(w, _to_array(g(t)), axes=(0, 0)), False
    raw = [g(float(node)) for node in t]
    values = np.stack([_to_array(value) for value in raw])
    return np.tensordot(w, values, axes=(0, 0)), isinstance(raw[0], HermitianMatrix)


def _distance(a: np.ndarray, b: np.ndarray) -> float:
    difference = np.asarray(a) - np.asarray(b)
    if difference.ndim >= 2:
        return float(np.max(np.linalg.norm(difference, ord=2, axis=(-2, -1))))
    return float(np.max(np.abs(difference))) if difference.size else 0.0


def _finish(estimate: np.ndarray, matrix_out: bool) -> Result:
    if estimate.ndim == 0:
        return float(estimate)
    if matrix_out:
        return HermitianMatrix(entries=estimate)
    return estimate


def _point_value(g: Integrand, t: float, vectorized: bool) -> Tuple[np.ndarray, bool]:
    if vectorized:
        value = g(np.array([t]))
        return _to_array(value)[0], False
    value = g(t)
    return _to_array(value), isinstance(value, HermitianMatrix)


def integrate_eta(
    g: Integrand,
    measure: EtaMeasure,
    spec: Optional[QuadratureSpec] = None,
    vectorized: bool = False,
    breakpoints: Optional[Iterable[float]] = None,
) -> Result:
    """
    Integral of g against eta_lambda.

    Args:
        g: Map on [0,1] returning a scalar, an array or a HermitianMatrix
        measure: eta_lambda; lambda in {0,1} returns g(0) or g(1) exactly
        spec: Quadrature policy, defaults from settings
        vectorized: g takes the whole node vector and returns values stacked on axis 0
        breakpoints: Points in (0,1) where g is not smooth (kinks)

    Returns:
        float for scalar integrands, HermitianMatrix when g returns HermitianMatrix, ndarray otherwise
    """
    spec = spec or QuadratureSpec()
    if measure.is_point_mass:
        value, matrix_out = _point_value(g, measure.lam, vectorized)
        return _finish(value, matrix_out)

    cuts: List[float] = sorted({float(s) for s in (breakpoints or []) if 0.0 < s < 1.0})
    previous: Optional[np.ndarray] = None
    before: Optional[np.ndarray] = None
    n = spec.base_nodes
    for level in range(spec.max_doublings + 1):
        n = spec.base_nodes * 2 ** level
        if cuts:
            t, w = _piecewise_nodes(measure, n, spec.rule, cuts)
        else:
            t, w = eta_nodes(measure, n, spec.rule)
        estimate, matrix_out = _apply_rule(g, t, w, vectorized)
        if previous is not None:
            difference = _distance(estimate, previous)
            logger.debug(f"eta_{measure.lam:g}: n={n}, change={difference:.3e}")
            if difference <= spec.abs_tol:
                return _finish(estimate, matrix_out)
        before, previous = previous, estimate
    raise ExceptionQuadratureAccuracy(previous=before, last=previous, nodes=n, abs_tol=spec.abs_tol)


def integrate_sigma(
    g: Integrand,
    measure: SigmaMeasure,
    spec: Optional[QuadratureSpec] = None,
    vectorized: bool = False,
) -> Result:
    """(1-alpha) * integral against eta_lambda + alpha * integral against eta_(1-lambda)."""
    total: Any = None
    matrix_out = False
    for weight, component in measure.components():
        if weight == 0.0:
            continue
        value = integrate_eta(g, component, spec, vectorized)
        matrix_out = matrix_out or isinstance(value, HermitianMatrix)
        part = weight * _to_array(value)
        total = part if total is None else total + part
    return _finish(np.asarray(total), matrix_out)


def integrate_uniform(
    g: Integrand, spec: Optional[QuadratureSpec] = None, vectorized: bool = False
) -> Result:
    """Integral of g against dt on [0,1]."""
    return integrate_eta(g, UNIFORM, spec, vectorized)
