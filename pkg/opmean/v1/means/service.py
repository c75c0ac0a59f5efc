"""
Operator means of positive-definite matrices.

Kubo-Ando means are evaluated through their representative functions:
A sigma B = A^{1/2} f_sigma(C) A^{1/2} with C = A^{-1/2} B A^{-1/2}. The
CongruenceFrame caches A^{1/2} and the eigendecomposition of C so that any
function of C can be pushed back through the congruence.
"""
import logging
from enum import Enum as PyEnum
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

from opmean.utils.exceptions import ExceptionInvalidData
from opmean.v1._shared.schemas import (
    EtaMeasure,
    HermitianMatrix,
    MeanKind,
    MeanKindId,
    QuadratureSpec,
    SigmaMeasure,
    TestFunction,
)
from opmean.v1.hermat.service import (
    MatrixLike,
    _apply_spectral,
    _check_dims,
    _eigh,
    _from_eigen,
    _sqrt_pair,
    as_array,
    as_hermitian,
    commutator_norm,
    hermitian_part,
    inverse,
    require_positive_definite,
)
from opmean.v1.measure.service import integrate_eta, integrate_sigma, integrate_uniform
from opmean.v1.scalar.service import rep_function_bb, rep_function_bold, rep_function_pal

logger = logging.getLogger(__name__)

COMMUTING_TOL = 1e-12


class Route(str, PyEnum):
    AUTO = "auto"
    INTEGRAL = "integral"
    REPRESENTATIVE = "representative"


class CongruenceFrame:
    """A^{1/2}, and C = A^{-1/2} B A^{-1/2} = V diag(c) V*."""

    def __init__(self, A: MatrixLike, B: MatrixLike):
        _check_dims(A, B)
        require_positive_definite(B, "B")
        self.root, self.inverse_root = _sqrt_pair(A, "A")
        inner = hermitian_part(self.inverse_root @ as_array(B) @ self.inverse_root)
        self.c, self.V = _eigh(inner)
        # roundoff can leave tiny negative eigenvalues of an HPD congruence
        self.c = np.clip(self.c, np.finfo(float).tiny, None)

    def lift(self, values: np.ndarray) -> np.ndarray:
        """A^{1/2} phi(C) A^{1/2} from the values phi(c_i) (batched on leading axes)."""
        inner = _from_eigen(np.asarray(values), self.V)
        return hermitian_part(self.root @ inner @ self.root)


def nabla(A: np.ndarray, B: np.ndarray, lam: Union[float, np.ndarray]) -> np.ndarray:
    """(1-lam)A + lam B; an array of weights gives a stack."""
    lam_arr = np.asarray(lam, dtype=float)
    if lam_arr.ndim == 0:
        return (1.0 - lam) * A + lam * B
    weights = lam_arr[:, None, None]
    return (1.0 - weights) * A + weights * B


def _check_weight(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ExceptionInvalidData(f"weight must lie in [0,1], got {lam}")


def elementary_mean(kind: Union[MeanKindId, str], A: MatrixLike, B: MatrixLike, lam: float) -> HermitianMatrix:
    """Weighted arithmetic (nabla), harmonic (harm) or geometric (sharp) mean."""
    kind = MeanKindId(kind)
    _check_weight(lam)
    _check_dims(A, B)
    a, b = as_array(A), as_array(B)
    if kind == MeanKindId.NABLA:
        return as_hermitian(nabla(a, b, lam))
    if kind == MeanKindId.HARM:
        require_positive_definite(a, "A")
        require_positive_definite(b, "B")
        if lam == 0.0:
            return as_hermitian(a)
        if lam == 1.0:
            return as_hermitian(b)
        return as_hermitian(inverse(nabla(inverse(a), inverse(b), lam)))
    if kind == MeanKindId.SHARP:
        frame = CongruenceFrame(a, b)
        if lam == 0.0:
            return as_hermitian(a)
        if lam == 1.0:
            return as_hermitian(b)
        return as_hermitian(frame.lift(frame.c ** lam))
    raise ExceptionInvalidData(f"{kind.value} is not an elementary mean")


def nabla_mean(A: MatrixLike, B: MatrixLike, lam: float) -> HermitianMatrix:
    return elementary_mean(MeanKindId.NABLA, A, B, lam)


def harm_mean(A: MatrixLike, B: MatrixLike, lam: float) -> HermitianMatrix:
    return elementary_mean(MeanKindId.HARM, A, B, lam)


def sharp_mean(A: MatrixLike, B: MatrixLike, lam: float) -> HermitianMatrix:
    return elementary_mean(MeanKindId.SHARP, A, B, lam)


def log_mean(A: MatrixLike, B: MatrixLike, spec: Optional[QuadratureSpec] = None) -> HermitianMatrix:
    """Integral of A sharp_t B over t in [0,1], as a matrix-valued quadrature."""
    frame = CongruenceFrame(A, B)
    log_c = np.log(frame.c)
    value = integrate_uniform(lambda t: frame.lift(np.exp(t[:, None] * log_c[None, :])), spec, vectorized=True)
    return as_hermitian(value)


def log_mean_harmonic_form(A: MatrixLike, B: MatrixLike, spec: Optional[QuadratureSpec] = None) -> HermitianMatrix:
    """(Integral of A^{-1} !_t B^{-1} dt)^{-1}, the second expression of the logarithmic mean."""
    _check_dims(A, B)
    a = require_positive_definite_array(A, "A")
    b = require_positive_definite_array(B, "B")

    def integrand(t: np.ndarray) -> np.ndarray:
        # A^{-1} !_t B^{-1} = ((1-t)A + tB)^{-1}
        return np.linalg.inv(nabla(a, b, t))

    return as_hermitian(inverse(integrate_uniform(integrand, spec, vectorized=True)))


def require_positive_definite_array(M: MatrixLike, name: str) -> np.ndarray:
    require_positive_definite(M, name)
    return as_array(M)


def pal_log_mean(A: MatrixLike, B: MatrixLike, lam: float) -> HermitianMatrix:
    """Weighted logarithmic mean L_lambda through its representative function."""
    if not 0.0 < lam < 1.0:
        raise ExceptionInvalidData(f"pal_log weight must lie in (0,1), got {lam}")
    frame = CongruenceFrame(A, B)
    return as_hermitian(frame.lift(rep_function_pal(lam, frame.c)))


def _resolve_route(route: Union[Route, str], A: MatrixLike, B: MatrixLike) -> Route:
    route = Route(route)
    if route != Route.AUTO:
        return route
    a, b = as_array(A), as_array(B)
    scale = 1.0 + np.linalg.norm(a) * np.linalg.norm(b)
    if commutator_norm(a, b) <= COMMUTING_TOL * scale:
        return Route.REPRESENTATIVE
    return Route.INTEGRAL


def _endpoint(A: MatrixLike, B: MatrixLike, lam: float) -> Optional[HermitianMatrix]:
    """Dirac semantics at lam in {0,1}."""
    if lam == 0.0:
        require_positive_definite(B, "B")
        return as_hermitian(require_positive_definite_array(A, "A"))
    if lam == 1.0:
        require_positive_definite(A, "A")
        return as_hermitian(require_positive_definite_array(B, "B"))
    return None


def wlog_harm(
    A: MatrixLike,
    B: MatrixLike,
    lam: float,
    spec: Optional[QuadratureSpec] = None,
    route: Union[Route, str] = Route.AUTO,
) -> HermitianMatrix:
    """
    Harmonic-type weighted logarithmic mean (integral of (A nabla_t B)^{-1} d eta_lam)^{-1}.

    The representative route evaluates A^{1/2} f_lam(C) A^{1/2} instead; both agree.
    """
    _check_weight(lam)
    _check_dims(A, B)
    endpoint = _endpoint(A, B, lam)
    if endpoint is not None:
        return endpoint
    if _resolve_route(route, A, B) == Route.REPRESENTATIVE:
        frame = CongruenceFrame(A, B)
        return as_hermitian(frame.lift(rep_function_bold(lam, frame.c, spec)))

    a = require_positive_definite_array(A, "A")
    b = require_positive_definite_array(B, "B")
    average = integrate_eta(
        lambda t: np.linalg.inv(nabla(a, b, t)), EtaMeasure(lam=lam), spec, vectorized=True
    )
    return as_hermitian(inverse(average))


def sharp_path(A: MatrixLike, B: MatrixLike) -> Callable[[np.ndarray], np.ndarray]:
    """
    t -> A sharp_t B on a vector of nodes, stacked.

    Built from the pencil B w = c A w (W* A W = I), so that
    A sharp_t B = (A W) diag(c^t) (A W)*; no square root of A is taken.
    """
    _check_dims(A, B)
    a = require_positive_definite_array(A, "A")
    b = require_positive_definite_array(B, "B")
    c, W = scipy.linalg.eigh(b, a)
    log_c = np.log(np.clip(c, np.finfo(float).tiny, None))
    aw = a @ W

    def path(t: np.ndarray) -> np.ndarray:
        powers = np.exp(np.multiply.outer(np.asarray(t, dtype=float), log_c))
        return hermitian_part((aw * powers[..., None, :]) @ aw.conj().T)

    return path


def wlog_geom(
    A: MatrixLike,
    B: MatrixLike,
    lam: float,
    spec: Optional[QuadratureSpec] = None,
    route: Union[Route, str] = Route.AUTO,
) -> HermitianMatrix:
    """Geometric-type weighted logarithmic mean: integral of A sharp_t B d eta_lam."""
    _check_weight(lam)
    _check_dims(A, B)
    endpoint = _endpoint(A, B, lam)
    if endpoint is not None:
        return endpoint
    if _resolve_route(route, A, B) == Route.REPRESENTATIVE:
        frame = CongruenceFrame(A, B)
        return as_hermitian(frame.lift(rep_function_bb(lam, frame.c, spec)))

    value = integrate_eta(sharp_path(A, B), EtaMeasure(lam=lam), spec, vectorized=True)
    return as_hermitian(value)


def path_values(f: Callable, A: np.ndarray, B: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """t -> f(A nabla_t B) on a vector of nodes, stacked."""
    return lambda t: _apply_spectral(f, nabla(A, B, t))


def eta_average(
    f: TestFunction, A: MatrixLike, B: MatrixLike, lam: float, spec: Optional[QuadratureSpec] = None
) -> HermitianMatrix:
    """Integral of f(A nabla_t B) against eta_lambda."""
    _check_dims(A, B)
    value = integrate_eta(path_values(f, as_array(A), as_array(B)), EtaMeasure(lam=lam), spec, vectorized=True)
    return as_hermitian(value)


def hh_functional(
    f: TestFunction,
    A: MatrixLike,
    B: MatrixLike,
    lam: float,
    alpha: float,
    spec: Optional[QuadratureSpec] = None,
) -> HermitianMatrix:
    """Integral of f(A nabla_t B) against sigma_(lambda,alpha)."""
    _check_dims(A, B)
    measure = SigmaMeasure(lam=lam, alpha=alpha)
    value = integrate_sigma(path_values(f, as_array(A), as_array(B)), measure, spec, vectorized=True)
    return as_hermitian(value)


def transpose_mean(kind: Union[MeanKindId, str], A: MatrixLike, B: MatrixLike, lam: Optional[float] = None, **kwargs) -> HermitianMatrix:
    """The transposed mean B sigma A."""
    return mean(MeanKind(id=MeanKindId(kind), weight=lam), B, A, **kwargs)


def mean(
    kind: MeanKind,
    A: MatrixLike,
    B: MatrixLike,
    spec: Optional[QuadratureSpec] = None,
    route: Union[Route, str] = Route.AUTO,
) -> HermitianMatrix:
    """Dispatch on MeanKind."""
    if kind.id in (MeanKindId.NABLA, MeanKindId.HARM, MeanKindId.SHARP):
        return elementary_mean(kind.id, A, B, kind.weight)
    if kind.id == MeanKindId.LOGM:
        return log_mean(A, B, spec)
    if kind.id == MeanKindId.PAL_LOG:
        return pal_log_mean(A, B, kind.weight)
    if kind.id == MeanKindId.WLOG_HARM:
        return wlog_harm(A, B, kind.weight, spec, route)
    return wlog_geom(A, B, kind.weight, spec, route)
