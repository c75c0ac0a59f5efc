"""
Hermitian matrix engine: spectral decomposition, functional calculus,
Frechet derivatives, congruences, Loewner comparison and random HPD pairs.

Public functions accept a HermitianMatrix or a plain ndarray and return
HermitianMatrix. The underscore helpers work on (possibly batched) ndarrays
and are what the quadrature integrands call.
"""
import logging
from typing import Any, Callable, Tuple, Union

import numpy as np
import scipy.linalg

from opmean.utils.exceptions import (
    ExceptionDimensionMismatch,
    ExceptionEigenConvergence,
    ExceptionInvalidData,
    ExceptionPositivity,
    ExceptionSpectrumDomain,
)
from opmean.utils.settings import settings
from opmean.v1._shared.schemas import (
    HermitianMatrix,
    LoewnerVerdict,
    SpectralDecomposition,
    TestFunction,
)

logger = logging.getLogger(__name__)

MatrixLike = Union[HermitianMatrix, np.ndarray]
ScalarMap = Union[TestFunction, Callable[[np.ndarray], np.ndarray]]

FRECHET_DELTA = 1e-8


def as_array(M: Any) -> np.ndarray:
    if isinstance(M, HermitianMatrix):
        return M.entries
    arr = np.asarray(M)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    return arr


def as_hermitian(M: Any) -> HermitianMatrix:
    if isinstance(M, HermitianMatrix):
        return M
    return HermitianMatrix(entries=M)


def hermitian_part(arr: np.ndarray) -> np.ndarray:
    """(X + X*)/2 over the last two axes."""
    return 0.5 * (arr + np.conj(np.swapaxes(arr, -1, -2)))


def spectral_radius(M: MatrixLike) -> float:
    arr = as_array(M)
    return float(np.max(np.abs(np.linalg.eigvalsh(hermitian_part(arr)))))


def _condition_estimate(arr: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(arr))
    except (np.linalg.LinAlgError, ValueError):
        return float("inf")


def _eigh(arr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched eigendecomposition over the last two axes."""
    try:
        return np.linalg.eigh(arr)
    except np.linalg.LinAlgError:
        raise ExceptionEigenConvergence(dim=arr.shape[-1], condition=_condition_estimate(arr))


def eig_hermitian(M: MatrixLike) -> SpectralDecomposition:
    arr = as_array(M)
    try:
        w, U = scipy.linalg.eigh(arr, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        logger.error(f"eigh failed on a {arr.shape[0]}x{arr.shape[0]} matrix: {exc}")
        raise ExceptionEigenConvergence(dim=arr.shape[0], condition=_condition_estimate(arr))
    return SpectralDecomposition(eigenvalues=w, eigenvectors=U)


def _scalar_values(f: ScalarMap, w: np.ndarray) -> np.ndarray:
    if isinstance(f, TestFunction):
        outside = f.outside_domain(w)
        if np.any(outside):
            bad = float(np.asarray(w)[outside].flat[0])
            raise ExceptionSpectrumDomain(eigenvalue=bad, function_id=f.id, domain=f.domain)
        return np.asarray(f.value(w))
    return np.asarray(f(w))


def _from_eigen(w_values: np.ndarray, U: np.ndarray) -> np.ndarray:
    """U diag(values) U* over a batch."""
    return hermitian_part((U * w_values[..., None, :]) @ np.conj(np.swapaxes(U, -1, -2)))


def _apply_spectral(f: ScalarMap, arr: np.ndarray) -> np.ndarray:
    w, U = _eigh(hermitian_part(arr))
    return _from_eigen(_scalar_values(f, w), U)


def apply_spectral(f: ScalarMap, M: MatrixLike) -> HermitianMatrix:
    """f(M) by the functional calculus: U diag(f(lambda_i)) U*."""
    decomposition = eig_hermitian(M)
    values = _scalar_values(f, decomposition.eigenvalues)
    return as_hermitian(_from_eigen(values, decomposition.eigenvectors))


def apply_spectral_batch(f: ScalarMap, stack: np.ndarray) -> np.ndarray:
    """f applied to every matrix of a (n, d, d) stack."""
    return _apply_spectral(f, np.asarray(stack))


def require_positive_definite(M: MatrixLike, name: str = "matrix") -> SpectralDecomposition:
    """Positive-definite gate: smallest eigenvalue > PD_GATE * (1 + largest)."""
    decomposition = eig_hermitian(M)
    w = decomposition.eigenvalues
    if w[0] <= settings.PD_GATE * (1.0 + abs(w[-1])):
        raise ExceptionPositivity(smallest_eigenvalue=float(w[0]), name=name)
    return decomposition


def _sqrt_pair(M: MatrixLike, name: str = "matrix") -> Tuple[np.ndarray, np.ndarray]:
    """(M^{1/2}, M^{-1/2}) of a positive-definite matrix."""
    decomposition = require_positive_definite(M, name)
    root = np.sqrt(decomposition.eigenvalues)
    U = decomposition.eigenvectors
    return _from_eigen(root, U), _from_eigen(1.0 / root, U)


def congruence_sandwich(A: MatrixLike, X: MatrixLike) -> HermitianMatrix:
    """A^{1/2} X A^{1/2} for positive-definite A."""
    _check_dims(A, X)
    root, _ = _sqrt_pair(A, "A")
    return as_hermitian(root @ as_array(X) @ root)


def congruence_action(C: np.ndarray, M: MatrixLike) -> HermitianMatrix:
    """C M C* for an arbitrary square C."""
    C = np.asarray(C)
    return as_hermitian(C @ as_array(M) @ C.conj().T)


def inverse(M: MatrixLike) -> np.ndarray:
    return hermitian_part(np.linalg.inv(as_array(M)))


def _check_dims(A: MatrixLike, B: MatrixLike) -> None:
    left, right = as_array(A).shape[-1], as_array(B).shape[-1]
    if left != right:
        raise ExceptionDimensionMismatch(left, right)


def loewner_margin(A: MatrixLike, B: MatrixLike) -> float:
    """Smallest eigenvalue of B - A."""
    _check_dims(A, B)
    difference = hermitian_part(as_array(B) - as_array(A))
    return float(scipy.linalg.eigh(difference, eigvals_only=True)[0])


def loewner_compare(A: MatrixLike, B: MatrixLike, tol: float) -> LoewnerVerdict:
    """Checks A <= B in the Loewner order."""
    if tol < 0:
        raise ExceptionInvalidData(f"tol must be nonnegative, got {tol}")
    return LoewnerVerdict(margin=loewner_margin(A, B), tolerance=tol)


def _divided_differences(f: TestFunction, w: np.ndarray) -> np.ndarray:
    """First divided differences of f on the eigenvalues, f' at the midpoint for close pairs."""
    fw = _scalar_values(f, w)
    rho = np.max(np.abs(w), axis=-1, keepdims=True)[..., None]
    delta = FRECHET_DELTA * (1.0 + rho)
    wi = w[..., :, None]
    wj = w[..., None, :]
    diff = wi - wj
    close = np.abs(diff) <= delta
    safe = np.where(close, 1.0, diff)
    quotient = (fw[..., :, None] - fw[..., None, :]) / safe
    midpoint = np.asarray(f.derivative(0.5 * (wi + wj)))
    return np.where(close, midpoint, quotient)


def _frechet(f: TestFunction, A: np.ndarray, E: np.ndarray) -> np.ndarray:
    w, U = _eigh(hermitian_part(A))
    Uh = np.conj(np.swapaxes(U, -1, -2))
    E_hat = Uh @ E @ U
    return hermitian_part(U @ (_divided_differences(f, w) * E_hat) @ Uh)


def frechet_derivative(f: TestFunction, A: MatrixLike, B: MatrixLike) -> HermitianMatrix:
    """Df(A)(B) by the Daleckii-Krein formula in the eigenbasis of A."""
    _check_dims(A, B)
    return as_hermitian(_frechet(f, as_array(A), as_array(B)))


def frechet_derivative_batch(f: TestFunction, stack: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Df(A_k)(E) for every A_k of a stack; `direction` broadcasts against it."""
    return _frechet(f, np.asarray(stack), np.asarray(direction))


def inverse_derivative(Y: MatrixLike, X: MatrixLike) -> HermitianMatrix:
    """Closed form of D(t -> 1/t)(Y)(X) = -Y^{-1} X Y^{-1}."""
    _check_dims(Y, X)
    Y_inv = inverse(Y)
    return as_hermitian(-Y_inv @ as_array(X) @ Y_inv)


def operator_convexity_check(
    f: TestFunction, A: MatrixLike, B: MatrixLike, lam: float, tol: float = 0.0
) -> LoewnerVerdict:
    """f(A nabla_lam B) <= f(A) nabla_lam f(B), reversed for concave f."""
    a, b = as_array(A), as_array(B)
    left = _apply_spectral(f, (1.0 - lam) * a + lam * b)
    right = (1.0 - lam) * _apply_spectral(f, a) + lam * _apply_spectral(f, b)
    if f.is_concave:
        left, right = right, left
    return loewner_compare(left, right, tol)


def directional_bounds_check(
    f: TestFunction, A: MatrixLike, B: MatrixLike, tol: float = 0.0
) -> Tuple[LoewnerVerdict, LoewnerVerdict]:
    """Df(A)(B-A) <= f(B)-f(A) <= Df(B)(B-A) for operator convex f."""
    a, b = as_array(A), as_array(B)
    direction = b - a
    lower = _frechet(f, a, direction)
    middle = _apply_spectral(f, b) - _apply_spectral(f, a)
    upper = _frechet(f, b, direction)
    if f.is_concave:
        lower, upper = upper, lower
    return loewner_compare(lower, middle, tol), loewner_compare(middle, upper, tol)


def commutator_norm(A: MatrixLike, B: MatrixLike) -> float:
    a, b = as_array(A), as_array(B)
    return float(np.linalg.norm(a @ b - b @ a))


def random_hpd(
    dim: int,
    cond_cap: float,
    seed: Union[int, np.random.SeedSequence],
    complex_entries: bool = False,
) -> HermitianMatrix:
    """
    Seeded random Hermitian positive-definite matrix.

    Args:
        dim: Matrix size, 1 <= dim <= MAX_DIM
        cond_cap: Upper bound on the condition number (>= 1)
        seed: Integer seed or SeedSequence; the same seed gives the same matrix
        complex_entries: Draw a complex unitary instead of an orthogonal one

    Returns:
        Q diag(exp(u_i)) Q* with u_i uniform on [0, log(cond_cap)) and Q Haar-distributed
    """
    if not 1 <= dim <= settings.MAX_DIM:
        raise ExceptionInvalidData(f"dim must lie in [1, {settings.MAX_DIM}], got {dim}")
    if cond_cap < 1.0:
        raise ExceptionInvalidData(f"cond_cap must be >= 1, got {cond_cap}")

    rng = np.random.default_rng(seed)
    gaussian = rng.standard_normal((dim, dim))
    if complex_entries:
        gaussian = gaussian + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(gaussian)
    diagonal = np.diag(R)
    Q = Q * (diagonal / np.abs(diagonal))
    spectrum = np.exp(rng.uniform(0.0, np.log(cond_cap), size=dim))
    return as_hermitian(_from_eigen(spectrum, Q))


def random_hpd_pair(
    dim: int,
    cond_cap: float,
    seed: Union[int, np.random.SeedSequence],
    complex_entries: bool = False,
) -> Tuple[HermitianMatrix, HermitianMatrix]:
    """Two independent matrices drawn from the children (0,) and (1,) of one seed."""
    left, right = (child_seed(seed, k) for k in (0, 1))
    return (
        random_hpd(dim, cond_cap, left, complex_entries),
        random_hpd(dim, cond_cap, right, complex_entries),
    )


def eigenvalues(M: MatrixLike) -> np.ndarray:
    return eig_hermitian(M).eigenvalues


def child_seed(seed: Union[int, np.random.SeedSequence], key: int) -> np.random.SeedSequence:
    """Deterministic child of `seed`; unlike SeedSequence.spawn it keeps no state."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (key,))
    return np.random.SeedSequence(seed, spawn_key=(key,))
