from typing import Any, Optional, Tuple

import numpy as np

EXIT_OK = 0
EXIT_INEQUALITY_FAILURE = 1
EXIT_USAGE = 2


class OpmeanException(Exception):
    """Base error of the package. `exit_code` is what the CLI exits with."""

    exit_code: int = EXIT_USAGE

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class ExceptionInvalidData(OpmeanException):
    def __init__(self, detail: str = "Invalid data"):
        super().__init__(detail=detail)

class ExceptionNotFound(OpmeanException):
    def __init__(self, detail: str = "Not found"):
        super().__init__(detail=detail)

class ExceptionChainNotFound(ExceptionNotFound):
    def __init__(self, chain_id: str):
        super().__init__(detail=f"Unknown chain id: {chain_id!r}")
        self.chain_id = chain_id

class ExceptionFunctionNotFound(ExceptionNotFound):
    def __init__(self, function_id: str):
        super().__init__(detail=f"Unknown test function: {function_id!r}")
        self.function_id = function_id

class ExceptionDimensionMismatch(OpmeanException):
    def __init__(self, left: int, right: int):
        super().__init__(detail=f"Dimension mismatch: {left} vs {right}")
        self.dims = (left, right)

class ExceptionNotHermitian(OpmeanException):
    def __init__(self, asymmetry: float):
        super().__init__(detail=f"Matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")
        self.asymmetry = asymmetry

class ExceptionPositivity(OpmeanException):
    def __init__(self, smallest_eigenvalue: float, name: str = "matrix"):
        super().__init__(
            detail=f"{name} is not positive definite (smallest eigenvalue {smallest_eigenvalue:.6e})"
        )
        self.smallest_eigenvalue = smallest_eigenvalue
        self.name = name

class ExceptionSpectrumDomain(OpmeanException):
    def __init__(self, eigenvalue: float, function_id: str, domain: Tuple[float, float]):
        super().__init__(
            detail=f"Eigenvalue {eigenvalue:.6e} lies outside the domain {domain} of {function_id}"
        )
        self.eigenvalue = eigenvalue
        self.function_id = function_id
        self.domain = domain

class ExceptionEigenConvergence(OpmeanException):
    def __init__(self, dim: int, condition: float):
        super().__init__(
            detail=f"Eigen-solver did not converge (dim={dim}, condition estimate {condition:.3e})"
        )
        self.dim = dim
        self.condition = condition

class ExceptionPointMass(OpmeanException):
    def __init__(self, lam: float):
        super().__init__(
            detail=f"eta_{lam:g} is a point mass and has no density; use integrate_eta"
        )
        self.lam = lam

class ExceptionQuadratureAccuracy(OpmeanException):
    def __init__(self, previous: Any, last: Any, nodes: int, abs_tol: float):
        self.previous = previous
        self.last = last
        self.nodes = nodes
        super().__init__(
            detail=(
                f"Quadrature did not reach abs_tol={abs_tol:.1e} with {nodes} nodes; "
                f"last two estimates differ by {self.difference:.3e}"
            )
        )

    @property
    def difference(self) -> float:
        """Largest entrywise (or spectral, for matrices) distance between the two estimates."""
        gap = np.asarray(self.last) - np.asarray(self.previous)
        if gap.ndim >= 2:
            return float(np.max(np.linalg.norm(gap, ord=2, axis=(-2, -1))))
        return float(np.max(np.abs(gap))) if gap.size else 0.0

class ExceptionMatrixFile(OpmeanException):
    def __init__(self, path: str, reason: str):
        super().__init__(detail=f"Cannot read matrix file {path}: {reason}")
        self.path = path


def exception_not_found(entity: str):
    return ExceptionNotFound(detail=f"{entity} not found")

def exception_invalid_query(str: str):
    return ExceptionInvalidData(detail=f"Invalid parameter expression: {str}")
