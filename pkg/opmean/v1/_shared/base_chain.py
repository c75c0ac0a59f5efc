import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from opmean.utils.exceptions import ExceptionInvalidData
from opmean.utils.settings import settings
from opmean.v1._shared.schemas import (
    ChainDescriptor,
    ChainReport,
    HermitianMatrix,
    Orientation,
    QuadratureSpec,
    TestFunction,
)
from opmean.v1.hermat.palette import get_function
from opmean.v1.hermat.service import MatrixLike, as_array, as_hermitian, hermitian_part, loewner_margin

logger = logging.getLogger(__name__)

# (low, high, low_open, high_open)
ParamRange = Tuple[float, float, bool, bool]

UNIT = (0.0, 1.0, False, False)
OPEN_UNIT = (0.0, 1.0, True, True)

DEFAULT_GRID = [0.1, 0.25, 0.5, 0.75, 0.9]

Link = Tuple[int, int]


def consecutive_links(start: int, count: int, descending: bool = False) -> List[Link]:
    """Links between `count` consecutive terms starting at index `start`."""
    links = [(start + i, start + i + 1) for i in range(count - 1)]
    if descending:
        return [(hi, lo) for lo, hi in links]
    return links


class BaseChain:
    """
    Base class for every inequality chain of the registry.

    A subclass declares its parameters, its links and how to build the terms
    under the operator convex orientation; this class validates the input,
    reverses the links for operator concave f when the chain is orientation
    sensitive, and turns the terms into a ChainReport.
    """

    def __init__(
        self,
        id: str,
        param_ranges: Dict[str, ParamRange],
        links: List[Link],
        anchor: str,
        takes_function: bool = True,
        needs_derivative: bool = False,
        takes_operands: bool = True,
        orientation_sensitive: bool = True,
        segments: Optional[List[str]] = None,
        default_grid: Optional[Dict[str, List[float]]] = None,
    ):
        """
        Args:
            id: Registry id, e.g. "whhoi"
            param_ranges: Accepted interval of every parameter, in declaration order
            links: Pairs (lo, hi) of term indices meaning T_lo <= T_hi for convex f
            anchor: Short description of the inequality the chain encodes
            takes_function: Whether the caller chooses f from the palette
            needs_derivative: Whether f' enters the terms
            takes_operands: False for purely scalar chains without matrices
            orientation_sensitive: Whether concave f reverses the links
            segments: Names of independent sub-chains of a composite chain
            default_grid: Values each parameter is drawn from in ensembles
        """
        self.id = id
        self.param_ranges = param_ranges
        self.param_names = list(param_ranges)
        self.links = links
        self.anchor = anchor
        self.takes_function = takes_function
        self.needs_derivative = needs_derivative
        self.takes_operands = takes_operands
        self.orientation_sensitive = orientation_sensitive
        self.segments = segments or []
        self.default_grid = default_grid or {name: list(DEFAULT_GRID) for name in self.param_names}
        self.arity = 1 + max(max(link) for link in links)

    def descriptor(self, params: Optional[Dict[str, float]] = None, f: Optional[TestFunction] = None) -> ChainDescriptor:
        links = self.links_for(params or {}, f)
        return ChainDescriptor(
            id=self.id,
            param_names=self.param_names,
            params=dict(params or {}),
            f=f.id if f is not None else None,
            takes_function=self.takes_function,
            needs_derivative=self.needs_derivative,
            takes_operands=self.takes_operands,
            arity=self.arity,
            links=links,
            segments=self.segments,
            orientation=self.orientation_for(params or {}, f),
            orientation_sensitive=self.orientation_sensitive,
            anchor=self.anchor,
        )

    def validate_params(self, params: Optional[Dict[str, float]]) -> Dict[str, float]:
        params = dict(params or {})
        missing = [name for name in self.param_names if name not in params]
        extra = sorted(set(params) - set(self.param_names))
        if missing:
            raise ExceptionInvalidData(f"chain {self.id} is missing parameters: {', '.join(missing)}")
        if extra:
            raise ExceptionInvalidData(f"chain {self.id} does not take parameters: {', '.join(extra)}")

        checked: Dict[str, float] = {}
        for name in self.param_names:
            value = float(params[name])
            low, high, low_open, high_open = self.param_ranges[name]
            too_low = value <= low if low_open else value < low
            too_high = value >= high if high_open else value > high
            if too_low or too_high or not np.isfinite(value):
                left = "(" if low_open else "["
                right = ")" if high_open else "]"
                raise ExceptionInvalidData(
                    f"chain {self.id}: {name}={value} is outside {left}{low:g}, {high:g}{right}"
                )
            checked[name] = value
        return checked

    def resolve_function(self, f: Union[TestFunction, str, None]) -> Optional[TestFunction]:
        if not self.takes_function:
            if f is not None:
                raise ExceptionInvalidData(f"chain {self.id} takes no test function")
            return None
        if f is None:
            raise ExceptionInvalidData(f"chain {self.id} needs a test function")
        return get_function(f) if isinstance(f, str) else f

    def is_reversed(self, params: Dict[str, float], f: Optional[TestFunction]) -> bool:
        return self.orientation_sensitive and f is not None and f.is_concave

    def orientation_for(self, params: Dict[str, float], f: Optional[TestFunction]) -> Orientation:
        return Orientation.DESCENDING if self.is_reversed(params, f) else Orientation.ASCENDING

    def links_for(self, params: Dict[str, float], f: Optional[TestFunction]) -> List[Link]:
        if self.is_reversed(params, f):
            return [(hi, lo) for lo, hi in self.links]
        return list(self.links)

    def terms(
        self,
        A: np.ndarray,
        B: np.ndarray,
        params: Dict[str, float],
        f: Optional[TestFunction],
        spec: QuadratureSpec,
    ) -> Sequence[np.ndarray]:
        raise NotImplementedError

    def evaluate(
        self,
        A: Optional[MatrixLike],
        B: Optional[MatrixLike],
        params: Optional[Dict[str, float]] = None,
        f: Union[TestFunction, str, None] = None,
        tol: Optional[float] = None,
        spec: Optional[QuadratureSpec] = None,
    ) -> ChainReport:
        """
        Builds the terms and compares every linked pair in the Loewner order.

        Args:
            A, B: Operands; ignored by chains that take none
            params: Exactly the chain's parameters
            f: Palette id or TestFunction for chains that take one
            tol: Relative tolerance, scaled by 1 + the largest spectral radius among the terms
            spec: Quadrature policy

        Returns:
            ChainReport with one margin and one gap per link
        """
        tol = settings.TOL if tol is None else tol
        if tol < 0:
            raise ExceptionInvalidData(f"tol must be nonnegative, got {tol}")
        checked = self.validate_params(params)
        function = self.resolve_function(f)
        spec = spec or QuadratureSpec()

        a = b = None
        if self.takes_operands:
            if A is None or B is None:
                raise ExceptionInvalidData(f"chain {self.id} needs two operands")
            a, b = as_array(as_hermitian(A)), as_array(as_hermitian(B))

        terms = [hermitian_part(np.atleast_2d(np.asarray(term))) for term in self.terms(a, b, checked, function, spec)]
        links = self.links_for(checked, function)
        radius = max(float(np.max(np.abs(np.linalg.eigvalsh(term)))) for term in terms)
        tolerance = tol * (1.0 + radius)
        margins = [loewner_margin(terms[lo], terms[hi]) for lo, hi in links]
        gaps = [float(np.linalg.norm(terms[hi] - terms[lo], ord=2)) for lo, hi in links]

        report = ChainReport(
            descriptor=self.descriptor(checked, function),
            terms=[HermitianMatrix(entries=term) for term in terms],
            links=links,
            margins=margins,
            gaps=gaps,
            tolerance=tolerance,
        )
        if not report.holds:
            logger.warning(f"chain {self.id} fails: worst margin {report.worst_margin:.3e} (tol {tolerance:.1e})")
        return report
