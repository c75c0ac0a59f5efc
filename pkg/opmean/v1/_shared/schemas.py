from enum import Enum as PyEnum
from typing import Any, Callable, ClassVar, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator

from opmean.utils.exceptions import ExceptionInvalidData, ExceptionNotHermitian
from opmean.utils.settings import settings
from opmean.v1._shared.custom_schemas import (
    CaseSummary,
    ChainAggregate,
    ExampleRow,
    MeanResult,
    SweepRow,
)

REPORT_SCHEMA = "opmean-report/1"


class HermitianMatrix(BaseModel):
    """
    Finite-dimensional self-adjoint matrix.

    The entries are symmetrized on construction and stored read-only; a purely
    real Hermitian input (or a complex one with zero imaginary part) is kept real.
    """

    entries: np.ndarray
    model_config: Dict[str, Any] = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("entries", mode="before")
    @classmethod
    def symmetrize(cls, value: Any) -> np.ndarray:
        if isinstance(value, HermitianMatrix):
            return value.entries
        arr = np.array(value, copy=True)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ExceptionInvalidData(f"Expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] > settings.MAX_DIM:
            raise ExceptionInvalidData(f"dim={arr.shape[0]} exceeds the supported maximum {settings.MAX_DIM}")
        if arr.dtype.kind == "c":
            arr = arr.astype(np.complex128)
        elif arr.dtype.kind in "biuf":
            arr = arr.astype(np.float64)
        else:
            raise ExceptionInvalidData(f"Unsupported matrix dtype {arr.dtype}")
        if not np.all(np.isfinite(arr)):
            raise ExceptionInvalidData("Matrix has non-finite entries")

        adjoint = arr.conj().T
        asymmetry = float(np.linalg.norm(arr - adjoint) / (1.0 + np.linalg.norm(arr)))
        if asymmetry > settings.HERMITIAN_TOL:
            raise ExceptionNotHermitian(asymmetry)
        arr = 0.5 * (arr + adjoint)
        if arr.dtype.kind == "c" and not np.any(arr.imag):
            arr = np.ascontiguousarray(arr.real)
        arr.setflags(write=False)
        return arr

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def is_complex(self) -> bool:
        return self.entries.dtype.kind == "c"

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    @classmethod
    def identity(cls, dim: int) -> "HermitianMatrix":
        return cls(entries=np.eye(dim))

    @classmethod
    def diag(cls, values: Any) -> "HermitianMatrix":
        return cls(entries=np.diag(np.asarray(values)))


class SpectralDecomposition(BaseModel):
    """Eigenvalues ascending, eigenvectors as the columns of a unitary matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    model_config: Dict[str, Any] = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


class LoewnerVerdict(BaseModel):
    margin: float
    tolerance: float = Field(..., ge=0)
    model_config: Dict[str, Any] = {"frozen": True}

    @computed_field
    @property
    def holds(self) -> bool:
        return self.margin >= -self.tolerance


class Convexity(str, PyEnum):
    CONVEX = "operator-convex"
    CONCAVE = "operator-concave"


class TestFunction(BaseModel):
    """Scalar function bundle used as f in every chain."""

    __test__: ClassVar[bool] = False

    id: str
    domain: Tuple[float, float]
    closed: Tuple[bool, bool] = (False, False)
    value: Callable[..., Any]
    derivative: Callable[..., Any]
    convexity: Convexity
    model_config: Dict[str, Any] = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def is_concave(self) -> bool:
        return self.convexity == Convexity.CONCAVE

    def __call__(self, x: Any) -> Any:
        return self.value(x)

    def outside_domain(self, x: np.ndarray, margin: float = 1e-12) -> np.ndarray:
        """Mask of the points of `x` that are not in the domain."""
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        if self.closed[0]:
            below = x < lo - margin * (1.0 + abs(lo))
        else:
            below = x <= lo
        if self.closed[1]:
            above = x > hi + margin * (1.0 + abs(hi))
        else:
            above = x >= hi
        return below | above


class EtaMeasure(BaseModel):
    """
    Probability measure eta_lambda on [0,1].

    For 0 < lambda < 1 it has the density c*t^p, c = lambda/(1-lambda),
    p = (2*lambda-1)/(1-lambda), i.e. the distribution function t^(lambda/(1-lambda)).
    lambda = 0 and lambda = 1 are the Dirac masses at 0 and 1.
    """

    lam: float = Field(..., alias="lambda", ge=0.0, le=1.0)
    model_config: Dict[str, Any] = {"frozen": True, "populate_by_name": True}

    @property
    def is_point_mass(self) -> bool:
        return self.lam == 0.0 or self.lam == 1.0

    @property
    def shape(self) -> float:
        """Exponent lambda/(1-lambda) of the distribution function."""
        return self.lam / (1.0 - self.lam)

    @property
    def density_exponent(self) -> float:
        return (2.0 * self.lam - 1.0) / (1.0 - self.lam)


class SigmaMeasure(BaseModel):
    """(1-alpha)*eta_lambda + alpha*eta_(1-lambda)."""

    lam: float = Field(..., alias="lambda", gt=0.0, lt=1.0)
    alpha: float = Field(..., ge=0.0, le=1.0)
    model_config: Dict[str, Any] = {"frozen": True, "populate_by_name": True}

    def components(self) -> List[Tuple[float, EtaMeasure]]:
        return [
            (1.0 - self.alpha, EtaMeasure(lam=self.lam)),
            (self.alpha, EtaMeasure(lam=1.0 - self.lam)),
        ]


class QuadratureRule(str, PyEnum):
    JACOBI = "jacobi"
    LEGENDRE = "legendre"


class QuadratureSpec(BaseModel):
    base_nodes: int = Field(default_factory=lambda: settings.QUAD_BASE_NODES, ge=2)
    abs_tol: float = Field(default_factory=lambda: settings.QUAD_ABS_TOL, gt=0)
    max_doublings: int = Field(default_factory=lambda: settings.QUAD_MAX_DOUBLINGS, ge=1)
    rule: QuadratureRule = QuadratureRule.JACOBI
    model_config: Dict[str, Any] = {"frozen": True}

    def outer(self) -> "QuadratureSpec":
        """Spec for the outer level of a nested integral."""
        return self.model_copy(update={"abs_tol": max(self.abs_tol, settings.QUAD_OUTER_ABS_TOL)})


class CoefficientPair(BaseModel):
    alpha_coef: float
    mu_coef: float
    s: float = Field(..., gt=0.0, lt=1.0)
    lam: float = Field(..., alias="lambda", gt=0.0, lt=1.0)
    model_config: Dict[str, Any] = {"frozen": True, "populate_by_name": True}


class BetaOrientation(str, PyEnum):
    STANDARD = "standard"
    REVERSED = "reversed"


class BetaBounds(BaseModel):
    x: float
    y: float
    lower: float
    value: float
    upper: float
    orientation: BetaOrientation
    tolerance: float = 1e-12
    model_config: Dict[str, Any] = {"frozen": True}

    @computed_field
    @property
    def holds(self) -> bool:
        slack = self.tolerance * (1.0 + abs(self.upper) + abs(self.lower))
        standard = self.lower - slack <= self.value <= self.upper + slack
        reversed_ = self.upper - slack <= self.value <= self.lower + slack
        if self.y == 2.0:
            return standard and reversed_
        return standard if self.orientation == BetaOrientation.STANDARD else reversed_


class MeanKindId(str, PyEnum):
    NABLA = "nabla"
    HARM = "harm"
    SHARP = "sharp"
    LOGM = "logm"
    PAL_LOG = "pal_log"
    WLOG_HARM = "wlog_harm"
    WLOG_GEOM = "wlog_geom"


class MeanKind(BaseModel):
    id: MeanKindId
    weight: Optional[float] = None
    model_config: Dict[str, Any] = {"frozen": True}

    @model_validator(mode="after")
    def validate_weight(self):
        if self.id == MeanKindId.LOGM:
            if self.weight is not None and self.weight != 0.5:
                raise ValueError("logm is weightless")
            return self
        if self.weight is None:
            raise ValueError(f"{self.id.value} needs a weight")
        if self.id == MeanKindId.PAL_LOG:
            if not 0.0 < self.weight < 1.0:
                raise ValueError("pal_log weight must lie in (0,1)")
        elif not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"{self.id.value} weight must lie in [0,1]")
        return self


class Orientation(str, PyEnum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


class ChainDescriptor(BaseModel):
    """
    A named inequality chain.

    `links` are pairs (lo, hi) of term indices meaning T_lo <= T_hi for an
    operator convex f; `orientation_sensitive` chains swap every link when f
    is operator concave.
    """

    id: str
    param_names: List[str]
    params: Dict[str, float] = Field(default_factory=dict)
    f: Optional[str] = None
    takes_function: bool = True
    needs_derivative: bool = False
    takes_operands: bool = True
    arity: int
    links: List[Tuple[int, int]]
    segments: List[str] = Field(default_factory=list)
    orientation: Orientation = Orientation.ASCENDING
    orientation_sensitive: bool = True
    anchor: str = Field(..., min_length=1)
    model_config: Dict[str, Any] = {"frozen": True}


class ChainReport(BaseModel):
    descriptor: ChainDescriptor
    terms: List[HermitianMatrix]
    links: List[Tuple[int, int]]
    margins: List[float]
    gaps: List[float]
    tolerance: float
    model_config: Dict[str, Any] = {"arbitrary_types_allowed": True, "frozen": True}

    @computed_field
    @property
    def holds(self) -> bool:
        return all(margin >= -self.tolerance for margin in self.margins)

    @property
    def dims(self) -> int:
        return self.terms[0].dim if self.terms else 0

    @property
    def worst_margin(self) -> float:
        return min(self.margins) if self.margins else 0.0


class Command(str, PyEnum):
    MEAN = "mean"
    VERIFY = "verify"
    SWEEP = "sweep"
    PAPER_EXAMPLE = "paper-example"


class OutputFormat(str, PyEnum):
    JSON = "json"
    CSV = "csv"


class Backend(str, PyEnum):
    SERIAL = "serial"
    PROCESS = "process"
    CELERY = "celery"


class GeneratorSpec(BaseModel):
    """Seeded random HPD operands; `dim=None` cycles through the default dims."""

    dim: Optional[int] = Field(None, ge=1)
    cond_cap: float = Field(default_factory=lambda: settings.DEFAULT_COND_CAP, ge=1.0)
    seed: int = Field(default_factory=lambda: settings.SEED, ge=0)
    trials: int = Field(200, ge=1)
    complex_entries: bool = False

    @field_validator("dim")
    @classmethod
    def validate_dim(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value > settings.MAX_DIM:
            raise ValueError(f"dim must be at most {settings.MAX_DIM}")
        return value


class RunConfig(BaseModel):
    command: Command
    a_path: Optional[str] = None
    b_path: Optional[str] = None
    generator: Optional[GeneratorSpec] = None
    seed: Optional[int] = Field(None, ge=0)
    kind: Optional[MeanKindId] = None
    weight: Optional[float] = None
    chains: List[str] = Field(default_factory=list)
    functions: List[str] = Field(default_factory=list)
    params: Dict[str, float] = Field(default_factory=dict)
    grid: Dict[str, List[float]] = Field(default_factory=dict)
    tol: float = Field(default_factory=lambda: settings.TOL, gt=0)
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON
    backend: Backend = Field(default_factory=lambda: Backend(settings.BACKEND))
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=0)
    timing: bool = False

    @model_validator(mode="after")
    def validate_sources(self):
        if (self.a_path is None) != (self.b_path is None):
            raise ValueError("both operands need a matrix file, or neither")
        if self.a_path is not None and self.generator is not None:
            raise ValueError("exactly one matrix source per operand: files or generator")
        if self.command in (Command.MEAN, Command.VERIFY, Command.SWEEP):
            if self.a_path is None and self.generator is None:
                raise ValueError("no matrix source given")
        if self.command == Command.MEAN and self.kind is None:
            raise ValueError("mean needs a kind")
        if self.command in (Command.VERIFY, Command.SWEEP) and not self.chains:
            raise ValueError("no chain selected")
        if self.command == Command.SWEEP:
            if len(self.chains) != 1:
                raise ValueError("sweep takes exactly one chain")
            if not self.grid or any(len(values) == 0 for values in self.grid.values()):
                raise ValueError("sweep grid must be nonempty")
        return self

    @property
    def run_seed(self) -> int:
        """Generator seed, else the explicit seed, else OPMEAN_SEED."""
        if self.generator is not None:
            return self.generator.seed
        return settings.SEED if self.seed is None else self.seed

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude={"out", "timing"})


class EnsembleReport(BaseModel):
    schema_id: str = Field(REPORT_SCHEMA, serialization_alias="schema")
    command: Command
    config: Dict[str, Any] = Field(default_factory=dict)
    cases: List[CaseSummary] = Field(default_factory=list)
    aggregate: Dict[str, ChainAggregate] = Field(default_factory=dict)
    rows: List[SweepRow] = Field(default_factory=list)
    means: List[MeanResult] = Field(default_factory=list)
    examples: List[ExampleRow] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    runtime: Optional[float] = None

    @computed_field
    @property
    def failure_count(self) -> int:
        return sum(not case.holds for case in self.cases) + sum(not row.ok for row in self.examples)
