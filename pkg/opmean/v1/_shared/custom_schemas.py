from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class MatrixPayload(BaseModel):
    """Matrix exchange format: {"dim": n, "re": [[...]], "im": [[...]]}, "im" optional."""
    dim: int = Field(..., ge=1)
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def validate_shape(self):
        for name, rows in (("re", self.re), ("im", self.im)):
            if rows is None:
                continue
            if len(rows) != self.dim or any(len(row) != self.dim for row in rows):
                raise ValueError(f"'{name}' must be a {self.dim}x{self.dim} array")
        return self


class CaseSummary(BaseModel):
    """One evaluated chain, as serialized in reports."""
    index: int
    trial: int
    id: str
    f: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)
    dims: int
    margins: List[float]
    gaps: List[float] = Field(default_factory=list)
    holds: bool
    tolerance: float
    error: Optional[str] = None

    @property
    def worst_margin(self) -> float:
        return min(self.margins) if self.margins else 0.0


class ChainAggregate(BaseModel):
    cases: int = 0
    failures: int = 0
    worst_margin: Optional[float] = None


class SweepRow(BaseModel):
    params: Dict[str, float]
    f: Optional[str] = None
    worst_margin: Optional[float] = None
    gaps: List[float] = Field(default_factory=list)
    holds: bool


class MeanResult(BaseModel):
    kind: str
    weight: Optional[float] = None
    dim: int
    re: List[List[float]]
    im: Optional[List[List[float]]] = None


class ExampleRow(BaseModel):
    mean: str
    entry: str
    computed: float
    oracle: float
    printed: float
    deviation: float
    ok: bool
    note: Optional[str] = None


class ChainListing(BaseModel):
    id: str
    params: List[str]
    takes_function: bool
    anchor: str
    segments: List[str] = Field(default_factory=list)


class TrialTask(BaseModel):
    """One chain evaluation of an ensemble. Carries seeds and ids only, so it pickles and serializes to JSON."""
    index: int = Field(..., ge=0)
    trial: int = Field(..., ge=0)
    chain: str
    f: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)
    seed: int = Field(..., ge=0)
    dim: int = Field(2, ge=1)
    cond_cap: float = Field(10.0, ge=1.0)
    complex_entries: bool = False
    a_path: Optional[str] = None
    b_path: Optional[str] = None
    tol: float = Field(..., gt=0)
