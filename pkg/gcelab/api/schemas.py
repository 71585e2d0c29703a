"""Documents exchanged through frame files, the catalog and CLI reports."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator, model_validator

from gcelab.services.characteristic import CaseTag

SIGNIFICANT_DIGITS = 12


def stable_float(value: Optional[float]) -> Optional[float]:
    """Round to fixed significant digits so reports are byte-stable."""
    if value is None:
        return None
    return float(f"{float(value):.{SIGNIFICANT_DIGITS}g}")


class FrameDocument(BaseModel):
    """Hermitian frame: metric, J (columns are images) and 1-based brackets [i, j, k, c^k_ij]."""

    name: str = ""
    dim: int = Field(..., ge=1, le=16)
    metric: List[List[float]]
    J: List[List[float]]
    brackets: List[List[float]] = Field(default_factory=list)

    @field_validator("brackets")
    @classmethod
    def validate_bracket_entries(cls, v):
        for entry in v:
            if len(entry) != 4:
                raise ValueError(f"bracket entries are [i, j, k, value], got {entry}")
            if any(float(x) != int(x) for x in entry[:3]):
                raise ValueError(f"bracket indices must be integers, got {entry[:3]}")
        return v

    @model_validator(mode="after")
    def validate_shapes(self):
        for label, matrix in (("metric", self.metric), ("J", self.J)):
            if len(matrix) != self.dim or any(len(row) != self.dim for row in matrix):
                raise ValueError(f"{label} must be {self.dim}x{self.dim}")
        for entry in self.brackets:
            if not all(1 <= int(x) <= self.dim for x in entry[:3]):
                raise ValueError(f"bracket indices {entry[:3]} outside 1..{self.dim}")
        return self


class CatalogEntry(FrameDocument):
    kind: str = Field(..., pattern="^(flat|hopf|product|line_kahler|custom)$")
    provenance: str = ""
    expected_case: str = CaseTag.NOT_APPLICABLE
    factors: List[str] = Field(default_factory=list)

    @field_validator("expected_case")
    @classmethod
    def validate_case(cls, v):
        if v not in CaseTag.ALL:
            raise ValueError(f"unknown case tag '{v}'")
        return v


class Catalog(BaseModel):
    version: str = "1"
    models: List[CatalogEntry]

    @model_validator(mode="after")
    def validate_unique_names(self):
        names = [entry.name for entry in self.models]
        if len(names) != len(set(names)):
            raise ValueError("catalog model names must be unique")
        return self

    def get(self, name: str) -> Optional[CatalogEntry]:
        return next((entry for entry in self.models if entry.name == name), None)


class CatalogListingEntry(BaseModel):
    """One line of `gcelab catalog`: the entry without its tensors."""

    name: str
    kind: str
    dim: int
    expected_case: str
    factors: List[str] = Field(default_factory=list)

    @classmethod
    def from_entry(cls, entry: CatalogEntry) -> "CatalogListingEntry":
        return cls(
            name=entry.name,
            kind=entry.kind,
            dim=entry.dim,
            expected_case=entry.expected_case,
            factors=list(entry.factors),
        )


class CatalogListing(BaseModel):
    path: str
    models: List[CatalogListingEntry]


class FlagDocument(BaseModel):
    value: bool
    residual: float


class ClassificationDocument(BaseModel):
    model: str
    tool_version: str
    tolerance: float
    flags: Dict[str, FlagDocument]
    lee_norm: float
    lee_vanishes: bool
    c: Optional[float] = None
    c_signed: Optional[float] = None
    case_tag: str
    eigen_summary: List[List[float]] = Field(default_factory=list)
    residuals: Dict[str, float] = Field(default_factory=dict)


class CheckResult(BaseModel):
    id: str
    anchor: str
    residual: Optional[float] = None
    passed: bool
    detail: Optional[str] = None


class VerificationReport(BaseModel):
    model: str
    tool_version: str
    tolerance: float
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)
    error: Optional[str] = None
    wall_time_seconds: Optional[float] = None

    @computed_field
    @property
    def passed(self) -> bool:
        return self.error is None and all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


class VerificationSummary(BaseModel):
    tool_version: str
    passed: bool
    reports: List[VerificationReport]


class HomogenizationReport(BaseModel):
    case: str = Field(..., pattern="^(flat|hyperbolic)$")
    c: float
    period: float
    grid: List[float]
    values: List[float]
    residuals: Dict[str, float]
    drift: Optional[float] = None
    symmetrized: Optional[bool] = None


class HolonomyReport(BaseModel):
    V: List[float]
    W: List[float]
    shift: float
    oracle: float
    horizontality_residual: float
