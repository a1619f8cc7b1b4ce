"""Offline-optimum (ILP) instance and solution models."""

from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .trace import CapacityTrace


class Constraint(BaseModel):
    """Linear constraint Σ coef·var (sense) rhs over named variables."""
    model_config = ConfigDict(frozen=True)

    name: str
    terms: Dict[str, float]
    sense: str = Field(..., pattern=r"^(<=|>=)$")
    rhs: float

    def holds(self, values: Dict[str, float], tol: float = 1e-9) -> bool:
        lhs = sum(coef * values.get(var, 0.0) for var, coef in self.terms.items())
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        return lhs >= self.rhs - tol


class OmniscientInstance(BaseModel):
    """A full-knowledge cost minimisation problem over one trace."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    trace: CapacityTrace
    n_tar: List[int] = Field(..., description="N_Tar(t) for every tick")
    avail_tar: float = Field(..., ge=0, le=1)
    d: int = Field(..., ge=0, description="Cold-start delay in ticks")
    k: float = Field(..., gt=1, description="On-demand to spot cost ratio")
    n_max: int = Field(..., ge=0)
    od_max: Optional[int] = Field(None, ge=0, description="Cap on O(t); defaults to n_max")
    constraints: List[Constraint] = Field(default_factory=list, repr=False)

    @model_validator(mode="after")
    def _dimensions(self) -> "OmniscientInstance":
        if len(self.n_tar) != self.trace.horizon:
            raise ValueError("n_tar must give one target per tick")
        if any(n < 0 for n in self.n_tar):
            raise ValueError("n_tar must be non-negative")
        if self.n_tar and self.n_max < max(self.n_tar):
            raise ValueError("n_max must be at least max N_Tar")
        return self

    @property
    def horizon(self) -> int:
        return self.trace.horizon

    @property
    def od_limit(self) -> int:
        return self.n_max if self.od_max is None else min(self.od_max, self.n_max)

    @property
    def required_ticks(self) -> int:
        """Smallest Σ M(t) meeting T × Avail_Tar."""
        needed = self.horizon * self.avail_tar
        rounded = round(needed)
        if abs(needed - rounded) < 1e-9:
            return int(rounded)
        return int(needed) + 1

    def readiness_window(self, t: int) -> range:
        """Ticks t' whose launches bound the ready count at t."""
        if self.d == 0:
            return range(t, t + 1)
        return range(max(0, t - self.d + 1), t + 1)

    def constraint_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for constraint in self.constraints:
            family = constraint.name.split("[", 1)[0]
            counts[family] = counts.get(family, 0) + 1
        return counts


class OmniscientSchedule(BaseModel):
    """Launched counts: spot[z][t] per zone (trace order) and on_demand[t]."""
    spot: List[List[int]]
    on_demand: List[int]

    def spot_totals(self) -> List[int]:
        return [sum(column) for column in zip(*self.spot)] if self.spot else []


class OmniscientSolution(OmniscientSchedule):
    """An optimal schedule with its readiness variables and objective."""
    spot_ready: List[int]
    od_ready: List[int]
    met: List[int] = Field(..., description="M(t)")
    objective: float
    nodes: int = Field(0, description="Search nodes expanded")


class SolutionEvaluation(BaseModel):
    """Constraint check of a schedule against an instance."""
    feasible: bool
    objective: float
    availability: float
    violations: List[str] = Field(default_factory=list)


class OptimizeRequest(BaseModel):
    """Input file of the `optimize` command."""
    trace_path: Path = Field(..., description="Trace JSON, relative to this file")
    n_tar: Union[int, List[int]] = Field(..., description="Constant or per-tick N_Tar")
    avail_tar: float = Field(..., ge=0, le=1)
    d: int = Field(..., ge=0, description="Cold-start delay in ticks")
    k: Optional[float] = Field(None, gt=1, description="Defaults to the trace's on-demand cost ratio")
    n_max: Optional[int] = Field(None, ge=0)
    od_max: Optional[int] = Field(None, ge=0)
    events_path: Optional[Path] = Field(None, description="Event log of a run to score against the optimum")
