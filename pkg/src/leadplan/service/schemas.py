"""Request/response models for the HTTP API."""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    projects: int


class ProjectSummary(BaseModel):
    project_id: str
    street_name: str
    geometry: dict
    value_exposure_years: float
    cost_units: float
    bcr: float
    lead_line_count: int
    length_m: float
    parcel_count: int
    child_count: int


class ProjectList(BaseModel):
    projects: list[ProjectSummary]


class CartRequest(BaseModel):
    project_ids: list[str]
    budget: Optional[float] = None


class CartLine(BaseModel):
    project_id: str
    value: float
    cost: float
    bcr: float


class CartEvaluation(BaseModel):
    project_ids: list[str]
    total_value: float
    total_cost: float
    within_budget: bool
    per_project: list[CartLine]


class RankingEntry(BaseModel):
    rank: int
    project_id: str
    value: float
    cost: float
    bcr: float


class RankingsResponse(BaseModel):
    policy: str
    seed: Optional[int] = None
    entries: list[RankingEntry]


class TrajectoryPoint(BaseModel):
    step: int
    exposure_years: float
    children: float
    lines: float
    cost: float


class PolicyTrajectory(BaseModel):
    policy: str
    seed: Optional[int] = None
    iterations: int
    median: list[TrajectoryPoint]


class SimulationResponse(BaseModel):
    n: int
    iterations: int
    policies: list[PolicyTrajectory]


class ReloadRequest(BaseModel):
    directory: Optional[str] = Field(
        default=None, description="snapshot directory; defaults to the startup paths"
    )


class ReloadResponse(BaseModel):
    status: str
    projects: int
    usable: bool
