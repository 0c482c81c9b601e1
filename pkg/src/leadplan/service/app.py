"""Read-only JSON API over a scored snapshot.

Every endpoint is a pure function of the current serving state plus the
request, so identical requests (seeds included) return identical bodies.
The admin reload endpoint is the only mutation and swaps the whole state
atomically.
"""
from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .. import policysim
from ..errors import LeadPlanError, NotEnoughProjects, UnknownPolicy, ZeroCost
from ..ingest import segment_feature
from ..pipeline import SnapshotPaths
from .schemas import (
    CartEvaluation,
    CartLine,
    CartRequest,
    HealthResponse,
    PolicyTrajectory,
    ProjectList,
    ProjectSummary,
    RankingEntry,
    RankingsResponse,
    ReloadRequest,
    ReloadResponse,
    SimulationResponse,
    TrajectoryPoint,
)
from .state import ServingState, SnapshotStore


def create_app(store: SnapshotStore) -> FastAPI:
    app = FastAPI(title="leadplan", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    def current() -> ServingState:
        state = store.state
        if state is None:
            raise HTTPException(status_code=503, detail="snapshot not ready")
        return state

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        state = store.state
        return HealthResponse(
            status="ok" if state is not None else "loading",
            projects=len(state.projects) if state is not None else 0,
        )

    @app.get("/api/projects", response_model=ProjectList)
    def list_projects():
        state = current()
        summaries = []
        for p in state.projects:
            summaries.append(ProjectSummary(
                project_id=p.project_id,
                street_name=p.segment.street_name,
                geometry=segment_feature(p.segment)["geometry"],
                value_exposure_years=p.value_exposure_years,
                cost_units=p.cost_units,
                bcr=p.value_exposure_years / p.cost_units if p.cost_units > 0 else 0.0,
                lead_line_count=p.lead_line_count,
                length_m=p.segment.length_m,
                parcel_count=len(p.parcel_ids),
                child_count=state.child_counts.get(p.project_id, 0),
            ))
        return ProjectList(projects=summaries)

    @app.post("/api/cart/evaluate", response_model=CartEvaluation)
    def evaluate_cart(request: CartRequest):
        state = current()
        seen = set()
        for project_id in request.project_ids:
            if project_id in seen:
                raise HTTPException(status_code=400,
                                    detail=f"duplicate project id {project_id!r}")
            seen.add(project_id)
        by_id = {p.project_id: p for p in state.projects}
        lines = []
        for project_id in request.project_ids:
            project = by_id.get(project_id)
            if project is None:
                raise HTTPException(status_code=404,
                                    detail=f"unknown project id {project_id!r}")
            bcr = (project.value_exposure_years / project.cost_units
                   if project.cost_units > 0 else 0.0)
            lines.append(CartLine(
                project_id=project_id,
                value=project.value_exposure_years,
                cost=project.cost_units,
                bcr=bcr,
            ))
        # totals accumulate in sorted-id order: bit-identical for any
        # permutation of the same cart
        total_value = 0.0
        total_cost = 0.0
        for line in sorted(lines, key=lambda c: c.project_id):
            total_value += line.value
            total_cost += line.cost
        within = True if request.budget is None else total_cost <= request.budget
        return CartEvaluation(
            project_ids=list(request.project_ids),
            total_value=total_value,
            total_cost=total_cost,
            within_budget=within,
            per_project=lines,
        )

    @app.get("/api/rankings", response_model=RankingsResponse)
    def rankings(policy: str, seed: Optional[int] = None):
        state = current()
        try:
            parsed = policysim.parse_policy(policy, seed)
            ordering = policysim.policy_ordering(
                parsed, state.projects, len(state.projects)
            )
        except (UnknownPolicy, ZeroCost, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        by_id = {p.project_id: p for p in state.projects}
        entries = []
        for rank, project_id in enumerate(ordering, start=1):
            p = by_id[project_id]
            entries.append(RankingEntry(
                rank=rank,
                project_id=project_id,
                value=p.value_exposure_years,
                cost=p.cost_units,
                bcr=p.value_exposure_years / p.cost_units if p.cost_units > 0 else 0.0,
            ))
        return RankingsResponse(policy=parsed.kind, seed=parsed.seed, entries=entries)

    @app.get("/api/simulation", response_model=SimulationResponse)
    def simulation(
        policies: str = Query(..., description="comma-separated policy names"),
        n: Optional[int] = None,
        iterations: int = 1,
        seed: int = 0,
    ):
        state = current()
        steps = n if n is not None else min(100, len(state.projects))
        if steps > store.limits.max_simulation_n:
            raise HTTPException(
                status_code=400,
                detail=f"n {steps} above limit {store.limits.max_simulation_n}",
            )
        if iterations > store.limits.max_iterations:
            raise HTTPException(
                status_code=400,
                detail=f"iterations {iterations} above limit {store.limits.max_iterations}",
            )
        try:
            parsed = [policysim.parse_policy(name, seed)
                      for name in policies.split(",") if name.strip()]
            outcomes = policysim.simulate(
                parsed, state.projects, n=steps, iterations=iterations,
                child_counts=state.child_counts,
            )
        except (UnknownPolicy, NotEnoughProjects, ZeroCost, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return SimulationResponse(
            n=steps,
            iterations=iterations,
            policies=[
                PolicyTrajectory(
                    policy=o.policy.kind,
                    seed=o.policy.seed,
                    iterations=len(o.runs),
                    median=[
                        TrajectoryPoint(
                            step=k,
                            exposure_years=s.exposure_years,
                            children=s.children,
                            lines=s.lines,
                            cost=s.cost,
                        )
                        for k, s in enumerate(o.median_per_step, start=1)
                    ],
                )
                for o in outcomes
            ],
        )

    @app.post("/admin/reload", response_model=ReloadResponse)
    def reload_snapshot(request: ReloadRequest):
        paths = (SnapshotPaths.from_dir(request.directory)
                 if request.directory else None)
        try:
            state = store.load(paths)
        except (LeadPlanError, ValueError, OSError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return ReloadResponse(status="reloaded", projects=len(state.projects),
                              usable=True)

    return app
