"""Serving state: an immutable scored snapshot behind an atomic swap."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from ..model import PlanConfig, Project, Snapshot
from ..pipeline import ScoredPlan, SnapshotPaths, load_snapshot, score_snapshot


@dataclass(frozen=True)
class ServiceLimits:
    max_simulation_n: int = 500
    max_iterations: int = 200


@dataclass(frozen=True)
class ServingState:
    """Everything a request needs, fully precomputed and read-only."""

    snapshot: Snapshot
    projects: tuple[Project, ...]  # stable order: sorted by project_id
    child_counts: dict[str, int]
    config: PlanConfig

    @classmethod
    def from_plan(cls, snapshot: Snapshot, plan: ScoredPlan,
                  config: PlanConfig) -> "ServingState":
        ordered = tuple(sorted(plan.projects, key=lambda p: p.project_id))
        return cls(snapshot, ordered, dict(plan.child_counts), config)


@dataclass
class SnapshotStore:
    """Holds the current state; reloads build a new one then swap atomically."""

    state: Optional[ServingState] = None
    paths: Optional[SnapshotPaths] = None
    config: PlanConfig = field(default_factory=PlanConfig)
    limits: ServiceLimits = field(default_factory=ServiceLimits)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def load(self, paths: Optional[SnapshotPaths] = None) -> ServingState:
        paths = paths or self.paths
        if paths is None:
            raise ValueError("no snapshot paths configured")
        linked = load_snapshot(paths)
        if not linked.report.usable:
            fatal = [d for d in linked.report.defects if d.fatal]
            raise ValueError(
                f"snapshot rejected: {len(fatal)} fatal defects, "
                f"first: {fatal[0].message}"
            )
        plan = score_snapshot(linked.snapshot, self.config)
        state = ServingState.from_plan(linked.snapshot, plan, self.config)
        with self._lock:
            self.paths = paths
            self.state = state  # single reference assignment: no torn reads
        return state

    def install(self, state: ServingState):
        with self._lock:
            self.state = state
