"""Benefit-cost ranking and budget-constrained selection.

The production path is the greedy priority list: sort by value/cost ratio
and take what fits. An exact dynamic-programming solver over quantized
costs backs it as an oracle and as an optional path for small instances,
and a fractional mode realizes the relaxed variant where the last project
may be partially funded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InstanceTooLarge, ZeroCost
from .model import Project

DEFAULT_MAX_TABLE_CELLS = 50_000_000


@dataclass(frozen=True)
class RankedProject:
    project_id: str
    bcr: float
    rank: int


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    total_value: float
    total_cost: float
    budget: float
    fractional_last: Optional[tuple[str, float]] = None  # (project_id, fraction)


def rank_projects(projects: Sequence[Project]) -> list[RankedProject]:
    """Priority list by descending benefit-cost ratio.

    Ties break toward higher value, then lexicographic id, so the order is
    total and reproducible.
    """
    for p in projects:
        if p.cost_units <= 0:
            raise ZeroCost(f"project {p.project_id!r} has non-positive cost")
    ordered = sorted(
        projects,
        key=lambda p: (
            -(p.value_exposure_years / p.cost_units),
            -p.value_exposure_years,
            p.project_id,
        ),
    )
    return [
        RankedProject(p.project_id, p.value_exposure_years / p.cost_units, i + 1)
        for i, p in enumerate(ordered)
    ]


def greedy_select(
    ranked: Sequence[RankedProject],
    projects: Sequence[Project],
    budget: float,
    fractional: bool = False,
) -> SelectionResult:
    """Walk the priority list, taking every project that still fits.

    In 0/1 mode a non-fitting project is skipped and scanning continues.
    In fractional mode the first non-fitting project is funded partially so
    the budget is consumed exactly, and scanning stops — the optimum of the
    relaxed problem.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    by_id = {p.project_id: p for p in projects}
    selected: list[str] = []
    total_value = 0.0
    total_cost = 0.0
    fractional_last = None
    remaining = budget
    for entry in ranked:
        project = by_id[entry.project_id]
        cost = project.cost_units
        if cost <= remaining:
            selected.append(project.project_id)
            total_value += project.value_exposure_years
            total_cost += cost
            remaining -= cost
            continue
        if fractional:
            fraction = remaining / cost
            if fraction > 0.0:
                fractional_last = (project.project_id, fraction)
                total_value += project.value_exposure_years * fraction
                total_cost = budget  # exhausted exactly, by definition
                remaining = 0.0
            break
    return SelectionResult(
        selected=tuple(selected),
        total_value=total_value,
        total_cost=total_cost,
        budget=budget,
        fractional_last=fractional_last,
    )


def knapsack_exact(
    projects: Sequence[Project],
    budget: float,
    cost_quantum: float = 1.0,
    max_table_cells: int = DEFAULT_MAX_TABLE_CELLS,
) -> SelectionResult:
    """Optimal 0/1 selection by dynamic programming over quantized costs.

    Costs are scaled by ``cost_quantum`` and rounded to integers (the
    quantization error is the caller's to judge — costs here are estimates
    to begin with). Refuses instances whose table would not fit the memory
    budget.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    items = sorted(projects, key=lambda p: p.project_id)
    costs = []
    for p in items:
        scaled = int(round(p.cost_units / cost_quantum))
        if scaled <= 0:
            raise ZeroCost(
                f"project {p.project_id!r} cost quantizes to {scaled}; "
                f"use a finer cost_quantum"
            )
        costs.append(scaled)
    capacity = int(math.floor(budget / cost_quantum + 1e-9))

    n = len(items)
    cells = (n + 1) * (capacity + 1)
    if cells > max_table_cells:
        raise InstanceTooLarge(
            f"dp table of {cells} cells exceeds budget of {max_table_cells}"
        )

    best = np.zeros(capacity + 1, dtype=np.float64)
    taken = np.zeros((n, capacity + 1), dtype=bool)
    for i, project in enumerate(items):
        c = costs[i]
        v = project.value_exposure_years
        if c > capacity:
            continue
        candidate = best[:-c] + v
        improved = candidate > best[c:]
        taken[i, c:] = improved
        best[c:] = np.where(improved, candidate, best[c:])

    chosen: list[int] = []
    w = capacity
    for i in range(n - 1, -1, -1):
        if w >= costs[i] and taken[i, w]:
            chosen.append(i)
            w -= costs[i]
    chosen.reverse()

    selected = tuple(items[i].project_id for i in chosen)
    total_value = sum(items[i].value_exposure_years for i in chosen)
    total_cost = sum(items[i].cost_units for i in chosen)
    return SelectionResult(
        selected=selected,
        total_value=total_value,
        total_cost=total_cost,
        budget=budget,
    )


def approximation_gap(
    projects: Sequence[Project],
    budget: float,
    cost_quantum: float = 1.0,
) -> float:
    """greedy value / exact value on one instance (1.0 = greedy optimal)."""
    exact = knapsack_exact(projects, budget, cost_quantum=cost_quantum)
    greedy = greedy_select(rank_projects(projects), projects, budget)
    if exact.total_value == 0.0:
        return 1.0
    return greedy.total_value / exact.total_value


def ranked_csv_rows(
    ranked: Sequence[RankedProject], projects: Iterable[Project]
) -> list[list]:
    """Rows for the priority-list CSV, cumulative columns included."""
    by_id = {p.project_id: p for p in projects}
    rows: list[list] = [[
        "rank", "project_id", "value", "cost", "bcr",
        "cumulative_cost", "cumulative_value",
    ]]
    cum_cost = 0.0
    cum_value = 0.0
    for entry in ranked:
        project = by_id[entry.project_id]
        cum_cost += project.cost_units
        cum_value += project.value_exposure_years
        rows.append([
            entry.rank, entry.project_id,
            repr(project.value_exposure_years), repr(project.cost_units),
            repr(entry.bcr), repr(cum_cost), repr(cum_value),
        ])
    return rows
