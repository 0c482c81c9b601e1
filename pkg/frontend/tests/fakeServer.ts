// In-memory stand-in for the planning service, mirroring its evaluation
// semantics (totals accumulate in sorted-id order; rankings sort by ratio,
// then value, then id). Unit tests exercise the explorer logic against
// this; the e2e suite replays the same checks against the real service.

import type {
  CartEvaluation,
  ProjectSummary,
  RankingsResponse,
} from "../src/api.js";

export function sampleProjects(): ProjectSummary[] {
  const rows: [string, string, number, number, number, number][] = [
    // id, street, value, cost, lead lines, length
    ["seg-0001", "PLEASANT ST", 84.5, 12, 12, 140],
    ["seg-0002", "HIGHLAND AVE", 30.25, 5, 5, 90],
    ["seg-0003", "WASHINGTON ST", 6.0, 9, 9, 200],
    ["seg-0004", "FELLSWAY RD", 52.0, 8, 8, 160],
    ["seg-0005", "BROADWAY TER", 0.0, 3, 3, 75],
    ["seg-0006", "ORCHARD LN", 30.25, 11, 11, 120],
  ];
  return rows.map(([id, street, value, cost, lines, length], i) => ({
    project_id: id,
    street_name: street,
    geometry: {
      type: "LineString" as const,
      coordinates: [
        [-71.05, 42.43 + i * 0.001],
        [-71.048, 42.43 + i * 0.001],
      ] as [number, number][],
    },
    value_exposure_years: value,
    cost_units: cost,
    bcr: cost > 0 ? value / cost : 0,
    lead_line_count: lines,
    length_m: length,
    parcel_count: lines,
    child_count: Math.round(value / 10),
  }));
}

export class FakeServer {
  constructor(private readonly projects: ProjectSummary[] = sampleProjects()) {}

  listProjects(): ProjectSummary[] {
    return [...this.projects].sort((a, b) =>
      a.project_id < b.project_id ? -1 : 1,
    );
  }

  evaluateCart(projectIds: string[], budget: number | null): CartEvaluation {
    const byId = new Map(this.projects.map((p) => [p.project_id, p]));
    const perProject = projectIds.map((id) => {
      const p = byId.get(id);
      if (!p) throw new Error(`unknown project id ${id}`);
      return {
        project_id: id,
        value: p.value_exposure_years,
        cost: p.cost_units,
        bcr: p.bcr,
      };
    });
    let totalValue = 0;
    let totalCost = 0;
    for (const line of [...perProject].sort((a, b) =>
      a.project_id < b.project_id ? -1 : 1,
    )) {
      totalValue += line.value;
      totalCost += line.cost;
    }
    return {
      project_ids: [...projectIds],
      total_value: totalValue,
      total_cost: totalCost,
      within_budget: budget === null ? true : totalCost <= budget,
      per_project: perProject,
    };
  }

  rankings(policy: string): RankingsResponse {
    if (policy !== "by_bcr") throw new Error(`unsupported policy ${policy}`);
    const ordered = [...this.projects].sort((a, b) => {
      const ratio = b.bcr - a.bcr;
      if (ratio !== 0) return ratio;
      const value = b.value_exposure_years - a.value_exposure_years;
      if (value !== 0) return value;
      return a.project_id < b.project_id ? -1 : 1;
    });
    return {
      policy,
      seed: null,
      entries: ordered.map((p, i) => ({
        rank: i + 1,
        project_id: p.project_id,
        value: p.value_exposure_years,
        cost: p.cost_units,
        bcr: p.bcr,
      })),
    };
  }
}
