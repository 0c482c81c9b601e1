// List sort toggles. The keys mirror the server's ordering policies so a
// sorted column reads the same as the corresponding priority list.

import type { ProjectSummary } from "./api.js";

export type SortKey = "bcr" | "value" | "cost" | "length";

const ACCESSORS: Record<SortKey, (p: ProjectSummary) => number> = {
  bcr: (p) => p.bcr,
  value: (p) => p.value_exposure_years,
  cost: (p) => p.cost_units,
  length: (p) => p.length_m,
};

/** Descending by the chosen metric; ties fall back the same way the
 * server breaks them (value, then id) so sort-by-bcr reproduces
 * /api/rankings?policy=by_bcr exactly. */
export function sortProjects(
  projects: readonly ProjectSummary[],
  key: SortKey,
): ProjectSummary[] {
  const metric = ACCESSORS[key];
  return [...projects].sort((a, b) => {
    const diff = metric(b) - metric(a);
    if (diff !== 0) return diff;
    const valueDiff = b.value_exposure_years - a.value_exposure_years;
    if (valueDiff !== 0) return valueDiff;
    return a.project_id < b.project_id ? -1 : a.project_id > b.project_id ? 1 : 0;
  });
}
