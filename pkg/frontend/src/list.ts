// Sortable project table; every row is selectable, mirroring the map.

import type { ProjectSummary } from "./api.js";
import { SortKey, sortProjects } from "./sorting.js";

export interface ListController {
  element: HTMLElement;
  setProjects(projects: readonly ProjectSummary[]): void;
  setSelected(ids: ReadonlySet<string>): void;
  readonly sortKey: SortKey;
}

const COLUMNS: { key: SortKey; label: string }[] = [
  { key: "bcr", label: "Benefit/cost" },
  { key: "value", label: "Exposure-yrs" },
  { key: "cost", label: "Cost" },
  { key: "length", label: "Length (m)" },
];

export function createProjectList(
  onToggle: (projectId: string) => void,
): ListController {
  const container = document.createElement("div");
  container.classList.add("project-list");

  let projects: readonly ProjectSummary[] = [];
  let selected: ReadonlySet<string> = new Set();
  let sortKey: SortKey = "bcr";

  function render(): void {
    container.replaceChildren();
    if (projects.length === 0) {
      const empty = document.createElement("p");
      empty.classList.add("empty-state");
      empty.textContent = "No candidate projects in this snapshot.";
      container.appendChild(empty);
      return;
    }
    const table = document.createElement("table");
    const head = table.createTHead().insertRow();
    head.insertCell().textContent = "Street";
    for (const column of COLUMNS) {
      const cell = head.insertCell();
      const button = document.createElement("button");
      button.type = "button";
      button.textContent =
        column.key === sortKey ? `${column.label} ▾` : column.label;
      button.addEventListener("click", () => {
        sortKey = column.key;
        render();
      });
      cell.appendChild(button);
    }
    head.insertCell().textContent = "In cart";

    const body = table.createTBody();
    for (const summary of sortProjects(projects, sortKey)) {
      const row = body.insertRow();
      row.dataset.projectId = summary.project_id;
      row.classList.toggle("selected", selected.has(summary.project_id));
      row.insertCell().textContent = summary.street_name;
      row.insertCell().textContent = summary.bcr.toFixed(2);
      row.insertCell().textContent = summary.value_exposure_years.toFixed(1);
      row.insertCell().textContent = summary.cost_units.toFixed(0);
      row.insertCell().textContent = summary.length_m.toFixed(0);
      const mark = row.insertCell();
      mark.textContent = selected.has(summary.project_id) ? "✓" : "";
      row.addEventListener("click", () => onToggle(summary.project_id));
    }
    container.appendChild(table);
  }

  render();
  return {
    element: container,
    setProjects(next) {
      projects = next;
      render();
    },
    setSelected(ids) {
      selected = ids;
      render();
    },
    get sortKey() {
      return sortKey;
    },
  };
}
