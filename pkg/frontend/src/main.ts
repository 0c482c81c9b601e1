// Explorer entry point: fetch the portfolio, wire map + list + cart, and
// keep the URL fragment in sync so plans can be shared as links.

import { ApiClient, ProjectSummary } from "./api.js";
import { CartController, CartState } from "./cart.js";
import { createMapLayer } from "./map.js";
import { createProjectList } from "./list.js";
import { decodeCart, encodeCart } from "./urlState.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? "";
}

function formatNumber(x: number): string {
  return x.toLocaleString(undefined, { maximumFractionDigits: 1 });
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const api = new ApiClient(apiBase());
  const cart = new CartController((ids, budget) => api.evaluateCart(ids, budget));

  const banner = document.createElement("div");
  banner.classList.add("banner");
  banner.hidden = true;

  const totalsPanel = document.createElement("div");
  totalsPanel.classList.add("totals");

  const budgetInput = document.createElement("input");
  budgetInput.type = "number";
  budgetInput.placeholder = "budget (cost units)";
  budgetInput.addEventListener("change", () => {
    const value = budgetInput.value.trim();
    void cart.setBudget(value === "" ? null : Number(value));
  });

  const map = createMapLayer((id) => void cart.toggle(id));
  const list = createProjectList((id) => void cart.toggle(id));

  const layout = document.createElement("div");
  layout.classList.add("layout");
  const mapPane = document.createElement("div");
  mapPane.classList.add("map-pane");
  mapPane.appendChild(map.element);
  const sidePane = document.createElement("div");
  sidePane.classList.add("side-pane");
  const budgetRow = document.createElement("div");
  budgetRow.classList.add("budget-row");
  const budgetLabel = document.createElement("label");
  budgetLabel.textContent = "Budget: ";
  budgetLabel.appendChild(budgetInput);
  budgetRow.appendChild(budgetLabel);
  sidePane.append(totalsPanel, budgetRow, list.element);
  layout.append(mapPane, sidePane);
  root.append(banner, layout);

  function renderTotals(state: CartState): void {
    totalsPanel.replaceChildren();
    const heading = document.createElement("h2");
    heading.textContent = `Cart: ${state.selected.length} project(s)`;
    totalsPanel.appendChild(heading);
    const totals = state.totals;
    const line = document.createElement("p");
    if (totals) {
      line.textContent =
        `${formatNumber(totals.total_value)} exposure-years bought down · ` +
        `cost ${formatNumber(totals.total_cost)}`;
    } else {
      line.textContent = "evaluating…";
    }
    totalsPanel.appendChild(line);
    if (state.budget !== null && totals && !totals.within_budget) {
      const over = document.createElement("p");
      over.classList.add("over-budget");
      over.textContent =
        `Over budget by ${formatNumber(totals.total_cost - state.budget)} — ` +
        `selection still allowed; weigh alongside other considerations.`;
      totalsPanel.appendChild(over);
    }
    if (state.staleIds.length > 0) {
      const stale = document.createElement("p");
      stale.classList.add("stale-warning");
      stale.textContent =
        `Removed from a newer snapshot: ${state.staleIds.join(", ")}`;
      totalsPanel.appendChild(stale);
    }
    if (state.evaluating) totalsPanel.classList.add("evaluating");
    else totalsPanel.classList.remove("evaluating");
  }

  cart.subscribe((state) => {
    renderTotals(state);
    const ids = new Set(state.selected);
    map.setSelected(ids);
    list.setSelected(ids);
    history.replaceState(null, "",
      window.location.pathname + window.location.search
      + encodeCart({ selected: state.selected, budget: state.budget }));
  });

  let projects: ProjectSummary[] = [];
  try {
    projects = await api.listProjects();
    banner.hidden = true;
  } catch (err) {
    banner.hidden = false;
    banner.textContent =
      `Cannot reach the planning service (${err instanceof Error ? err.message : err}). ` +
      `Start it with: leadplan serve --city-dir <snapshot>`;
    return;
  }
  map.setProjects(projects);
  list.setProjects(projects);

  const shared = decodeCart(window.location.hash);
  if (shared.budget !== null) {
    budgetInput.value = String(shared.budget);
    await cart.setBudget(shared.budget);
  }
  if (shared.selected.length > 0) {
    const known = new Set(projects.map((p) => p.project_id));
    await cart.replaceSelection(shared.selected.filter((id) => known.has(id)));
  }
}

void boot();
