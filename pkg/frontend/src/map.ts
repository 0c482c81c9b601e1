// SVG street map: one polyline per candidate project, clickable to toggle
// cart membership. Plain SVG keeps the explorer dependency-free; the
// geometry volumes here (hundreds of short segments) don't need tiles.

import type { ProjectSummary } from "./api.js";

export interface MapController {
  element: SVGSVGElement;
  setProjects(projects: readonly ProjectSummary[]): void;
  setSelected(ids: ReadonlySet<string>): void;
}

const WIDTH = 760;
const HEIGHT = 560;
const PADDING = 16;

export function createMapLayer(onToggle: (projectId: string) => void): MapController {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.classList.add("project-map");

  let lines = new Map<string, SVGPolylineElement>();

  function project(points: [number, number][]): (lonLat: [number, number]) => [number, number] {
    // equirectangular fit of the whole portfolio into the viewport
    const lons = points.map((p) => p[0]);
    const lats = points.map((p) => p[1]);
    const minLon = Math.min(...lons);
    const maxLon = Math.max(...lons);
    const minLat = Math.min(...lats);
    const maxLat = Math.max(...lats);
    const midLat = (minLat + maxLat) / 2;
    const kx = Math.cos((midLat * Math.PI) / 180);
    const spanX = Math.max((maxLon - minLon) * kx, 1e-9);
    const spanY = Math.max(maxLat - minLat, 1e-9);
    const scale = Math.min(
      (WIDTH - 2 * PADDING) / spanX,
      (HEIGHT - 2 * PADDING) / spanY,
    );
    return ([lon, lat]) => [
      PADDING + (lon - minLon) * kx * scale,
      HEIGHT - PADDING - (lat - minLat) * scale,
    ];
  }

  return {
    element: svg,
    setProjects(projects) {
      svg.replaceChildren();
      lines = new Map();
      const allPoints = projects.flatMap((p) => p.geometry.coordinates);
      if (allPoints.length === 0) return;
      const toXY = project(allPoints);
      for (const summary of projects) {
        const poly = document.createElementNS(
          "http://www.w3.org/2000/svg", "polyline",
        );
        poly.setAttribute(
          "points",
          summary.geometry.coordinates
            .map((c) => toXY(c).map((v) => v.toFixed(1)).join(","))
            .join(" "),
        );
        poly.classList.add("street");
        poly.dataset.projectId = summary.project_id;
        const tooltip = document.createElementNS(
          "http://www.w3.org/2000/svg", "title",
        );
        tooltip.textContent =
          `${summary.street_name} — ${summary.value_exposure_years.toFixed(1)} ` +
          `exposure-yrs, cost ${summary.cost_units.toFixed(0)}`;
        poly.appendChild(tooltip);
        poly.addEventListener("click", () => onToggle(summary.project_id));
        svg.appendChild(poly);
        lines.set(summary.project_id, poly);
      }
    },
    setSelected(ids) {
      for (const [projectId, poly] of lines) {
        poly.classList.toggle("selected", ids.has(projectId));
      }
    },
  };
}
