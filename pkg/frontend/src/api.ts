// Typed client for the planning service JSON API. The client is the only
// place the explorer talks to the network; all math stays server-side.

export interface LineStringGeometry {
  type: "LineString";
  coordinates: [number, number][]; // [lon, lat]
}

export interface ProjectSummary {
  project_id: string;
  street_name: string;
  geometry: LineStringGeometry;
  value_exposure_years: number;
  cost_units: number;
  bcr: number;
  lead_line_count: number;
  length_m: number;
  parcel_count: number;
  child_count: number;
}

export interface CartLine {
  project_id: string;
  value: number;
  cost: number;
  bcr: number;
}

export interface CartEvaluation {
  project_ids: string[];
  total_value: number;
  total_cost: number;
  within_budget: boolean;
  per_project: CartLine[];
}

export interface RankingEntry {
  rank: number;
  project_id: string;
  value: number;
  cost: number;
  bcr: number;
}

export interface RankingsResponse {
  policy: string;
  seed: number | null;
  entries: RankingEntry[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!resp.ok) {
      throw new ApiError(await resp.text(), resp.status);
    }
    return (await resp.json()) as T;
  }

  async listProjects(): Promise<ProjectSummary[]> {
    const body = await this.request<{ projects: ProjectSummary[] }>("/api/projects");
    return body.projects;
  }

  evaluateCart(projectIds: string[], budget: number | null): Promise<CartEvaluation> {
    return this.request<CartEvaluation>("/api/cart/evaluate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        project_ids: projectIds,
        budget: budget ?? undefined,
      }),
    });
  }

  rankings(policy: string, seed?: number): Promise<RankingsResponse> {
    const params = new URLSearchParams({ policy });
    if (seed !== undefined) params.set("seed", String(seed));
    return this.request<RankingsResponse>(`/api/rankings?${params}`);
  }
}
