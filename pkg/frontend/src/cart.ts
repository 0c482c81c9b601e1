// Shopping-cart state: which projects are in the worklist and what the
// server says they add up to. Toggling membership is the only mutation
// path, and totals are never computed client-side — every change asks the
// service to re-evaluate, so the displayed numbers can't drift from the
// model.

import type { CartEvaluation } from "./api.js";

export interface CartState {
  selected: string[]; // insertion order, deduplicated
  budget: number | null;
  totals: CartEvaluation | null; // latest server evaluation of `selected`
  evaluating: boolean;
  error: string | null;
  staleIds: string[]; // selections that vanished after a snapshot swap
}

export type EvaluateFn = (
  projectIds: string[],
  budget: number | null,
) => Promise<CartEvaluation>;

const EMPTY_TOTALS: CartEvaluation = {
  project_ids: [],
  total_value: 0,
  total_cost: 0,
  within_budget: true,
  per_project: [],
};

export class CartController {
  private state: CartState = {
    selected: [],
    budget: null,
    totals: EMPTY_TOTALS,
    evaluating: false,
    error: null,
    staleIds: [],
  };
  private requestCounter = 0;
  private listeners: ((state: CartState) => void)[] = [];

  constructor(private readonly evaluate: EvaluateFn) {}

  subscribe(listener: (state: CartState) => void): () => void {
    this.listeners.push(listener);
    listener(this.snapshot());
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  snapshot(): CartState {
    return {
      ...this.state,
      selected: [...this.state.selected],
      staleIds: [...this.state.staleIds],
    };
  }

  get selected(): string[] {
    return [...this.state.selected];
  }

  has(projectId: string): boolean {
    return this.state.selected.includes(projectId);
  }

  /** Flip one project in or out of the cart and re-evaluate. */
  toggle(projectId: string): Promise<CartState> {
    const selected = this.has(projectId)
      ? this.state.selected.filter((id) => id !== projectId)
      : [...this.state.selected, projectId];
    return this.applySelection(selected);
  }

  setBudget(budget: number | null): Promise<CartState> {
    this.state = { ...this.state, budget };
    return this.refresh();
  }

  /** Restore a shared cart (URL fragment); unknown ids are the caller's
   * problem to prune via markMissing. */
  replaceSelection(selected: string[]): Promise<CartState> {
    return this.applySelection([...new Set(selected)]);
  }

  /** After a snapshot swap, drop selections the server no longer knows and
   * surface them as stale so the UI can warn. */
  markMissing(knownIds: Set<string>): Promise<CartState> {
    const stale = this.state.selected.filter((id) => !knownIds.has(id));
    if (stale.length === 0) return Promise.resolve(this.snapshot());
    this.state = { ...this.state, staleIds: stale };
    return this.applySelection(
      this.state.selected.filter((id) => knownIds.has(id)),
    );
  }

  clearStale(): void {
    this.state = { ...this.state, staleIds: [] };
    this.emit();
  }

  private applySelection(selected: string[]): Promise<CartState> {
    this.state = { ...this.state, selected };
    return this.refresh();
  }

  /** Serialized evaluation: responses apply only if they belong to the
   * newest request, so a slow earlier evaluation can never overwrite a
   * newer cart (latest wins). */
  private async refresh(): Promise<CartState> {
    const requestId = ++this.requestCounter;
    const { selected, budget } = this.state;
    this.state = { ...this.state, evaluating: true };
    this.emit();
    try {
      const totals = await this.evaluate([...selected], budget);
      if (requestId === this.requestCounter) {
        this.state = { ...this.state, totals, evaluating: false, error: null };
        this.emit();
      }
    } catch (err) {
      if (requestId === this.requestCounter) {
        this.state = {
          ...this.state,
          evaluating: false,
          error: err instanceof Error ? err.message : String(err),
        };
        this.emit();
      }
    }
    return this.snapshot();
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) listener(snap);
  }
}
