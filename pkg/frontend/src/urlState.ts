// Cart-in-the-URL: the selection and budget live in the fragment so a
// planner can share a candidate plan as a plain link.

export interface SharedCart {
  selected: string[];
  budget: number | null;
}

export function encodeCart(cart: SharedCart): string {
  const params = new URLSearchParams();
  if (cart.selected.length > 0) params.set("cart", cart.selected.join(","));
  if (cart.budget !== null && Number.isFinite(cart.budget)) {
    params.set("budget", String(cart.budget));
  }
  const text = params.toString();
  return text ? `#${text}` : "";
}

export function decodeCart(fragment: string): SharedCart {
  const raw = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  const params = new URLSearchParams(raw);
  const cartText = params.get("cart") ?? "";
  const selected = cartText
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
  const budgetText = params.get("budget");
  const budget = budgetText !== null ? Number(budgetText) : null;
  return {
    selected: [...new Set(selected)],
    budget: budget !== null && Number.isFinite(budget) ? budget : null,
  };
}
