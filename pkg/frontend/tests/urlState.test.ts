import { describe, expect, it } from "vitest";

import { decodeCart, encodeCart } from "../src/urlState.js";

describe("cart in the URL fragment", () => {
  it("round-trips a selection with a budget", () => {
    const cart = { selected: ["seg-0001", "seg-0003"], budget: 1500 };
    expect(decodeCart(encodeCart(cart))).toEqual(cart);
  });

  it("round-trips without a budget", () => {
    const cart = { selected: ["a", "b"], budget: null };
    expect(decodeCart(encodeCart(cart))).toEqual(cart);
  });

  it("empty cart encodes to an empty fragment", () => {
    expect(encodeCart({ selected: [], budget: null })).toBe("");
    expect(decodeCart("")).toEqual({ selected: [], budget: null });
  });

  it("deduplicates and drops blanks on decode", () => {
    expect(decodeCart("#cart=a,,a,b")).toEqual({
      selected: ["a", "b"],
      budget: null,
    });
  });

  it("ignores a malformed budget", () => {
    expect(decodeCart("#cart=a&budget=lots")).toEqual({
      selected: ["a"],
      budget: null,
    });
  });
});
