import { describe, expect, it } from "vitest";

import { LayoutManager, layeredLayout, type StorageLike } from "../src/layout.js";
import type { NetworkDoc } from "../src/types.js";

const doc: NetworkDoc = {
  variables: [
    { name: "K", states: ["0", "1"] },
    { name: "D", states: ["0", "1"] },
    { name: "C", states: ["0", "1"] },
    { name: "S", states: ["0", "1"] },
  ],
  edges: [
    ["K", "D"],
    ["D", "C"],
    ["S", "C"],
  ],
  meta: {},
  cpts: [],
};

function memoryStorage(): StorageLike {
  const m = new Map<string, string>();
  return {
    getItem: (k) => m.get(k) ?? null,
    setItem: (k, v) => void m.set(k, v),
  };
}

describe("layeredLayout", () => {
  it("stacks layers by longest path from a root", () => {
    const layout = layeredLayout(doc);
    expect(layout.K.y).toBeLessThan(layout.D.y);
    expect(layout.D.y).toBeLessThan(layout.C.y);
    // S is a root, same layer as K
    expect(layout.S.y).toBe(layout.K.y);
  });

  it("spreads same-layer nodes horizontally", () => {
    const layout = layeredLayout(doc);
    expect(layout.K.x).not.toBe(layout.S.x);
  });
});

describe("LayoutManager", () => {
  it("overlays and persists manual drags", () => {
    const storage = memoryStorage();
    const mgr = new LayoutManager("test", storage);
    mgr.drag("C", { x: 5, y: 7 });
    expect(mgr.positions(doc).C).toEqual({ x: 5, y: 7 });
    // a fresh manager over the same storage sees the override
    const again = new LayoutManager("test", storage);
    expect(again.positions(doc).C).toEqual({ x: 5, y: 7 });
    again.reset();
    expect(again.positions(doc).C).toEqual(layeredLayout(doc).C);
  });
});
