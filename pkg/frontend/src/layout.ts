import type { NetworkDoc } from "./types.js";

export interface NodePosition {
  x: number;
  y: number;
}

export type Layout = Record<string, NodePosition>;

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

/**
 * Topological layering: a node's layer is the longest directed path from
 * any root.  Nodes within a layer are spread evenly on x; layers stack
 * on y.  Matches the layered look of typical risk-model diagrams.
 */
export function layeredLayout(doc: NetworkDoc, width = 800, rowHeight = 120): Layout {
  const parents = new Map<string, string[]>();
  for (const v of doc.variables) parents.set(v.name, []);
  for (const [p, c] of doc.edges) parents.get(c)!.push(p);

  const depth = new Map<string, number>();
  const resolve = (name: string): number => {
    const known = depth.get(name);
    if (known !== undefined) return known;
    const ps = parents.get(name)!;
    const d = ps.length === 0 ? 0 : 1 + Math.max(...ps.map(resolve));
    depth.set(name, d);
    return d;
  };
  for (const v of doc.variables) resolve(v.name);

  const layers = new Map<number, string[]>();
  for (const v of doc.variables) {
    const d = depth.get(v.name)!;
    const row = layers.get(d) ?? [];
    row.push(v.name);
    layers.set(d, row);
  }

  const layout: Layout = {};
  for (const [d, row] of layers) {
    row.forEach((name, i) => {
      layout[name] = {
        x: Math.round(((i + 1) * width) / (row.length + 1)),
        y: (d + 1) * rowHeight,
      };
    });
  }
  return layout;
}

/** Layered layout with manually dragged positions overlaid and persisted. */
export class LayoutManager {
  constructor(
    private readonly storageKey: string,
    private readonly storage: StorageLike,
  ) {}

  positions(doc: NetworkDoc): Layout {
    return { ...layeredLayout(doc), ...this.overrides() };
  }

  drag(name: string, pos: NodePosition): void {
    const overrides = this.overrides();
    overrides[name] = pos;
    this.storage.setItem(this.storageKey, JSON.stringify(overrides));
  }

  reset(): void {
    this.storage.setItem(this.storageKey, "{}");
  }

  private overrides(): Layout {
    const raw = this.storage.getItem(this.storageKey);
    return raw ? (JSON.parse(raw) as Layout) : {};
  }
}
