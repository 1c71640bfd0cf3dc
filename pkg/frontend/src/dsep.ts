import type { ApiClient } from "./api.js";
import type { NetworkDoc } from "./types.js";

export interface ProbeResult {
  separated: boolean;
  /** An active trail from x to y given z, present only when connected. */
  path?: string[];
}

/**
 * Find one active trail between x and y given conditioning set z, for
 * highlighting.  Standard reachability over (node, arrival-direction)
 * states: chains and forks pass through unconditioned nodes; colliders
 * pass only when the collider or one of its descendants is conditioned.
 */
export function findActiveTrail(
  edges: [string, string][],
  xs: string[],
  ys: string[],
  zs: string[],
): string[] | undefined {
  const z = new Set(zs);
  const targets = new Set(ys);
  const parents = new Map<string, string[]>();
  const children = new Map<string, string[]>();
  const touch = (m: Map<string, string[]>, k: string) => {
    if (!m.has(k)) m.set(k, []);
    return m.get(k)!;
  };
  for (const [p, c] of edges) {
    touch(children, p).push(c);
    touch(parents, c).push(p);
  }

  // nodes whose conditioning opens colliders: z and its ancestors' closure
  // is not needed; we need "is z or has a descendant in z"
  const opensCollider = new Set<string>(z);
  let grew = true;
  while (grew) {
    grew = false;
    for (const [p, cs] of children) {
      if (!opensCollider.has(p) && cs.some((c) => opensCollider.has(c))) {
        opensCollider.add(p);
        grew = true;
      }
    }
  }

  type State = { node: string; dir: "down" | "up" };
  const key = (s: State) => `${s.dir}:${s.node}`;
  const prev = new Map<string, State | null>();
  const queue: State[] = [];
  for (const x of xs) {
    // leaving the start node in either direction
    const s: State = { node: x, dir: "up" };
    prev.set(key(s), null);
    queue.push(s);
  }

  const reconstruct = (end: State): string[] => {
    const path: string[] = [];
    let cur: State | null = end;
    while (cur) {
      path.push(cur.node);
      cur = prev.get(key(cur)) ?? null;
    }
    return path.reverse();
  };

  while (queue.length > 0) {
    const cur = queue.shift()!;
    if (targets.has(cur.node) && !z.has(cur.node)) {
      return reconstruct(cur);
    }
    const moves: State[] = [];
    if (cur.dir === "up") {
      // arrived from a child (or starting): pass unless conditioned
      if (!z.has(cur.node)) {
        for (const p of parents.get(cur.node) ?? []) moves.push({ node: p, dir: "up" });
        for (const c of children.get(cur.node) ?? []) moves.push({ node: c, dir: "down" });
      }
    } else {
      // arrived from a parent: chain down if unconditioned, collider up if open
      if (!z.has(cur.node)) {
        for (const c of children.get(cur.node) ?? []) moves.push({ node: c, dir: "down" });
      }
      if (opensCollider.has(cur.node)) {
        for (const p of parents.get(cur.node) ?? []) moves.push({ node: p, dir: "up" });
      }
    }
    for (const next of moves) {
      if (!prev.has(key(next))) {
        prev.set(key(next), cur);
        queue.push(next);
      }
    }
  }
  return undefined;
}

/** Ask the service for the verdict; derive a highlight trail locally. */
export async function probeDsep(
  client: ApiClient,
  networkId: string,
  doc: NetworkDoc,
  x: string[],
  y: string[],
  z: string[],
): Promise<ProbeResult> {
  const { separated } = await client.dsep(networkId, x, y, z);
  if (separated) {
    return { separated };
  }
  return { separated, path: findActiveTrail(doc.edges, x, y, z) };
}
