export { ApiClient, ApiError } from "./api.js";
export type { FetchLike } from "./api.js";
export { EvidenceSet, displaySoft } from "./evidence.js";
export { ExplorerStore } from "./store.js";
export type { Scenario, NodeDelta } from "./store.js";
export { layeredLayout, LayoutManager } from "./layout.js";
export type { Layout, NodePosition, StorageLike } from "./layout.js";
export { findActiveTrail, probeDsep } from "./dsep.js";
export type { ProbeResult } from "./dsep.js";
export { DynamicStepper } from "./session.js";
export { bars, renderNode, renderPosteriors, renderComparison } from "./render.js";
export type * from "./types.js";
