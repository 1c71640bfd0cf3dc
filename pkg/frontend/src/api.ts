import type {
  CatalogEntrySummary,
  DsepResponse,
  EvidenceMap,
  NetworkDoc,
  QueryResponse,
  ServiceError,
  SessionTick,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ServiceError,
  ) {
    super(`${detail.code}: ${detail.message}`);
  }
}

/**
 * Thin typed client over the service endpoints.  All numbers shown in the
 * UI come from these responses; the client never post-processes
 * probabilities.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, payload as ServiceError);
    }
    return payload as T;
  }

  listCatalog(): Promise<{ entries: CatalogEntrySummary[] }> {
    return this.call("GET", "/catalog");
  }

  instantiate(catalogId: string, variant?: string): Promise<{ id: string }> {
    const qs = variant ? `?variant=${encodeURIComponent(variant)}` : "";
    return this.call("POST", `/catalog/${catalogId}/instantiate${qs}`);
  }

  uploadNetwork(doc: NetworkDoc): Promise<{ id: string }> {
    return this.call("POST", "/networks", doc);
  }

  getNetwork(id: string): Promise<NetworkDoc> {
    return this.call("GET", `/networks/${id}`);
  }

  query(
    id: string,
    targets: string[],
    evidence: EvidenceMap,
    method: "exact" | "loopy" = "exact",
  ): Promise<QueryResponse> {
    return this.call("POST", `/networks/${id}/query`, { targets, evidence, method });
  }

  dsep(id: string, x: string[], y: string[], z: string[]): Promise<DsepResponse> {
    return this.call("POST", `/networks/${id}/dsep`, { x, y, z });
  }

  createSession(networkId: string): Promise<{ session_id: string }> {
    return this.call("POST", "/sessions", { network_id: networkId });
  }

  observe(sessionId: string, evidence: EvidenceMap, t?: number): Promise<SessionTick> {
    const body: { evidence: EvidenceMap; t?: number } = { evidence };
    if (t !== undefined) body.t = t;
    return this.call("POST", `/sessions/${sessionId}/observe`, body);
  }

  deleteSession(sessionId: string): Promise<unknown> {
    return this.call("DELETE", `/sessions/${sessionId}`);
  }
}
