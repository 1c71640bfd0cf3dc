import type { ApiClient } from "./api.js";
import { EvidenceSet } from "./evidence.js";
import type { NetworkDoc, Posteriors } from "./types.js";

export interface Scenario {
  name: string;
  evidence: EvidenceSet;
}

export interface NodeDelta {
  states: string[];
  /** probability(b) - probability(a) per state */
  delta: number[];
}

/**
 * View model for one loaded network.  Every posterior held here came
 * verbatim from a service response; concurrent requests carry monotone
 * sequence numbers and a response is dropped if a newer one has already
 * been applied (so rapid toggling can never render stale numbers).
 */
export class ExplorerStore {
  readonly evidence = new EvidenceSet();
  readonly scenarios: Scenario[] = [];
  posteriors: Posteriors = {};

  private nextSeq = 0;
  private appliedSeq = 0;

  constructor(
    private readonly client: ApiClient,
    readonly networkId: string,
    readonly doc: NetworkDoc,
  ) {}

  static async load(client: ApiClient, networkId: string): Promise<ExplorerStore> {
    const doc = await client.getNetwork(networkId);
    const store = new ExplorerStore(client, networkId, doc);
    await store.refresh();
    return store;
  }

  variableNames(): string[] {
    return this.doc.variables.map((v) => v.name);
  }

  /**
   * Re-query all marginals under the current evidence.  Returns true when
   * the response was applied, false when it arrived after a newer one and
   * was discarded.
   */
  async refresh(): Promise<boolean> {
    const seq = ++this.nextSeq;
    const res = await this.client.query(
      this.networkId,
      this.variableNames(),
      this.evidence.toRequest(),
    );
    if (seq <= this.appliedSeq) {
      return false;
    }
    this.appliedSeq = seq;
    this.posteriors = res.posteriors;
    return true;
  }

  async toggleHard(variable: string, stateIndex: number): Promise<boolean> {
    this.evidence.toggleHard(variable, stateIndex);
    return this.refresh();
  }

  async setSoft(variable: string, likelihoods: number[]): Promise<boolean> {
    this.evidence.setSoft(variable, likelihoods);
    return this.refresh();
  }

  async clearEvidence(variable?: string): Promise<boolean> {
    this.evidence.clear(variable);
    return this.refresh();
  }

  saveScenario(name: string): void {
    const existing = this.scenarios.findIndex((s) => s.name === name);
    const scenario = { name, evidence: this.evidence.clone() };
    if (existing >= 0) {
      this.scenarios[existing] = scenario;
    } else {
      this.scenarios.push(scenario);
    }
  }

  /**
   * Paired posteriors and per-node differences (b minus a) for two
   * evidence sets, each from its own service query.
   */
  async compare(
    a: EvidenceSet,
    b: EvidenceSet,
  ): Promise<{ a: Posteriors; b: Posteriors; delta: Record<string, NodeDelta> }> {
    const targets = this.variableNames();
    const [ra, rb] = await Promise.all([
      this.client.query(this.networkId, targets, a.toRequest()),
      this.client.query(this.networkId, targets, b.toRequest()),
    ]);
    const delta: Record<string, NodeDelta> = {};
    for (const name of targets) {
      const ma = ra.posteriors[name];
      const mb = rb.posteriors[name];
      delta[name] = {
        states: ma.states,
        delta: ma.probabilities.map((p, i) => mb.probabilities[i] - p),
      };
    }
    return { a: ra.posteriors, b: rb.posteriors, delta };
  }
}
