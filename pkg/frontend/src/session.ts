import type { ApiClient } from "./api.js";
import { EvidenceSet } from "./evidence.js";
import type { SessionTick } from "./types.js";

/**
 * Drives one filtering session: submit per-tick evidence, keep the full
 * timeline, and expose per-variable trajectories for plotting.
 */
export class DynamicStepper {
  readonly timeline: SessionTick[] = [];
  private sessionId?: string;

  constructor(
    private readonly client: ApiClient,
    private readonly networkId: string,
  ) {}

  async start(): Promise<void> {
    const res = await this.client.createSession(this.networkId);
    this.sessionId = res.session_id;
    this.timeline.length = 0;
  }

  get currentTick(): number {
    return this.timeline.length === 0 ? 0 : this.timeline[this.timeline.length - 1].t;
  }

  async step(evidence: EvidenceSet | Record<string, number>): Promise<SessionTick> {
    if (this.sessionId === undefined) {
      throw new Error("session not started");
    }
    const body = evidence instanceof EvidenceSet ? evidence.toRequest() : evidence;
    const tick = await this.client.observe(this.sessionId, body);
    this.timeline.push(tick);
    return tick;
  }

  /** P(variable = state) per tick, from beliefs or predictions. */
  trajectory(variable: string, state: number, source: "belief" | "prediction" = "belief"): number[] {
    return this.timeline.map((tick) => tick[source][variable].probabilities[state]);
  }

  logEvidenceTrace(): number[] {
    return this.timeline.map((tick) => tick.log_evidence);
  }

  async stop(): Promise<void> {
    if (this.sessionId !== undefined) {
      await this.client.deleteSession(this.sessionId);
      this.sessionId = undefined;
    }
  }
}
