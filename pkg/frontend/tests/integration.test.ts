/**
 * End-to-end tests against a real service instance spawned for the suite.
 * Every number asserted here is rendered from a service response; the UI
 * code performs no probability arithmetic of its own.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { EvidenceSet } from "../src/evidence.js";
import { probeDsep } from "../src/dsep.js";
import { ExplorerStore } from "../src/store.js";
import { DynamicStepper } from "../src/session.js";
import { renderComparison, renderPosteriors } from "../src/render.js";

const PORT = 8731 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;
let client: ApiClient;

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/catalog`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("service did not start");
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  service = spawn("python3", ["-m", "riskbn.service", "--addr", `127.0.0.1:${PORT}`], {
    stdio: "ignore",
    env: { ...process.env, RISKBN_BACKEND: "numpy" },
  });
  client = new ApiClient(BASE);
  await waitForService();
}, 40_000);

afterAll(() => {
  service.kill();
});

describe("chain-click scenario", () => {
  it("updates C's bar from 0.064 to 0.084 when K=1 is clicked", async () => {
    const { id } = await client.instantiate("fig2_fig3_home");
    const store = await ExplorerStore.load(client, id);
    expect(renderPosteriors(store.posteriors)).toContain("0.064");

    const applied = await store.toggleHard("K", 1);
    expect(applied).toBe(true);
    const html = renderPosteriors(store.posteriors);
    expect(html).toContain("0.084");
    expect(store.posteriors.C.probabilities[1]).toBeCloseTo(0.084, 12);
  });

  it("restores priors when all evidence is cleared", async () => {
    const { id } = await client.instantiate("fig2_fig3_home");
    const store = await ExplorerStore.load(client, id);
    const priors = JSON.stringify(store.posteriors);
    await store.toggleHard("K", 1);
    await store.setSoft("D", [1, 3]);
    await store.clearEvidence();
    expect(JSON.stringify(store.posteriors)).toBe(priors);
  });
});

describe("supersession under rapid toggling", () => {
  it("final render always matches the final evidence state", async () => {
    const { id } = await client.instantiate("fig2_fig3_home");
    const store = await ExplorerStore.load(client, id);

    // hammer the store with overlapping toggles; do not await in between
    const inflight: Promise<boolean>[] = [];
    for (let i = 0; i < 12; i++) {
      store.evidence.toggleHard("K", i % 2 === 0 ? 1 : 0);
      inflight.push(store.refresh());
    }
    await Promise.all(inflight);

    // evidence ended on K=0; the displayed posterior must agree with a
    // fresh query for exactly that evidence
    const truth = await client.query(id, ["C"], { K: 0 });
    expect(store.posteriors.C.probabilities).toEqual(
      truth.posteriors.C.probabilities,
    );
  });
});

describe("scenario compare", () => {
  it("shows the hurricane scenario raising the high-liabilities bar", async () => {
    const { id } = await client.instantiate("fig9_capital");
    const store = await ExplorerStore.load(client, id);

    store.saveScenario("baseline");
    store.evidence.toggleHard("H", 1);
    store.saveScenario("H=1");
    const [baseline, hurricane] = store.scenarios;

    const cmp = await store.compare(baseline.evidence, hurricane.evidence);
    const hiState = cmp.delta.L.states.length - 1;
    expect(cmp.delta.L.delta[hiState]).toBeGreaterThan(0);

    const html = renderComparison(store.variableNames(), cmp.a, cmp.b, cmp.delta);
    expect(html).toContain('data-node="L"');
    expect(html).toContain('class="up"');
  });
});

describe("dynamic stepper", () => {
  it("plots the desk trajectory: one claim moves K to 0.8 and predicts 0.17", async () => {
    const { id } = await client.instantiate("fig11_dynamic_claims");
    const stepper = new DynamicStepper(client, id);
    await stepper.start();

    const ev = new EvidenceSet();
    ev.toggleHard("C", 1);
    const tick = await stepper.step(ev);
    expect(tick.t).toBe(1);
    expect(tick.belief.K.probabilities[1]).toBeCloseTo(0.8, 12);
    expect(tick.prediction.C.probabilities[1]).toBeCloseTo(0.17, 12);

    await stepper.step({});
    expect(stepper.trajectory("K", 1)).toHaveLength(2);
    expect(stepper.logEvidenceTrace()[0]).toBeLessThan(0);
    await stepper.stop();
  });
});

describe("d-separation probe", () => {
  it("reports separation and highlights an active trail when connected", async () => {
    const { id } = await client.instantiate("fig2_fig3_home");
    const doc = await client.getNetwork(id);

    const blocked = await probeDsep(client, id, doc, ["K"], ["C"], ["D"]);
    expect(blocked).toEqual({ separated: true });

    const open = await probeDsep(client, id, doc, ["K"], ["C"], []);
    expect(open.separated).toBe(false);
    expect(open.path).toEqual(["K", "D", "C"]);
  });
});
