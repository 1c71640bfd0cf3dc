import { ApiClient } from "./api.js";
import { ExplorerStore } from "./store.js";
import { LayoutManager } from "./layout.js";
import { renderPosteriors } from "./render.js";

/**
 * Browser bootstrap: catalog picker on the left, posterior bars on the
 * right, click a bar to toggle hard evidence.  Everything else (scenario
 * compare, stepper, d-sep probe) is reachable through the exported
 * library API; this entry point keeps the minimal interactive loop.
 */
async function boot(): Promise<void> {
  const base =
    new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8080";
  const client = new ApiClient(base);
  const layouts = new LayoutManager("riskbn-layout", localStorage);

  const picker = document.getElementById("catalog") as HTMLSelectElement;
  const board = document.getElementById("board")!;
  const status = document.getElementById("status")!;

  const { entries } = await client.listCatalog();
  for (const entry of entries) {
    const opt = document.createElement("option");
    opt.value = entry.id;
    opt.textContent = `${entry.id} — ${entry.doc.slice(0, 60)}`;
    picker.appendChild(opt);
  }

  let store: ExplorerStore | undefined;

  const redraw = () => {
    if (!store) return;
    const pins: Record<string, number | undefined> = {};
    for (const name of store.evidence.variables()) {
      const v = store.evidence.get(name);
      if (typeof v === "number") pins[name] = v;
    }
    board.innerHTML = renderPosteriors(store.posteriors, pins);
    void layouts.positions(store.doc); // reserved for the SVG edge layer
  };

  picker.addEventListener("change", () => {
    void (async () => {
      status.textContent = "loading…";
      const { id } = await client.instantiate(picker.value);
      store = await ExplorerStore.load(client, id);
      status.textContent = `network ${id}`;
      redraw();
    })();
  });

  board.addEventListener("click", (ev) => {
    const bar = (ev.target as HTMLElement).closest<HTMLElement>(".bar");
    const node = (ev.target as HTMLElement).closest<HTMLElement>(".node");
    if (!bar || !node || !store) return;
    const name = node.dataset.node!;
    const state = Number(bar.dataset.state);
    void store.toggleHard(name, state).then((applied) => {
      if (applied) redraw();
    });
  });

  document.getElementById("clear")!.addEventListener("click", () => {
    if (!store) return;
    void store.clearEvidence().then((applied) => {
      if (applied) redraw();
    });
  });
}

void boot();
