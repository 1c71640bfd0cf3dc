import type { Marginal, Posteriors } from "./types.js";
import type { NodeDelta } from "./store.js";

export interface Bar {
  state: string;
  probability: number;
  /** three-decimal label, e.g. "0.084" */
  label: string;
  widthPct: number;
}

export function bars(marginal: Marginal): Bar[] {
  return marginal.states.map((state, i) => {
    const p = marginal.probabilities[i];
    return {
      state,
      probability: p,
      label: p.toFixed(3),
      widthPct: Math.round(p * 100),
    };
  });
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderNode(name: string, marginal: Marginal, pinned?: number): string {
  const rows = bars(marginal)
    .map(
      (b, i) =>
        `<div class="bar${i === pinned ? " pinned" : ""}" data-state="${i}">` +
        `<span class="state">${esc(b.state)}</span>` +
        `<span class="fill" style="width:${b.widthPct}%"></span>` +
        `<span class="prob">${b.label}</span></div>`,
    )
    .join("");
  return `<div class="node" data-node="${esc(name)}"><h3>${esc(name)}</h3>${rows}</div>`;
}

export function renderPosteriors(
  posteriors: Posteriors,
  pins: Record<string, number | undefined> = {},
): string {
  return Object.entries(posteriors)
    .map(([name, marginal]) => renderNode(name, marginal, pins[name]))
    .join("\n");
}

export function renderComparison(
  names: string[],
  a: Posteriors,
  b: Posteriors,
  delta: Record<string, NodeDelta>,
): string {
  const rows = names
    .flatMap((name) =>
      delta[name].states.map((state, i) => {
        const d = delta[name].delta[i];
        const sign = d > 0 ? "+" : "";
        return (
          `<tr data-node="${esc(name)}" data-state="${i}">` +
          `<td>${esc(name)}=${esc(state)}</td>` +
          `<td>${a[name].probabilities[i].toFixed(3)}</td>` +
          `<td>${b[name].probabilities[i].toFixed(3)}</td>` +
          `<td class="${d >= 0 ? "up" : "down"}">${sign}${d.toFixed(3)}</td></tr>`
        );
      }),
    )
    .join("");
  return (
    `<table class="compare"><thead><tr><th>node</th><th>A</th><th>B</th><th>Δ</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}
