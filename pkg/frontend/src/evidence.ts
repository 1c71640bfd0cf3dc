import type { EvidenceMap, EvidenceValue } from "./types.js";

/**
 * The evidence pinned on a network: hard state picks and raw soft
 * likelihood vectors.  Soft vectors are *sent* unnormalized (the service
 * treats them as likelihoods); only the display helper normalizes.
 */
export class EvidenceSet {
  private readonly pins = new Map<string, EvidenceValue>();

  /** Click a state: sets hard evidence, or clears it when the same state
   * is clicked again (toggle semantics). */
  toggleHard(variable: string, stateIndex: number): void {
    const current = this.pins.get(variable);
    if (current === stateIndex) {
      this.pins.delete(variable);
    } else {
      this.pins.set(variable, stateIndex);
    }
  }

  setSoft(variable: string, likelihoods: number[]): void {
    if (likelihoods.some((v) => v < 0) || !likelihoods.some((v) => v > 0)) {
      throw new Error(`soft evidence for ${variable} must be non-negative and not all zero`);
    }
    this.pins.set(variable, [...likelihoods]);
  }

  clear(variable?: string): void {
    if (variable === undefined) {
      this.pins.clear();
    } else {
      this.pins.delete(variable);
    }
  }

  get(variable: string): EvidenceValue | undefined {
    const v = this.pins.get(variable);
    return Array.isArray(v) ? [...v] : v;
  }

  get size(): number {
    return this.pins.size;
  }

  variables(): string[] {
    return [...this.pins.keys()];
  }

  /** Request body form: raw likelihoods, untouched. */
  toRequest(): EvidenceMap {
    const out: EvidenceMap = {};
    for (const [k, v] of this.pins) {
      out[k] = Array.isArray(v) ? [...v] : v;
    }
    return out;
  }

  clone(): EvidenceSet {
    const copy = new EvidenceSet();
    for (const [k, v] of this.pins) {
      copy.pins.set(k, Array.isArray(v) ? [...v] : v);
    }
    return copy;
  }
}

/** Normalized view of a soft vector for the editor display. */
export function displaySoft(likelihoods: number[]): number[] {
  const total = likelihoods.reduce((a, b) => a + b, 0);
  return likelihoods.map((v) => v / total);
}
