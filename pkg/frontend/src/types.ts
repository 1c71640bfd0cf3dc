/** JSON shapes exchanged with the riskbn HTTP service. */

export interface VariableDoc {
  name: string;
  states: string[];
}

export interface CptDoc {
  child: string;
  parents: string[];
  rows: number[][];
}

export interface NetworkDoc {
  variables: VariableDoc[];
  edges: [string, string][];
  cpts: CptDoc[];
  meta: Record<string, unknown>;
}

export interface Marginal {
  states: string[];
  probabilities: number[];
}

export type Posteriors = Record<string, Marginal>;

export interface QueryResponse {
  method: string;
  posteriors: Posteriors;
  log_prob_evidence?: number;
  converged?: boolean;
  iterations?: number;
}

export interface DsepResponse {
  separated: boolean;
}

export interface CatalogEntrySummary {
  id: string;
  kind: string;
  doc: string;
  variants: string[];
}

export interface SessionTick {
  t: number;
  belief: Posteriors;
  prediction: Posteriors;
  log_evidence: number;
}

/** Hard evidence is a state index; soft evidence a raw likelihood vector. */
export type EvidenceValue = number | number[];

export type EvidenceMap = Record<string, EvidenceValue>;

export interface ServiceError {
  code: string;
  message: string;
  locus?: string;
}
