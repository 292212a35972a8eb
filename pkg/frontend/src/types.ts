// Wire types, one-to-one with the service's response bodies. The UI renders
// these values verbatim; nothing here is recomputed client-side.

export interface CaseSummary {
  case_id: string;
  model_id: string;
  feature_names: string[];
  features: Record<string, number>;
  probability: number;
  decision: number;
  tau: number;
  oracle_available: boolean;
  budget: number;
  budget_remaining: number;
}

export interface WhatIfResult {
  probability: number;
  decision: number;
}

export interface WhatIfResponse {
  case_id: string;
  results: WhatIfResult[];
  budget_remaining: number;
}

export interface Witness {
  level: string;
  x: number[];
  model_value: number;
  oracle_value: number;
}

export interface Report {
  normative: boolean | null;
  epistemic: boolean | null;
  somewhere_contestable: boolean | null;
  somewhere_inaccurate: boolean | null;
  witnesses: Witness[];
}

export interface Verdict {
  conflict_found: boolean;
  implied_level: string;
  method: string;
  assumption_disclaimer: string;
}

export interface CounterfactualSuggestion {
  x_c: number[];
  changed_feature: number;
  feature_name: string | null;
  old_value: number;
  new_value: number;
  distance: number;
  decision_flip: number[];
}

export interface Surrogate {
  weights: Record<string, number>;
  intercept: number;
  local_faithfulness: number;
}

export interface Anchor {
  rule: string;
  pinned_decision: number;
  precision: number | null;
  delta_slack: number | null;
}

export interface MultiplicityResponse {
  case_id: string;
  estimate: {
    theta_hat: number;
    positive_fraction: number;
    negative_fraction: number;
    n: number;
  };
  provenance: string;
  caption: string;
}

export interface EvidenceResponse {
  case_id: string;
  report: { report: Report; provenance: string } | null;
  counterfactual: {
    suggestion: CounterfactualSuggestion;
    continuity_verdict: Verdict;
    provenance: string;
  } | null;
  surrogate: {
    explanation: Surrogate;
    monotonicity_verdict: Verdict | null;
    provenance: string;
  } | null;
  anchor: {
    anchor: Anchor;
    reason_verdict: Verdict | null;
    provenance: string;
  } | null;
  multiplicity: MultiplicityResponse;
}

export interface ContestResponse {
  case_id: string;
  kind: string;
  original_decision: number;
  revised_decision: number;
  epistemically_contestable: boolean;
  rationale: {
    p_measured: number;
    p_proved: number;
    changed_features: number[];
    proof: string;
    assumption: string;
  };
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

export class ApiError extends Error {
  status: number;
  body: ErrorBody;

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.status = status;
    this.body = body;
  }
}
