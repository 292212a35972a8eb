import {
  CaseSummary,
  ContestResponse,
  EvidenceResponse,
  MultiplicityResponse,
} from "./types";

// One submitted what-if attempt, kept so the contester can compare tries.
export interface Attempt {
  values: Record<string, number>;
  probability: number;
  decision: number;
}

export type Status = "loading" | "ready" | "not-found" | "network-error";

export interface AppState {
  caseId: string;
  status: Status;
  summary: CaseSummary | null;
  evidence: EvidenceResponse | null;
  multiplicity: MultiplicityResponse | null;
  // editable copies of the measured values, as typed by the user
  form: Record<string, string>;
  proof: string;
  // mirrors the server ledger after every response
  budgetRemaining: number;
  history: Attempt[];
  pending: boolean;
  quotaMessage: string | null;
  errorMessage: string | null;
  lastWhatIf: Attempt | null;
  contest: ContestResponse | null;
}

export function initialState(caseId: string): AppState {
  return {
    caseId,
    status: "loading",
    summary: null,
    evidence: null,
    multiplicity: null,
    form: {},
    proof: "",
    budgetRemaining: 0,
    history: [],
    pending: false,
    quotaMessage: null,
    errorMessage: null,
    lastWhatIf: null,
    contest: null,
  };
}

export function resetForCase(state: AppState, summary: CaseSummary): void {
  state.summary = summary;
  state.status = "ready";
  state.budgetRemaining = summary.budget_remaining;
  state.form = {};
  for (const name of summary.feature_names) {
    state.form[name] = String(summary.features[name]);
  }
}

// A field is schema-valid when it parses to a finite number; submission is
// disabled until every field does, so no malformed request leaves the client.
export function fieldError(raw: string): string | null {
  if (raw.trim() === "") return "enter a value";
  const parsed = Number(raw);
  if (!Number.isFinite(parsed)) return "not a number";
  return null;
}

export function formErrors(state: AppState): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!state.summary) return errors;
  for (const name of state.summary.feature_names) {
    const err = fieldError(state.form[name] ?? "");
    if (err) errors[name] = err;
  }
  return errors;
}

export function parsedForm(state: AppState): Record<string, number> {
  const values: Record<string, number> = {};
  if (!state.summary) return values;
  for (const name of state.summary.feature_names) {
    values[name] = Number(state.form[name]);
  }
  return values;
}

// Fields whose parsed value differs from the measured one; the contest
// endpoint takes only these.
export function editedFields(state: AppState): Record<string, number> {
  const out: Record<string, number> = {};
  if (!state.summary) return out;
  const values = parsedForm(state);
  for (const name of state.summary.feature_names) {
    if (values[name] !== state.summary.features[name]) out[name] = values[name];
  }
  return out;
}

export function budgetConsumed(state: AppState): number {
  if (!state.summary) return 0;
  return state.summary.budget - state.budgetRemaining;
}

export function canSubmitWhatIf(state: AppState): boolean {
  return (
    state.status === "ready" &&
    !state.pending &&
    state.budgetRemaining > 0 &&
    Object.keys(formErrors(state)).length === 0
  );
}

export function canSubmitContest(state: AppState): boolean {
  return (
    state.status === "ready" &&
    !state.pending &&
    Object.keys(formErrors(state)).length === 0 &&
    Object.keys(editedFields(state)).length > 0
  );
}
