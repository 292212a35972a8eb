import * as api from "./api";
import { renderApp } from "./render";
import {
  AppState,
  canSubmitContest,
  canSubmitWhatIf,
  editedFields,
  fieldError,
  initialState,
  parsedForm,
  resetForCase,
} from "./state";
import { ApiError } from "./types";

export interface App {
  state: AppState;
  load(): Promise<void>;
  submitWhatIf(): Promise<void>;
  submitContest(): Promise<void>;
}

export function createApp(root: HTMLElement, caseId: string): App {
  const state = initialState(caseId);

  function render(): void {
    root.innerHTML = renderApp(state);
  }

  // Keystrokes update state and validity in place instead of re-rendering,
  // so the focused input survives; full renders happen on load and responses.
  function refreshValidity(): void {
    for (const name of state.summary?.feature_names ?? []) {
      const slot = root.querySelector<HTMLElement>(`[data-error-for="${name}"]`);
      if (slot) slot.textContent = fieldError(state.form[name] ?? "") ?? "";
    }
    const whatIfBtn = root.querySelector<HTMLButtonElement>("[data-submit-what-if]");
    if (whatIfBtn) whatIfBtn.disabled = !canSubmitWhatIf(state);
    const contestBtn = root.querySelector<HTMLButtonElement>("[data-submit-contest]");
    if (contestBtn) contestBtn.disabled = !canSubmitContest(state);
  }

  async function load(): Promise<void> {
    state.status = "loading";
    state.errorMessage = null;
    render();
    try {
      const [summary, evidence, multiplicity] = await Promise.all([
        api.getCase(caseId),
        api.getEvidence(caseId),
        api.getMultiplicity(caseId),
      ]);
      resetForCase(state, summary);
      state.evidence = evidence;
      state.multiplicity = multiplicity;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        state.status = "not-found";
      } else {
        state.status = "network-error";
        state.errorMessage = err instanceof Error ? err.message : String(err);
      }
    }
    render();
  }

  async function submitWhatIf(): Promise<void> {
    if (!canSubmitWhatIf(state) || !state.summary) return;
    const values = parsedForm(state);
    const vector = state.summary.feature_names.map((name) => values[name]);
    state.pending = true;
    render();
    try {
      const res = await api.postWhatIf(caseId, [vector]);
      state.budgetRemaining = res.budget_remaining;
      const attempt = {
        values,
        probability: res.results[0].probability,
        decision: res.results[0].decision,
      };
      state.history.push(attempt);
      state.lastWhatIf = attempt;
      state.quotaMessage = null;
    } catch (err) {
      if (err instanceof ApiError && err.body.code === "quota_exceeded") {
        state.quotaMessage = err.body.message;
        const details = err.body.details as { used?: number; budget?: number };
        if (typeof details.used === "number" && typeof details.budget === "number") {
          state.budgetRemaining = Math.max(0, details.budget - details.used);
        }
      } else {
        state.errorMessage = err instanceof Error ? err.message : String(err);
      }
    }
    state.pending = false;
    render();
  }

  async function submitContest(): Promise<void> {
    if (!canSubmitContest(state)) return;
    const edited = editedFields(state);
    state.pending = true;
    render();
    try {
      state.contest = await api.postContest(caseId, edited, state.proof);
      state.errorMessage = null;
    } catch (err) {
      state.errorMessage =
        err instanceof ApiError ? err.body.message : err instanceof Error ? err.message : String(err);
    }
    state.pending = false;
    render();
  }

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    const field = target.getAttribute("data-field");
    if (field && target instanceof HTMLInputElement) {
      state.form[field] = target.value;
      refreshValidity();
      return;
    }
    if (target.hasAttribute("data-proof") && target instanceof HTMLTextAreaElement) {
      state.proof = target.value;
    }
  });

  root.addEventListener("submit", (event) => {
    const target = event.target as HTMLElement;
    if (target.hasAttribute("data-form")) {
      event.preventDefault();
      void submitWhatIf();
    }
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.hasAttribute("data-submit-contest")) {
      void submitContest();
    } else if (target.hasAttribute("data-retry")) {
      void load();
    }
  });

  return { state, load, submitWhatIf, submitContest };
}
