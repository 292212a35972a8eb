import { vi } from "vitest";
import type {
  CaseSummary,
  ContestResponse,
  EvidenceResponse,
  MultiplicityResponse,
} from "../src/types";

// The disclaimer strings below must stay byte-identical to what the service
// sends; tests compare rendered text against these exact values.
export const RULE_DISCLAIMER =
  "Conditional verdict: it assumes the stated intuition rule is correct and does not " +
  "verify the rule itself. A conflict licenses at most the stated somewhere-level claim " +
  "near this case; it does not show that the decision at hand is wrong.";

export const CONTEST_ASSUMPTION =
  "Assumes the decision model is epistemically correct; under that assumption, a decision " +
  "that flips on proved feature values was epistemically contestable as issued. The model " +
  "itself is not verified.";

export function applicantSummary(): CaseSummary {
  return {
    case_id: "applicant-000",
    model_id: "credit-tree",
    feature_names: ["duration", "credit_amount", "savings_status"],
    features: { duration: 24, credit_amount: 1344, savings_status: 1 },
    probability: 0.3387096774193548,
    decision: 0,
    tau: 0.5,
    oracle_available: false,
    budget: 50,
    budget_remaining: 50,
  };
}

export function applicantMultiplicity(): MultiplicityResponse {
  return {
    case_id: "applicant-000",
    estimate: {
      theta_hat: 0.26666666666666666,
      positive_fraction: 0.26666666666666666,
      negative_fraction: 0.7333333333333333,
      n: 30,
    },
    provenance:
      "rejection-sampled set of 30 models at performance level 0.65, built independently of this case",
    caption:
      "8 of 30 similarly performing models would decide this case the other way.",
  };
}

export function applicantEvidence(): EvidenceResponse {
  return {
    case_id: "applicant-000",
    report: null,
    counterfactual: {
      suggestion: {
        x_c: [24, 1382, 1],
        changed_feature: 1,
        feature_name: "credit_amount",
        old_value: 1344,
        new_value: 1382,
        distance: 0.0137,
        decision_flip: [0, 1],
      },
      continuity_verdict: {
        conflict_found: true,
        implied_level: "somewhere_contestable",
        method: "distance[normalized-euclidean]",
        assumption_disclaimer: RULE_DISCLAIMER,
      },
      provenance: "nearest observed value substitution over the training table",
    },
    surrogate: {
      explanation: {
        weights: { duration: -0.0214, credit_amount: 0.00031, savings_status: 0.118 },
        intercept: 0.41,
        local_faithfulness: 0.0042,
      },
      monotonicity_verdict: {
        conflict_found: false,
        implied_level: "none",
        method: "weighted-least-squares slope sign test",
        assumption_disclaimer: RULE_DISCLAIMER,
      },
      provenance: "locally weighted linear fit around the measured values",
    },
    anchor: {
      anchor: {
        rule: "duration <= 31.0 AND savings_status <= 2.5",
        pinned_decision: 0,
        precision: 1.0,
        delta_slack: 0.0,
      },
      reason_verdict: {
        conflict_found: true,
        implied_level: "somewhere_contestable",
        method: "exact interval measure",
        assumption_disclaimer: RULE_DISCLAIMER,
      },
      provenance: "decision path of the served tree at the measured values",
    },
    multiplicity: applicantMultiplicity(),
  };
}

export function contestOutcome(overrides: Partial<ContestResponse> = {}): ContestResponse {
  return {
    case_id: "applicant-000",
    kind: "feature-correction",
    original_decision: 0,
    revised_decision: 1,
    epistemically_contestable: true,
    rationale: {
      p_measured: 0.3387096774193548,
      p_proved: 0.5483870967741935,
      changed_features: [1],
      proof: "bank statement dated 2026-03-02",
      assumption: CONTEST_ASSUMPTION,
    },
    ...overrides,
  };
}

type Handler = (body: unknown) => { status: number; body: unknown };

export interface FetchMock {
  fn: ReturnType<typeof vi.fn>;
  posts: (path: string) => unknown[];
}

// Routes fetch calls by "METHOD path"; unrouted calls fail the test loudly.
export function mockFetch(routes: Record<string, Handler | unknown>): FetchMock {
  const posted: Record<string, unknown[]> = {};
  const fn = vi.fn(async (url: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const key = `${method} ${url}`;
    if (!(key in routes)) {
      throw new Error(`no route for ${key}`);
    }
    const route = routes[key];
    let status = 200;
    let body: unknown;
    if (typeof route === "function") {
      const parsed = init?.body ? JSON.parse(init.body as string) : undefined;
      (posted[url] ??= []).push(parsed);
      ({ status, body } = (route as Handler)(parsed));
    } else {
      if (method === "POST") {
        (posted[url] ??= []).push(init?.body ? JSON.parse(init.body as string) : undefined);
      }
      body = route;
    }
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    };
  });
  vi.stubGlobal("fetch", fn);
  return { fn, posts: (path: string) => posted[path] ?? [] };
}

export function setField(root: HTMLElement, name: string, value: string): void {
  const input = root.querySelector<HTMLInputElement>(`[data-field="${name}"]`);
  if (!input) throw new Error(`no input for field ${name}`);
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

export function submitWhatIfForm(root: HTMLElement): void {
  const form = root.querySelector<HTMLFormElement>("[data-form]");
  if (!form) throw new Error("what-if form not rendered");
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

export function text(root: HTMLElement, selector: string): string {
  const el = root.querySelector(selector);
  if (!el) throw new Error(`no element matches ${selector}`);
  return el.textContent ?? "";
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
