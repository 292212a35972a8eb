import {
  AppState,
  Attempt,
  budgetConsumed,
  canSubmitContest,
  canSubmitWhatIf,
  formErrors,
} from "./state";
import { EvidenceResponse, Verdict } from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// Server numbers are displayed exactly as received; no rounding, no
// reformatting, so what the panel shows is what the ledgered response said.
export function num(value: number): string {
  return String(value);
}

export function decisionLabel(decision: number): string {
  return decision === 1 ? "approved" : "rejected";
}

function badge(decision: number): string {
  const label = decisionLabel(decision);
  return `<span class="badge badge--${label}" data-decision>${label}</span>`;
}

function verdictBlock(title: string, verdict: Verdict | null): string {
  if (!verdict) return "";
  return `<div class="verdict" data-verdict="${escapeHtml(title)}">
    <h4>${escapeHtml(title)}</h4>
    <p>level: <span data-verdict-level>${escapeHtml(verdict.implied_level)}</span></p>
    <p>method: ${escapeHtml(verdict.method)}</p>
    <p class="disclaimer" data-disclaimer>${escapeHtml(verdict.assumption_disclaimer)}</p>
  </div>`;
}

function renderHeader(state: AppState): string {
  const s = state.summary!;
  const m = state.multiplicity;
  return `<header class="case-header">
    <h1>Case ${escapeHtml(s.case_id)}</h1>
    <p>
      decision: ${badge(s.decision)}
      &middot; probability <span data-probability>${num(s.probability)}</span>
      &middot; threshold <span data-tau>${num(s.tau)}</span>
    </p>
    ${
      m
        ? `<p class="multiplicity">
      disagreement &theta;&#770; = <span data-theta>${num(m.estimate.theta_hat)}</span>
      <span class="caption" data-theta-caption>${escapeHtml(m.caption)}</span>
    </p>`
        : ""
    }
  </header>`;
}

function renderForm(state: AppState): string {
  const s = state.summary!;
  const errors = formErrors(state);
  const rows = s.feature_names
    .map((name) => {
      const err = errors[name];
      return `<label class="field">
      <span>${escapeHtml(name)}</span>
      <input data-field="${escapeHtml(name)}" value="${escapeHtml(state.form[name] ?? "")}" />
      <span class="field-error" data-error-for="${escapeHtml(name)}">${err ? escapeHtml(err) : ""}</span>
    </label>`;
    })
    .join("\n");

  const quota =
    state.budgetRemaining <= 0
      ? `<p class="quota" data-quota>Query budget exhausted; no further what-if queries in this window.</p>`
      : state.quotaMessage
        ? `<p class="quota" data-quota>${escapeHtml(state.quotaMessage)}</p>`
        : "";

  return `<section class="what-if">
    <h2>What if?</h2>
    <p>
      budget remaining: <span data-budget>${state.budgetRemaining}</span> of ${s.budget}
    </p>
    ${quota}
    <form data-form>
      ${rows}
      <button type="submit" data-submit-what-if ${canSubmitWhatIf(state) ? "" : "disabled"}>
        Ask the model
      </button>
    </form>
    ${
      state.lastWhatIf
        ? `<p class="what-if-result" data-what-if-result>
      model says: ${badge(state.lastWhatIf.decision)}
      with probability <span data-what-if-probability>${num(state.lastWhatIf.probability)}</span>
    </p>`
        : ""
    }
  </section>`;
}

function renderHistory(history: Attempt[], consumed: number): string {
  if (history.length === 0) {
    return `<section class="history"><h2>Query history</h2><p data-history-empty>No queries yet.</p></section>`;
  }
  const rows = history
    .map(
      (a, i) => `<tr data-history-row>
      <td>${i + 1}</td>
      <td>${escapeHtml(
        Object.entries(a.values)
          .map(([k, v]) => `${k}=${num(v)}`)
          .join(", "),
      )}</td>
      <td>${num(a.probability)}</td>
      <td>${decisionLabel(a.decision)}</td>
    </tr>`,
    )
    .join("\n");
  return `<section class="history">
    <h2>Query history</h2>
    <p><span data-consumed>${consumed}</span> budget unit(s) consumed</p>
    <table>
      <thead><tr><th>#</th><th>inputs</th><th>probability</th><th>decision</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </section>`;
}

function renderEvidence(evidence: EvidenceResponse | null, oracleAvailable: boolean): string {
  if (!evidence) return "";
  const parts: string[] = ["<section class=\"evidence\"><h2>Evidence</h2>"];

  if (evidence.report) {
    const r = evidence.report.report;
    parts.push(`<div class="report" data-report>
      <h3>Neighborhood audit</h3>
      <ul>
        <li>epistemically contestable: <span data-level-epistemic>${r.epistemic}</span></li>
        <li>somewhere contestable: <span data-level-contestable>${r.somewhere_contestable}</span></li>
        <li>somewhere inaccurate: <span data-level-inaccurate>${r.somewhere_inaccurate}</span></li>
      </ul>
      <p>${r.witnesses.length} witness point(s) on the scan grid.</p>
    </div>`);
  } else if (!oracleAvailable) {
    parts.push(
      `<p data-no-report>No ground truth is available for this case, so contestability levels cannot be audited directly; the evidence below still applies.</p>`,
    );
  }

  if (evidence.counterfactual) {
    const c = evidence.counterfactual.suggestion;
    const name = c.feature_name ?? `feature ${c.changed_feature}`;
    parts.push(`<div class="counterfactual" data-counterfactual>
      <h3>Closest decision-changing input</h3>
      <p>
        ${escapeHtml(name)}: ${num(c.old_value)} &rarr; <span data-cf-new>${num(c.new_value)}</span>
        (distance <span data-cf-distance>${num(c.distance)}</span>)
        flips ${decisionLabel(c.decision_flip[0])} &rarr; ${decisionLabel(c.decision_flip[1])}
      </p>
      ${verdictBlock("continuity", evidence.counterfactual.continuity_verdict)}
    </div>`);
  }

  if (evidence.surrogate) {
    const s = evidence.surrogate.explanation;
    const weights = Object.entries(s.weights)
      .map(([k, v]) => `${escapeHtml(k)}: ${num(v)}`)
      .join(", ");
    parts.push(`<div class="surrogate" data-surrogate>
      <h3>Local linear picture</h3>
      <p>weights ${weights}; faithfulness gap ${num(s.local_faithfulness)}</p>
      ${verdictBlock("monotonicity", evidence.surrogate.monotonicity_verdict)}
    </div>`);
  }

  if (evidence.anchor) {
    const a = evidence.anchor.anchor;
    parts.push(`<div class="anchor" data-anchor>
      <h3>Decision anchor</h3>
      <p>
        while <span data-anchor-rule>${escapeHtml(a.rule)}</span> holds, the model stays
        ${decisionLabel(a.pinned_decision)}
        ${a.precision !== null ? `(precision <span data-anchor-precision>${num(a.precision)}</span>)` : ""}
      </p>
      ${verdictBlock("reason", evidence.anchor.reason_verdict)}
    </div>`);
  }

  parts.push(`<div class="multiplicity-detail" data-multiplicity>
    <h3>Would other models agree?</h3>
    <p>${escapeHtml(evidence.multiplicity.provenance)}</p>
    <p data-multiplicity-caption>${escapeHtml(evidence.multiplicity.caption)}</p>
  </div>`);

  parts.push("</section>");
  return parts.join("\n");
}

function renderContest(state: AppState): string {
  const outcome = state.contest;
  let banner = "";
  if (outcome) {
    const tone = outcome.epistemically_contestable ? "banner--contestable" : "banner--neutral";
    const r = outcome.rationale;
    const weak =
      r.proof.trim() === ""
        ? `<p class="weak-provenance" data-weak-provenance>No supporting note was provided; this correction carries weak provenance.</p>`
        : "";
    banner = `<div class="banner ${tone}" data-contest-banner>
      <h3 data-contest-headline>${
        outcome.epistemically_contestable
          ? "Epistemically contestable as issued"
          : "Correction recorded; decision unchanged in kind"
      }</h3>
      <p>
        ${decisionLabel(outcome.original_decision)} &rarr;
        <span data-contest-revised>${decisionLabel(outcome.revised_decision)}</span>
      </p>
      <p>
        probability on measured values <span data-p-measured>${num(r.p_measured)}</span>,
        on proved values <span data-p-proved>${num(r.p_proved)}</span>;
        changed feature index(es): ${r.changed_features.join(", ")}
      </p>
      ${weak}
      <p class="disclaimer" data-contest-assumption>${escapeHtml(r.assumption)}</p>
    </div>`;
  }
  return `<section class="contest">
    <h2>Contest with corrected values</h2>
    <p>Edit the fields above to the values you can prove, then describe the proof.</p>
    <textarea data-proof placeholder="e.g. bank statement dated ...">${escapeHtml(state.proof)}</textarea>
    <button type="button" data-submit-contest ${canSubmitContest(state) ? "" : "disabled"}>
      File correction
    </button>
    ${banner}
  </section>`;
}

export function renderApp(state: AppState): string {
  switch (state.status) {
    case "loading":
      return `<p class="status" data-loading>Loading case ${escapeHtml(state.caseId)}...</p>`;
    case "not-found":
      return `<div class="status" data-not-found>
        <h1>Case not found</h1>
        <p>No case with id "${escapeHtml(state.caseId)}" exists on this server.</p>
      </div>`;
    case "network-error":
      return `<div class="status" data-network-error>
        <h1>Cannot reach the decision service</h1>
        <p>${escapeHtml(state.errorMessage ?? "network failure")}</p>
        <button type="button" data-retry>Retry</button>
      </div>`;
    case "ready":
      return [
        renderHeader(state),
        renderForm(state),
        renderHistory(state.history, budgetConsumed(state)),
        renderEvidence(state.evidence, state.summary!.oracle_available),
        renderContest(state),
        state.errorMessage
          ? `<p class="error-banner" data-error>${escapeHtml(state.errorMessage)}</p>`
          : "",
      ].join("\n");
  }
}
