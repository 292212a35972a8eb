"""Contest mechanisms: bounded what-if access, corrections, overruling evidence."""

import csv
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DecisionPolicy, as_vector, decide
from .errors import (
    CapabilityError,
    InvalidRequestError,
    QuotaExceededError,
    TotalEvidenceViolation,
)

DEFAULT_BUDGET = 50  # queries per case per window
DEFAULT_WINDOW_SECONDS = 86400.0


class QueryLedger:
    """Linearizable per-case query accounting over fixed time windows.

    charge() is all-or-nothing for a batch: concurrent callers can never
    push a case past its budget, and a rejected batch consumes nothing.
    """

    def __init__(self, window_seconds: float = DEFAULT_WINDOW_SECONDS, clock=time.time):
        self.window_seconds = window_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._counts = {}

    def _key(self, case_id: str):
        window = int(self._clock() // self.window_seconds)
        return (case_id, window)

    def used(self, case_id: str) -> int:
        with self._lock:
            return self._counts.get(self._key(case_id), 0)

    def charge(self, case_id: str, k: int, budget: int) -> int:
        """Reserve k queries; returns the remaining budget after the charge."""
        with self._lock:
            key = self._key(case_id)
            used = self._counts.get(key, 0)
            if used + k > budget:
                raise QuotaExceededError(
                    f"query budget exhausted for case {case_id!r}: "
                    f"{used} used of {budget}, {k} requested",
                    used=used,
                    budget=budget,
                    requested=k,
                )
            self._counts[key] = used + k
            return budget - (used + k)


@dataclass(frozen=True)
class WhatIfRequest:
    inputs: tuple
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(
            self, "inputs", tuple(tuple(float(v) for v in row) for row in self.inputs)
        )
        if len(self.inputs) > self.budget:
            raise InvalidRequestError(
                f"{len(self.inputs)} inputs exceed the budget of {self.budget}"
            )


def what_if(
    model,
    policy: DecisionPolicy,
    req: WhatIfRequest,
    ledger: Optional[QueryLedger] = None,
    case_id: str = "",
) -> list:
    """Evaluate each input, returning (probability, decision) pairs.

    Pure on the model; the only side effect is ledger accounting, charged
    up front for the whole batch.
    """
    if ledger is not None:
        ledger.charge(case_id, len(req.inputs), req.budget)
    results = []
    for row in req.inputs:
        prob = model.prob_positive(as_vector(row))
        results.append((prob, 1 if prob > policy.tau else 0))
    return results


@dataclass(frozen=True)
class ContestOutcome:
    kind: str
    original_decision: int
    revised_decision: int
    epistemically_contestable: bool
    rationale: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "original_decision": self.original_decision,
            "revised_decision": self.revised_decision,
            "epistemically_contestable": self.epistemically_contestable,
            "rationale": self.rationale,
        }


CORRECTION_ASSUMPTION = (
    "Assumes the decision model is epistemically correct; under that "
    "assumption, a decision that flips on proved feature values was "
    "epistemically contestable as issued. The model itself is not verified."
)


def feature_correction_contest(
    model,
    policy: DecisionPolicy,
    x_measured,
    x_proved,
    proof_tag: str = "",
) -> ContestOutcome:
    """Contest on proved feature values: contestable iff the decision flips."""
    x_measured = as_vector(x_measured)
    x_proved = as_vector(x_proved)
    if x_measured.size != x_proved.size:
        raise InvalidRequestError("measured and proved vectors differ in dimension")
    changed = [int(i) for i in np.flatnonzero(x_measured != x_proved)]
    if not changed:
        raise InvalidRequestError("proved features are identical to measured features")
    p_measured = model.prob_positive(x_measured)
    p_proved = model.prob_positive(x_proved)
    d_measured = 1 if p_measured > policy.tau else 0
    d_proved = 1 if p_proved > policy.tau else 0
    return ContestOutcome(
        kind="feature-correction",
        original_decision=d_measured,
        revised_decision=d_proved,
        epistemically_contestable=d_measured != d_proved,
        rationale={
            "p_measured": p_measured,
            "p_proved": p_proved,
            "changed_features": changed,
            "proof": proof_tag,
            "assumption": CORRECTION_ASSUMPTION,
        },
    )


@dataclass(frozen=True)
class EvidenceSet:
    """Extra evidence E, disjoint from the base features X."""

    features: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.features) != len(self.values):
            raise InvalidRequestError("evidence names and values differ in length")


def overruling_check(oracle, policy: DecisionPolicy, x, ev: EvidenceSet) -> bool:
    """True iff adding the evidence flips the epistemically correct decision."""
    p_xe = getattr(oracle, "p_xe", None)
    if p_xe is None:
        raise CapabilityError("oracle has no joint extension p_xe")
    d_x = 1 if oracle.p(as_vector(x)) > policy.tau else 0
    d_xe = 1 if p_xe(as_vector(x), np.asarray(ev.values)) > policy.tau else 0
    return d_x != d_xe


def overruling_report(model_x, model_xe, policy: DecisionPolicy, x, x_and_e) -> dict:
    """Side-by-side predictions of trained models with and without the evidence.

    For trained models this is a report, never an asserted inequality: the
    total-evidence guarantee only binds Bayes-optimal deciders.
    """
    p_x = model_x.prob_positive(as_vector(x))
    p_xe = model_xe.prob_positive(as_vector(x_and_e))
    return {
        "p_without_evidence": p_x,
        "decision_without_evidence": 1 if p_x > policy.tau else 0,
        "p_with_evidence": p_xe,
        "decision_with_evidence": 1 if p_xe > policy.tau else 0,
        "note": "trained models carry no optimality guarantee; treat as negotiation input",
    }


@dataclass(frozen=True)
class TotalEvidenceResult:
    err_x: float
    err_xe: float
    se_diff: float
    n_draws: int

    def to_dict(self) -> dict:
        return {
            "err_x": self.err_x,
            "err_xe": self.err_xe,
            "se_diff": self.se_diff,
            "n_draws": self.n_draws,
        }


def total_evidence_experiment(
    joint,
    policy: DecisionPolicy,
    n_draws: int,
    seed: int,
    csv_path=None,
) -> TotalEvidenceResult:
    """Error rates of Bayes deciders with and without the evidence.

    Uses the joint's own conditional probabilities to build both deciders,
    then estimates P(d != y) by simulation. Raises if the with-evidence
    decider errs more than three standard errors above the without-evidence
    one, which the total-evidence guarantee rules out for Bayes deciders.
    Optionally writes one CSV row per draw for audit.
    """
    rng = np.random.default_rng(seed)
    xi, ei, y = joint.sample_cells(n_draws, rng)
    tau = policy.tau
    ne = len(joint.e_values)
    d_x_table = np.array(
        [1 if joint.p_x_exact(i) > tau else 0 for i in range(len(joint.x_values))]
    )
    d_xe_table = np.array([1 if c > tau else 0 for c in joint.cond]).reshape(-1, ne)
    d_x = d_x_table[xi]
    d_xe = d_xe_table[xi, ei]
    loss_x = (d_x != y).astype(float)
    loss_xe = (d_xe != y).astype(float)
    err_x = float(loss_x.mean())
    err_xe = float(loss_xe.mean())
    paired = loss_xe - loss_x
    se_diff = float(paired.std(ddof=1) / np.sqrt(n_draws)) if n_draws > 1 else 0.0

    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["draw", "x", "e", "y", "d_x", "d_xe", "err_x", "err_xe"])
            for i in range(n_draws):
                writer.writerow(
                    [
                        i,
                        joint.x_values[xi[i]],
                        joint.e_values[ei[i]],
                        int(y[i]),
                        int(d_x[i]),
                        int(d_xe[i]),
                        int(loss_x[i]),
                        int(loss_xe[i]),
                    ]
                )

    if err_xe > err_x + 3.0 * se_diff:
        raise TotalEvidenceViolation(
            f"with-evidence decider errs more: {err_xe} > {err_x} + 3 * {se_diff}",
            err_x=err_x,
            err_xe=err_xe,
            se_diff=se_diff,
        )
    return TotalEvidenceResult(err_x, err_xe, se_diff, n_draws)
