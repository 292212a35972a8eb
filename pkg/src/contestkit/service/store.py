"""In-memory case/model store behind the HTTP facade.

The store is an immutable snapshot built at startup; the query ledger is the
single mutable resource. Evidence is composed on request from the same
library calls an operator would make directly, with fixed seeds so repeated
GETs return identical bodies.
"""

import io
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..conflicts import (
    ContinuityRule,
    MonotonicityRule,
    ReasonRule,
    detect_continuity_conflict,
    detect_monotonicity_conflict,
    detect_reason_conflict,
)
from ..core import (
    Case,
    DecisionPolicy,
    GroundTruthOracle,
    Neighborhood,
    classify_contestability,
    decide,
)
from ..errors import InvalidRequestError, UnknownCaseError
from ..evidence import DEFAULT_BUDGET, QueryLedger, WhatIfRequest, feature_correction_contest, what_if
from ..explainers import (
    Anchor,
    LocalitySpec,
    counterfactual_search,
    estimate_anchor_precision,
    extract_anchor,
    fit_local_surrogate,
)
from ..models import (
    Condition,
    Dataset,
    TreeParams,
    conditions_hold,
    load_dataset,
    load_schema,
    split,
    train_tree,
)
from ..multiplicity import (
    ChoiceSpec,
    MultiplicityEstimate,
    RashomonSet,
    SelectionProcess,
    UniformFloatChoice,
    UniformIntChoice,
    estimate_multiplicity_bound,
    sample_rashomon_set,
)
from ..repro import packaged_credit_schema_path
from ..synthetic import (
    credit_like_csv_text,
    labeled_ramp_dataset,
    ramp_oracle,
    scaled_tent_model,
    tent_model,
)


@dataclass(frozen=True)
class StoredModel:
    model_id: str
    model: object
    policy: DecisionPolicy
    feature_names: tuple
    candidates: Dataset  # reference table: counterfactual pool + anchor support
    rashomon: RashomonSet
    oracle: Optional[GroundTruthOracle] = None
    epsilon: float = 0.1
    norm: str = "absolute"
    scales: Optional[tuple] = None
    resolution: float = 1e-3
    surrogate_epsilon: object = 0.1
    surrogate_samples: int = 1000
    surrogate_seed: int = 0
    precision_samples: int = 2000
    precision_seed: int = 1
    anchor_builder: Callable = None
    monotonicity_rule: Optional[MonotonicityRule] = None
    reason_rule: Optional[ReasonRule] = None
    perf_level: float = 0.0
    family: str = ""
    selection: Optional[SelectionProcess] = None  # lets operators resample at any n
    train_ds: Optional[Dataset] = None

    def surrogate_locality(self, x) -> LocalitySpec:
        return LocalitySpec(
            center=tuple(x),
            epsilon=self.surrogate_epsilon,
            n_samples=self.surrogate_samples,
            seed=self.surrogate_seed,
        )

    def precision_locality(self, x) -> LocalitySpec:
        return LocalitySpec(
            center=tuple(x),
            epsilon=self.surrogate_epsilon,
            n_samples=self.precision_samples,
            seed=self.precision_seed,
        )

    def anchor_for(self, x) -> Anchor:
        return self.anchor_builder(self, x)


@dataclass(frozen=True)
class StoredCase:
    case_id: str
    model_id: str
    x: tuple


class CaseStore:
    def __init__(self, budget: int = DEFAULT_BUDGET, window_seconds: float = 86400.0):
        self.models = {}
        self.cases = {}
        self.budget = budget
        self.ledger = QueryLedger(window_seconds=window_seconds)

    def add_model(self, sm: StoredModel) -> None:
        self.models[sm.model_id] = sm

    def add_case(self, sc: StoredCase) -> None:
        if sc.model_id not in self.models:
            raise InvalidRequestError(f"case {sc.case_id!r} references unknown model {sc.model_id!r}")
        self.cases[sc.case_id] = sc

    def lookup(self, case_id: str):
        sc = self.cases.get(case_id)
        if sc is None:
            raise UnknownCaseError(f"no case with id {case_id!r}", case_id=case_id)
        return sc, self.models[sc.model_id]

    def remaining(self, case_id: str) -> int:
        return self.budget - self.ledger.used(case_id)

    # responses below are plain dicts shaped exactly like the wire schemas

    def case_summary(self, case_id: str) -> dict:
        sc, sm = self.lookup(case_id)
        prob = sm.model.prob_positive(np.asarray(sc.x, dtype=float))
        return {
            "case_id": sc.case_id,
            "model_id": sm.model_id,
            "feature_names": list(sm.feature_names),
            "features": dict(zip(sm.feature_names, [float(v) for v in sc.x])),
            "probability": prob,
            "decision": 1 if prob > sm.policy.tau else 0,
            "tau": sm.policy.tau,
            "oracle_available": sm.oracle is not None,
            "budget": self.budget,
            "budget_remaining": self.remaining(case_id),
        }

    def run_what_if(self, case_id: str, inputs) -> dict:
        sc, sm = self.lookup(case_id)
        for row in inputs:
            if len(row) != len(sm.feature_names):
                raise InvalidRequestError(
                    f"each input needs {len(sm.feature_names)} values, got {len(row)}",
                    expected=len(sm.feature_names),
                )
        req = WhatIfRequest(inputs=tuple(tuple(row) for row in inputs), budget=self.budget)
        results = what_if(sm.model, sm.policy, req, ledger=self.ledger, case_id=case_id)
        return {
            "case_id": case_id,
            "results": [{"probability": p, "decision": d} for p, d in results],
            "budget_remaining": self.remaining(case_id),
        }

    def multiplicity(self, case_id: str) -> dict:
        sc, sm = self.lookup(case_id)
        est = estimate_multiplicity_bound(sm.rashomon, sm.policy, sc.x)
        return {
            "case_id": case_id,
            "estimate": est.to_dict(),
            "provenance": (
                f"rejection-sampled set of {sm.rashomon.n} models at performance "
                f"level {sm.perf_level:g}, built independently of this case"
            ),
            "caption": _multiplicity_caption(est),
        }

    def evidence(self, case_id: str) -> dict:
        sc, sm = self.lookup(case_id)
        x = sc.x
        out = {"case_id": case_id, "report": None, "counterfactual": None, "surrogate": None, "anchor": None}

        if sm.oracle is not None:
            nbhd = Neighborhood(x, sm.epsilon, sm.norm, scales=sm.scales)
            report = classify_contestability(
                Case(case_id, x, x), sm.model, sm.oracle, sm.policy, nbhd, sm.resolution
            )
            out["report"] = {
                "report": report.to_dict(),
                "provenance": (
                    f"grid scan at resolution {sm.resolution:g} over the epsilon "
                    f"ball ({sm.norm}, epsilon {sm.epsilon:g}) against the demo ground truth"
                ),
            }

        cf = counterfactual_search(sm.model, sm.policy, x, sm.candidates, norm=sm.norm)
        if cf is not None:
            verdict = detect_continuity_conflict(
                Case(case_id, x, x),
                cf,
                ContinuityRule(applies_to=(x, cf.x_c)),
                epsilon=sm.epsilon,
                norm=sm.norm,
                scales=sm.scales,
            )
            out["counterfactual"] = {
                "suggestion": cf.to_dict(),
                "continuity_verdict": verdict.to_dict(),
                "provenance": (
                    "exhaustive single-feature substitution over values observed "
                    "in the reference table; nearest flip kept"
                ),
            }

        expl = fit_local_surrogate(sm.model, sm.surrogate_locality(x))
        mono = None
        if sm.monotonicity_rule is not None:
            mono = detect_monotonicity_conflict(expl, sm.monotonicity_rule).to_dict()
        out["surrogate"] = {
            "explanation": expl.to_dict(list(sm.feature_names)),
            "monotonicity_verdict": mono,
            "provenance": (
                f"weighted least squares on {sm.surrogate_samples} locality samples "
                f"(seed {sm.surrogate_seed})"
            ),
        }

        anchor = sm.anchor_for(x)
        anchor = estimate_anchor_precision(sm.model, sm.policy, anchor, sm.precision_locality(x))
        reason = None
        if sm.reason_rule is not None:
            reason = detect_reason_conflict(anchor, sm.reason_rule, sm.precision_locality(x)).to_dict()
        out["anchor"] = {
            "anchor": anchor.to_dict(sm.feature_names),
            "reason_verdict": reason,
            "provenance": (
                f"decision region around the case with Monte-Carlo precision over "
                f"{sm.precision_samples} samples (seed {sm.precision_seed})"
            ),
        }

        out["multiplicity"] = self.multiplicity(case_id)
        return out

    def contest(self, case_id: str, features: dict, proof: str) -> dict:
        sc, sm = self.lookup(case_id)
        unknown = [name for name in features if name not in sm.feature_names]
        if unknown:
            raise InvalidRequestError(
                f"unknown feature names {unknown}", known=list(sm.feature_names)
            )
        proved = list(sc.x)
        index = {name: i for i, name in enumerate(sm.feature_names)}
        for name, value in features.items():
            proved[index[name]] = float(value)
        outcome = feature_correction_contest(sm.model, sm.policy, sc.x, tuple(proved), proof_tag=proof)
        body = outcome.to_dict()
        body["case_id"] = case_id
        return body


def _multiplicity_caption(est: MultiplicityEstimate) -> str:
    if est.theta_hat == 0.0:
        return f"All {est.n} similarly performing models sampled agree on this case."
    pct = 100.0 * est.theta_hat
    return (
        f"About {pct:.0f}% of {est.n} similarly performing models sampled "
        "reach the other decision on this case."
    )


def _interval_anchor(sm: StoredModel, x) -> Anchor:
    """1-D demo anchor: the tent's own decision interval containing x."""
    d = decide(sm.model, sm.policy, x)
    if d == 1:
        rule = (Condition(0, ">", 0.25), Condition(0, "<=", 0.75))
    elif x[0] <= 0.25:
        rule = (Condition(0, "<=", 0.25),)
    else:
        rule = (Condition(0, ">", 0.75),)
    support = int(conditions_hold(rule, sm.candidates.rows).sum())
    return Anchor(rule=rule, pinned_decision=d, support=support)


def _tree_anchor(sm: StoredModel, x) -> Anchor:
    return extract_anchor(sm.model, x, sm.candidates, sm.policy)


DEMO_TENT_CENTERS = tuple(round(0.025 + 0.05 * k, 3) for k in range(20))


def build_demo_store(
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    window_seconds: float = 86400.0,
    credit_csv_path: Optional[str] = None,
) -> CaseStore:
    """Demo snapshot: 20 synthetic 1-D cases with ground truth, one tabular
    applicant without. Pass credit_csv_path to back the applicant case with a
    real table instead of the generated stand-in."""
    store = CaseStore(budget=budget, window_seconds=window_seconds)
    policy = DecisionPolicy(0.5)

    tent = tent_model()
    ramp = labeled_ramp_dataset(n=41)
    validation = labeled_ramp_dataset(n=201)
    proc = SelectionProcess(
        choices=(ChoiceSpec("slope", "arbitrary", UniformFloatChoice(1.5, 2.5)),),
        trainer=lambda choices, ds: scaled_tent_model(choices["slope"]),
        policy=policy,
        validation=validation,
        perf_level=0.45,
    )
    tent_rashomon = sample_rashomon_set(proc, ramp, n=50, seed=seed)
    store.add_model(
        StoredModel(
            model_id="tent",
            model=tent,
            policy=policy,
            feature_names=("x",),
            candidates=ramp,
            rashomon=tent_rashomon,
            oracle=ramp_oracle(),
            epsilon=0.1,
            norm="absolute",
            resolution=1e-3,
            surrogate_epsilon=0.1,
            anchor_builder=_interval_anchor,
            monotonicity_rule=MonotonicityRule(feature=0, direction="positive"),
            reason_rule=ReasonRule(conditions=(Condition(0, "<=", 0.499),), implied_decision=0),
            perf_level=0.45,
            family="tent",
            selection=proc,
            train_ds=ramp,
        )
    )
    for k, center in enumerate(DEMO_TENT_CENTERS):
        store.add_case(StoredCase(case_id=f"tent-{k:03d}", model_id="tent", x=(center,)))

    schema = load_schema(packaged_credit_schema_path())
    if credit_csv_path is not None:
        table = load_dataset(credit_csv_path, schema)
    else:
        table = load_dataset(io.StringIO(credit_like_csv_text(600, seed=seed)), schema)
    train, test = split(table, 0.2, seed=seed, stratified=True)
    deep = train_tree(train, TreeParams(max_depth=None, seed=seed))
    tree_proc = SelectionProcess(
        choices=(
            ChoiceSpec("max_depth", "conventional", UniformIntChoice(3, 8)),
            ChoiceSpec("seed", "arbitrary", UniformIntChoice(0, 999999)),
        ),
        trainer=lambda choices, ds: train_tree(
            ds, TreeParams(max_depth=choices["max_depth"], seed=choices["seed"])
        ),
        policy=policy,
        validation=test,
        perf_level=0.65,
    )
    tree_rashomon = sample_rashomon_set(tree_proc, train, n=30, seed=seed)
    stds = train.stds()
    safe = tuple(float(s) if s > 0 else 1.0 for s in stds)
    duration_idx = train.feature_index("duration")
    savings_idx = train.feature_index("savings_status")
    store.add_model(
        StoredModel(
            model_id="credit-tree",
            model=deep,
            policy=policy,
            feature_names=tuple(train.feature_names),
            candidates=train,
            rashomon=tree_rashomon,
            oracle=None,
            epsilon=0.05,
            norm="normalized-euclidean",
            scales=safe,
            surrogate_epsilon=tuple(0.25 * s for s in safe),
            anchor_builder=_tree_anchor,
            monotonicity_rule=MonotonicityRule(feature=duration_idx, direction="negative"),
            reason_rule=ReasonRule(
                conditions=(
                    Condition(duration_idx, ">", 31.0),
                    Condition(savings_idx, ">", 2.5),
                ),
                implied_decision=1,
            ),
            perf_level=0.65,
            family="tree",
            selection=tree_proc,
            train_ds=train,
        )
    )
    rejected = next(
        (row for row in test.rows if decide(deep, policy, row) == 0), test.rows[0]
    )
    store.add_case(
        StoredCase(case_id="applicant-000", model_id="credit-tree", x=tuple(float(v) for v in rejected))
    )
    return store
