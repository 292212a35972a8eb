"""Executable fixtures: the three counterexamples and the credit pipeline.

Every fixture re-derives its claims live against reference values embedded
as literals; nothing is read back from previous runs. The three 1-D
counterexamples share one setup: true p(x) = x on [0, 1] with the published
boundary-inclusive decision rule, model p_hat = the tent function, tau = 0.5,
epsilon = 0.1, absolute distance.
"""

import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .conflicts import (
    ContinuityRule,
    MonotonicityRule,
    ReasonRule,
    detect_continuity_conflict,
    detect_monotonicity_conflict,
    detect_reason_conflict,
    weight_variance,
)
from .core import (
    Case,
    DecisionPolicy,
    Neighborhood,
    classify_contestability,
    decide,
    epistemic_decision,
    somewhere_scan,
)
from .errors import ConfigurationError, DatasetMissingError
from .explainers import (
    EMPIRICAL_MARGINALS,
    Anchor,
    Counterfactual,
    KernelSpec,
    LocalitySpec,
    counterfactual_search,
    estimate_anchor_precision,
    extract_anchor,
    fit_local_surrogate,
)
from .models import (
    Condition,
    TreeParams,
    conditions_hold,
    evaluate,
    load_dataset,
    load_schema,
    render_rule,
    split,
    train_tree,
)
from .norms import distance
from .synthetic import ramp_oracle, tent_model

FIXTURE_TAU = 0.5
FIXTURE_EPSILON = 0.1
FIXTURE_RESOLUTION = 1e-3

CANONICAL_CREDIT_SOURCE = (
    "Statlog German Credit Data (UCI Machine Learning Repository), also "
    "published as 'credit-g' (OpenML dataset 31): 1000 rows, 20 features, "
    "label column 'class' with values good/bad"
)


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


@dataclass(frozen=True)
class Claim:
    text: str
    expected: object
    observed: object
    passed: bool

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "expected": _jsonable(self.expected),
            "observed": _jsonable(self.observed),
            "passed": self.passed,
        }


def claim_equal(text, expected, observed, tol: Optional[float] = None) -> Claim:
    if tol is None:
        ok = expected == observed
    else:
        ok = observed is not None and abs(expected - observed) <= tol
    return Claim(text, expected, observed, bool(ok))


def claim_true(text, passed: bool, observed=None) -> Claim:
    return Claim(text, True, passed if observed is None else observed, bool(passed))


def claim_less(text, observed, bound, or_equal: bool = False) -> Claim:
    ok = observed <= bound if or_equal else observed < bound
    op = "<=" if or_equal else "<"
    return Claim(text, f"{op} {bound:g}", observed, bool(ok))


def claim_in_band(text, lo, hi, observed) -> Claim:
    return Claim(text, f"[{lo:g}, {hi:g}]", observed, bool(lo <= observed <= hi))


@dataclass(frozen=True)
class FixtureResult:
    fixture_id: str
    claims: tuple
    runtime_s: float
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def to_dict(self) -> dict:
        return {
            "fixture": self.fixture_id,
            "passed": self.passed,
            "runtime_s": self.runtime_s,
            "claims": [c.to_dict() for c in self.claims],
            "extras": {k: _jsonable(v) for k, v in self.extras.items()},
        }

    def table(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"FIXTURE {self.fixture_id}  ({self.runtime_s:.3f} s)  {status}"]
        for c in self.claims:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.text}: expected {c.expected}, observed {c.observed}")
        for k, v in self.extras.items():
            lines.append(f"  (info) {k}: {v}")
        return "\n".join(lines)


def _fixture_setup():
    model = tent_model()
    oracle = ramp_oracle()
    policy = DecisionPolicy(FIXTURE_TAU)
    return model, oracle, policy


def _counterexample_1():
    """Nearby counterfactual conflicts with continuity, yet the decision is correct."""
    model, oracle, policy = _fixture_setup()
    x = (0.2,)
    # the published alternative 0.25 sits exactly on the threshold and does not
    # flip under the strict rule; 0.26 is the boundary-safe variant recorded here
    x_c = (0.26,)
    claims = [
        claim_equal("model decision at 0.2", 0, decide(model, policy, x)),
        claim_equal(
            "correct decision at 0.2 under the true p", 0, epistemic_decision(oracle, policy, x)
        ),
        claim_equal("decision flips at the nearby alternative 0.26", 1, decide(model, policy, x_c)),
        claim_equal(
            "alternative 0.25 stays rejected under the strict threshold",
            0,
            decide(model, policy, (0.25,)),
        ),
    ]
    cf = Counterfactual(
        x_c=x_c,
        changed_feature=0,
        distance=distance(x, x_c, "absolute"),
        decision_flip=(0, 1),
        source=x,
        feature_name="x",
    )
    verdict = detect_continuity_conflict(
        Case("counterexample-1", x, x),
        cf,
        ContinuityRule(applies_to=(x, x_c)),
        epsilon=FIXTURE_EPSILON,
        norm="absolute",
    )
    claims.append(
        claim_equal("continuity verdict level", "somewhere_contestable", verdict.implied_level)
    )
    report = classify_contestability(
        Case("counterexample-1", x, x),
        model,
        oracle,
        policy,
        Neighborhood(x, FIXTURE_EPSILON, "absolute"),
        FIXTURE_RESOLUTION,
    )
    claims.append(claim_equal("grid audit: somewhere contestable", True, report.somewhere_contestable))
    claims.append(claim_equal("grid audit: epistemically contestable", False, report.epistemic))
    witness = next(
        (w for w in report.witnesses if w.level == "somewhere_contestable"), None
    )
    extras = {
        "counterfactual_distance": cf.distance,
        "contestable_witness": None if witness is None else list(witness.x),
    }
    return claims, extras


def _counterexample_2():
    """Surrogate slope conflicts with monotonicity; inaccuracy yes, contestability no."""
    model, oracle, policy = _fixture_setup()
    x = (0.6,)
    locality = LocalitySpec(center=x, epsilon=FIXTURE_EPSILON, n_samples=1000, seed=0)
    expl = fit_local_surrogate(model, locality)
    var = weight_variance(locality, expl.weights[0], 0)
    verdict = detect_monotonicity_conflict(expl, MonotonicityRule(feature=0, direction="positive"))
    claims = [
        claim_equal("surrogate weight", -2.0, expl.weights[0], tol=1e-3),
        claim_less("local faithfulness", expl.local_faithfulness, 1e-9),
        claim_equal("analytic weight variance", 0.04 / 3.0, var, tol=1e-9),
        claim_equal("monotonicity verdict level", "somewhere_inaccurate", verdict.implied_level),
    ]
    report = classify_contestability(
        Case("counterexample-2", x, x),
        model,
        oracle,
        policy,
        Neighborhood(x, FIXTURE_EPSILON, "absolute"),
        FIXTURE_RESOLUTION,
    )
    witnesses = somewhere_scan(
        model, oracle, policy, Neighborhood(x, FIXTURE_EPSILON, "absolute"), FIXTURE_RESOLUTION
    )
    inaccurate = [w for w in witnesses if w.level == "somewhere_inaccurate"]
    near = min(inaccurate, key=lambda w: abs(w.x[0] - 0.55), default=None)
    claims.append(claim_equal("grid audit: somewhere inaccurate", True, report.somewhere_inaccurate))
    claims.append(
        claim_equal("inaccuracy witness location", 0.55, None if near is None else near.x[0], tol=1e-9)
    )
    claims.append(
        claim_equal(
            "model probability at the witness", 0.9, None if near is None else near.model_value, tol=1e-9
        )
    )
    claims.append(
        claim_equal(
            "true probability at the witness", 0.55, None if near is None else near.oracle_value, tol=1e-9
        )
    )
    claims.append(
        claim_equal("no contestable point in the scanned ball", False, report.somewhere_contestable)
    )
    claims.append(claim_equal("grid audit: epistemically contestable", False, report.epistemic))
    extras = {"local_faithfulness": expl.local_faithfulness, "weight": expl.weights[0]}
    return claims, extras


def _counterexample_3():
    """Anchor collides with a reason rule; contestable nearby, correct at the case."""
    model, oracle, policy = _fixture_setup()
    x = (0.55,)
    anchor = Anchor(
        rule=(Condition(0, ">", 0.25), Condition(0, "<=", 0.75)),
        pinned_decision=decide(model, policy, x),
        support=0,
    )
    locality = LocalitySpec(center=x, epsilon=FIXTURE_EPSILON, n_samples=2000, seed=0)
    anchor = estimate_anchor_precision(model, policy, anchor, locality)
    # the reason rule grants rejection strictly below the 0.5 boundary; 0.499
    # keeps the rule exactly true under the boundary-inclusive true decision
    rule = ReasonRule(conditions=(Condition(0, "<=", 0.499),), implied_decision=0)
    verdict = detect_reason_conflict(anchor, rule, locality)
    overlap = next(
        h.value for h in verdict.theorem_hypotheses if h.name == "overlap_estimate"
    )
    claims = [
        claim_equal("model decision at 0.55", 1, decide(model, policy, x)),
        claim_equal(
            "correct decision at 0.55 under the true p", 1, epistemic_decision(oracle, policy, x)
        ),
        claim_equal("anchor precision", 1.0, anchor.precision),
        claim_equal("anchor slack delta", 0.0, anchor.delta_slack),
        claim_equal("reason verdict level", "somewhere_contestable", verdict.implied_level),
        claim_true("anchor/rule overlap mass exceeds zero", overlap > 0.0, observed=overlap),
    ]
    witnesses = somewhere_scan(
        model, oracle, policy, Neighborhood(x, FIXTURE_EPSILON, "absolute"), FIXTURE_RESOLUTION
    )
    contestable = [w for w in witnesses if w.level == "somewhere_contestable"]
    near = min(contestable, key=lambda w: abs(w.x[0] - 0.49), default=None)
    claims.append(
        claim_equal("contestable witness location", 0.49, None if near is None else near.x[0], tol=1e-9)
    )
    claims.append(
        claim_equal("model decision at the witness", 1.0, None if near is None else near.model_value)
    )
    claims.append(
        claim_equal("correct decision at the witness", 0.0, None if near is None else near.oracle_value)
    )
    extras = {"overlap_mass": overlap, "n_contestable_witnesses": len(contestable)}
    return claims, extras


def run_counterexample(fixture_id: int) -> FixtureResult:
    """Replay one of the three published counterexamples end to end."""
    runners = {1: _counterexample_1, 2: _counterexample_2, 3: _counterexample_3}
    if fixture_id not in runners:
        raise ConfigurationError(f"unknown counterexample id {fixture_id}; pick 1, 2, or 3")
    start = time.perf_counter()
    claims, extras = runners[fixture_id]()
    return FixtureResult(
        fixture_id=f"counterexample-{fixture_id}",
        claims=tuple(claims),
        runtime_s=time.perf_counter() - start,
        extras=extras,
    )


def packaged_credit_schema_path() -> Path:
    return Path(resources.files("contestkit").joinpath("data/german_credit.schema.json"))


@dataclass(frozen=True)
class CreditPipelineConfig:
    csv_path: str = "data/german_credit.csv"
    schema_path: Optional[str] = None
    seed: int = 0
    test_fraction: float = 0.2
    tau: float = 0.5
    epsilon: float = 0.05
    surrogate_samples: int = 2000
    synthetic_data: bool = False  # set when the CSV is a generated stand-in

    # reason rule published for this dataset: long duration plus high savings
    reason_duration_above: float = 31.0
    reason_savings_above: float = 2.5
    reason_implied_decision: int = 1


def run_credit_pipeline(config: CreditPipelineConfig = CreditPipelineConfig()) -> FixtureResult:
    """Train shallow and deep trees on the credit table and audit the evidence.

    Never downloads anything: if the CSV is absent the error names the
    canonical source and the expected schema. Metric-band claims describe the
    real dataset; on a generated stand-in (synthetic_data=True) they are
    reported but only the mechanics are asserted.
    """
    start = time.perf_counter()
    csv_path = Path(config.csv_path)
    schema_path = Path(config.schema_path) if config.schema_path else packaged_credit_schema_path()
    schema = load_schema(schema_path)
    if not csv_path.exists():
        raise DatasetMissingError(
            f"dataset not found at {csv_path}; this tool never downloads data. "
            f"Obtain it from: {CANONICAL_CREDIT_SOURCE}. Expected CSV header: "
            + ",".join([f.name for f in schema.features] + [schema.label]),
            path=str(csv_path),
            expected_columns=[f.name for f in schema.features] + [schema.label],
        )
    policy = DecisionPolicy(config.tau)
    ds = load_dataset(csv_path, schema)
    train, test = split(ds, config.test_fraction, seed=config.seed, stratified=True)

    shallow = train_tree(train, TreeParams(max_depth=3, seed=config.seed))
    deep = train_tree(train, TreeParams(max_depth=None, seed=config.seed))
    m_shallow = evaluate(shallow, test, policy)
    m_deep = evaluate(deep, test, policy)

    bands_binding = not config.synthetic_data
    claims = []

    def band(text, lo, hi, observed):
        if bands_binding:
            claims.append(claim_in_band(text, lo, hi, observed))
        else:
            claims.append(claim_true(text + " (reported only: generated data)", True, observed))

    band("shallow tree test accuracy", 0.70, 0.76, m_shallow.accuracy)
    band("deep tree test accuracy", 0.64, 0.72, m_deep.accuracy)
    if bands_binding:
        claims.append(
            claim_true(
                "shallow FNR below deep FNR",
                m_shallow.false_negative_rate < m_deep.false_negative_rate,
                observed=f"{m_shallow.false_negative_rate:.4f} vs {m_deep.false_negative_rate:.4f}",
            )
        )
    else:
        claims.append(
            claim_true(
                "shallow FNR below deep FNR (reported only: generated data)",
                True,
                observed=f"{m_shallow.false_negative_rate:.4f} vs {m_deep.false_negative_rate:.4f}",
            )
        )

    # sparse counterfactual over every rejected test applicant, deep tree
    rejected = [row for row in test.rows if decide(deep, policy, row) == 0]
    best = None
    best_row = None
    for row in rejected:
        cf = counterfactual_search(deep, policy, row, train)
        if cf is not None and (best is None or cf.distance < best.distance):
            best = cf
            best_row = row
    claims.append(
        claim_true(
            "single-feature counterfactual exists among rejected applicants",
            best is not None,
            observed=None if best is None else best.feature_name,
        )
    )
    if best is not None:
        claims.append(
            claim_less("minimum normalized counterfactual distance", best.distance, 0.05, or_equal=True)
        )
        claims.append(
            claim_true(
                "counterfactual flips the decision when re-evaluated",
                decide(deep, policy, best.x_c) != decide(deep, policy, best_row),
            )
        )
        verdict = detect_continuity_conflict(
            Case("credit-applicant", tuple(best_row), tuple(best_row)),
            best,
            ContinuityRule(applies_to=(tuple(best_row), best.x_c)),
            epsilon=config.epsilon,
            norm="normalized-euclidean",
            scales=train.stds(),
        )
        claims.append(
            claim_equal(
                "continuity verdict level at the flipped applicant",
                "somewhere_contestable",
                verdict.implied_level,
            )
        )

        # local surrogate on the flipped applicant, kernel-weighted LIME config
        stds = train.stds()
        kernel = KernelSpec(norm="chebyshev", width=0.5, scales=tuple(np.where(stds > 0, stds, 1.0)))
        locality = LocalitySpec(
            center=tuple(best_row),
            distribution=EMPIRICAL_MARGINALS,
            kernel=kernel,
            n_samples=config.surrogate_samples,
            seed=config.seed,
            values=tuple(tuple(np.unique(train.rows[:, j])) for j in range(train.n_features)),
        )
        expl = fit_local_surrogate(deep, locality)
        claims.append(
            claim_true(
                "surrogate fit yields a finite faithfulness estimate",
                bool(np.isfinite(expl.local_faithfulness)),
                observed=expl.local_faithfulness,
            )
        )

    # anchor for a false-negative instance of the shallow tree
    fn_rows = [
        row
        for row, label in zip(test.rows, test.labels)
        if label == 1 and decide(shallow, policy, row) == 0
    ]
    claims.append(
        claim_true("false-negative test instance exists", len(fn_rows) > 0, observed=len(fn_rows))
    )
    extras = {
        "shallow_accuracy": m_shallow.accuracy,
        "deep_accuracy": m_deep.accuracy,
        "shallow_fnr": m_shallow.false_negative_rate,
        "deep_fnr": m_deep.false_negative_rate,
        "n_rejected": len(rejected),
        "synthetic_data": config.synthetic_data,
    }
    if best is not None:
        extras["counterfactual"] = best.to_dict()
        extras["surrogate_weight_on_changed_feature"] = expl.weights[best.changed_feature]
    if fn_rows:
        anchor = extract_anchor(shallow, fn_rows[0], train, policy)
        support_rows = train.rows[conditions_hold(anchor.rule, train.rows)]
        if len(support_rows):
            support_decisions = np.array([decide(shallow, policy, r) for r in support_rows])
            precision_on_support = float(np.mean(support_decisions == anchor.pinned_decision))
        else:
            precision_on_support = None
        claims.append(claim_true("anchor has training support", anchor.support > 0, observed=anchor.support))
        claims.append(
            claim_equal("anchor precision on its training support", 1.0, precision_on_support)
        )
        rule = ReasonRule(
            conditions=(
                Condition(train.feature_index("duration"), ">", config.reason_duration_above),
                Condition(train.feature_index("savings_status"), ">", config.reason_savings_above),
            ),
            implied_decision=config.reason_implied_decision,
        )
        in_anchor = conditions_hold(anchor.rule, train.rows)
        in_rule = conditions_hold(rule.conditions, train.rows)
        intersection = int((in_anchor & in_rule).sum())
        if bands_binding:
            claims.append(
                claim_true(
                    "anchor/reason-rule training intersection non-empty",
                    intersection > 0,
                    observed=intersection,
                )
            )
        else:
            claims.append(
                claim_true(
                    "anchor/reason-rule training intersection (reported only: generated data)",
                    True,
                    observed=intersection,
                )
            )
        extras["anchor_rule"] = anchor.rule_text(train.feature_names)
        extras["anchor_support"] = anchor.support
        extras["reason_rule_support"] = int(in_rule.sum())
        extras["intersection"] = intersection

    return FixtureResult(
        fixture_id="credit-pipeline",
        claims=tuple(claims),
        runtime_s=time.perf_counter() - start,
        extras=extras,
    )
