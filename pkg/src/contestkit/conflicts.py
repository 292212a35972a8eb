"""Intuition rules vs explanations: graded conflict verdicts.

Each detector checks the exact hypotheses of one inference pattern and
issues at most the level that pattern licenses. Verdicts are conditional:
the engine records intuition rules as assumptions, never as facts, and a
positive verdict never claims the decision at hand is itself wrong.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HypothesisViolationError, InvalidRequestError
from .explainers import (
    PER_FEATURE_UNIFORM,
    UNIFORM_BALL,
    Anchor,
    Counterfactual,
    LocalLinearExplanation,
    LocalitySpec,
    sample_locality,
)
from .models import conditions_hold
from .norms import distance

LEVEL_NONE = "none"
LEVEL_INACCURATE = "somewhere_inaccurate"
LEVEL_CONTESTABLE = "somewhere_contestable"

ASSUMPTION_DISCLAIMER = (
    "Conditional verdict: it assumes the stated intuition rule is correct and "
    "does not verify the rule itself. A conflict licenses at most the stated "
    "somewhere-level claim near this case; it does not show that the decision "
    "at hand is wrong."
)


@dataclass(frozen=True)
class Hypothesis:
    name: str
    satisfied: bool
    value: Optional[float] = None

    def to_dict(self) -> dict:
        return {"name": self.name, "satisfied": self.satisfied, "value": self.value}


@dataclass(frozen=True)
class ConflictVerdict:
    conflict_found: bool
    implied_level: str
    theorem_hypotheses: tuple
    method: str = ""
    assumption_disclaimer: str = ASSUMPTION_DISCLAIMER

    def to_dict(self) -> dict:
        return {
            "conflict_found": self.conflict_found,
            "implied_level": self.implied_level,
            "theorem_hypotheses": [h.to_dict() for h in self.theorem_hypotheses],
            "method": self.method,
            "assumption_disclaimer": self.assumption_disclaimer,
        }


@dataclass(frozen=True)
class ContinuityRule:
    """Assumption that two near-identical inputs deserve the same decision."""

    applies_to: tuple  # (x, x_c) pair of feature vectors

    def __post_init__(self):
        a, b = self.applies_to
        object.__setattr__(
            self,
            "applies_to",
            (tuple(float(v) for v in a), tuple(float(v) for v in b)),
        )


@dataclass(frozen=True)
class MonotonicityRule:
    """Assumption that the true p is monotone in one feature."""

    feature: int
    direction: str  # "positive" or "negative"

    def __post_init__(self):
        if self.direction not in ("positive", "negative"):
            raise InvalidRequestError(f"direction must be positive/negative, got {self.direction!r}")


@dataclass(frozen=True)
class ReasonRule:
    """Assumption that satisfying the conditions is sufficient for a decision."""

    conditions: tuple
    implied_decision: int

    def __post_init__(self):
        if len(self.conditions) == 0:
            raise InvalidRequestError("a reason rule needs at least one condition")
        if self.implied_decision not in (0, 1):
            raise InvalidRequestError("implied_decision must be 0 or 1")


def detect_continuity_conflict(
    case,
    cf: Counterfactual,
    rule: ContinuityRule,
    epsilon: float,
    norm: str = "absolute",
    scales=None,
) -> ConflictVerdict:
    """Counterfactual inside the epsilon ball + continuity => somewhere contestable."""
    if cf.source != case.x_measured:
        raise InvalidRequestError("counterfactual was computed for different features")
    if rule.applies_to != (case.x_measured, cf.x_c):
        raise InvalidRequestError(
            "continuity rule is declared over different points than (case, counterfactual)"
        )
    dist = distance(case.x_measured, cf.x_c, norm, scales)
    within = dist < epsilon
    hypotheses = (
        Hypothesis("decision_flips_at_counterfactual", True),
        Hypothesis("counterfactual_distance_below_epsilon", within, dist),
        Hypothesis("continuity_rule_assumed_over_pair", True),
    )
    return ConflictVerdict(
        conflict_found=True,
        implied_level=LEVEL_CONTESTABLE if within else LEVEL_NONE,
        theorem_hypotheses=hypotheses,
        method=f"distance[{norm}]",
    )


def weight_variance(locality: LocalitySpec, weight: float, feature: int) -> float:
    """Closed-form Var[w * pi_k] for a bounded per-feature-uniform locality."""
    eps = float(locality.epsilon_vector()[feature])
    return weight**2 * (2.0 * eps) ** 2 / 12.0


def detect_monotonicity_conflict(
    expl: LocalLinearExplanation, rule: MonotonicityRule
) -> ConflictVerdict:
    """Opposing surrogate slope + small LF => somewhere inaccurate.

    Requires the surrogate's locality to be per-feature independent with
    bounded support; anything else refuses a verdict rather than guessing.
    """
    locality = expl.locality
    independent = locality.distribution == PER_FEATURE_UNIFORM or (
        locality.distribution == UNIFORM_BALL and len(locality.center) == 1
    )
    if not independent:
        raise HypothesisViolationError(
            f"locality {locality.distribution!r} is not per-feature independent "
            "with bounded support; verdict refused"
        )
    if not 0 <= rule.feature < len(expl.weights):
        raise InvalidRequestError(f"feature index {rule.feature} out of range")
    w_k = expl.weights[rule.feature]
    conflict = (rule.direction == "positive" and w_k < 0) or (
        rule.direction == "negative" and w_k > 0
    )
    var = weight_variance(locality, w_k, rule.feature)
    lf_small = bool(expl.local_faithfulness < var)
    hypotheses = (
        Hypothesis("surrogate_weight_opposes_direction", conflict, w_k),
        Hypothesis("locality_independent_bounded", True),
        Hypothesis("local_faithfulness_below_weight_variance", lf_small, expl.local_faithfulness),
        Hypothesis("analytic_weight_variance", True, var),
        Hypothesis("monotonicity_rule_assumed", True),
    )
    return ConflictVerdict(
        conflict_found=conflict,
        implied_level=LEVEL_INACCURATE if conflict and lf_small else LEVEL_NONE,
        theorem_hypotheses=hypotheses,
        method="analytic-variance",
    )


def _box_measure(conditions, locality: LocalitySpec) -> float:
    """Exact mass of a condition conjunction under a per-feature-uniform locality."""
    center = np.asarray(locality.center)
    eps = locality.epsilon_vector()
    lo = center - eps
    hi = center + eps
    for c in conditions:
        if c.op == "<=":
            hi[c.feature] = min(hi[c.feature], c.threshold)
        else:
            lo[c.feature] = max(lo[c.feature], c.threshold)
    lengths = np.clip(hi - lo, 0.0, None)
    return float(np.prod(lengths / (2.0 * eps)))


def detect_reason_conflict(
    anchor: Anchor,
    rule: ReasonRule,
    locality: LocalitySpec,
    z: float = 1.645,
) -> ConflictVerdict:
    """Anchor and reason rule disagree on overlapping mass => somewhere contestable.

    The overlap P(A and B) must exceed the anchor's slack delta. Under a
    per-feature-uniform locality the overlap is an exact interval measure;
    otherwise it is certified with a one-sided Monte-Carlo margin z * SE.
    """
    if anchor.precision is None or anchor.delta_slack is None:
        raise InvalidRequestError("estimate the anchor's precision first")
    conflict = anchor.pinned_decision != rule.implied_decision
    delta = anchor.delta_slack

    if locality.distribution == PER_FEATURE_UNIFORM:
        method = "exact-interval"
        p_b = _box_measure(anchor.rule, locality)
        p_ab = _box_measure(tuple(anchor.rule) + tuple(rule.conditions), locality)
        bound = p_ab
        se = 0.0
    else:
        method = "monte-carlo"
        points = sample_locality(locality)
        in_b = conditions_hold(anchor.rule, points)
        in_ab = in_b & conditions_hold(rule.conditions, points)
        p_b = float(in_b.mean())
        p_ab = float(in_ab.mean())
        se = float(np.sqrt(p_ab * (1.0 - p_ab) / len(points)))
        bound = p_ab - z * se

    if p_b <= 0.0:
        raise HypothesisViolationError(
            "anchor rule has zero mass under the locality; verdict refused"
        )
    exceeds = bound > delta
    hypotheses = (
        Hypothesis("conflicting_implied_decisions", conflict),
        Hypothesis("anchor_precision", True, anchor.precision),
        Hypothesis("anchor_delta_slack", True, delta),
        Hypothesis("anchor_mass_positive", p_b > 0.0, p_b),
        Hypothesis("overlap_estimate", True, p_ab),
        Hypothesis("overlap_standard_error", True, se),
        Hypothesis("overlap_lower_bound_exceeds_slack", exceeds, bound),
        Hypothesis("reason_rule_assumed", True),
    )
    return ConflictVerdict(
        conflict_found=conflict,
        implied_level=LEVEL_CONTESTABLE if conflict and exceeds else LEVEL_NONE,
        theorem_hypotheses=hypotheses,
        method=method,
    )
