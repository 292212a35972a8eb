"""Evidence generators: sparse counterfactuals, local linear surrogates, anchors."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import DecisionPolicy, as_vector, decide, predict_probs
from .errors import (
    ConfigurationError,
    RankDeficiencyError,
    SchemaError,
    UnsupportedAnchorError,
)
from .models import Condition, Dataset, TreeModel, conditions_hold, decision_path, render_rule, simplify_conditions
from .norms import distance

PER_FEATURE_UNIFORM = "per-feature-uniform"
UNIFORM_BALL = "uniform-ball"
EMPIRICAL_MARGINALS = "empirical-marginals"


@dataclass(frozen=True)
class KernelSpec:
    """Sample weights exp(-(d/width)^2) under a scaled distance."""

    norm: str = "chebyshev"
    width: float = 0.5
    scales: Optional[tuple] = None

    def weights(self, points: np.ndarray, center) -> np.ndarray:
        center = as_vector(center)
        dists = np.array(
            [distance(p, center, self.norm, self.scales) for p in points]
        )
        return np.exp(-((dists / self.width) ** 2))


@dataclass(frozen=True)
class LocalitySpec:
    """Sampling distribution around a center, with optional kernel weighting.

    per-feature-uniform and uniform-ball are epsilon-bounded (every sample
    stays inside the support); empirical-marginals draws each feature from
    observed values independently and is unbounded.
    """

    center: tuple
    distribution: str = PER_FEATURE_UNIFORM
    epsilon: Optional[float] = None
    kernel: Optional[KernelSpec] = None
    n_samples: int = 1000
    seed: int = 0
    values: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if self.distribution in (PER_FEATURE_UNIFORM, UNIFORM_BALL):
            if self.epsilon is None or np.min(self.epsilon) <= 0:
                raise ConfigurationError(
                    f"{self.distribution} locality needs a positive epsilon"
                )
        elif self.distribution == EMPIRICAL_MARGINALS:
            if self.values is None or len(self.values) != len(self.center):
                raise ConfigurationError(
                    "empirical-marginals locality needs per-feature value lists"
                )
        else:
            raise ConfigurationError(f"unknown locality distribution {self.distribution!r}")
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be positive")

    def epsilon_vector(self) -> np.ndarray:
        eps = np.asarray(self.epsilon, dtype=float)
        if eps.ndim == 0:
            eps = np.full(len(self.center), float(eps))
        if eps.size != len(self.center):
            raise ConfigurationError("epsilon vector length must match the center")
        return eps


def sample_locality(spec: LocalitySpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    center = np.asarray(spec.center, dtype=float)
    d = center.size
    n = spec.n_samples
    if spec.distribution == PER_FEATURE_UNIFORM:
        eps = spec.epsilon_vector()
        return center + rng.uniform(-eps, eps, size=(n, d))
    if spec.distribution == UNIFORM_BALL:
        eps = float(np.asarray(spec.epsilon))
        direction = rng.normal(size=(n, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = eps * rng.random(n) ** (1.0 / d)
        return center + direction * radius[:, None]
    # empirical marginals: independent draws from observed per-feature values
    cols = [rng.choice(np.asarray(vals, dtype=float), size=n) for vals in spec.values]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class Counterfactual:
    x_c: tuple
    changed_feature: int
    distance: float
    decision_flip: tuple
    source: tuple
    feature_name: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "x_c": list(self.x_c),
            "changed_feature": self.changed_feature,
            "feature_name": self.feature_name,
            "old_value": self.source[self.changed_feature],
            "new_value": self.x_c[self.changed_feature],
            "distance": self.distance,
            "decision_flip": list(self.decision_flip),
        }


def counterfactual_search(
    model,
    policy: DecisionPolicy,
    x,
    ds: Dataset,
    norm: str = "normalized-euclidean",
) -> Optional[Counterfactual]:
    """Exhaustive single-feature substitution from the empirical values in ds.

    Returns the flip minimizing the declared distance; ties keep the lowest
    feature index, then the lowest substituted value. None if nothing flips.
    """
    x = as_vector(x)
    if x.size != ds.n_features:
        raise SchemaError(f"dataset has {ds.n_features} features, input has {x.size}")
    scales = ds.stds() if norm in ("normalized-euclidean", "chebyshev") else None
    d0 = decide(model, policy, x)
    best = None  # (distance, feature, value, decision)
    for j in range(ds.n_features):
        candidates = np.unique(ds.rows[:, j])
        candidates = candidates[candidates != x[j]]
        if candidates.size == 0:
            continue
        batch = np.tile(x, (candidates.size, 1))
        batch[:, j] = candidates
        probs = predict_probs(model, batch)
        flips = np.flatnonzero((probs > policy.tau).astype(int) != d0)
        for k in flips:
            x_c = batch[k]
            dist = distance(x, x_c, norm, scales)
            if best is None or dist < best[0]:
                best = (dist, j, float(candidates[k]), int(probs[k] > policy.tau))
    if best is None:
        return None
    dist, j, value, d1 = best
    x_c = x.copy()
    x_c[j] = value
    return Counterfactual(
        x_c=tuple(float(v) for v in x_c),
        changed_feature=j,
        distance=dist,
        decision_flip=(d0, d1),
        source=tuple(float(v) for v in x),
        feature_name=ds.feature_names[j],
    )


@dataclass(frozen=True)
class LocalLinearExplanation:
    weights: tuple
    intercept: float
    local_faithfulness: float
    locality: LocalitySpec

    def to_dict(self, names=None) -> dict:
        keys = names if names else [f"f{i}" for i in range(len(self.weights))]
        return {
            "weights": dict(zip(keys, self.weights)),
            "intercept": self.intercept,
            "local_faithfulness": self.local_faithfulness,
            "n_samples": self.locality.n_samples,
            "seed": self.locality.seed,
            "distribution": self.locality.distribution,
        }


def fit_local_surrogate(model, locality: LocalitySpec) -> LocalLinearExplanation:
    """Weighted least-squares linear fit to p_hat over the locality sample.

    Local faithfulness is the unweighted in-sample mean squared residual,
    an estimate of E[(g - p_hat)^2] under the locality distribution.
    """
    d = len(locality.center)
    if locality.n_samples <= d + 1:
        raise ConfigurationError(
            f"need more than {d + 1} samples for {d} features, got {locality.n_samples}"
        )
    X = sample_locality(locality)
    y = predict_probs(model, X)
    w = locality.kernel.weights(X, locality.center) if locality.kernel else np.ones(len(X))
    A = np.column_stack([X, np.ones(len(X))])
    sw = np.sqrt(w)
    rank = np.linalg.matrix_rank(A * sw[:, None])
    if rank < d + 1:
        variances = np.average((X - np.average(X, axis=0, weights=w)) ** 2, axis=0, weights=w)
        flat = [int(i) for i in np.flatnonzero(variances < 1e-18)]
        raise RankDeficiencyError(
            f"singular design matrix (rank {rank} < {d + 1}); "
            f"constant or collinear features: {flat if flat else 'exact linear dependence'}",
            collinear_features=flat,
        )
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    residuals = A @ coef - y
    return LocalLinearExplanation(
        weights=tuple(float(v) for v in coef[:d]),
        intercept=float(coef[d]),
        local_faithfulness=float(np.mean(residuals**2)),
        locality=locality,
    )


@dataclass(frozen=True)
class Anchor:
    """Condition conjunction under which the decision is locally stable."""

    rule: tuple
    pinned_decision: int
    support: int
    precision: Optional[float] = None
    delta_slack: Optional[float] = None

    def rule_text(self, names=None) -> str:
        return render_rule(self.rule, names)

    def to_dict(self, names=None) -> dict:
        return {
            "rule": self.rule_text(names),
            "conditions": [
                {"feature": c.feature, "op": c.op, "threshold": c.threshold}
                for c in self.rule
            ],
            "pinned_decision": self.pinned_decision,
            "support": self.support,
            "precision": self.precision,
            "delta_slack": self.delta_slack,
        }


def extract_anchor(tree: TreeModel, x, train: Dataset, policy: DecisionPolicy) -> Anchor:
    """Anchor = the tree's decision path for x, simplified; support counted on train."""
    x = as_vector(x)
    rule = simplify_conditions(decision_path(tree, x))
    support = int(conditions_hold(rule, train.rows).sum()) if train.n_rows else 0
    return Anchor(
        rule=rule,
        pinned_decision=decide(tree, policy, x),
        support=support,
    )


def estimate_anchor_precision(
    model, policy: DecisionPolicy, anchor: Anchor, locality: LocalitySpec
) -> Anchor:
    """Monte-Carlo precision: P(decision = pinned | rule holds) under the locality."""
    points = sample_locality(locality)
    conform = conditions_hold(anchor.rule, points)
    if not conform.any():
        raise UnsupportedAnchorError(
            f"no locality sample satisfied the rule within {locality.n_samples} draws; "
            "the rule has no mass under this locality"
        )
    probs = predict_probs(model, points[conform])
    decisions = (probs > policy.tau).astype(int)
    precision = float(np.mean(decisions == anchor.pinned_decision))
    return replace(anchor, precision=precision, delta_slack=1.0 - precision)
