"""Model-selection processes, Rashomon sets, and the multiplicity bound.

theta_hat = min(share of positive decisions, share of negative decisions)
across equally admissible models. It lower-bounds the chance that a model
drawn from the same selection process decides this case the other way; it
is consistent but biased downward at finite n.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .core import DecisionPolicy, decide
from .errors import ConfigurationError, InfeasiblePerformanceError
from .models import Dataset, TreeModel, evaluate, load_tree, save_tree

INTENTIONAL = "intentional"
CONVENTIONAL = "conventional"
ARBITRARY = "arbitrary"
CHOICE_TAGS = (INTENTIONAL, CONVENTIONAL, ARBITRARY)


@dataclass(frozen=True)
class CategoricalChoice:
    values: tuple
    weights: Optional[tuple] = None

    def sample(self, rng):
        idx = rng.choice(len(self.values), p=self.weights)
        return self.values[int(idx)]


@dataclass(frozen=True)
class UniformIntChoice:
    lo: int
    hi: int  # inclusive

    def sample(self, rng):
        return int(rng.integers(self.lo, self.hi + 1))


@dataclass(frozen=True)
class UniformFloatChoice:
    lo: float
    hi: float

    def sample(self, rng):
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class ChoiceSpec:
    name: str
    tag: str
    dist: object

    def __post_init__(self):
        if self.tag not in CHOICE_TAGS:
            raise ConfigurationError(f"unknown choice tag {self.tag!r}")


@dataclass(frozen=True)
class SelectionProcess:
    """Everything that turns random inductive choices into an accepted model."""

    choices: tuple
    trainer: Callable
    policy: DecisionPolicy
    validation: Dataset
    perf_level: float
    perf_metric: str = "accuracy"

    def metric(self, model) -> float:
        if self.perf_metric != "accuracy":
            raise ConfigurationError(f"unsupported perf metric {self.perf_metric!r}")
        return evaluate(model, self.validation, self.policy).accuracy


@dataclass(frozen=True, eq=False)
class RashomonSet:
    models: tuple
    choices_log: tuple
    metrics: tuple
    rejections: int
    perf_level: float
    seed: int

    @property
    def n(self) -> int:
        return len(self.models)


def sample_rashomon_set(
    proc: SelectionProcess,
    ds: Dataset,
    n: int,
    seed: int,
    max_rejections: int = 1000,
) -> RashomonSet:
    """Draw choices i.i.d., train, keep models meeting perf_level.

    The set is built independently of any particular individual's features;
    cases are only evaluated against it afterwards.
    """
    if n < 1:
        raise ConfigurationError("n must be at least 1")
    rng = np.random.default_rng(seed)
    models, logs, metrics = [], [], []
    rejections = 0
    while len(models) < n:
        drawn = {spec.name: spec.dist.sample(rng) for spec in proc.choices}
        model = proc.trainer(drawn, ds)
        metric = proc.metric(model)
        if metric >= proc.perf_level:
            models.append(model)
            logs.append(drawn)
            metrics.append(metric)
        else:
            rejections += 1
            if rejections > max_rejections:
                attempts = len(models) + rejections
                raise InfeasiblePerformanceError(
                    f"performance level {proc.perf_level} infeasible: "
                    f"{len(models)}/{attempts} draws accepted "
                    f"(acceptance rate {len(models) / attempts:.3f})",
                    acceptance_rate=len(models) / attempts,
                )
    return RashomonSet(
        models=tuple(models),
        choices_log=tuple(logs),
        metrics=tuple(metrics),
        rejections=rejections,
        perf_level=proc.perf_level,
        seed=seed,
    )


@dataclass(frozen=True)
class MultiplicityEstimate:
    theta_hat: float
    positive_fraction: float
    negative_fraction: float
    n: int

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat,
            "positive_fraction": self.positive_fraction,
            "negative_fraction": self.negative_fraction,
            "n": self.n,
        }


def estimate_multiplicity_bound(
    rs: RashomonSet, policy: DecisionPolicy, x
) -> MultiplicityEstimate:
    if rs.n == 0:
        raise ConfigurationError("empty model set")
    decisions = np.array([decide(m, policy, x) for m in rs.models])
    pos = float(decisions.mean())
    return MultiplicityEstimate(
        theta_hat=min(pos, 1.0 - pos),
        positive_fraction=pos,
        negative_fraction=1.0 - pos,
        n=rs.n,
    )


@dataclass(frozen=True)
class FiniteModelFamily:
    """Weighted finite family with analytically known disagreement at any x."""

    models: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.models) != w.size or not np.isclose(w.sum(), 1.0):
            raise ConfigurationError("weights must match models and sum to 1")

    def positive_probability(self, policy: DecisionPolicy, x) -> float:
        ds = np.array([decide(m, policy, x) for m in self.models], dtype=float)
        return float(np.dot(ds, np.asarray(self.weights)))

    def exact_theta(self, policy: DecisionPolicy, x) -> float:
        p = self.positive_probability(policy, x)
        return min(p, 1.0 - p)

    def sample_decisions(self, policy: DecisionPolicy, x, n: int, rng) -> np.ndarray:
        p = self.positive_probability(policy, x)
        return (rng.random(n) < p).astype(int)


@dataclass(frozen=True)
class BiasReportRow:
    n: int
    mean_theta: float
    se: float
    abs_error: float


@dataclass(frozen=True)
class BiasReport:
    theta: float
    rows: tuple
    downward_biased: bool  # every mean stays below theta + 3 SE
    error_band_shrinks: bool  # |mean - theta| non-increasing, one SE slack

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "rows": [
                {"n": r.n, "mean_theta": r.mean_theta, "se": r.se, "abs_error": r.abs_error}
                for r in self.rows
            ],
            "downward_biased": self.downward_biased,
            "error_band_shrinks": self.error_band_shrinks,
        }


def bias_and_consistency_report(
    family: FiniteModelFamily,
    policy: DecisionPolicy,
    x,
    n_values,
    repeats: int,
    seed: int,
) -> BiasReport:
    """Monte-Carlo study of theta_hat against the family's exact theta."""
    rng = np.random.default_rng(seed)
    p = family.positive_probability(policy, x)
    theta = min(p, 1.0 - p)
    rows = []
    for n in n_values:
        k = rng.binomial(n, p, size=repeats)
        estimates = np.minimum(k, n - k) / n
        mean = float(estimates.mean())
        se = float(estimates.std(ddof=1) / np.sqrt(repeats)) if repeats > 1 else 0.0
        rows.append(BiasReportRow(int(n), mean, se, abs(mean - theta)))
    downward = all(r.mean_theta <= theta + 3.0 * r.se for r in rows)
    shrinks = all(
        rows[i + 1].abs_error <= rows[i].abs_error + rows[i + 1].se
        for i in range(len(rows) - 1)
    )
    return BiasReport(theta=theta, rows=tuple(rows), downward_biased=downward, error_band_shrinks=shrinks)


def save_rashomon_set(rs: RashomonSet, directory) -> None:
    """Persist tree members as JSON files plus a manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i, model in enumerate(rs.models):
        if not isinstance(model, TreeModel):
            raise ConfigurationError("only tree models can be persisted")
        name = f"model_{i:04d}.json"
        save_tree(model, directory / name)
        files.append(name)
    manifest = {
        "model_files": files,
        "choices": list(rs.choices_log),
        "metrics": list(rs.metrics),
        "rejections": rs.rejections,
        "perf_level": rs.perf_level,
        "seed": rs.seed,
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_rashomon_set(directory) -> RashomonSet:
    directory = Path(directory)
    with open(directory / "manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    models = tuple(load_tree(directory / name) for name in manifest["model_files"])
    return RashomonSet(
        models=models,
        choices_log=tuple(manifest["choices"]),
        metrics=tuple(manifest["metrics"]),
        rejections=manifest["rejections"],
        perf_level=manifest["perf_level"],
        seed=manifest["seed"],
    )
