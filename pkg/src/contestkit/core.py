"""Thresholded decisions and the four-level contestability grading.

A decision d = 1 means the favorable outcome was granted. The engine keeps
two views of every case: the deployed model's estimate p_hat on measured
features, and (in synthetic settings only) a ground-truth oracle p on true
features. The four levels compare them pointwise and over an epsilon ball.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, SchemaError
from .norms import NORM_TAGS, distance

LEVEL_CONTESTABLE = "somewhere_contestable"
LEVEL_INACCURATE = "somewhere_inaccurate"

# |p_hat - p| above this counts as an inaccuracy on synthetic oracles
INACCURACY_TOLERANCE = 1e-9


def as_vector(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise SchemaError(f"expected one feature vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DecisionPolicy:
    """Probability threshold tau; decide favorably iff p > tau (strict)."""

    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigurationError(f"tau must lie in [0, 1], got {self.tau}")


@dataclass(frozen=True)
class Case:
    """One individual: optional true label y, true and measured features."""

    id: str
    x_true: tuple
    x_measured: tuple
    y: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "x_true", tuple(float(v) for v in self.x_true))
        object.__setattr__(self, "x_measured", tuple(float(v) for v in self.x_measured))
        if len(self.x_true) != len(self.x_measured):
            raise SchemaError("x_true and x_measured must have the same dimension")
        if self.y is not None and self.y not in (0, 1):
            raise SchemaError(f"y must be 0 or 1 when present, got {self.y}")


@dataclass(frozen=True)
class GroundTruthOracle:
    """Synthetic data-generating process with a closed-form p(x).

    boundary_inclusive switches the correct decision to p >= tau; it exists
    so fixtures whose published rule includes the boundary evaluate exactly
    as printed while the engine itself stays strict.
    """

    p: Callable
    domain_box: tuple
    p_xe: Optional[Callable] = None
    boundary_inclusive: bool = False

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.domain_box)
        object.__setattr__(self, "domain_box", box)
        for lo, hi in box:
            if lo > hi:
                raise ConfigurationError(f"empty domain interval ({lo}, {hi})")

    def contains(self, x) -> bool:
        x = as_vector(x)
        if x.size != len(self.domain_box):
            raise SchemaError(
                f"oracle domain has {len(self.domain_box)} features, input has {x.size}"
            )
        return all(lo <= v <= hi for v, (lo, hi) in zip(x, self.domain_box))

    def prob(self, x) -> float:
        if not self.contains(x):
            raise DomainError(f"point {list(as_vector(x))} outside the oracle domain")
        value = float(self.p(as_vector(x)))
        if not -1e-12 <= value <= 1.0 + 1e-12:
            raise ConfigurationError(f"oracle probability {value} outside [0, 1]")
        return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class FunctionModel:
    """Closed-form predictive model wrapping p_hat as a plain function."""

    fn: Callable
    n_features: int = 1
    name: str = "function"

    def prob_positive(self, x) -> float:
        x = as_vector(x)
        if x.size != self.n_features:
            raise SchemaError(f"model expects {self.n_features} features, got {x.size}")
        value = float(self.fn(x))
        return min(1.0, max(0.0, value))


def predict_probs(model, X) -> np.ndarray:
    """Batch p_hat; uses the model's own batch path when it has one."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    batch = getattr(model, "prob_positive_batch", None)
    if batch is not None:
        return np.asarray(batch(X), dtype=float)
    return np.array([model.prob_positive(row) for row in X], dtype=float)


@dataclass(frozen=True)
class Neighborhood:
    """Open epsilon ball around a center under a declared norm tag."""

    center: tuple
    epsilon: float
    norm: str = "absolute"
    scales: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if self.scales is not None:
            object.__setattr__(self, "scales", tuple(float(v) for v in self.scales))
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.norm not in NORM_TAGS:
            raise ConfigurationError(f"unknown norm tag: {self.norm!r}")

    def contains(self, x) -> bool:
        return distance(x, self.center, self.norm, self.scales) < self.epsilon

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "epsilon": self.epsilon,
            "norm": self.norm,
            "scales": None if self.scales is None else list(self.scales),
        }


@dataclass(frozen=True)
class Witness:
    """A grid point certifying one somewhere-level claim."""

    level: str
    x: tuple
    model_value: float
    oracle_value: float

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "x": list(self.x),
            "model_value": self.model_value,
            "oracle_value": self.oracle_value,
        }


@dataclass(frozen=True)
class ContestabilityReport:
    normative: Optional[bool]
    epistemic: Optional[bool]
    somewhere_contestable: Optional[bool]
    somewhere_inaccurate: Optional[bool]
    witnesses: tuple
    neighborhood: Neighborhood
    resolution: float
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "normative": self.normative,
            "epistemic": self.epistemic,
            "somewhere_contestable": self.somewhere_contestable,
            "somewhere_inaccurate": self.somewhere_inaccurate,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "neighborhood": self.neighborhood.to_dict(),
            "resolution": self.resolution,
            "tolerance": self.tolerance,
        }


def decide(model, policy: DecisionPolicy, x) -> int:
    """Actual decision: 1 iff p_hat(x) > tau, strictly."""
    return 1 if model.prob_positive(as_vector(x)) > policy.tau else 0


def epistemic_decision(oracle: GroundTruthOracle, policy: DecisionPolicy, x) -> int:
    """Correct decision under the true p; strict unless the oracle says inclusive."""
    prob = oracle.prob(x)
    if oracle.boundary_inclusive:
        return 1 if prob >= policy.tau else 0
    return 1 if prob > policy.tau else 0


def _grid_points(nbhd: Neighborhood, resolution: float, scan_dims) -> np.ndarray:
    center = np.asarray(nbhd.center, dtype=float)
    d = center.size
    if resolution <= 0:
        raise ConfigurationError(f"resolution must be positive, got {resolution}")
    if nbhd.epsilon < resolution:
        raise ConfigurationError(
            f"epsilon {nbhd.epsilon} below grid resolution {resolution}: no grid"
        )
    if scan_dims is None:
        scan_dims = tuple(range(d))
    scan_dims = tuple(int(i) for i in scan_dims)
    if len(scan_dims) > 2:
        raise ConfigurationError("grid scans cover at most 2 designated coordinates")
    if any(i < 0 or i >= d for i in scan_dims):
        raise ConfigurationError(f"scan dimensions {scan_dims} out of range for d={d}")

    k_max = int(math.ceil(nbhd.epsilon / resolution))
    offsets = np.arange(-k_max, k_max + 1) * resolution
    offsets = offsets[np.abs(offsets) < nbhd.epsilon]  # open ball per axis
    grids = np.meshgrid(*[offsets for _ in scan_dims], indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=1)
    points = np.tile(center, (flat.shape[0], 1))
    for col, dim in enumerate(scan_dims):
        points[:, dim] = center[dim] + flat[:, col]
    keep = [nbhd.contains(pt) for pt in points]
    return points[np.asarray(keep, dtype=bool)]


def _inaccurate(p_hat: float, p_true: float, d_hat: int, d_true: int, tolerance: float) -> bool:
    # a decision flip certifies a probability gap even below the tolerance
    if abs(p_hat - p_true) > tolerance:
        return True
    return d_hat != d_true and p_hat != p_true


def somewhere_scan(
    model,
    oracle: GroundTruthOracle,
    policy: DecisionPolicy,
    nbhd: Neighborhood,
    resolution: float = 1e-3,
    tolerance: float = INACCURACY_TOLERANCE,
    scan_dims: Optional[Sequence[int]] = None,
    extra_points: Sequence = (),
) -> list:
    """Exhaustive grid realization of the two existential somewhere-levels.

    Returns every in-domain grid point at which the model's decision differs
    from the oracle's, and every one at which the probabilities differ beyond
    the tolerance. extra_points lets callers append off-grid probes (they are
    checked against the ball and the domain like any grid point).
    """
    points = _grid_points(nbhd, resolution, scan_dims)
    if len(extra_points) > 0:
        extras = np.array([as_vector(p) for p in extra_points], dtype=float)
        extras = extras[[nbhd.contains(p) for p in extras]]
        if extras.size:
            points = np.vstack([points, extras])
    witnesses = []
    for pt in points:
        if not oracle.contains(pt):
            continue
        p_hat = model.prob_positive(pt)
        p_true = oracle.prob(pt)
        d_hat = 1 if p_hat > policy.tau else 0
        d_true = epistemic_decision(oracle, policy, pt)
        xs = tuple(float(v) for v in pt)
        if d_hat != d_true:
            witnesses.append(Witness(LEVEL_CONTESTABLE, xs, float(d_hat), float(d_true)))
        if _inaccurate(p_hat, p_true, d_hat, d_true, tolerance):
            witnesses.append(Witness(LEVEL_INACCURATE, xs, p_hat, p_true))
    return witnesses


def classify_contestability(
    case: Case,
    model,
    oracle: Optional[GroundTruthOracle],
    policy: DecisionPolicy,
    nbhd: Neighborhood,
    resolution: float = 1e-3,
    tolerance: float = INACCURACY_TOLERANCE,
    scan_dims: Optional[Sequence[int]] = None,
) -> ContestabilityReport:
    """Grade one case on all four levels; oracle-dependent flags need an oracle."""
    if tuple(nbhd.center) != case.x_measured:
        raise ConfigurationError("neighborhood center must equal case.x_measured")
    d_hat = decide(model, policy, case.x_measured)
    normative = None if case.y is None else (d_hat != case.y)
    if oracle is None:
        return ContestabilityReport(
            normative, None, None, None, (), nbhd, resolution, tolerance
        )
    epistemic = d_hat != epistemic_decision(oracle, policy, case.x_true)
    scans = somewhere_scan(model, oracle, policy, nbhd, resolution, tolerance, scan_dims)
    first = {}
    for w in scans:
        first.setdefault(w.level, w)
    witnesses = tuple(first[lvl] for lvl in (LEVEL_CONTESTABLE, LEVEL_INACCURATE) if lvl in first)
    return ContestabilityReport(
        normative=normative,
        epistemic=epistemic,
        somewhere_contestable=LEVEL_CONTESTABLE in first,
        somewhere_inaccurate=LEVEL_INACCURATE in first,
        witnesses=witnesses,
        neighborhood=nbhd,
        resolution=resolution,
        tolerance=tolerance,
    )
