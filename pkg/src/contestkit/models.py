"""Tabular datasets, a from-scratch CART classifier, metrics, decision paths.

Categorical columns are integer-encoded by sorted value order and then
treated as ordinal. That is statistically crude but it is the encoding the
reference rules were published under, so the trainer reproduces them.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import DecisionPolicy, as_vector
from .errors import (
    ConfigurationError,
    EvaluationError,
    SchemaError,
    StratificationError,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown feature kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class DatasetSchema:
    """Sidecar description of a CSV: feature columns, label column, positive value."""

    features: tuple
    label: str
    positive_label: str

    @staticmethod
    def from_dict(d: dict) -> "DatasetSchema":
        feats = tuple(FeatureSpec(f["name"], f["kind"]) for f in d["features"])
        return DatasetSchema(feats, d["label"], str(d["positive_label"]))

    def to_dict(self) -> dict:
        return {
            "features": [{"name": f.name, "kind": f.kind} for f in self.features],
            "label": self.label,
            "positive_label": self.positive_label,
        }


def load_schema(path) -> DatasetSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return DatasetSchema.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: DatasetSchema
    rows: np.ndarray
    labels: np.ndarray
    encoders: dict

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_features(self) -> int:
        return len(self.schema.features)

    @property
    def feature_names(self) -> list:
        return [f.name for f in self.schema.features]

    def feature_index(self, name: str) -> int:
        for i, f in enumerate(self.schema.features):
            if f.name == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    def stds(self) -> np.ndarray:
        if self.n_rows == 0:
            return np.zeros(self.n_features)
        return self.rows.std(axis=0)

    def encode_value(self, name: str, raw, strict: bool = True) -> float:
        """Encode one raw cell the way load_dataset did."""
        idx = self.feature_index(name)
        spec = self.schema.features[idx]
        if spec.kind == NUMERIC:
            try:
                return float(raw)
            except (TypeError, ValueError):
                raise SchemaError(f"unparseable numeric value {raw!r} for {name!r}")
        mapping = self.encoders[name]
        key = str(raw)
        if key not in mapping:
            if strict:
                raise SchemaError(
                    f"unseen categorical value {raw!r} for {name!r}",
                    known=sorted(mapping),
                )
            return float(len(mapping))
        return float(mapping[key])

    def decode_value(self, name: str, code) -> str:
        mapping = self.encoders.get(name)
        if mapping is None:
            return str(code)
        inverse = {v: k for k, v in mapping.items()}
        return inverse.get(int(code), str(code))


def load_dataset(source, schema: DatasetSchema, strict: bool = True, encoders: Optional[dict] = None) -> Dataset:
    """Read a CSV with a header row into an encoded Dataset.

    When encoders are passed in (e.g. encoding held-out data with training
    maps), unseen categorical values raise in strict mode and get fresh codes
    otherwise. Without encoders, maps are built from the file itself with
    codes assigned by sorted value order.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    needed = [f.name for f in schema.features] + [schema.label]
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"CSV is missing columns {missing}", expected=needed)

    raw_rows = list(reader)
    n = len(raw_rows)
    d = len(schema.features)
    rows = np.zeros((n, d), dtype=float)
    labels = np.zeros(n, dtype=int)

    cat_values = {f.name: set() for f in schema.features if f.kind == CATEGORICAL}
    for i, rec in enumerate(raw_rows):
        for f in schema.features:
            if f.kind == CATEGORICAL:
                cat_values[f.name].add(rec[f.name])

    built = {}
    for name, values in cat_values.items():
        if encoders is not None:
            mapping = dict(encoders[name])
            unseen = sorted(v for v in values if v not in mapping)
            if unseen and strict:
                raise SchemaError(f"unseen categorical values for {name!r}: {unseen}")
            for v in unseen:
                mapping[v] = len(mapping)
            built[name] = mapping
        else:
            built[name] = {v: i for i, v in enumerate(sorted(values))}

    for i, rec in enumerate(raw_rows):
        for j, f in enumerate(schema.features):
            cell = rec[f.name]
            if f.kind == NUMERIC:
                try:
                    rows[i, j] = float(cell)
                except (TypeError, ValueError):
                    raise SchemaError(
                        f"unparseable numeric value {cell!r} in row {i}, column {f.name!r}"
                    )
            else:
                rows[i, j] = built[f.name][cell]
        labels[i] = 1 if rec[schema.label] == schema.positive_label else 0

    return Dataset(schema=schema, rows=rows, labels=labels, encoders=built)


def split(ds: Dataset, test_fraction: float, seed: int, stratified: bool = True):
    """Disjoint, exhaustive train/test partition; stratified keeps class shares."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx = []
    if stratified:
        for cls in np.unique(ds.labels):
            members = np.flatnonzero(ds.labels == cls)
            n_test = int(np.floor(test_fraction * members.size + 0.5))
            if members.size and (n_test < 1 or members.size - n_test < 1):
                raise StratificationError(
                    f"class {cls} has {members.size} rows, too few to stratify "
                    f"at test_fraction={test_fraction}"
                )
            test_idx.extend(rng.permutation(members)[:n_test])
    else:
        n_test = int(np.floor(test_fraction * ds.n_rows + 0.5))
        test_idx.extend(rng.permutation(ds.n_rows)[:n_test])
    mask = np.zeros(ds.n_rows, dtype=bool)
    mask[np.asarray(test_idx, dtype=int)] = True

    def subset(m):
        return Dataset(ds.schema, ds.rows[m], ds.labels[m], ds.encoders)

    return subset(~mask), subset(mask)


@dataclass(frozen=True)
class TreeNode:
    feature: Optional[int]
    threshold: Optional[float]
    left: Optional[int]
    right: Optional[int]
    prob: Optional[float]
    n: int

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0


@dataclass(frozen=True, eq=False)
class TreeModel:
    nodes: tuple
    params: TreeParams
    feature_names: tuple

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def prob_positive(self, x) -> float:
        x = as_vector(x)
        if x.size != self.n_features:
            raise SchemaError(f"tree expects {self.n_features} features, got {x.size}")
        node = self.nodes[0]
        while not node.is_leaf:
            node = self.nodes[node.left if x[node.feature] <= node.threshold else node.right]
        return node.prob

    def prob_positive_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        at = np.zeros(X.shape[0], dtype=int)
        while True:
            feats = np.array([self.nodes[i].feature if not self.nodes[i].is_leaf else -1 for i in at])
            active = feats >= 0
            if not active.any():
                break
            rows = np.flatnonzero(active)
            for i in rows:
                node = self.nodes[at[i]]
                at[i] = node.left if X[i, node.feature] <= node.threshold else node.right
        return np.array([self.nodes[i].prob for i in at], dtype=float)

    def depth(self) -> int:
        def walk(i):
            node = self.nodes[i]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)

    def to_dict(self) -> dict:
        return {
            "kind": "tree",
            "feature_names": list(self.feature_names),
            "params": {
                "max_depth": self.params.max_depth,
                "min_samples_split": self.params.min_samples_split,
                "min_samples_leaf": self.params.min_samples_leaf,
                "seed": self.params.seed,
            },
            "nodes": [
                {
                    "feature": n.feature,
                    "threshold": n.threshold,
                    "left": n.left,
                    "right": n.right,
                    "prob": n.prob,
                    "n": n.n,
                }
                for n in self.nodes
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "TreeModel":
        params = TreeParams(**d["params"])
        nodes = tuple(
            TreeNode(n["feature"], n["threshold"], n["left"], n["right"], n["prob"], n["n"])
            for n in d["nodes"]
        )
        return TreeModel(nodes=nodes, params=params, feature_names=tuple(d["feature_names"]))


def save_tree(tree: TreeModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_tree(path) -> TreeModel:
    with open(path, "r", encoding="utf-8") as fh:
        return TreeModel.from_dict(json.load(fh))


def _gini(n0, n1):
    n = n0 + n1
    if n == 0:
        return 0.0
    p = n1 / n
    return 2.0 * p * (1.0 - p)


def _best_split(X, y, min_samples_leaf):
    """Scan all midpoint thresholds; ties keep the lowest feature, then threshold."""
    n = y.size
    total1 = int(y.sum())
    parent = _gini(n - total1, total1)
    best = None  # (gain, feature, threshold)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        sv = X[order, j]
        sy = y[order]
        cut = np.flatnonzero(sv[:-1] != sv[1:])  # left part sizes are cut+1
        if cut.size == 0:
            continue
        nl = cut + 1
        nr = n - nl
        ok = (nl >= min_samples_leaf) & (nr >= min_samples_leaf)
        if not ok.any():
            continue
        cum1 = np.cumsum(sy)
        l1 = cum1[cut]
        r1 = total1 - l1
        pl = l1 / nl
        pr = r1 / nr
        weighted = (nl * 2 * pl * (1 - pl) + nr * 2 * pr * (1 - pr)) / n
        gains = np.where(ok, parent - weighted, -np.inf)
        k = int(np.argmax(gains))  # first max = lowest threshold within feature
        if gains[k] > 1e-12 and (best is None or gains[k] > best[0]):
            threshold = (sv[cut[k]] + sv[cut[k] + 1]) / 2.0
            best = (float(gains[k]), j, float(threshold))
    return best


def train_tree(train: Dataset, params: TreeParams = TreeParams()) -> TreeModel:
    """Greedy CART on Gini impurity with deterministic tie-breaking."""
    if train.n_rows == 0:
        raise ConfigurationError("cannot train on an empty dataset")
    X = train.rows
    y = train.labels
    nodes = []
    # stack of (node slot, row indices, depth)
    nodes.append(None)
    stack = [(0, np.arange(train.n_rows), 0)]
    while stack:
        slot, idx, depth = stack.pop()
        sub_y = y[idx]
        prob = float(sub_y.mean())
        stop = (
            idx.size < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)
            or prob in (0.0, 1.0)
        )
        best = None if stop else _best_split(X[idx], sub_y, params.min_samples_leaf)
        if best is None:
            nodes[slot] = TreeNode(None, None, None, None, prob, int(idx.size))
            continue
        _, feat, thr = best
        left_mask = X[idx, feat] <= thr
        left_slot = len(nodes)
        nodes.append(None)
        right_slot = len(nodes)
        nodes.append(None)
        nodes[slot] = TreeNode(int(feat), float(thr), left_slot, right_slot, None, int(idx.size))
        # push right first so the left child is built (and numbered) first
        stack.append((right_slot, idx[~left_mask], depth + 1))
        stack.append((left_slot, idx[left_mask], depth + 1))
    return TreeModel(
        nodes=tuple(nodes),
        params=params,
        feature_names=tuple(train.feature_names),
    )


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    false_negative_rate: float
    tp: int
    tn: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "false_negative_rate": self.false_negative_rate,
            "tp": self.tp,
            "tn": self.tn,
            "fp": self.fp,
            "fn": self.fn,
        }


def evaluate(model, test: Dataset, policy: DecisionPolicy) -> Metrics:
    if test.n_rows == 0:
        raise EvaluationError("empty test set")
    probs = (
        model.prob_positive_batch(test.rows)
        if hasattr(model, "prob_positive_batch")
        else np.array([model.prob_positive(r) for r in test.rows])
    )
    pred = (probs > policy.tau).astype(int)
    y = test.labels
    tp = int(((pred == 1) & (y == 1)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    fnr = fn / (fn + tp) if (fn + tp) > 0 else 0.0
    return Metrics((tp + tn) / test.n_rows, fnr, tp, tn, fp, fn)


@dataclass(frozen=True)
class Condition:
    feature: int
    op: str  # "<=" or ">"
    threshold: float

    def holds(self, x) -> bool:
        v = x[self.feature]
        return v <= self.threshold if self.op == "<=" else v > self.threshold

    def render(self, names=None) -> str:
        name = names[self.feature] if names else f"f{self.feature}"
        return f"{name} {self.op} {self.threshold:g}"


def decision_path(tree: TreeModel, x) -> list:
    """Root-to-leaf conjunction of conditions that x satisfies."""
    x = as_vector(x)
    if x.size != tree.n_features:
        raise SchemaError(f"tree expects {tree.n_features} features, got {x.size}")
    conditions = []
    node = tree.nodes[0]
    while not node.is_leaf:
        if x[node.feature] <= node.threshold:
            conditions.append(Condition(node.feature, "<=", node.threshold))
            node = tree.nodes[node.left]
        else:
            conditions.append(Condition(node.feature, ">", node.threshold))
            node = tree.nodes[node.right]
    return conditions


def simplify_conditions(conditions) -> tuple:
    """Merge per-feature bounds into the tightest equivalent conjunction."""
    upper = {}
    lower = {}
    for c in conditions:
        if c.op == "<=":
            upper[c.feature] = min(upper.get(c.feature, np.inf), c.threshold)
        else:
            lower[c.feature] = max(lower.get(c.feature, -np.inf), c.threshold)
    out = []
    for feat in sorted(set(upper) | set(lower)):
        if feat in lower:
            out.append(Condition(feat, ">", lower[feat]))
        if feat in upper:
            out.append(Condition(feat, "<=", upper[feat]))
    return tuple(out)


def conditions_hold(conditions, X) -> np.ndarray:
    """Boolean mask of rows satisfying every condition."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    mask = np.ones(X.shape[0], dtype=bool)
    for c in conditions:
        col = X[:, c.feature]
        mask &= col <= c.threshold if c.op == "<=" else col > c.threshold
    return mask


def render_rule(conditions, names=None) -> str:
    if not conditions:
        return "TRUE"
    return " AND ".join(c.render(names) for c in conditions)
