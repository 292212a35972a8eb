"""Closed-form models, oracles, discrete joints, and generated datasets.

Everything here is synthetic by construction: ground truth is known exactly,
so tests and fixtures can verify engine output against independent math.
"""

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import DecisionPolicy, FunctionModel, GroundTruthOracle
from .errors import DomainError
from .models import CATEGORICAL, NUMERIC, Dataset, DatasetSchema, FeatureSpec


def tent_model() -> FunctionModel:
    """p_hat(x) = 2x below 0.5, 2 - 2x from 0.5 up; positive region (0.25, 0.75)."""

    def fn(x):
        v = x[0]
        return 2.0 * v if v < 0.5 else 2.0 - 2.0 * v

    return FunctionModel(fn=fn, n_features=1, name="tent")


def ramp_oracle() -> GroundTruthOracle:
    """True p(x) = x on [0, 1]; the published rule grants the boundary point."""
    return GroundTruthOracle(
        p=lambda x: float(x[0]),
        domain_box=((0.0, 1.0),),
        boundary_inclusive=True,
    )


def scaled_tent_model(a: float) -> FunctionModel:
    """Tent of slope a peaking at 0.5: p_hat(x) = min(a*x, a*(1-x)), clipped."""

    def fn(x):
        v = x[0]
        return min(1.0, max(0.0, min(a * v, a * (1.0 - v))))

    return FunctionModel(fn=fn, n_features=1, name=f"tent[{a:g}]")


def piecewise_linear(xs, ys, name: str = "piecewise") -> FunctionModel:
    xs = np.asarray(xs, dtype=float)
    ys = np.clip(np.asarray(ys, dtype=float), 0.0, 1.0)

    def fn(x):
        return float(np.interp(x[0], xs, ys))

    return FunctionModel(fn=fn, n_features=1, name=name)


def random_piecewise_pair(seed: int):
    """A random 1-D (model, oracle) pair on [0, 1], both piecewise linear."""
    rng = np.random.default_rng(seed)

    def knots():
        k = int(rng.integers(2, 7))
        xs = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.0, 1.0, k)]))
        ys = rng.uniform(0.0, 1.0, xs.size)
        return xs, ys

    model = piecewise_linear(*knots(), name=f"pl-model-{seed}")
    oxs, oys = knots()
    oracle = GroundTruthOracle(
        p=lambda x: float(np.interp(x[0], oxs, oys)),
        domain_box=((0.0, 1.0),),
    )
    return model, oracle


def random_monotone_oracle(seed: int) -> GroundTruthOracle:
    """A random nondecreasing 1-D true-probability curve on [0, 1]."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, 7))
    xs = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.0, 1.0, k)]))
    steps = rng.uniform(0.05, 1.0, xs.size)
    ys = np.cumsum(steps)
    lo, hi = rng.uniform(0.02, 0.25), rng.uniform(0.75, 0.98)
    ys = lo + (hi - lo) * (ys - ys[0]) / (ys[-1] - ys[0])
    return GroundTruthOracle(
        p=lambda x: float(np.interp(x[0], xs, ys)),
        domain_box=((0.0, 1.0),),
    )


@dataclass(frozen=True)
class DiscreteJointOracle:
    """Finite joint over (X, E, Y) held as exact fractions.

    mass[i] = P(X=x, E=e) and cond[i] = P(Y=1 | X=x, E=e), row-major over
    x_values then e_values. Marginals and Bayes-decider error rates are
    computed exactly, so theorem tests never depend on float summation.
    """

    x_values: tuple
    e_values: tuple
    mass: tuple
    cond: tuple

    def __post_init__(self):
        if len(self.mass) != len(self.x_values) * len(self.e_values):
            raise DomainError("joint table size mismatch")
        if sum(self.mass, Fraction(0)) != 1:
            raise DomainError("joint mass must sum to one")

    def _xi(self, x) -> int:
        v = float(np.asarray(x, dtype=float).ravel()[0])
        for i, xv in enumerate(self.x_values):
            if xv == v:
                return i
        raise DomainError(f"x value {v} not in the joint's support")

    def _ei(self, e) -> int:
        v = float(np.asarray(e, dtype=float).ravel()[0])
        for i, ev in enumerate(self.e_values):
            if ev == v:
                return i
        raise DomainError(f"evidence value {v} not in the joint's support")

    def _cell(self, xi, ei) -> int:
        return xi * len(self.e_values) + ei

    def p_x_exact(self, xi: int) -> Fraction:
        num = Fraction(0)
        den = Fraction(0)
        for ei in range(len(self.e_values)):
            c = self._cell(xi, ei)
            num += self.mass[c] * self.cond[c]
            den += self.mass[c]
        if den == 0:
            raise DomainError(f"x value index {xi} has zero mass")
        return num / den

    def p(self, x) -> float:
        return float(self.p_x_exact(self._xi(x)))

    def p_xe(self, x, e) -> float:
        return float(self.cond[self._cell(self._xi(x), self._ei(e))])

    def exact_errors(self, policy: DecisionPolicy):
        """Error rates of the two Bayes deciders, by exact enumeration."""
        tau = Fraction(policy.tau)
        err_x = Fraction(0)
        err_xe = Fraction(0)
        for xi in range(len(self.x_values)):
            d_x = 1 if self.p_x_exact(xi) > tau else 0
            for ei in range(len(self.e_values)):
                c = self._cell(xi, ei)
                d_xe = 1 if self.cond[c] > tau else 0
                err_x += self.mass[c] * (self.cond[c] if d_x == 0 else 1 - self.cond[c])
                err_xe += self.mass[c] * (self.cond[c] if d_xe == 0 else 1 - self.cond[c])
        return float(err_x), float(err_xe)

    def sample_cells(self, n: int, rng):
        """Draw (x index, e index, y) triples from the joint."""
        probs = np.array([float(m) for m in self.mass])
        cells = rng.choice(len(self.mass), size=n, p=probs)
        conds = np.array([float(c) for c in self.cond])
        y = (rng.random(n) < conds[cells]).astype(int)
        ne = len(self.e_values)
        return cells // ne, cells % ne, y

    def sample_joint(self, n: int, rng):
        xi, ei, y = self.sample_cells(n, rng)
        xs = np.array([self.x_values[i] for i in xi])
        es = np.array([self.e_values[i] for i in ei])
        return y, xs, es


def xor_joint() -> DiscreteJointOracle:
    """Uniform independent bits with p(x, e) = 0.2 + 0.6 * (x xor e).

    The marginal p(x) is exactly 1/2 for both x, so evidence-blind decisions
    are coin flips while the joint decider errs exactly 20% of the time.
    """
    q = Fraction(1, 4)
    lo = Fraction(1, 5)
    hi = Fraction(4, 5)
    return DiscreteJointOracle(
        x_values=(0.0, 1.0),
        e_values=(0.0, 1.0),
        mass=(q, q, q, q),
        cond=(lo, hi, hi, lo),
    )


def random_discrete_joint(seed: int) -> DiscreteJointOracle:
    rng = np.random.default_rng(seed)
    nx = int(rng.integers(2, 5))
    ne = int(rng.integers(2, 4))
    weights = rng.integers(1, 21, size=nx * ne)
    total = int(weights.sum())
    mass = tuple(Fraction(int(w), total) for w in weights)
    cond = tuple(Fraction(int(c), 100) for c in rng.integers(0, 101, size=nx * ne))
    return DiscreteJointOracle(
        x_values=tuple(float(i) for i in range(nx)),
        e_values=tuple(float(i) for i in range(ne)),
        mass=mass,
        cond=cond,
    )


def labeled_ramp_dataset(n: int = 41, seed: int = 0) -> Dataset:
    """1-D grid on [0, 1] labeled by the ramp oracle's own decision rule."""
    xs = np.linspace(0.0, 1.0, n)
    schema = DatasetSchema(
        features=(FeatureSpec("x", NUMERIC),),
        label="label",
        positive_label="1",
    )
    return Dataset(
        schema=schema,
        rows=xs.reshape(-1, 1),
        labels=(xs >= 0.5).astype(int),
        encoders={},
    )


# --- generated credit-shaped table ---------------------------------------

CREDIT_CATEGORIES = {
    "checking_status": ["<0", "0<=X<200", ">=200", "no checking"],
    "credit_history": [
        "no credits/all paid",
        "all paid",
        "existing paid",
        "delayed previously",
        "critical/other existing credit",
    ],
    "purpose": [
        "new car",
        "used car",
        "furniture/equipment",
        "radio/tv",
        "domestic appliance",
        "repairs",
        "education",
        "retraining",
        "business",
        "other",
    ],
    "savings_status": ["<100", "100<=X<500", "500<=X<1000", ">=1000", "no known savings"],
    "employment": ["unemployed", "<1", "1<=X<4", "4<=X<7", ">=7"],
    "personal_status": [
        "male div/sep",
        "female div/dep/mar",
        "male single",
        "male mar/wid",
    ],
    "other_parties": ["none", "co applicant", "guarantor"],
    "property_magnitude": ["real estate", "life insurance", "car", "no known property"],
    "other_payment_plans": ["bank", "stores", "none"],
    "housing": ["rent", "own", "for free"],
    "job": [
        "unemp/unskilled non res",
        "unskilled resident",
        "skilled",
        "high qualif/self emp/mgmt",
    ],
    "own_telephone": ["none", "yes"],
    "foreign_worker": ["yes", "no"],
}

CREDIT_COLUMNS = [
    "checking_status",
    "duration",
    "credit_history",
    "purpose",
    "credit_amount",
    "savings_status",
    "employment",
    "installment_commitment",
    "personal_status",
    "other_parties",
    "residence_since",
    "property_magnitude",
    "age",
    "other_payment_plans",
    "housing",
    "existing_credits",
    "job",
    "num_dependents",
    "own_telephone",
    "foreign_worker",
]


def credit_like_csv_text(n_rows: int = 600, seed: int = 0) -> str:
    """Generated loan table in the classic credit-file shape; labels synthetic.

    Only the schema matches the real file. Metric bands published for the
    real data are NOT expected to hold here; this exists so the pipeline's
    mechanics can run without the original dataset.
    """
    rng = np.random.default_rng(seed)
    cat = {k: rng.integers(0, len(v), size=n_rows) for k, v in CREDIT_CATEGORIES.items()}
    duration = rng.integers(4, 61, size=n_rows)
    amount = np.round(np.exp(rng.normal(7.8, 0.75, size=n_rows))).astype(int)
    amount = np.clip(amount, 250, 18500)
    installment = rng.integers(1, 5, size=n_rows)
    residence = rng.integers(1, 5, size=n_rows)
    age = rng.integers(19, 70, size=n_rows)
    credits = rng.integers(1, 4, size=n_rows)
    dependents = rng.integers(1, 3, size=n_rows)

    score = (
        1.1
        - 0.035 * (duration - 20)
        - 0.00016 * (amount - 3000)
        + 0.55 * (cat["checking_status"] >= 2)
        - 0.45 * (cat["checking_status"] == 0)
        + 0.5 * (cat["savings_status"] >= 3)
        + 0.012 * (age - 35)
        - 0.25 * (installment - 2)
        + rng.normal(0.0, 0.9, size=n_rows)
    )
    good = score > 0.0

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CREDIT_COLUMNS + ["class"])
    for i in range(n_rows):
        row = []
        for col in CREDIT_COLUMNS:
            if col in CREDIT_CATEGORIES:
                row.append(CREDIT_CATEGORIES[col][int(cat[col][i])])
            elif col == "duration":
                row.append(int(duration[i]))
            elif col == "credit_amount":
                row.append(int(amount[i]))
            elif col == "installment_commitment":
                row.append(int(installment[i]))
            elif col == "residence_since":
                row.append(int(residence[i]))
            elif col == "age":
                row.append(int(age[i]))
            elif col == "existing_credits":
                row.append(int(credits[i]))
            elif col == "num_dependents":
                row.append(int(dependents[i]))
        row.append("good" if good[i] else "bad")
        writer.writerow(row)
    return buf.getvalue()


def write_credit_like_csv(path, n_rows: int = 600, seed: int = 0) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(credit_like_csv_text(n_rows, seed))
