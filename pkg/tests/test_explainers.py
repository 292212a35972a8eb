import numpy as np
import pytest

from contestkit.core import DecisionPolicy, FunctionModel, decide
from contestkit.errors import (
    ConfigurationError,
    RankDeficiencyError,
    SchemaError,
    UnsupportedAnchorError,
)
from contestkit.explainers import (
    EMPIRICAL_MARGINALS,
    PER_FEATURE_UNIFORM,
    UNIFORM_BALL,
    Anchor,
    KernelSpec,
    LocalitySpec,
    counterfactual_search,
    estimate_anchor_precision,
    extract_anchor,
    fit_local_surrogate,
    sample_locality,
)
from contestkit.models import Condition, TreeParams, train_tree
from contestkit.synthetic import tent_model

from test_models import dataset_from_arrays

POLICY = DecisionPolicy(0.5)


def linear_model(weights, intercept=0.0):
    w = np.asarray(weights, dtype=float)

    def fn(x):
        return float(np.clip(w @ np.asarray(x) + intercept, 0.0, 1.0))

    return FunctionModel(fn=fn, n_features=w.size, name="linear")


class TestCounterfactualSearch:
    def test_nearest_flipping_feature_value_wins(self):
        ds = dataset_from_arrays([[v] for v in np.round(np.arange(0.1, 1.0, 0.1), 2)], [0] * 9)
        cf = counterfactual_search(tent_model(), POLICY, (0.2,), ds, norm="absolute")
        assert cf.x_c == (0.3,)
        assert cf.changed_feature == 0
        assert cf.decision_flip == (0, 1)
        assert cf.distance == pytest.approx(0.1)
        assert cf.feature_name == "f0"

    def test_distance_ties_keep_the_lowest_substituted_value(self):
        # from 0.5, both 0.2 and 0.8 flip the tent at distance 0.3
        ds = dataset_from_arrays([[0.2], [0.5], [0.8]], [0, 1, 0])
        cf = counterfactual_search(tent_model(), POLICY, (0.5,), ds, norm="absolute")
        assert cf.x_c == (0.2,)
        assert cf.decision_flip == (1, 0)

    def test_distance_ties_keep_the_lowest_feature_index(self):
        # either coordinate alone flips the AND at the same normalized distance
        def fn(x):
            return 1.0 if (x[0] > 0.5 and x[1] > 0.5) else 0.0

        model = FunctionModel(fn=fn, n_features=2, name="and")
        ds = dataset_from_arrays([[0.0, 0.0], [1.0, 1.0]], [0, 1])
        cf = counterfactual_search(model, POLICY, (1.0, 1.0), ds, norm="normalized-euclidean")
        assert cf.changed_feature == 0
        assert cf.x_c == (0.0, 1.0)

    def test_returns_none_when_no_substitution_flips(self):
        ds = dataset_from_arrays([[0.3], [0.4], [0.6]], [1, 1, 1])
        assert counterfactual_search(tent_model(), POLICY, (0.5,), ds, norm="absolute") is None

    def test_input_dimension_must_match_the_dataset(self):
        ds = dataset_from_arrays([[0.1], [0.9]], [0, 1])
        with pytest.raises(SchemaError):
            counterfactual_search(tent_model(), POLICY, (0.2, 0.3), ds)

    def test_to_dict_reports_the_single_edit(self):
        ds = dataset_from_arrays([[v] for v in np.round(np.arange(0.1, 1.0, 0.1), 2)], [0] * 9)
        doc = counterfactual_search(tent_model(), POLICY, (0.2,), ds, norm="absolute").to_dict()
        assert doc["old_value"] == 0.2
        assert doc["new_value"] == 0.3
        assert doc["changed_feature"] == 0
        assert doc["decision_flip"] == [0, 1]

    def test_normalized_distance_uses_dataset_spreads(self):
        rows = [[0.0, 0.0], [10.0, 1.0], [20.0, 2.0], [30.0, 3.0]]
        ds = dataset_from_arrays(rows, [0, 0, 1, 1])

        def fn(x):
            return 1.0 if x[0] > 15 else 0.0

        model = FunctionModel(fn=fn, n_features=2, name="step")
        cf = counterfactual_search(model, POLICY, (10.0, 1.0), ds)
        stds = ds.stds()
        assert cf.changed_feature == 0
        assert cf.x_c[0] == 20.0
        assert cf.distance == pytest.approx(abs(20.0 - 10.0) / stds[0])


class TestLocalitySampling:
    def test_per_feature_uniform_respects_the_box(self):
        spec = LocalitySpec(center=(0.5, 0.2), epsilon=(0.1, 0.05), n_samples=400, seed=1)
        pts = sample_locality(spec)
        assert np.all(np.abs(pts[:, 0] - 0.5) <= 0.1)
        assert np.all(np.abs(pts[:, 1] - 0.2) <= 0.05)

    def test_uniform_ball_respects_the_radius(self):
        spec = LocalitySpec(
            center=(0.0, 0.0), distribution=UNIFORM_BALL, epsilon=0.3, n_samples=500, seed=2
        )
        pts = sample_locality(spec)
        assert np.all(np.linalg.norm(pts, axis=1) <= 0.3 + 1e-12)

    def test_empirical_marginals_draw_only_observed_values(self):
        spec = LocalitySpec(
            center=(0.0, 0.0),
            distribution=EMPIRICAL_MARGINALS,
            values=((1.0, 2.0), (5.0,)),
            n_samples=64,
            seed=3,
        )
        pts = sample_locality(spec)
        assert set(pts[:, 0].tolist()) <= {1.0, 2.0}
        assert set(pts[:, 1].tolist()) == {5.0}

    def test_sampling_is_seed_deterministic(self):
        spec = LocalitySpec(center=(0.5,), epsilon=0.1, n_samples=32, seed=11)
        assert np.array_equal(sample_locality(spec), sample_locality(spec))

    def test_bounded_distributions_require_a_positive_epsilon(self):
        with pytest.raises(ConfigurationError):
            LocalitySpec(center=(0.5,), epsilon=None)
        with pytest.raises(ConfigurationError):
            LocalitySpec(center=(0.5,), distribution=UNIFORM_BALL, epsilon=0.0)

    def test_empirical_marginals_require_per_feature_values(self):
        with pytest.raises(ConfigurationError):
            LocalitySpec(center=(0.5, 0.5), distribution=EMPIRICAL_MARGINALS, values=((1.0,),))

    def test_unknown_distribution_is_rejected(self):
        with pytest.raises(ConfigurationError):
            LocalitySpec(center=(0.5,), distribution="gaussian", epsilon=0.1)

    def test_kernel_weights_follow_the_squared_exponential(self):
        kernel = KernelSpec(norm="chebyshev", width=0.5)
        pts = np.array([[0.5, 0.5], [0.7, 0.5], [0.5, 0.9]])
        w = kernel.weights(pts, (0.5, 0.5))
        assert w[0] == 1.0
        assert w[1] == pytest.approx(np.exp(-((0.2 / 0.5) ** 2)))
        assert w[2] == pytest.approx(np.exp(-((0.4 / 0.5) ** 2)))


class TestLocalSurrogate:
    def test_exactly_linear_model_is_recovered(self):
        model = linear_model([0.3, 0.2], intercept=0.1)
        spec = LocalitySpec(center=(0.5, 0.5), epsilon=0.2, n_samples=400, seed=0)
        expl = fit_local_surrogate(model, spec)
        assert expl.weights[0] == pytest.approx(0.3, abs=1e-9)
        assert expl.weights[1] == pytest.approx(0.2, abs=1e-9)
        assert expl.intercept == pytest.approx(0.1, abs=1e-9)
        assert expl.local_faithfulness < 1e-12

    def test_tent_slope_is_recovered_away_from_the_peak(self):
        spec = LocalitySpec(center=(0.6,), epsilon=0.1, n_samples=600, seed=4)
        expl = fit_local_surrogate(tent_model(), spec)
        assert expl.weights[0] == pytest.approx(-2.0, abs=1e-9)
        assert expl.local_faithfulness < 1e-18

    def test_kernel_weighting_changes_nothing_for_a_linear_target(self):
        model = linear_model([0.4], intercept=0.2)
        spec = LocalitySpec(
            center=(0.5,), epsilon=0.2, n_samples=300, seed=5, kernel=KernelSpec(width=0.3)
        )
        expl = fit_local_surrogate(model, spec)
        assert expl.weights[0] == pytest.approx(0.4, abs=1e-9)

    def test_constant_feature_raises_with_the_culprit_named(self):
        model = linear_model([0.3, 0.2])
        spec = LocalitySpec(
            center=(0.5, 0.5),
            distribution=EMPIRICAL_MARGINALS,
            values=((1.0,), (0.0, 0.5, 1.0)),
            n_samples=100,
            seed=6,
        )
        with pytest.raises(RankDeficiencyError) as err:
            fit_local_surrogate(model, spec)
        assert err.value.details["collinear_features"] == [0]

    def test_too_few_samples_is_a_configuration_error(self):
        model = linear_model([0.3, 0.2])
        spec = LocalitySpec(center=(0.5, 0.5), epsilon=0.1, n_samples=3, seed=0)
        with pytest.raises(ConfigurationError):
            fit_local_surrogate(model, spec)

    def test_to_dict_keys_weights_by_feature_name(self):
        model = linear_model([0.25])
        spec = LocalitySpec(center=(0.5,), epsilon=0.1, n_samples=50, seed=7)
        doc = fit_local_surrogate(model, spec).to_dict(["income"])
        assert set(doc["weights"]) == {"income"}
        assert doc["n_samples"] == 50
        assert doc["seed"] == 7
        assert doc["distribution"] == PER_FEATURE_UNIFORM


class TestAnchors:
    def test_interval_anchor_has_unit_precision_inside_the_region(self):
        anchor = Anchor(
            rule=(Condition(0, ">", 0.25), Condition(0, "<=", 0.75)),
            pinned_decision=1,
            support=10,
        )
        spec = LocalitySpec(center=(0.55,), epsilon=0.1, n_samples=2000, seed=8)
        scored = estimate_anchor_precision(tent_model(), POLICY, anchor, spec)
        assert scored.precision == 1.0
        assert scored.delta_slack == 0.0
        assert scored.support == 10  # untouched

    def test_precision_counts_only_conforming_samples(self):
        # ball straddles the 0.25 edge: left half violates the rule, right half
        # conforms and always decides 1, so precision stays exact
        anchor = Anchor(rule=(Condition(0, ">", 0.25),), pinned_decision=1, support=5)
        spec = LocalitySpec(center=(0.25,), epsilon=0.05, n_samples=2000, seed=9)
        scored = estimate_anchor_precision(tent_model(), POLICY, anchor, spec)
        assert scored.precision == 1.0

    def test_rule_with_no_mass_raises(self):
        anchor = Anchor(rule=(Condition(0, ">", 100.0),), pinned_decision=1, support=0)
        spec = LocalitySpec(center=(0.5,), epsilon=0.1, n_samples=100, seed=10)
        with pytest.raises(UnsupportedAnchorError):
            estimate_anchor_precision(tent_model(), POLICY, anchor, spec)

    def test_tree_anchor_is_the_simplified_decision_path(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(0, 1, size=(80, 2))
        y = ((X[:, 0] > 0.5) & (X[:, 1] > 0.5)).astype(int)
        ds = dataset_from_arrays(X.tolist(), y.tolist())
        tree = train_tree(ds, TreeParams(max_depth=4))
        x = np.array([0.9, 0.9])
        anchor = extract_anchor(tree, x, ds, POLICY)
        assert anchor.pinned_decision == decide(tree, POLICY, x)
        assert all(c.holds(x) for c in anchor.rule)
        from contestkit.models import conditions_hold

        assert anchor.support == int(conditions_hold(anchor.rule, ds.rows).sum())
        assert anchor.precision is None  # not estimated yet

    def test_to_dict_renders_the_rule_text(self):
        anchor = Anchor(
            rule=(Condition(0, ">", 0.25), Condition(0, "<=", 0.75)),
            pinned_decision=1,
            support=3,
            precision=1.0,
            delta_slack=0.0,
        )
        doc = anchor.to_dict(["x"])
        assert doc["rule"] == "x > 0.25 AND x <= 0.75"
        assert doc["conditions"] == [
            {"feature": 0, "op": ">", "threshold": 0.25},
            {"feature": 0, "op": "<=", "threshold": 0.75},
        ]
        assert doc["pinned_decision"] == 1
        assert doc["delta_slack"] == 0.0
