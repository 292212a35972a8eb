import csv
import threading
from fractions import Fraction

import numpy as np
import pytest

from contestkit.core import DecisionPolicy
from contestkit.errors import (
    CapabilityError,
    InvalidRequestError,
    QuotaExceededError,
    TotalEvidenceViolation,
)
from contestkit.evidence import (
    CORRECTION_ASSUMPTION,
    EvidenceSet,
    QueryLedger,
    WhatIfRequest,
    feature_correction_contest,
    overruling_check,
    overruling_report,
    total_evidence_experiment,
    what_if,
)
from contestkit.synthetic import tent_model, xor_joint

POLICY = DecisionPolicy(0.5)


class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now


class TestQueryLedger:
    def test_charges_accumulate_within_a_window(self):
        ledger = QueryLedger(window_seconds=100.0, clock=FakeClock())
        assert ledger.charge("c", 3, budget=10) == 7
        assert ledger.charge("c", 4, budget=10) == 3
        assert ledger.used("c") == 7

    def test_budget_resets_when_the_window_rolls_over(self):
        clock = FakeClock()
        ledger = QueryLedger(window_seconds=100.0, clock=clock)
        ledger.charge("c", 10, budget=10)
        with pytest.raises(QuotaExceededError):
            ledger.charge("c", 1, budget=10)
        clock.now = 100.0
        assert ledger.charge("c", 1, budget=10) == 9
        assert ledger.used("c") == 1

    def test_rejected_batches_consume_nothing(self):
        ledger = QueryLedger(window_seconds=100.0, clock=FakeClock())
        ledger.charge("c", 8, budget=10)
        with pytest.raises(QuotaExceededError) as err:
            ledger.charge("c", 3, budget=10)
        assert ledger.used("c") == 8  # all-or-nothing
        assert err.value.details == {"used": 8, "budget": 10, "requested": 3}

    def test_cases_are_accounted_separately(self):
        ledger = QueryLedger(window_seconds=100.0, clock=FakeClock())
        ledger.charge("a", 10, budget=10)
        assert ledger.charge("b", 10, budget=10) == 0

    def test_concurrent_charges_never_exceed_the_budget(self):
        ledger = QueryLedger(window_seconds=1e6)
        granted = []
        barrier = threading.Barrier(20)

        def worker():
            barrier.wait()
            for _ in range(5):
                try:
                    ledger.charge("c", 1, budget=50)
                    granted.append(1)
                except QuotaExceededError:
                    pass

        threads = [threading.Thread(target=worker) for _ in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(granted) == 50
        assert ledger.used("c") == 50


class TestWhatIf:
    def test_batch_over_budget_is_rejected_up_front(self):
        with pytest.raises(InvalidRequestError):
            WhatIfRequest(inputs=tuple((v,) for v in np.linspace(0, 1, 51)), budget=50)

    def test_probabilities_and_decisions_are_exact(self):
        req = WhatIfRequest(inputs=((0.2,), (0.26,), (0.5,)), budget=50)
        out = what_if(tent_model(), POLICY, req)
        assert out == [(0.4, 0), (0.52, 1), (1.0, 1)]

    def test_ledger_is_charged_per_input(self):
        ledger = QueryLedger(window_seconds=100.0, clock=FakeClock())
        req = WhatIfRequest(inputs=((0.2,), (0.3,)), budget=5)
        what_if(tent_model(), POLICY, req, ledger=ledger, case_id="c")
        assert ledger.used("c") == 2
        what_if(tent_model(), POLICY, req, ledger=ledger, case_id="c")
        with pytest.raises(QuotaExceededError):
            what_if(tent_model(), POLICY, req, ledger=ledger, case_id="c")


class TestFeatureCorrection:
    def test_flip_makes_the_contest_succeed(self):
        out = feature_correction_contest(
            tent_model(), POLICY, (0.2,), (0.3,), proof_tag="payslip"
        )
        assert out.kind == "feature-correction"
        assert (out.original_decision, out.revised_decision) == (0, 1)
        assert out.epistemically_contestable
        assert out.rationale["changed_features"] == [0]
        assert out.rationale["proof"] == "payslip"
        assert out.rationale["assumption"] == CORRECTION_ASSUMPTION

    def test_no_flip_is_an_unsuccessful_contest(self):
        out = feature_correction_contest(tent_model(), POLICY, (0.3,), (0.4,))
        assert not out.epistemically_contestable
        assert out.original_decision == out.revised_decision == 1

    def test_identical_vectors_are_rejected(self):
        with pytest.raises(InvalidRequestError):
            feature_correction_contest(tent_model(), POLICY, (0.3,), (0.3,))

    def test_dimension_mismatch_is_rejected(self):
        with pytest.raises(InvalidRequestError):
            feature_correction_contest(tent_model(), POLICY, (0.3,), (0.3, 0.4))

    def test_to_dict_carries_the_rationale(self):
        doc = feature_correction_contest(tent_model(), POLICY, (0.2,), (0.3,)).to_dict()
        assert doc["epistemically_contestable"] is True
        assert doc["rationale"]["p_measured"] == 0.4


class TestOverruling:
    def test_xor_evidence_flips_the_correct_decision(self):
        joint = xor_joint()
        # p(x=0) = 0.5 -> decision 0 (strict); p(x=0, e=1) = 0.8 -> decision 1
        assert overruling_check(joint, POLICY, (0.0,), EvidenceSet(("e",), (1.0,)))
        # p(x=0, e=0) = 0.2 -> decision 0: no overruling
        assert not overruling_check(joint, POLICY, (0.0,), EvidenceSet(("e",), (0.0,)))

    def test_oracles_without_a_joint_extension_are_refused(self):
        from contestkit.synthetic import ramp_oracle

        with pytest.raises(CapabilityError):
            overruling_check(ramp_oracle(), POLICY, (0.5,), EvidenceSet(("e",), (1.0,)))

    def test_evidence_set_lengths_must_agree(self):
        with pytest.raises(InvalidRequestError):
            EvidenceSet(features=("a", "b"), values=(1.0,))

    def test_trained_model_report_asserts_nothing(self):
        doc = overruling_report(tent_model(), tent_model(), POLICY, (0.2,), (0.6,))
        assert doc["decision_without_evidence"] == 0
        assert doc["decision_with_evidence"] == 1
        assert "no optimality guarantee" in doc["note"]


class TestTotalEvidence:
    def test_xor_error_rates_match_exact_enumeration(self):
        res = total_evidence_experiment(xor_joint(), POLICY, n_draws=100_000, seed=0)
        err_x, err_xe = xor_joint().exact_errors(POLICY)
        assert (err_x, err_xe) == (0.5, 0.2)
        assert abs(res.err_x - 0.5) < 0.01
        assert abs(res.err_xe - 0.2) < 0.01
        assert res.err_xe <= res.err_x + 3 * res.se_diff
        assert res.n_draws == 100_000

    def test_audit_csv_has_one_row_per_draw(self, tmp_path):
        path = tmp_path / "audit.csv"
        res = total_evidence_experiment(xor_joint(), POLICY, n_draws=200, seed=1, csv_path=path)
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 200
        assert set(rows[0]) == {"draw", "x", "e", "y", "d_x", "d_xe", "err_x", "err_xe"}
        # recompute the marginal error rate from the emitted rows
        assert np.mean([int(r["err_x"]) for r in rows]) == pytest.approx(res.err_x)

    def test_result_serializes(self):
        doc = total_evidence_experiment(xor_joint(), POLICY, n_draws=500, seed=2).to_dict()
        assert set(doc) == {"err_x", "err_xe", "se_diff", "n_draws"}

    def test_inconsistent_decider_tables_raise_the_violation(self):
        # a stub whose conditional table contradicts its own sampled labels:
        # cells claim y is certain 1, draws say y = 0 whenever e = 1, so the
        # with-evidence decider errs strictly more
        class RiggedJoint:
            x_values = (0.0, 1.0)
            e_values = (0.0, 1.0)
            cond = (Fraction(1), Fraction(0), Fraction(0), Fraction(1))

            def p_x_exact(self, xi):
                # forces d_x to always differ from d_xe somewhere cheap
                return Fraction(1, 3)

            def sample_cells(self, n, rng):
                xi = rng.integers(0, 2, size=n)
                ei = rng.integers(0, 2, size=n)
                y = np.zeros(n, dtype=int)  # labels never match cond's certainty
                return xi, ei, y

        with pytest.raises(TotalEvidenceViolation) as err:
            total_evidence_experiment(RiggedJoint(), POLICY, n_draws=2000, seed=3)
        assert err.value.details["err_xe"] > err.value.details["err_x"]
