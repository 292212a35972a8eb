import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from contestkit.service import create_app
from contestkit.service.store import build_demo_store


@pytest.fixture(scope="module")
def client():
    store = build_demo_store(seed=0, budget=50)
    with TestClient(create_app(store)) as c:
        yield c


class TestCaseEndpoint:
    def test_summary_carries_the_decision_inputs(self, client):
        r = client.get("/cases/tent-000")
        assert r.status_code == 200
        body = r.json()
        assert body["case_id"] == "tent-000"
        assert body["feature_names"] == ["x"]
        assert body["tau"] == 0.5
        assert 0.0 <= body["probability"] <= 1.0
        assert body["decision"] in (0, 1)
        assert body["oracle_available"] is True
        assert body["budget"] == 50

    def test_unknown_case_is_a_404_with_the_error_shape(self, client):
        r = client.get("/cases/missing")
        assert r.status_code == 404
        body = r.json()
        assert body["code"] == "unknown_case"
        assert "missing" in body["message"]
        assert isinstance(body["details"], dict)

    def test_reads_are_idempotent_and_free(self, client):
        first = client.get("/cases/tent-001").json()
        for _ in range(3):
            assert client.get("/cases/tent-001").json() == first
        assert client.get("/cases/tent-001").json()["budget_remaining"] == first["budget_remaining"]


class TestWhatIfEndpoint:
    def test_each_input_consumes_budget(self, client):
        before = client.get("/cases/tent-002").json()["budget_remaining"]
        r = client.post("/cases/tent-002/what-if", json={"inputs": [[0.2], [0.26]]})
        assert r.status_code == 200
        body = r.json()
        assert body["budget_remaining"] == before - 2
        assert [round(res["probability"], 6) for res in body["results"]] == [0.4, 0.52]
        assert [res["decision"] for res in body["results"]] == [0, 1]

    def test_exhausted_budget_is_a_429(self, client):
        case = "tent-003"
        r = client.post(f"/cases/{case}/what-if", json={"inputs": [[0.1]] * 50})
        assert r.status_code == 200
        assert r.json()["budget_remaining"] == 0
        r = client.post(f"/cases/{case}/what-if", json={"inputs": [[0.1]]})
        assert r.status_code == 429
        body = r.json()
        assert body["code"] == "quota_exceeded"
        assert body["details"]["used"] == 50

    def test_malformed_body_is_a_400(self, client):
        r = client.post("/cases/tent-004/what-if", json={"inputs": "nope"})
        assert r.status_code == 400
        assert r.json()["code"] == "invalid_request"

    def test_wrong_dimension_is_a_400(self, client):
        r = client.post("/cases/tent-004/what-if", json={"inputs": [[0.1, 0.2]]})
        assert r.status_code == 400
        body = r.json()
        assert body["code"] == "invalid_request"
        assert body["details"]["expected"] == 1

    def test_parallel_requests_respect_the_budget_exactly(self):
        store = build_demo_store(seed=0, budget=50)
        with TestClient(create_app(store)) as client:
            statuses = []
            lock = threading.Lock()

            def fire():
                r = client.post("/cases/tent-010/what-if", json={"inputs": [[0.4]]})
                with lock:
                    statuses.append(r.status_code)

            threads = [threading.Thread(target=fire) for _ in range(100)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert statuses.count(200) == 50
            assert statuses.count(429) == 50


class TestEvidenceEndpoint:
    def test_all_blocks_present_for_synthetic_cases(self, client):
        r = client.get("/cases/tent-005/evidence")
        assert r.status_code == 200
        body = r.json()
        assert body["report"] is not None
        report = body["report"]["report"]
        assert set(report) >= {
            "normative",
            "epistemic",
            "somewhere_contestable",
            "somewhere_inaccurate",
            "witnesses",
        }
        assert body["counterfactual"]["suggestion"] is not None
        assert body["surrogate"]["explanation"]["local_faithfulness"] >= 0.0
        assert body["anchor"]["anchor"]["precision"] is not None
        assert body["multiplicity"]["estimate"]["n"] > 0
        assert "%" in body["multiplicity"]["caption"] or "agree" in body["multiplicity"]["caption"]

    def test_evidence_is_free_and_repeatable(self, client):
        before = client.get("/cases/tent-006").json()["budget_remaining"]
        a = client.get("/cases/tent-006/evidence").json()
        b = client.get("/cases/tent-006/evidence").json()
        assert a == b
        assert client.get("/cases/tent-006").json()["budget_remaining"] == before

    def test_verdict_blocks_carry_the_disclaimer(self, client):
        body = client.get("/cases/tent-005/evidence").json()
        cv = body["counterfactual"]["continuity_verdict"]
        assert "assumes the stated intuition rule" in cv["assumption_disclaimer"]
        assert all("name" in h and "satisfied" in h for h in cv["theorem_hypotheses"])

    def test_real_data_cases_have_no_ground_truth_report(self, client):
        body = client.get("/cases/applicant-000/evidence").json()
        assert body["report"] is None
        assert body["counterfactual"] is not None
        assert body["anchor"] is not None


class TestMultiplicityEndpoint:
    def test_estimate_has_the_published_shape(self, client):
        r = client.get("/cases/tent-005/multiplicity")
        assert r.status_code == 200
        body = r.json()
        est = body["estimate"]
        assert est["theta_hat"] == min(est["positive_fraction"], est["negative_fraction"])
        assert 0.0 <= est["theta_hat"] <= 0.5
        assert "selection process" in body["provenance"] or "models" in body["provenance"]


class TestContestEndpoint:
    def test_correction_that_flips_reports_contestable(self, client):
        body = client.get("/cases/tent-000").json()
        assert body["features"] == {"x": 0.025}
        r = client.post(
            "/cases/tent-000/contest",
            json={"features": {"x": 0.5}, "proof": "notarized"},
        )
        assert r.status_code == 200
        out = r.json()
        assert out["kind"] == "feature-correction"
        assert out["epistemically_contestable"] is True
        assert out["original_decision"] == 0
        assert out["revised_decision"] == 1
        assert out["rationale"]["proof"] == "notarized"

    def test_unknown_feature_names_are_rejected(self, client):
        r = client.post("/cases/tent-000/contest", json={"features": {"y": 0.5}})
        assert r.status_code == 400
        body = r.json()
        assert body["code"] == "invalid_request"
        assert body["details"]["known"] == ["x"]

    def test_identical_features_are_rejected(self, client):
        r = client.post("/cases/tent-000/contest", json={"features": {"x": 0.025}})
        assert r.status_code == 400


class TestPublishedSchema:
    def test_schema_file_matches_the_live_app(self):
        store = build_demo_store(seed=0)
        app = create_app(store)
        published = json.loads(Path(__file__).resolve().parents[1].joinpath("api-schema.json").read_text())
        assert published == app.openapi()

    def test_all_five_routes_are_published(self):
        published = json.loads(Path(__file__).resolve().parents[1].joinpath("api-schema.json").read_text())
        assert set(published["paths"]) == {
            "/cases/{case_id}",
            "/cases/{case_id}/what-if",
            "/cases/{case_id}/evidence",
            "/cases/{case_id}/multiplicity",
            "/cases/{case_id}/contest",
        }
