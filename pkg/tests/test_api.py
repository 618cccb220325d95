"""Tests for the HTTP service."""

import json
import math

import pytest
from fastapi.testclient import TestClient

from app.main import app
from bellsurvey.qcore import haar_state, sample_settings


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def upload(client, document, **params):
    body = document if isinstance(document, bytes) else json.dumps(document).encode("utf-8")
    return client.post(
        "/optimize",
        params=params,
        files={"file": ("state.json", body, "application/json")},
    )


# =============================================================================
# Test: Service metadata
# =============================================================================


class TestMetadata:
    def test_root_lists_endpoints(self, client):
        response = client.get("/")
        assert response.status_code == 200
        assert "optimize" in response.json()["endpoints"]

    def test_health(self, client):
        data = client.get("/health").json()
        assert data["status"] == "healthy"
        assert data["max_amplitudes"] > 0


# =============================================================================
# Test: Bounds, nets and references
# =============================================================================


class TestBoundsEndpoint:
    def test_theorem1(self, client):
        response = client.post("/bounds", json={"d": 2, "n_sites": 2, "v": 2.0, "delta": 0.5})
        assert response.status_code == 200
        report = response.json()
        assert report["theorem"] == 1
        assert report["tail_bound_log10"] == pytest.approx(34.12, abs=0.01)

    def test_noisy_query_selects_theorem2(self, client):
        response = client.post("/bounds", json={"d": 2, "n_sites": 6, "v": 3.0, "lambda": 0.3})
        assert response.status_code == 200
        assert response.json()["theorem"] == 2

    def test_infeasible(self, client):
        response = client.post("/bounds", json={"d": 2, "n_sites": 3, "v": 1.2, "delta": 0.5})
        assert response.status_code == 400
        assert "c_dn" in response.json()["detail"]

    def test_missing_field(self, client):
        response = client.post("/bounds", json={"d": 2, "v": 2.0})
        assert response.status_code == 400


class TestNetEndpoint:
    def test_two_qubits(self, client):
        response = client.get("/net", params={"d": 2, "n": 2, "delta": 0.5})
        assert response.status_code == 200
        assert response.json()["m"] == 127

    def test_bad_delta(self, client):
        assert client.get("/net", params={"d": 2, "n": 2, "delta": -1}).status_code == 400


class TestGhzEndpoint:
    def test_balanced(self, client):
        data = client.get("/ghz/5").json()
        assert data["qnl"] == pytest.approx(4.0, abs=1e-12)
        assert data["mermin_reference"] == pytest.approx(4.0, abs=1e-12)

    def test_unnormalized(self, client):
        response = client.get("/ghz/3", params={"alpha": 0.9, "beta": 0.1})
        assert response.status_code == 400


# =============================================================================
# Test: Evaluation
# =============================================================================


class TestQnlEndpoint:
    def test_ghz3_pauli_xy(self, client, ghz3, xy_settings):
        payload = {"state": ghz3.to_dict(), "settings": xy_settings(3).to_dict()}
        response = client.post("/qnl", json=payload)
        assert response.status_code == 200
        assert response.json()["qnl"] == pytest.approx(2.0, abs=1e-12)

    def test_noisy(self, client, ghz3, xy_settings):
        payload = {"state": ghz3.to_dict(), "settings": xy_settings(3).to_dict(), "lambda": 0.5}
        assert client.post("/qnl", json=payload).json()["qnl"] == pytest.approx(0.25, abs=1e-12)

    def test_missing_settings(self, client, ghz3):
        response = client.post("/qnl", json={"state": ghz3.to_dict()})
        assert response.status_code == 400

    def test_dimension_mismatch(self, client, ghz3):
        payload = {"state": ghz3.to_dict(), "settings": sample_settings(2, 2, seed=1).to_dict()}
        assert client.post("/qnl", json=payload).status_code == 400

    def test_noise_on_qudits(self, client):
        payload = {
            "state": haar_state(3, 2, seed=1).to_dict(),
            "settings": sample_settings(3, 2, seed=2).to_dict(),
            "lambda": 0.1,
        }
        assert client.post("/qnl", json=payload).status_code == 400


# =============================================================================
# Test: Upload and optimization
# =============================================================================


class TestOptimizeEndpoint:
    def test_bell_state(self, client, bell_state):
        response = upload(client, bell_state.to_dict(), restarts=20, seed=1)
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "success"
        assert data["state_info"]["dimension"] == 4
        assert data["result"]["value"] == pytest.approx(math.sqrt(2), abs=1e-6)
        assert data["result"]["horodecki_value"] == pytest.approx(math.sqrt(2), abs=1e-12)
        assert len(data["result"]["settings"]["observables"]) == 2

    def test_wrapped_document(self, client, ghz3):
        response = upload(client, {"state": ghz3.to_dict()}, restarts=5, seed=2, max_sweeps=50)
        assert response.status_code == 200
        assert response.json()["state_info"]["n_sites"] == 3

    def test_noise_parameter(self, client, ghz3):
        response = client.post(
            "/optimize",
            params={"restarts": 5, "lambda": 0.2},
            files={"file": ("ghz.json", json.dumps(ghz3.to_dict()).encode(), "application/json")},
        )
        assert response.status_code == 200
        assert response.json()["result"]["value"] <= 2.0 + 1e-6

    def test_empty_file(self, client):
        assert upload(client, b"").status_code == 400

    def test_not_json(self, client):
        response = upload(client, b"\x89PNG not a state")
        assert response.status_code == 400
        assert "JSON" in response.json()["detail"]

    def test_unnormalized_state(self, client):
        response = upload(client, {"d": 2, "n_sites": 1, "amplitudes": [[1.0, 0.0], [1.0, 0.0]]})
        assert response.status_code == 400

    def test_too_many_sites(self, client):
        response = upload(client, {"d": 2, "n_sites": 30, "amplitudes": []})
        assert response.status_code == 400
        assert "sites" in response.json()["detail"]

    @pytest.mark.parametrize("document", [
        {"d": 2, "n_sites": "two", "amplitudes": [[1.0, 0.0], [0.0, 0.0]]},
        {"state": {"d": 2, "n_sites": [1], "amplitudes": [[1.0, 0.0], [0.0, 0.0]]}},
        {"d": "x", "n_sites": 1, "amplitudes": [[1.0, 0.0], [0.0, 0.0]]},
    ])
    def test_non_numeric_dimensions(self, client, document):
        response = upload(client, document)
        assert response.status_code == 400
        assert response.json()["detail"].startswith("Invalid state")

    def test_wrapped_too_many_sites(self, client):
        response = upload(client, {"state": {"d": 2, "n_sites": 30, "amplitudes": []}})
        assert response.status_code == 400
        assert "sites" in response.json()["detail"]

    def test_too_many_restarts(self, client, bell_state):
        assert upload(client, bell_state.to_dict(), restarts=10_000).status_code == 400

    def test_invalid_restarts(self, client, bell_state):
        assert upload(client, bell_state.to_dict(), restarts=0).status_code == 400
