import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from fractalframes.service import create_app

QUARTER = {
    "levels": [{"R": [[4]], "B": [0, 2], "L": [0, 1]}],
    "kind": "frame",
    "mode": "periodic",
}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_check_triple(client):
    r = client.post(
        "/check-triple",
        json={"triple": {"R": [[3]], "B": [0, 1, 3], "L": [0, 1, 2]}},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["classification"] == "Neither"
    assert body["rank"] == 2


def test_check_triple_rejects_unknown_fields(client):
    r = client.post(
        "/check-triple",
        json={"triple": {"R": [[3]], "B": [0], "L": [0]}, "bogus": 1},
    )
    assert r.status_code == 422


def test_precondition_maps_to_422(client):
    r = client.post(
        "/check-triple", json={"triple": {"R": [[1]], "B": [0], "L": [0]}}
    )
    assert r.status_code == 422
    assert r.json()["kind"] == "precondition"


def test_tower_report(client):
    r = client.post("/tower-report", json={"tower": QUARTER, "levels": 4})
    assert r.status_code == 200
    body = r.json()
    assert body["verdict"]["verdict"] == "RieszBasis"
    assert body["delta"]["certified"] is True
    assert body["products"]["M"] == 16
    assert body["concatenated"]["report"]["classification"] == "Hadamard"


def test_spectrum_level(client):
    r = client.post("/spectrum", json={"tower": QUARTER, "up_to_level": 3})
    assert r.status_code == 200
    assert sorted(p[0] for p in r.json()["points"]) == [0, 1, 4, 5, 16, 17, 20, 21]


def test_spectrum_level_zero(client):
    r = client.post("/spectrum", json={"tower": QUARTER, "up_to_level": 0})
    assert r.json()["points"] == [[0]]


def test_spectrum_requires_exactly_one_mode(client):
    r = client.post("/spectrum", json={"tower": QUARTER})
    assert r.status_code == 422
    r = client.post(
        "/spectrum", json={"tower": QUARTER, "up_to_level": 1, "radius": 5.0}
    )
    assert r.status_code == 422


def test_tail_delta(client):
    r = client.post("/tail-delta", json={"tower": QUARTER, "max_level": 4})
    assert r.status_code == 200
    body = r.json()
    assert body["delta_lower"] > 0
    assert body["certified"] is True
    assert body["levels_scanned"] == 4


def test_muhat(client):
    r = client.post("/muhat", json={"tower": QUARTER, "xis": [0.0, 1.0]})
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert rows[0]["re"] == 1.0
    assert abs(rows[1]["re"]) < 1e-9  # 1 lies in the spectrum gap set


def test_search_riesz(client):
    r = client.post(
        "/search-riesz",
        json={"R": [[4]], "B": [0, 2], "epsilon": 0.1, "partition": True},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["achieved_cardinality"] == 2
    assert body["partition_size"] == 2


def test_schedule_57(client):
    r = client.post("/schedule-57", json={"R": [[3]], "B": [0, 2], "max_k": 2})
    assert r.status_code == 200
    body = r.json()
    assert len(body["groups"]) == 2
    assert body["spectrum_size"] == body["groups"][0]["achieved_cardinality"] * body[
        "groups"
    ][1]["achieved_cardinality"]


def test_beurling(client):
    r = client.post(
        "/beurling",
        json={
            "points": [0, 1, 4, 5, 16, 17, 20, 21],
            "alpha_grid": [0.5],
            "radii": [1.4, 5.4, 21.4, 150.0],
        },
    )
    assert r.status_code == 200
    body = r.json()
    assert body["counts"] == [2, 4, 8, 8]
    assert body["densities"][0]["density"] > 0


def test_witness_exactness(client):
    r = client.post(
        "/witness",
        json={"tower": QUARTER, "witness_kind": "exactness", "level": 1, "lam0": 1},
    )
    assert r.status_code == 200
    body = r.json()
    w = body["weights"]
    assert abs(w[0][0] + w[1][0]) < 1e-9 and abs(w[0][1] + w[1][1]) < 1e-9
    assert abs(body["norm"] - 1.0) < 1e-9


def test_witness_incompleteness(client):
    tower = {
        "levels": [{"R": [[3]], "B": [0, 1, 2], "L": [0, 1]}],
        "kind": "riesz",
        "mode": "periodic",
    }
    r = client.post(
        "/witness", json={"tower": tower, "witness_kind": "incompleteness", "level": 1}
    )
    assert r.status_code == 200
    assert r.json()["extension_frequency"] == [2]


def test_validate_endpoint(client):
    r = client.post(
        "/validate",
        json={
            "command": "check-triple",
            "payload": {"triple": {"R": [[3]], "B": [0, 0], "L": [0]}},
        },
    )
    assert r.status_code == 200
    diags = r.json()["diagnostics"]
    assert len(diags) == 1 and "duplicate" in diags[0]


def test_validate_clean_payload(client):
    r = client.post(
        "/validate",
        json={
            "command": "tail-delta",
            "payload": {"tower": QUARTER, "max_level": 3},
        },
    )
    assert r.json()["diagnostics"] == []


def test_validate_unknown_command(client):
    r = client.post("/validate", json={"command": "nope", "payload": {}})
    assert "unknown command" in r.json()["diagnostics"][0]


def test_validate_negative_level(client):
    r = client.post(
        "/validate",
        json={"command": "tail-delta", "payload": {"tower": QUARTER, "max_level": -1}},
    )
    diags = r.json()["diagnostics"]
    assert any("max_level" in d for d in diags)
