from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from regraft.service.app import create_app

SMALL_DIR = Path(__file__).resolve().parents[1] / \
    "src/regraft/reeng/assets/corpora/small"


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def small_sources():
    return [{"name": p.name, "text": p.read_text()}
            for p in sorted(SMALL_DIR.glob("*.java"))]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_assets_endpoint(client):
    body = client.get("/assets").json()
    assert set(body["assets"]) == {"java.mm", "statemachine.mm", "reeng.tfm"}
    assert body["assets"]["statemachine.mm"].startswith("#")


def test_transform_small_corpus_matches_golden(client, small_sources):
    response = client.post("/transform", json={
        "java_sources": small_sources, "seed": 42, "collect_trace": True,
    })
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["output"] == (SMALL_DIR / "golden.gm").read_text()
    assert body["report"]["rule_counts"]["createTransition"] == 7
    assert set(body["report"]["phases"]) >= {"parse", "states", "transitions",
                                             "actions"}
    assert any(line.startswith("apply init ") for line in body["trace"])


def test_transform_failure_is_not_an_http_error(client):
    response = client.post("/transform", json={
        "java_sources": [{"name": "A.java", "text": "class A { }"}],
    })
    assert response.status_code == 200
    assert response.json()["success"] is False


def test_transform_parse_error_is_400(client):
    response = client.post("/transform", json={
        "java_sources": [{"name": "A.java", "text": "class {"}],
    })
    assert response.status_code == 400
    assert "message" in response.json()["detail"]


def test_transform_with_explicit_transformation(client):
    mm = ("metamodel tiny\n"
          "type Thing {\n  attr name : string\n}\n")
    tfm = ("transformation t\n"
           "import tiny\n"
           "main mk\n"
           "rule mk(out x) {\n"
           "  node n : Thing <<create>> bind x\n"
           '  assign n.name = "made"\n'
           "}\n")
    response = client.post("/transform", json={
        "metamodels": [mm], "transformation": tfm, "model": "",
    })
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert 'attr name = "made"' in body["output"]


def test_diff_endpoint(client):
    golden = (SMALL_DIR / "golden.gm").read_text()
    response = client.post("/diff", json={"left": golden, "right": golden})
    assert response.status_code == 200
    assert response.json()["empty"] is True
    tweaked = golden.replace('"warmup"', '"other"')
    response = client.post("/diff", json={"left": golden, "right": tweaked})
    body = response.json()
    assert body["empty"] is False
    assert len(body["report"]["unmatched_transitions_left"]) == 1


def test_oracle_endpoint_agrees_with_transform(client, small_sources):
    transform = client.post("/transform",
                            json={"java_sources": small_sources}).json()
    oracle = client.post("/oracle",
                         json={"java_sources": small_sources}).json()
    assert oracle["model"] == transform["output"]


def test_generate_deterministic(client):
    request = {"states": 5, "methods": 2, "nesting": 1, "seed": 11}
    a = client.post("/generate", json=request).json()
    b = client.post("/generate", json=request).json()
    assert a == b
    assert any(s["name"] == "State.java" for s in a["sources"])


def test_generate_validation_error(client):
    response = client.post("/generate", json={"states": 0, "methods": 1,
                                              "nesting": 1, "seed": 0})
    assert response.status_code == 422  # pydantic bound


def test_bench_endpoint(client):
    response = client.post("/bench", json={"states": 3, "methods": 1,
                                           "nesting": 1, "seed": 5})
    assert response.status_code == 200
    body = response.json()
    assert body["best"]["success"] is True
    assert body["best"]["total_seconds"] > 0
    assert "parse" in body["best"]["phases"]
