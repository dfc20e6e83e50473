import shutil

import pytest
from fastapi.testclient import TestClient

from conftest import CORPUS, TUTORIAL
from dddkit import frontend
from dddkit import model as M
from dddkit.server import create_app


@pytest.fixture
def model_file(tmp_path):
    dest = tmp_path / "ordering.ddd"
    shutil.copy(TUTORIAL, dest)
    return dest


@pytest.fixture
def client(model_file):
    return TestClient(create_app(model_file))


def test_fresh_serve_revision_1(client):
    body = client.get("/api/model").json()
    assert body["revision"] == 1
    assert {a["name"] for a in body["model"]["aggregates"]} == {"Order", "Customer"}
    assert body["text"].startswith("domain Ordering {")


def test_rules_endpoint(client):
    rules = client.get("/api/rules").json()["rules"]
    assert len(rules) == 11
    assert {"id", "severity", "overridable", "description"} <= set(rules[0])


def test_put_with_syntax_error_keeps_revision(client):
    before = client.get("/api/model").json()["revision"]
    resp = client.put("/api/model", json={"text": "domain X {", "revision": before})
    assert resp.status_code == 422
    assert resp.json()["detail"]["parseErrors"]
    assert client.get("/api/model").json()["revision"] == before


def test_put_and_diagnostics_flow(client, model_file):
    base = client.get("/api/model").json()
    s3_text = base["text"].replace("field email: string", "field vip: ref Order.Order")
    resp = client.put("/api/model", json={"text": s3_text, "revision": 1})
    assert resp.status_code == 200
    body = resp.json()
    assert body["revision"] == 2
    s3 = [d for d in body["diagnostics"] if d["ruleId"] == "S3"]
    assert len(s3) == 1
    # persisted to disk in canonical form
    on_disk = frontend.parse(model_file.read_text(), "disk")
    assert M.canonical_print(on_disk) == body["text"]


def test_repair_cycle(client):
    base = client.get("/api/model").json()
    s3_text = base["text"].replace("field email: string", "field vip: ref Order.Order")
    put = client.put("/api/model", json={"text": s3_text, "revision": 1}).json()
    d = [x for x in put["diagnostics"] if x["ruleId"] == "S3"][0]
    resp = client.post(
        "/api/repairs",
        json={
            "subject": d["subject"],
            "ruleId": "S3",
            "repairId": d["repairs"][0]["id"],
            "revision": put["revision"],
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["revision"] == put["revision"] + 1
    assert [x for x in body["diagnostics"] if x["ruleId"] == "S3"] == []
    assert "OrderId" in body["text"]


def test_stale_revision_rejected_and_no_mutation(client):
    fresh = client.get("/api/model").json()
    resp = client.put("/api/model", json={"text": "domain Other {}", "revision": fresh["revision"] + 5})
    assert resp.status_code == 409
    after = client.get("/api/model").json()
    assert after["revision"] == fresh["revision"]
    assert after["text"] == fresh["text"]


def test_repair_on_missing_diagnostic_404(client):
    resp = client.post(
        "/api/repairs",
        json={"subject": "Order.Order", "ruleId": "S3", "repairId": "use-id-reference"},
    )
    assert resp.status_code == 404


def test_preview_delta_does_not_apply(client):
    base = client.get("/api/model").json()
    candidate = base["text"].replace("field total: Money", "field total: Money\n      field note: string", 1)
    resp = client.post("/api/preview-delta", json={"text": candidate})
    assert resp.status_code == 200
    ops = resp.json()["delta"]["ops"]
    assert [op["kind"] for op in ops] == ["AddField"]
    assert client.get("/api/model").json()["revision"] == base["revision"]


def test_revisions_strictly_increase(client):
    base = client.get("/api/model").json()
    text = base["text"]
    revs = [base["revision"]]
    for i in range(3):
        text = text.replace("domain Ordering {", "domain Ordering {", 1)
        text2 = text.replace("field name: string", f"field name: string\n      field extra{i}: int", 1)
        resp = client.put("/api/model", json={"text": text2, "revision": revs[-1]})
        assert resp.status_code == 200
        revs.append(resp.json()["revision"])
        text = resp.json()["text"]
    assert revs == sorted(set(revs))


def test_corpus_case_served(tmp_path):
    dest = tmp_path / "case.ddd"
    shutil.copy(CORPUS / "s3_cross_ref.ddd", dest)
    client = TestClient(create_app(dest))
    diags = client.get("/api/diagnostics").json()["diagnostics"]
    s3 = [d for d in diags if d["ruleId"] == "S3"]
    assert s3 and s3[0]["repairs"][0]["title"] == "Replace with CustomerId"
