import json
from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

import server
from ws_manager import ws_manager


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setattr(server, "REPORTS_DIR", str(tmp_path / "reports"))
    with TestClient(server.app) as test_client:
        yield test_client


def receive_until_final(ws, limit=50):
    messages = []
    for _ in range(limit):
        message = ws.receive_json()
        messages.append(message)
        if message.get("type") == "error" or message.get("status") in ("completed", "failed", "cancelled"):
            break
    return messages


def receive_matching(ws, predicate, limit=50):
    for _ in range(limit):
        message = ws.receive_json()
        if predicate(message):
            return message
    raise AssertionError("no matching message")


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_alpha(client):
    body = client.get("/api/alpha", params={"n": 7, "k": 3}).json()
    assert body["closed_form"] == "4/7"
    assert body["alpha"] == pytest.approx(float(Fraction(4, 7)))
    assert body["method"] == "closed-form"

    w2 = client.get("/api/alpha", params={"n": 2, "k": 1}).json()
    assert w2["method"] == "bruteforce"
    assert w2["bruteforce"] == "1/2"

    product = client.get("/api/alpha", params={"n": 3, "k": 0}).json()
    assert product["vacuous"]
    assert product["closed_form"] is None

    assert client.get("/api/alpha", params={"n": 3, "k": 5}).status_code == 422


def test_reports_endpoint(client, tmp_path):
    assert client.get("/api/reports/missing.json").status_code == 404
    assert client.get("/api/reports/notes.txt").status_code == 404
    (tmp_path / "reports" / "point.json").write_text(json.dumps({"f_lower": 0.9}))
    response = client.get("/api/reports/point.json")
    assert response.status_code == 200
    assert response.json() == {"f_lower": 0.9}


def test_websocket_verify_spectrum_job(client):
    with client.websocket_connect("/api/ws?client_id=test-client") as ws:
        ws.send_json({"type": "create_job", "task_type": "verify_spectrum", "request_id": "r1", "params": {"n": 3, "k": 1}})
        messages = receive_until_final(ws)
        assert messages[0]["request_id"] == "r1"
        final = messages[-1]
        assert final["status"] == "completed"
        assert final["result"]["spectrum"]["gap"] == pytest.approx(1.0)
        assert final["job_id"] not in ws_manager.job_subscriptions
        assert final["job_id"] not in ws_manager.client_subscriptions["test-client"]

        ws.send_json({"type": "get_status", "job_id": final["job_id"], "request_id": "r2"})
        status = receive_matching(ws, lambda m: m.get("request_id") == "r2")
        assert status["status"] == "completed"
        assert status["request_id"] == "r2"

        ws.send_json({"type": "get_client_jobs"})
        listing = receive_matching(ws, lambda m: m["type"] == "client_jobs")
        assert [job["job_id"] for job in listing["jobs"]] == [final["job_id"]]


def test_websocket_certify_point_job(client):
    with client.websocket_connect("/api/ws?client_id=point-client") as ws:
        ws.send_json({
            "type": "create_job",
            "task_type": "certify_point",
            "params": {"n": 3, "k": 1, "shots": 256, "seed": 1, "write_report": False},
        })
        messages = receive_until_final(ws)
    assert any(m["type"] == "job_progress" for m in messages)
    assert messages[-1]["result"]["report"]["n"] == 3


def test_websocket_errors(client):
    with client.websocket_connect("/api/ws") as ws:
        ws.send_text("not json")
        assert ws.receive_json()["message"] == "Invalid JSON"

        ws.send_json({"type": "create_job", "task_type": "certify_point", "params": {"n": 1}})
        assert "Invalid params" in ws.receive_json()["message"]

        ws.send_json({"type": "create_job", "task_type": "certify_point", "params": {"n": 30, "k": 2}})
        assert "Invalid params" in ws.receive_json()["message"]

        ws.send_json({"type": "create_job", "task_type": "render", "params": {}})
        assert "Unknown task_type" in ws.receive_json()["message"]

        ws.send_json({"type": "get_status", "job_id": "abc"})
        assert "Job not found" in ws.receive_json()["message"]

        ws.send_json({"type": "cancel_job", "job_id": "abc"})
        assert "Job not found" in ws.receive_json()["message"]

        ws.send_json({"type": "dance"})
        assert "Unknown message type" in ws.receive_json()["message"]
