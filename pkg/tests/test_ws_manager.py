import asyncio
import json

from ws_manager import ws_manager


class FakeSocket:
    def __init__(self):
        self.sent = []

    async def accept(self):
        pass

    async def send_text(self, text):
        self.sent.append(json.loads(text))

    async def close(self):
        pass


def status(job_id, value):
    return {"type": "job_status", "job_id": job_id, "status": value}


def test_anonymous_socket_subscriptions_end_with_the_socket():
    ws = FakeSocket()
    ws_manager.subscribe("job-anon", ws, request_id="r1")
    subscriber = ws_manager.connection_client_ids[ws]
    assert subscriber.startswith("_ws_")
    assert ws_manager.job_subscriptions["job-anon"] == {subscriber: "r1"}

    ws_manager.disconnect(ws)
    assert "job-anon" not in ws_manager.job_subscriptions
    assert subscriber not in ws_manager.client_subscriptions
    assert subscriber not in ws_manager.client_connections


def test_final_status_releases_job_subscriptions():
    ws = FakeSocket()
    ws_manager.subscribe("job-final", ws, request_id="r2")

    asyncio.run(ws_manager.broadcast_to_job("job-final", {"type": "job_progress", "job_id": "job-final", "progress": {}}))
    assert "job-final" in ws_manager.job_subscriptions

    asyncio.run(ws_manager.broadcast_to_job("job-final", status("job-final", "completed")))
    assert [m["request_id"] for m in ws.sent] == ["r2", "r2"]
    assert ws.sent[-1]["status"] == "completed"
    assert "job-final" not in ws_manager.job_subscriptions
    ws_manager.disconnect(ws)


def test_named_client_keeps_subscriptions_until_the_job_finishes():
    ws = FakeSocket()
    asyncio.run(ws_manager.connect(ws, client_id="named-client"))
    ws_manager.subscribe("job-named", ws)
    ws_manager.disconnect(ws)
    assert ws_manager.job_subscriptions["job-named"] == {"named-client": None}

    asyncio.run(ws_manager.broadcast_to_job("job-named", status("job-named", "failed")))
    assert "job-named" not in ws_manager.job_subscriptions
    assert "named-client" not in ws_manager.client_subscriptions
    assert ws.sent == []
