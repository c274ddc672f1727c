"""
WebSocket Router

/api/ws endpoint for certification jobs. Messages:
create_job, get_status, cancel_job, get_client_jobs.
"""

import json
import logging
from typing import Any, Dict, Optional

from fastapi import APIRouter, Query, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from job_system import JobRegistry, JobStatus
from job_system.registry import FINAL_STATUSES
from ws_manager.manager import ws_manager

logger = logging.getLogger(__name__)

router = APIRouter()


def job_message(job_info: Dict[str, Any], request_id: Optional[str] = None) -> Dict[str, Any]:
    """job_status message for the current state of a job entry."""
    message = {"type": "job_status", "job_id": job_info["id"], "status": job_info["status"]}
    if job_info["status"] == JobStatus.COMPLETED.value:
        message["result"] = job_info.get("result") or {}
    elif job_info["status"] in (JobStatus.FAILED.value, JobStatus.CANCELLED.value) and job_info.get("error"):
        message["error"] = job_info["error"]
        message["error_type"] = job_info.get("error_type")
    if request_id:
        message["request_id"] = request_id
    return message


async def send_error(websocket: WebSocket, text: str, request_id: Optional[str] = None):
    message = {"type": "error", "message": text}
    if request_id:
        message["request_id"] = request_id
    await ws_manager.send_to_connection(websocket, message)


@router.websocket("/ws")
async def websocket_endpoint(
    websocket: WebSocket,
    client_id: Optional[str] = Query(None, description="Client identifier; subscriptions persist across reconnects"),
):
    await ws_manager.connect(websocket, client_id=client_id)
    handlers = {
        "create_job": handle_create_job,
        "get_status": handle_get_status,
        "cancel_job": handle_cancel_job,
        "get_client_jobs": handle_get_client_jobs,
    }
    try:
        while True:
            data = await websocket.receive_text()
            logger.debug(f"WS received ({client_id}): {data[:200]}")
            try:
                message = json.loads(data)
            except json.JSONDecodeError:
                await send_error(websocket, "Invalid JSON")
                continue
            if not isinstance(message, dict):
                await send_error(websocket, "Expected a JSON object")
                continue
            handler = handlers.get(message.get("type"))
            if handler is None:
                await send_error(websocket, f"Unknown message type: {message.get('type')}", message.get("request_id"))
                continue
            await handler(websocket, message, client_id)
    except WebSocketDisconnect:
        ws_manager.disconnect(websocket)


async def handle_create_job(websocket: WebSocket, message: dict, client_id: Optional[str] = None):
    task_type = message.get("task_type")
    params = dict(message.get("params") or {})
    request_id = message.get("request_id") or params.pop("request_id", None)

    if not task_type:
        await send_error(websocket, "Missing task_type", request_id)
        return
    job_class = JobRegistry.get_job_class(task_type)
    if job_class is None:
        await send_error(websocket, f"Unknown task_type: {task_type}", request_id)
        return
    if job_class.params_model is not None:
        try:
            job_class.params_model.model_validate(params)
        except ValidationError as exc:
            details = "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors())
            await send_error(websocket, f"Invalid params for {task_type}: {details}", request_id)
            return

    job_info = await JobRegistry.create_job(task_type, params, client_id=client_id)
    if job_info is None:
        await send_error(websocket, "Failed to create job", request_id)
        return
    if job_info["status"] not in FINAL_STATUSES:
        ws_manager.subscribe(job_info["id"], websocket, request_id=request_id)
    await ws_manager.send_to_connection(websocket, job_message(job_info, request_id))


async def handle_get_status(websocket: WebSocket, message: dict, client_id: Optional[str] = None):
    job_id = message.get("job_id")
    request_id = message.get("request_id")
    if not job_id:
        await send_error(websocket, "Missing job_id", request_id)
        return
    job_info = JobRegistry.get_job(job_id)
    if job_info is None:
        await send_error(websocket, f"Job not found: {job_id}", request_id)
        return
    if job_info["status"] not in FINAL_STATUSES:
        ws_manager.subscribe(job_id, websocket, request_id=request_id)
    await ws_manager.send_to_connection(websocket, job_message(job_info, request_id))


async def handle_cancel_job(websocket: WebSocket, message: dict, client_id: Optional[str] = None):
    """Cancellation is confirmed by the job_status broadcast; only refusals are answered here."""
    job_id = message.get("job_id")
    request_id = message.get("request_id")
    if not job_id:
        await send_error(websocket, "Missing job_id", request_id)
        return
    if JobRegistry.cancel_job(job_id):
        job_info = JobRegistry.get_job(job_id)
        if job_info and job_info["status"] == JobStatus.CANCELLED.value:
            await ws_manager.broadcast_to_job(job_id, job_message(job_info))
        return
    job_info = JobRegistry.get_job(job_id)
    if job_info:
        await send_error(websocket, f"Job {job_id} cannot be cancelled (current status: {job_info['status']})", request_id)
    else:
        await send_error(websocket, f"Job not found: {job_id}", request_id)


async def handle_get_client_jobs(websocket: WebSocket, message: dict, client_id: Optional[str] = None):
    """All jobs of this client; unfinished ones are re-subscribed."""
    request_id = message.get("request_id")
    if not client_id:
        await send_error(websocket, "No client_id associated with this connection", request_id)
        return
    jobs = []
    for job in sorted(JobRegistry.get_client_jobs(client_id), key=lambda j: j["created_at"]):
        entry = job_message(job)
        entry.update(task_type=job["task_type"], created_at=job["created_at"])
        del entry["type"]
        jobs.append(entry)
        if job["status"] in (JobStatus.PENDING.value, JobStatus.PROCESSING.value):
            ws_manager.subscribe(job["id"], websocket)
    response = {"type": "client_jobs", "jobs": jobs}
    if request_id:
        response["request_id"] = request_id
    await ws_manager.send_to_connection(websocket, response)


websocket_router = router
