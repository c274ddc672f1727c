"""
WebSocket Connection Manager

Tracks connections and which clients follow which certification jobs, and
fans job status and progress messages out to them. Subscriptions are keyed
by client_id so they survive reconnects.
"""

import asyncio
import json
import logging
from typing import Dict, Optional, Set

from fastapi import WebSocket

from job_system.registry import FINAL_STATUSES

logger = logging.getLogger(__name__)

ANONYMOUS_PREFIX = "_ws_"


class WebSocketManager:
    """
    Process-wide singleton.

    - Connection lifecycle, one live socket per client_id
    - Many-to-many subscriptions between clients and job IDs
    - Thread-safe broadcast for callbacks fired from executor threads
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self.active_connections: Set[WebSocket] = set()
        self.client_connections: Dict[str, WebSocket] = {}
        self.connection_client_ids: Dict[WebSocket, str] = {}
        # job_id -> {client_id: request_id}
        self.job_subscriptions: Dict[str, Dict[str, Optional[str]]] = {}
        self.client_subscriptions: Dict[str, Set[str]] = {}
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._initialized = True

    def set_event_loop(self, loop: asyncio.AbstractEventLoop):
        self._loop = loop

    async def connect(self, websocket: WebSocket, client_id: Optional[str] = None):
        """Accept `websocket`; a reconnecting client_id replaces its previous socket."""
        await websocket.accept()
        self.active_connections.add(websocket)
        if not client_id:
            logger.info("WS client connected without client_id")
            return

        old_ws = self.client_connections.get(client_id)
        if old_ws is not None and old_ws is not websocket:
            self._forget_socket(old_ws)
            try:
                await old_ws.close()
            except Exception:
                pass
        self.client_connections[client_id] = websocket
        self.connection_client_ids[websocket] = client_id
        self.client_subscriptions.setdefault(client_id, set())
        logger.info(f"WS client connected: {client_id}")

    def _forget_socket(self, websocket: WebSocket):
        self.active_connections.discard(websocket)
        client_id = self.connection_client_ids.pop(websocket, None)
        if client_id and self.client_connections.get(client_id) is websocket:
            del self.client_connections[client_id]
        return client_id

    def disconnect(self, websocket: WebSocket):
        """
        Drop the socket.

        A named client keeps its subscriptions so it can reconnect; an
        anonymous socket cannot come back, so its subscriptions go with it.
        """
        client_id = self._forget_socket(websocket)
        if client_id and client_id.startswith(ANONYMOUS_PREFIX):
            self._drop_client(client_id)
        logger.info(f"WS client disconnected ({client_id or 'anonymous'})")

    def _drop_client(self, client_id: str):
        for job_id in self.client_subscriptions.pop(client_id, set()):
            subscribers = self.job_subscriptions.get(job_id)
            if subscribers is not None:
                subscribers.pop(client_id, None)
                if not subscribers:
                    del self.job_subscriptions[job_id]

    def _subscriber_id(self, websocket: WebSocket) -> str:
        client_id = self.connection_client_ids.get(websocket)
        if client_id is None:
            client_id = f"{ANONYMOUS_PREFIX}{id(websocket)}"
            self.connection_client_ids[websocket] = client_id
            self.client_connections[client_id] = websocket
        return client_id

    def subscribe(self, job_id: str, websocket: WebSocket, request_id: Optional[str] = None):
        """
        Follow `job_id` from `websocket`.

        Args:
            job_id: Job to follow.
            websocket: Connection that receives the messages; sockets without
                a client_id get an anonymous subscriber ID.
            request_id: Echoed on every message sent for this subscription.
        """
        client_id = self._subscriber_id(websocket)
        self.job_subscriptions.setdefault(job_id, {})[client_id] = request_id
        self.client_subscriptions.setdefault(client_id, set()).add(job_id)

    def release_job(self, job_id: str) -> Dict[str, Optional[str]]:
        """
        Remove every subscription to `job_id`.

        Returns:
            The removed {client_id: request_id} map.
        """
        subscribers = self.job_subscriptions.pop(job_id, {})
        for client_id in subscribers:
            jobs = self.client_subscriptions.get(client_id)
            if jobs is None:
                continue
            jobs.discard(job_id)
            if not jobs and client_id not in self.client_connections:
                del self.client_subscriptions[client_id]
        return subscribers

    async def send_to_connection(self, websocket: WebSocket, message: dict):
        try:
            await websocket.send_text(json.dumps(message))
        except Exception as e:
            logger.warning(f"Error sending to WebSocket: {e}")
            self.disconnect(websocket)

    async def broadcast_to_job(self, job_id: str, message: dict):
        """
        Send `message` to every connected subscriber of `job_id`, tagged with its request_id.

        A final job_status message ends the job's subscriptions.
        """
        if message.get("type") == "job_status" and message.get("status") in FINAL_STATUSES:
            subscribers = self.release_job(job_id)
        else:
            subscribers = dict(self.job_subscriptions.get(job_id, {}))
        if not subscribers:
            return
        dead = []
        for client_id, request_id in subscribers.items():
            websocket = self.client_connections.get(client_id)
            if websocket is None:
                continue
            payload = dict(message, request_id=request_id) if request_id else message
            try:
                await websocket.send_text(json.dumps(payload))
            except Exception as e:
                logger.warning(f"Error broadcasting to {client_id}: {e}")
                dead.append(websocket)
        for websocket in dead:
            self.disconnect(websocket)

    def broadcast_to_job_threadsafe(self, job_id: str, message: dict):
        """Schedule `broadcast_to_job` on the server loop from any thread."""
        if self._loop is None or self._loop.is_closed():
            logger.debug("Event loop not set, dropping broadcast")
            return
        asyncio.run_coroutine_threadsafe(self.broadcast_to_job(job_id, message), self._loop)


ws_manager = WebSocketManager()
