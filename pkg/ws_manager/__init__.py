from ws_manager.manager import WebSocketManager, ws_manager
from ws_manager.router import websocket_router

__all__ = ["WebSocketManager", "websocket_router", "ws_manager"]
