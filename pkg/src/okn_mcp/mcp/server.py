"""JSON-RPC 2.0 message handling for the MCP tool surface."""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass
from typing import Any, Optional

import jsonschema

from .. import __version__
from ..errors import OknError
from .tools import CATALOG, Services, call_tool

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "2025-06-18"
SUPPORTED_PROTOCOL_VERSIONS = ("2025-06-18", "2025-03-26", "2024-11-05")
SERVER_NAME = "okn-mcp"

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603
NOT_INITIALIZED = -32002

_TOOLS_BY_NAME = {t.name: t for t in CATALOG}
_VALIDATORS = {t.name: jsonschema.Draft202012Validator(t.input_schema) for t in CATALOG}
# serialized once so every tools/list reply is byte-identical
_TOOLS_LIST = json.loads(json.dumps({"tools": [t.to_wire() for t in CATALOG]}))


@dataclass
class Session:
    id: str
    initialized: bool = False
    protocol_version: Optional[str] = None
    client_info: Optional[dict] = None


def _error(id_, code, message, data=None) -> dict:
    err: dict[str, Any] = {"code": code, "message": message}
    if data is not None:
        err["data"] = data
    return {"jsonrpc": "2.0", "id": id_, "error": err}


def _result(id_, result) -> dict:
    return {"jsonrpc": "2.0", "id": id_, "result": result}


class McpServer:
    def __init__(self, services: Services, protocol_version: str = PROTOCOL_VERSION):
        self.services = services
        self.protocol_version = protocol_version
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- sessions
    def new_session(self, session_id: Optional[str] = None) -> Session:
        session = Session(session_id or uuid.uuid4().hex)
        with self._lock:
            self._sessions[session.id] = session
        self.services.transcripts.open_session(session.id)
        return session

    def get_session(self, session_id: str) -> Optional[Session]:
        with self._lock:
            return self._sessions.get(session_id)

    def close_session(self, session_id: str) -> bool:
        with self._lock:
            return self._sessions.pop(session_id, None) is not None

    # -- dispatch
    def handle_raw(self, line: str, session: Session) -> Optional[dict]:
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error(None, PARSE_ERROR, f"parse error: {exc}")
        return self.handle(message, session)

    def handle(self, message: Any, session: Session) -> Optional[dict]:
        """Return the response for one message, or None for notifications."""
        if not isinstance(message, dict) or message.get("jsonrpc") != "2.0" or not isinstance(message.get("method"), str):
            id_ = message.get("id") if isinstance(message, dict) else None
            return _error(id_, INVALID_REQUEST, "invalid JSON-RPC 2.0 request")
        method = message["method"]
        is_notification = "id" not in message
        id_ = message.get("id")
        params = message.get("params") or {}
        try:
            if method == "initialize":
                response = self.handle_initialize(id_, params, session)
            elif method.startswith("notifications/"):
                return None
            elif method == "ping":
                response = _result(id_, {})
            elif method == "tools/list":
                response = self.handle_tools_list(id_, session)
            elif method == "tools/call":
                response = self.handle_tools_call(id_, params, session)
            else:
                response = _error(id_, METHOD_NOT_FOUND, f"method not found: {method}")
        except Exception as exc:  # never let a handler bug kill the connection
            log.exception("unhandled error in %s", method)
            response = _error(id_, INTERNAL_ERROR, f"internal error: {exc}")
        return None if is_notification else response

    def handle_initialize(self, id_, params, session: Session) -> dict:
        if not isinstance(params, dict) or not isinstance(params.get("protocolVersion"), str):
            return _error(id_, INVALID_REQUEST, "initialize requires params.protocolVersion")
        requested = params["protocolVersion"]
        version = requested if requested in SUPPORTED_PROTOCOL_VERSIONS else self.protocol_version
        session.initialized = True
        session.protocol_version = version
        session.client_info = params.get("clientInfo")
        return _result(id_, {
            "protocolVersion": version,
            "capabilities": {"tools": {"listChanged": False}},
            "serverInfo": {"name": SERVER_NAME, "version": __version__},
            "instructions": (
                "Call list_graphs or route_query to pick a graph, get_schema before writing SPARQL, "
                "and query to execute. Ontology terms in queries are expanded to descendants automatically."
            ),
        })

    def handle_tools_list(self, id_, session: Session) -> dict:
        if not session.initialized:
            return _error(id_, NOT_INITIALIZED, "server not initialized; send initialize first")
        return _result(id_, _TOOLS_LIST)

    def handle_tools_call(self, id_, params, session: Session) -> dict:
        if not session.initialized:
            return _error(id_, NOT_INITIALIZED, "server not initialized; send initialize first")
        if not isinstance(params, dict) or not isinstance(params.get("name"), str):
            return _error(id_, INVALID_PARAMS, "tools/call requires params.name")
        name = params["name"]
        args = params.get("arguments") or {}
        if name not in _TOOLS_BY_NAME:
            return _error(id_, METHOD_NOT_FOUND, f"unknown tool: {name}")
        transcripts = self.services.transcripts
        errors = sorted(_VALIDATORS[name].iter_errors(args), key=lambda e: list(e.path))
        if errors:
            message = "invalid arguments: " + "; ".join(_describe(e) for e in errors)
            transcripts.record_tool_call(session.id, name, args, "rejected", error=message)
            return _result(id_, _tool_error(message))
        try:
            outcome = call_tool(self.services, name, args, session.id)
        except OknError as exc:
            transcripts.record_tool_call(session.id, name, args, "failed", error=str(exc))
            return _result(id_, _tool_error(f"{type(exc).__name__}: {exc}"))
        except Exception as exc:
            log.exception("tool %s crashed", name)
            transcripts.record_tool_call(session.id, name, args, "failed", error=str(exc))
            return _result(id_, _tool_error(f"internal error: {exc}"))
        transcripts.record_tool_call(session.id, name, args, outcome.summary, row_count=outcome.row_count)
        return _result(id_, {
            "content": [{"type": "text", "text": json.dumps(outcome.structured, ensure_ascii=False)}],
            "structuredContent": outcome.structured,
            "isError": False,
        })


def _describe(error: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in error.path)
    return f"{where}: {error.message}" if where else error.message


def _tool_error(message: str) -> dict:
    return {"content": [{"type": "text", "text": message}], "isError": True}
