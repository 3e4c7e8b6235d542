"""stdio (newline-delimited JSON-RPC) and HTTP transports."""

from __future__ import annotations

import json
import logging
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import IO, Optional

from .server import INVALID_REQUEST, NOT_INITIALIZED, PARSE_ERROR, McpServer, _error

log = logging.getLogger(__name__)


class _QuietServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        # clients that give up mid-response (timeouts) are routine here
        log.debug("connection from %s dropped", client_address, exc_info=True)

SESSION_HEADER = "Mcp-Session-Id"


def serve_stdio(server: McpServer, stdin: Optional[IO] = None, stdout: Optional[IO] = None, workers: int = 4):
    """One session per process. Requests run concurrently; replies may arrive out of order."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = server.new_session()
    write_lock = threading.Lock()

    def reply(line: str):
        response = server.handle_raw(line, session)
        if response is not None:
            text = json.dumps(response, ensure_ascii=False)
            with write_lock:
                stdout.write(text + "\n")
                stdout.flush()

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for line in stdin:
            if line.strip():
                pool.submit(reply, line)
    return session


class McpHttpServer:
    """POST JSON-RPC messages to ``/mcp``; the session id travels in ``Mcp-Session-Id``."""

    def __init__(self, server: McpServer, host: str = "127.0.0.1", port: int = 8000, path: str = "/mcp"):
        self.server = server
        self.path = path
        self._httpd = _QuietServer((host, port), self._handler())
        self._httpd.daemon_threads = True
        self._thread = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}{self.path}"

    def start(self) -> "McpHttpServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, name="mcp-http", daemon=True)
        self._thread.start()
        return self

    def serve_forever(self):
        self._httpd.serve_forever()

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _handler(self):
        outer = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def log_message(self, fmt, *args):
                log.debug("http %s", fmt % args)

            def _send_json(self, status, payload, session_id=None):
                body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                if session_id:
                    self.send_header(SESSION_HEADER, session_id)
                self.end_headers()
                self.wfile.write(body)

            def _send_empty(self, status):
                self.send_response(status)
                self.send_header("Content-Length", "0")
                self.end_headers()

            def do_GET(self):
                # no server-initiated stream
                self._send_empty(405)

            def do_DELETE(self):
                sid = self.headers.get(SESSION_HEADER)
                self._send_empty(200 if sid and outer.server.close_session(sid) else 404)

            def do_POST(self):
                if self.path.split("?")[0] != outer.path:
                    return self._send_empty(404)
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length).decode("utf-8")
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError as exc:
                    return self._send_json(400, _error(None, PARSE_ERROR, f"parse error: {exc}"))
                if not isinstance(message, dict):
                    return self._send_json(400, _error(None, INVALID_REQUEST, "batched messages are not supported"))
                sid = self.headers.get(SESSION_HEADER)
                session = outer.server.get_session(sid) if sid else None
                if message.get("method") == "initialize":
                    session = session or outer.server.new_session()
                elif session is None:
                    status = 404 if sid else 400
                    return self._send_json(status, _error(message.get("id"), NOT_INITIALIZED,
                                                          "missing or unknown session; send initialize first"))
                response = outer.server.handle(message, session)
                if response is None:
                    return self._send_empty(202)
                self._send_json(200, response, session.id)

        return Handler
