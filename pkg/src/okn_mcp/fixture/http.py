"""Serve a :class:`TripleStore` over the SPARQL 1.1 Protocol for offline tests."""

from __future__ import annotations

import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from ..errors import EvaluationError
from .evaluator import evaluate
from .store import TripleStore

log = logging.getLogger(__name__)


class _QuietServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        # clients that give up mid-response (timeouts) are routine here
        log.debug("connection from %s dropped", client_address, exc_info=True)


class FixtureEndpoint:
    """Background HTTP server answering SELECT queries from a store.

    ``received`` keeps every query text in arrival order. ``fail_next`` and
    ``delay`` inject faults for client retry/timeout tests.
    """

    def __init__(self, store: TripleStore, host: str = "127.0.0.1", port: int = 0, path: str = "/sparql"):
        self.store = store
        self.path = path
        self.received: list[str] = []
        self.delay = 0.0
        self._faults: list[int] = []
        self._lock = threading.Lock()
        self._server = _QuietServer((host, port), self._handler_class())
        self._server.daemon_threads = True
        self._thread = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}{self.path}"

    def fail_next(self, count: int, status: int = 503):
        with self._lock:
            self._faults.extend([status] * count)

    def start(self) -> "FixtureEndpoint":
        self._thread = threading.Thread(target=self._server.serve_forever, name="fixture-endpoint", daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()

    def serve_forever(self):
        self._server.serve_forever()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _take_fault(self):
        with self._lock:
            return self._faults.pop(0) if self._faults else None

    def _handler_class(self):
        endpoint = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def log_message(self, fmt, *args):
                log.debug("fixture %s", fmt % args)

            def do_GET(self):
                parsed = urlparse(self.path)
                if parsed.path != endpoint.path:
                    return self._send(404, "text/plain", b"not found")
                query = parse_qs(parsed.query).get("query", [None])[0]
                self._answer(query)

            def do_POST(self):
                if urlparse(self.path).path != endpoint.path:
                    return self._send(404, "text/plain", b"not found")
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length).decode("utf-8")
                ctype = (self.headers.get("Content-Type") or "").split(";")[0].strip()
                if ctype == "application/sparql-query":
                    query = body
                elif ctype == "application/x-www-form-urlencoded":
                    query = parse_qs(body).get("query", [None])[0]
                else:
                    return self._send(415, "text/plain", f"unsupported media type {ctype!r}".encode())
                self._answer(query)

            def _answer(self, query):
                if query is None:
                    return self._send(400, "text/plain", b"missing query")
                with endpoint._lock:
                    endpoint.received.append(query)
                if endpoint.delay:
                    time.sleep(endpoint.delay)
                fault = endpoint._take_fault()
                if fault is not None:
                    return self._send(fault, "text/plain", f"injected fault {fault}".encode())
                try:
                    result = evaluate(endpoint.store, query)
                except EvaluationError as exc:
                    return self._send(400, "text/plain", str(exc).encode())
                body = json.dumps(result.to_json()).encode("utf-8")
                self._send(200, "application/sparql-results+json", body)

            def _send(self, status, ctype, body: bytes):
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        return Handler
