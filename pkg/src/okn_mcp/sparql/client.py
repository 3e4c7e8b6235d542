"""SPARQL 1.1 Protocol client: POST ``application/sparql-query``, JSON results."""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass

import requests

from .. import __version__
from ..errors import ArgumentError, EndpointError, EndpointTimeout, ResultParseError
from .terms import SparqlResultSet

log = logging.getLogger(__name__)

USER_AGENT = f"okn-mcp/{__version__} (+https://github.com/sbl-sdsc/mcp-proto-okn)"
RESULTS_MEDIA_TYPE = "application/sparql-results+json"
QUERY_MEDIA_TYPE = "application/sparql-query"


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    request_timeout: float = 60.0
    max_retries: int = 2
    max_results_per_request: int = 10_000
    max_concurrency: int = 4
    backoff: float = 0.5  # first retry delay in seconds, doubled per attempt

    def __post_init__(self):
        if self.request_timeout <= 0:
            raise ArgumentError("request_timeout must be > 0")
        if self.max_retries < 0:
            raise ArgumentError("max_retries must be >= 0")
        if self.max_results_per_request <= 0:
            raise ArgumentError("max_results_per_request must be > 0")
        if self.max_concurrency <= 0:
            raise ArgumentError("max_concurrency must be > 0")


class SparqlClient:
    """Thread-safe client with a per-endpoint cap on in-flight requests."""

    def __init__(self, user_agent: str = USER_AGENT):
        self.user_agent = user_agent
        self._local = threading.local()
        self._caps: dict[str, threading.BoundedSemaphore] = {}
        self._caps_lock = threading.Lock()

    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            session.headers.update({"Accept": RESULTS_MEDIA_TYPE, "User-Agent": self.user_agent})
            self._local.session = session
        return session

    def _cap(self, endpoint: EndpointConfig) -> threading.BoundedSemaphore:
        with self._caps_lock:
            sem = self._caps.get(endpoint.url)
            if sem is None:
                sem = self._caps[endpoint.url] = threading.BoundedSemaphore(endpoint.max_concurrency)
            return sem

    def execute_select(self, endpoint: EndpointConfig, query: str) -> SparqlResultSet:
        if not query or not query.strip():
            raise ArgumentError("query is empty")
        attempt = 0
        while True:
            try:
                with self._cap(endpoint):
                    return self._once(endpoint, query)
            except EndpointError as exc:
                if not exc.transient or attempt >= endpoint.max_retries:
                    raise
                delay = endpoint.backoff * (2 ** attempt)
                attempt += 1
                log.warning("retrying %s in %.2fs after %s (attempt %d)", endpoint.url, delay, exc, attempt)
                time.sleep(delay)

    def _once(self, endpoint: EndpointConfig, query: str) -> SparqlResultSet:
        try:
            resp = self._session().post(
                endpoint.url,
                data=query.encode("utf-8"),
                headers={"Content-Type": f"{QUERY_MEDIA_TYPE}; charset=utf-8"},
                timeout=endpoint.request_timeout,
            )
        except requests.Timeout as exc:
            raise EndpointTimeout(f"timeout after {endpoint.request_timeout}s querying {endpoint.url}") from exc
        except requests.ConnectionError as exc:
            # connection resets behave like 503s for retry purposes
            raise EndpointError(f"connection to {endpoint.url} failed: {exc}", status=503) from exc
        if resp.status_code >= 400:
            excerpt = resp.text[:500]
            raise EndpointError(
                f"{endpoint.url} returned HTTP {resp.status_code}: {excerpt}",
                status=resp.status_code,
                excerpt=excerpt,
            )
        try:
            doc = resp.json()
        except (ValueError, json.JSONDecodeError) as exc:
            raise ResultParseError(f"{endpoint.url} returned non-JSON results: {resp.text[:200]!r}") from exc
        result = SparqlResultSet.from_json(doc)
        cap = endpoint.max_results_per_request
        if len(result.rows) >= cap:
            result.rows = result.rows[:cap]
            result.truncated = True
        return result


_default_client = SparqlClient()


def execute_select(endpoint: EndpointConfig, query: str) -> SparqlResultSet:
    return _default_client.execute_select(endpoint, query)
