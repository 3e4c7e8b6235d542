"""Scripted MCP clients for the stdio and HTTP transports."""

import itertools
import json
import subprocess
import sys

import requests

from okn_mcp.mcp.server import PROTOCOL_VERSION


class _Base:
    def __init__(self):
        self._ids = itertools.count(1)

    def initialize(self):
        return self.request("initialize", {
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {},
            "clientInfo": {"name": "scripted-test-client", "version": "0"},
        })

    def call(self, name, arguments):
        return self.request("tools/call", {"name": name, "arguments": arguments})


class StdioClient(_Base):
    """Runs ``okn-mcp serve --fixture`` as a subprocess and speaks newline-delimited JSON-RPC."""

    def __init__(self, extra_args=()):
        super().__init__()
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "okn_mcp.cli", "--log-level", "WARNING", "serve", "--transport", "stdio", "--fixture", *extra_args],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, bufsize=1,
        )

    def send(self, message):
        self.proc.stdin.write(json.dumps(message) + "\n")
        self.proc.stdin.flush()

    def read(self):
        line = self.proc.stdout.readline()
        if not line:
            raise RuntimeError("server closed stdout: " + self.proc.stderr.read())
        return json.loads(line)

    def request(self, method, params=None):
        rid = next(self._ids)
        self.send({"jsonrpc": "2.0", "id": rid, "method": method, "params": params or {}})
        while True:
            msg = self.read()
            if msg.get("id") == rid:
                return msg

    def notify(self, method, params=None):
        self.send({"jsonrpc": "2.0", "method": method, "params": params or {}})

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=10)
        self.proc.stdout.close()
        self.proc.stderr.close()


class HttpClient(_Base):
    def __init__(self, url):
        super().__init__()
        self.url = url
        self.session_id = None
        self.http = requests.Session()

    def post(self, message, session_id=None):
        headers = {"Content-Type": "application/json", "Accept": "application/json"}
        sid = session_id or self.session_id
        if sid:
            headers["Mcp-Session-Id"] = sid
        return self.http.post(self.url, data=json.dumps(message), headers=headers, timeout=30)

    def request(self, method, params=None):
        resp = self.post({"jsonrpc": "2.0", "id": next(self._ids), "method": method, "params": params or {}})
        if method == "initialize" and "Mcp-Session-Id" in resp.headers:
            self.session_id = resp.headers["Mcp-Session-Id"]
        return resp.json()

    def notify(self, method, params=None):
        return self.post({"jsonrpc": "2.0", "method": method, "params": params or {}})

    def close(self):
        if self.session_id:
            self.http.delete(self.url, headers={"Mcp-Session-Id": self.session_id}, timeout=10)
        self.http.close()


CVD_QUERY = (
    "PREFIX schema: <http://schema.org/>\n"
    "SELECT ?disease (COUNT(DISTINCT ?dataset) AS ?datasets) WHERE {\n"
    "  ?dataset schema:healthCondition ?disease .\n"
    "  FILTER(?disease = <http://purl.obolibrary.org/obo/MONDO_0004995>)\n"
    "} GROUP BY ?disease ORDER BY DESC(?datasets) ?disease"
)

# one call per tool, in catalog order
SESSION_SCRIPT = [
    ("list_graphs", {}),
    ("get_description", {"graph": "spoke-genelab"}),
    ("route_query", {"question": "@spoke-genelab differential expression in thymus"}),
    ("get_schema", {"graph": "nde"}),
    ("get_query_template", {"template_id": "reified_edge_properties"}),
    ("visualize_schema", {"graph": "spoke-genelab", "format": "mermaid"}),
    ("query", {"graph": "nde", "sparql": CVD_QUERY}),
    ("multi_graph_query", {"graphs": ["spoke-okn", "biobricks", "prokn"],
                           "sparql": "SELECT ?x ?label WHERE { ?x <http://www.w3.org/2000/01/rdf-schema#label> ?label } LIMIT 3"}),
    ("lookup_uri", {"text": "cardiovascular disease"}),
    ("get_descendants", {"uri": "MONDO:0004995"}),
    ("get_join_strategy", {"graph_a": "spoke-genelab", "graph_b": "spoke-okn"}),
    ("create_chat_transcript", {"title": "Cardiovascular datasets in NDE"}),
]
