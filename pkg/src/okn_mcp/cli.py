"""Command line entry point: ``okn-mcp serve`` and ``okn-mcp fixture-endpoint``."""

from __future__ import annotations

import argparse
import logging
import os
import signal
import sys
import threading

from .registry import load_registry

ENV_OVERRIDES = {
    "OKN_FEDERATION_ENDPOINT": "federation",
    "OKN_ONTOLOGY_ENDPOINT": "ontology",
    "OKN_REQUEST_TIMEOUT": "request_timeout",
    "OKN_MAX_RETRIES": "max_retries",
}


def _registry_from_args(args, environ=os.environ):
    registry = load_registry(args.registry)
    overrides = {}
    for var, key in ENV_OVERRIDES.items():
        if environ.get(var):
            value = environ[var]
            if key == "request_timeout":
                value = float(value)
            elif key == "max_retries":
                value = int(value)
            overrides[key] = value
    return registry.with_endpoints(**overrides) if overrides else registry


def _wait_forever():
    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    try:
        stop.wait()
    except KeyboardInterrupt:
        pass


def cmd_serve(args) -> int:
    from .mcp import McpHttpServer, McpServer, Services, serve_stdio

    fixture = None
    if args.fixture:
        from .fixture import start_fixture_federation

        fixture = start_fixture_federation()
        registry = fixture.registry
        logging.getLogger("okn_mcp").info("fixture federation at %s", fixture.federation.url)
    else:
        registry = _registry_from_args(args)
    server = McpServer(Services(registry))
    try:
        if args.transport == "stdio":
            serve_stdio(server)
        else:
            http = McpHttpServer(server, args.host, args.port).start()
            print(f"MCP endpoint: {http.url}", file=sys.stderr, flush=True)
            _wait_forever()
            http.stop()
    finally:
        if fixture:
            fixture.stop()
    return 0


def cmd_fixture_endpoint(args) -> int:
    from .fixture import start_fixture_federation

    fed = start_fixture_federation(args.host)
    print(f"federation: {fed.federation.url}", file=sys.stderr)
    print(f"ontology:   {fed.ontology.url}", file=sys.stderr, flush=True)
    _wait_forever()
    fed.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="okn-mcp", description="MCP server for the FRINK knowledge graph federation")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("serve", help="run the MCP server")
    s.add_argument("--transport", choices=["stdio", "http"], default="stdio")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--registry", default=None, help="registry YAML (default: bundled FRINK roster)")
    s.add_argument("--fixture", action="store_true", help="serve the bundled offline fixture federation")
    s.set_defaults(func=cmd_serve)

    f = sub.add_parser("fixture-endpoint", help="run the offline fixture SPARQL endpoints")
    f.add_argument("--host", default="127.0.0.1")
    f.set_defaults(func=cmd_fixture_endpoint)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # stdout carries the stdio protocol, so logs always go to stderr
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
