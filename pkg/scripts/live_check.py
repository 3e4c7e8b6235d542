"""Smoke-test the live FRINK federation and UberGraph endpoints (needs network).

    python scripts/live_check.py [--registry PATH]
"""

import argparse
import sys
import time

from okn_mcp.errors import OknError
from okn_mcp.mcp import Services
from okn_mcp.ontology import ExpansionConfig
from okn_mcp.registry import load_registry

CVD = "http://purl.obolibrary.org/obo/MONDO_0004995"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--registry", default=None)
    p.add_argument("--graph", default="nde")
    args = p.parse_args()
    s = Services(load_registry(args.registry))
    failed = False

    t = time.perf_counter()
    try:
        uris, rep = s.ontology.get_descendants(CVD, ExpansionConfig(include_seed=False))
        ok = len(uris) >= 1000
        failed |= not ok
        print(f"[{'ok' if ok else 'LOW'}] MONDO:0004995 descendants: {len(uris)} "
              f"({rep.batch_count} batches, {time.perf_counter() - t:.1f}s)")
    except OknError as exc:
        failed = True
        print(f"[FAIL] descendants: {exc}")

    print(f"[ok] registry: {', '.join(s.registry.names)}")
    try:
        rs, a = s.engine.query(args.graph, "SELECT ?s ?p ?o WHERE { ?s ?p ?o } LIMIT 3")
        print(f"[ok] scoped query on {args.graph}: {len(rs.rows)} row(s) in {a.elapsed:.1f}s")
    except OknError as exc:
        failed = True
        print(f"[FAIL] scoped query on {args.graph}: {exc}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
