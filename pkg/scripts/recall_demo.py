"""Miniature ontology-expansion run on the offline fixture federation.

Tabulates NDE-like datasets per cardiovascular term, with and without
descendant expansion, and prints both tables side by side.

    python scripts/recall_demo.py [--batch-size 5]
"""

import argparse

from okn_mcp.fixture import start_fixture_federation
from okn_mcp.mcp import Services
from okn_mcp.ontology import ExpansionConfig

QUERY = """PREFIX schema: <http://schema.org/>
SELECT ?disease (COUNT(DISTINCT ?dataset) AS ?datasets) WHERE {
  ?dataset schema:healthCondition ?disease .
  FILTER(?disease = <http://purl.obolibrary.org/obo/MONDO_0004995>)
} GROUP BY ?disease ORDER BY DESC(?datasets) ?disease"""


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--batch-size", type=int, default=20)
    args = p.parse_args()

    with start_fixture_federation() as fx:
        s = Services(fx.registry)
        seed_only, _ = s.engine.query("nde", QUERY, ExpansionConfig.disabled())
        expanded, analysis = s.engine.query("nde", QUERY, ExpansionConfig(batch_size=args.batch_size))

        rep = analysis.expansion
        print(f"seed {rep.seed_uri}: {rep.descendant_count} descendants, {rep.batch_count} batch(es) of <= {rep.batch_size}")
        print(f"warnings: {[c for c, _ in analysis.warnings] or 'none'}\n")
        print(f"{'term':<45} {'datasets':>8}")
        for row in expanded.rows:
            u = row["disease"].value
            print(f"{s.ontology.label(u) or u:<45} {row['datasets'].value:>8}")
        total = sum(int(r["datasets"].value) for r in expanded.rows)
        seed_total = sum(int(r["datasets"].value) for r in seed_only.rows)
        print(f"\nseed-only rows: {seed_total}   expanded rows: {total}")


if __name__ == "__main__":
    main()
