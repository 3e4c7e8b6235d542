"""A miniature FRINK federation: two fixture endpoints plus a matching registry."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..registry import Registry, load_registry
from .http import FixtureEndpoint
from .store import TripleStore

DATA = Path(__file__).parent / "data"
ONTOLOGY_GRAPH = "http://reasoner.renci.org/closure"
GRAPH_FILES = {
    "spoke-okn": "spoke-okn.nt",
    "spoke-genelab": "spoke-genelab.nt",
    "nde": "nde.nt",
    "biobricks": "biobricks.nt",
    "prokn": "prokn.nt",
    "gene-expression-atlas": "gene-expression-atlas.nt",
}
CVD_ROOT = "http://purl.obolibrary.org/obo/MONDO_0004995"


def expected_cardiovascular_counts() -> dict:
    """Hand-computed dataset counts per cardiovascular term in the NDE fixture."""
    return json.loads((DATA / "nde_cardiovascular_counts.json").read_text(encoding="utf-8"))


def federation_store(registry: Optional[Registry] = None) -> TripleStore:
    registry = registry or load_registry()
    store = TripleStore()
    for name, filename in GRAPH_FILES.items():
        store.load_fixture(DATA / filename, registry.get(name).graph_uri)
    return store


def ontology_store() -> TripleStore:
    store = TripleStore()
    store.load_fixture(DATA / "ontology.nt", ONTOLOGY_GRAPH, transitive_subclass=True)
    return store


@dataclass
class FixtureFederation:
    """Running federation + ontology endpoints and a registry pointed at them."""

    registry: Registry
    federation: FixtureEndpoint
    ontology: FixtureEndpoint
    _stopped: bool = field(default=False, repr=False)

    def stop(self):
        if not self._stopped:
            self.federation.stop()
            self.ontology.stop()
            self._stopped = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def start_fixture_federation(host: str = "127.0.0.1", **endpoint_options) -> FixtureFederation:
    base = load_registry()
    fed = FixtureEndpoint(federation_store(base), host).start()
    onto = FixtureEndpoint(ontology_store(), host).start()
    options = {"backoff": 0.05, **endpoint_options}
    return FixtureFederation(base.with_endpoints(fed.url, onto.url, **options), fed, onto)
