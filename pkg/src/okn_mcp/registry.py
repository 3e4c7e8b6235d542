"""Catalog of federated named graphs and the discovery tools over it.

Config document keys (YAML or JSON)::

    federation_endpoint: <url>
    ontology_endpoint: <url>
    endpoint: {request_timeout, max_retries, max_results_per_request, max_concurrency}
    expansion: {max_descendants, batch_size, include_seed, enabled_namespaces}
    namespaces: [{prefix, uri_pattern, expandable}]
    graphs:
      - name, graph_uri, domains, entity_types, namespaces, description,
        doc_url, examples: [{title, sparql}]
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .errors import ArgumentError, NotFoundError, RegistryLoadError
from .ontology import DEFAULT_NAMESPACES, ExpansionConfig, OntologyNamespace
from .sparql.client import EndpointConfig
from .sparql.terms import is_absolute_uri

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_REGISTRY = DATA_DIR / "registry.yaml"

# per matched token; an @-mention adds MENTION_BONUS so it always ranks first
WEIGHTS = {"name": 10, "entity_types": 3, "domains": 3, "namespaces": 2, "description": 1}
MENTION_BONUS = 1000

_NAMESPACE_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_.\-]*$")
_MENTION_RE = re.compile(r"@([A-Za-z0-9][A-Za-z0-9_\-]*)")


@dataclass(frozen=True)
class GraphDescriptor:
    name: str
    graph_uri: str
    domains: tuple[str, ...] = ()
    entity_types: tuple[str, ...] = ()
    namespaces: tuple[str, ...] = ()
    description: str = ""
    doc_url: Optional[str] = None
    examples: tuple[dict, ...] = ()

    def summary(self) -> dict:
        return {
            "name": self.name,
            "graph_uri": self.graph_uri,
            "domains": list(self.domains),
            "entity_types": list(self.entity_types),
            "namespaces": list(self.namespaces),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("domains", "entity_types", "namespaces", "examples"):
            d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class RouteCandidate:
    graph: str
    score: int
    matched_terms: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Registry:
    graphs: tuple[GraphDescriptor, ...]
    federation_endpoint: str
    ontology_endpoint: str
    namespaces: tuple[OntologyNamespace, ...] = DEFAULT_NAMESPACES
    endpoint_options: dict = field(default_factory=dict)
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)

    def __post_init__(self):
        if not self.graphs:
            raise RegistryLoadError("registry has no graphs")
        names, uris = set(), set()
        for g in self.graphs:
            if g.name in names:
                raise RegistryLoadError(f"duplicate graph name {g.name!r}")
            if g.graph_uri in uris:
                raise RegistryLoadError(f"duplicate graph URI {g.graph_uri!r}")
            names.add(g.name)
            uris.add(g.graph_uri)

    def __len__(self):
        return len(self.graphs)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.graphs]

    def get(self, name: str) -> GraphDescriptor:
        key = (name or "").strip().lstrip("@").lower()
        for g in self.graphs:
            if g.name == key:
                return g
        raise NotFoundError(f"unknown graph {name!r}; valid names: {', '.join(self.names)}")

    def federation(self, **overrides) -> EndpointConfig:
        return EndpointConfig(self.federation_endpoint, **{**self.endpoint_options, **overrides})

    def ontology(self, **overrides) -> EndpointConfig:
        return EndpointConfig(self.ontology_endpoint, **{**self.endpoint_options, **overrides})

    def with_endpoints(self, federation: Optional[str] = None, ontology: Optional[str] = None, **options) -> "Registry":
        return Registry(
            self.graphs,
            federation or self.federation_endpoint,
            ontology or self.ontology_endpoint,
            self.namespaces,
            {**self.endpoint_options, **options},
            self.expansion,
        )


def _str_tuple(entry: dict, key: str, where: str) -> tuple[str, ...]:
    value = entry.get(key) or []
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
        raise RegistryLoadError(f"{where}: {key} must be a list of strings")
    return tuple(dict.fromkeys(v.strip() for v in value if v.strip()))


def _graph_from_entry(entry: Any, index: int) -> GraphDescriptor:
    if not isinstance(entry, dict):
        raise RegistryLoadError(f"graph entry #{index} is not a mapping")
    where = f"graph entry #{index} ({entry.get('name', '?')})"
    name = entry.get("name")
    graph_uri = entry.get("graph_uri")
    if not isinstance(name, str) or not name.strip():
        raise RegistryLoadError(f"{where}: missing name")
    if not isinstance(graph_uri, str) or not is_absolute_uri(graph_uri):
        raise RegistryLoadError(f"{where}: graph_uri missing or not an absolute URI")
    namespaces = _str_tuple(entry, "namespaces", where)
    for ns in namespaces:
        if not _NAMESPACE_RE.match(ns):
            raise RegistryLoadError(f"{where}: invalid namespace prefix {ns!r}")
    examples = entry.get("examples") or []
    if not isinstance(examples, list) or not all(isinstance(e, dict) and "sparql" in e for e in examples):
        raise RegistryLoadError(f"{where}: examples must be a list of {{title, sparql}} mappings")
    return GraphDescriptor(
        name=name.strip().lower(),
        graph_uri=graph_uri,
        domains=_str_tuple(entry, "domains", where),
        entity_types=_str_tuple(entry, "entity_types", where),
        namespaces=namespaces,
        description=str(entry.get("description") or "").strip(),
        doc_url=entry.get("doc_url"),
        examples=tuple({"title": str(e.get("title", "")), "sparql": str(e["sparql"])} for e in examples),
    )


def load_registry(source: Union[str, Path, dict, None] = None) -> Registry:
    """Load a registry from a path, YAML/JSON text, or an already-parsed mapping."""
    if source is None:
        source = DEFAULT_REGISTRY
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        source = Path(source).read_text(encoding="utf-8")
    if isinstance(source, str):
        try:
            doc = yaml.safe_load(source)
        except yaml.YAMLError as exc:
            raise RegistryLoadError(f"registry document does not parse: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise RegistryLoadError("registry document must be a mapping")
    for key in ("federation_endpoint", "ontology_endpoint"):
        if not isinstance(doc.get(key), str):
            raise RegistryLoadError(f"registry document lacks {key}")
    entries = doc.get("graphs")
    if not isinstance(entries, list) or not entries:
        raise RegistryLoadError("registry document needs a non-empty graphs list")
    graphs = tuple(_graph_from_entry(e, i) for i, e in enumerate(entries))

    namespaces = DEFAULT_NAMESPACES
    if doc.get("namespaces") is not None:
        try:
            namespaces = tuple(
                OntologyNamespace(n["prefix"], n["uri_pattern"], bool(n.get("expandable", False)))
                for n in doc["namespaces"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RegistryLoadError(f"bad namespaces table: {exc}") from exc
        prefixes = [n.prefix.upper() for n in namespaces]
        if len(set(prefixes)) != len(prefixes):
            raise RegistryLoadError("duplicate namespace prefix")

    endpoint_options = dict(doc.get("endpoint") or {})
    try:
        EndpointConfig("http://validate.invalid/", **endpoint_options)
        exp = dict(doc.get("expansion") or {})
        if "enabled_namespaces" not in exp:
            exp["enabled_namespaces"] = frozenset(n.prefix for n in namespaces if n.expandable)
        expansion = ExpansionConfig(**{**exp, "enabled_namespaces": frozenset(exp["enabled_namespaces"])})
    except (TypeError, ArgumentError) as exc:
        raise RegistryLoadError(f"bad endpoint/expansion settings: {exc}") from exc
    return Registry(graphs, doc["federation_endpoint"], doc["ontology_endpoint"], namespaces, endpoint_options, expansion)


def list_graphs(registry: Registry) -> list[dict]:
    return [g.summary() for g in registry.graphs]


def get_description(registry: Registry, name: str) -> GraphDescriptor:
    return registry.get(name)


def tokenize(text: str) -> list[str]:
    return [t for t in re.split(r"[^a-z0-9]+", text.lower()) if len(t) >= 3]


def _field_tokens(g: GraphDescriptor) -> dict[str, set[str]]:
    return {
        "name": set(tokenize(g.name)),
        "entity_types": {t for e in g.entity_types for t in tokenize(e)},
        "domains": {t for d in g.domains for t in tokenize(d)},
        "namespaces": {t for n in g.namespaces for t in tokenize(n)},
        "description": set(tokenize(g.description)),
    }


def route_query(registry: Registry, question: str) -> list[RouteCandidate]:
    """Rank graphs by weighted lexical overlap with ``question``."""
    if not question or not question.strip():
        raise ArgumentError("question is empty")
    mentioned = {m.lower() for m in _MENTION_RE.findall(question)} & set(registry.names)
    q_tokens = list(dict.fromkeys(tokenize(question)))
    scored = []
    for order, g in enumerate(registry.graphs):
        fields = _field_tokens(g)
        score = 0
        matched = []
        for tok in q_tokens:
            hit = False
            for fname, weight in WEIGHTS.items():
                if tok in fields[fname]:
                    score += weight
                    hit = True
            if hit:
                matched.append(tok)
        if g.name in mentioned:
            score += MENTION_BONUS
            matched.insert(0, "@" + g.name)
        if score > 0:
            scored.append((-score, order, RouteCandidate(g.name, score, matched)))
    scored.sort(key=lambda x: (x[0], x[1]))
    return [c for _, _, c in scored]
