"""Observed-usage schema of a named graph, query templates, and diagrams."""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Optional

from .errors import ArgumentError, EndpointError, NotFoundError, OknError
from .registry import Registry
from .sparql.client import SparqlClient
from .sparql.rewrite import scope_to_graph
from .sparql.terms import RDF

CLASS_LIMIT = 200
PREDICATE_LIMIT = 500
EDGE_LIMIT = 500


@dataclass
class SchemaSummary:
    graph: str
    classes: list[tuple[str, int]] = field(default_factory=list)
    predicates: list[tuple[str, int]] = field(default_factory=list)
    datatype_properties: list[tuple[str, str]] = field(default_factory=list)
    # (subject class, predicate, object class) co-occurrences, for diagrams
    edges: list[tuple[str, str, str]] = field(default_factory=list)
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "classes": [{"uri": u, "count": n} for u, n in self.classes],
            "predicates": [{"uri": u, "count": n} for u, n in self.predicates],
            "datatype_properties": [{"uri": u, "datatype": d} for u, d in self.datatype_properties],
            "edges": [{"subject_class": s, "predicate": p, "object_class": o} for s, p, o in self.edges],
            "truncated": self.truncated,
        }

    @property
    def predicate_uris(self) -> set[str]:
        return {u for u, _ in self.predicates}


def _by_count(pairs):
    return sorted(pairs, key=lambda x: (-x[1], x[0]))


CLASS_QUERY = f"""PREFIX rdf: <{RDF}>
SELECT ?class (COUNT(?s) AS ?count) WHERE {{ ?s rdf:type ?class . }}
GROUP BY ?class ORDER BY DESC(?count) ?class LIMIT {CLASS_LIMIT}"""

PREDICATE_QUERY = f"""SELECT ?p (COUNT(*) AS ?count) WHERE {{ ?s ?p ?o . }}
GROUP BY ?p ORDER BY DESC(?count) ?p LIMIT {PREDICATE_LIMIT}"""

DATATYPE_QUERY = f"""SELECT ?p (SAMPLE(DATATYPE(?o)) AS ?datatype) WHERE {{ ?s ?p ?o . FILTER(isLiteral(?o)) }}
GROUP BY ?p ORDER BY ?p LIMIT {PREDICATE_LIMIT}"""

EDGE_QUERY = f"""PREFIX rdf: <{RDF}>
SELECT DISTINCT ?subjectClass ?p ?objectClass WHERE {{
  ?s rdf:type ?subjectClass . ?s ?p ?o . ?o rdf:type ?objectClass .
}} ORDER BY ?subjectClass ?p ?objectClass LIMIT {EDGE_LIMIT}"""


class SchemaTools:
    """Computes and caches per-graph schema summaries."""

    def __init__(self, registry: Registry, client: Optional[SparqlClient] = None):
        self.registry = registry
        self.client = client or SparqlClient()
        self._cache: dict[str, SchemaSummary] = {}
        self._lock = threading.Lock()

    def cached(self, graph: str) -> Optional[SchemaSummary]:
        with self._lock:
            return self._cache.get(graph)

    def _select(self, graph_uri: str, query: str):
        return self.client.execute_select(self.registry.federation(), scope_to_graph(query, graph_uri))

    def get_schema(self, graph: str) -> SchemaSummary:
        desc = self.registry.get(graph)
        try:
            classes = self._select(desc.graph_uri, CLASS_QUERY)
            preds = self._select(desc.graph_uri, PREDICATE_QUERY)
            dts = self._select(desc.graph_uri, DATATYPE_QUERY)
            edges = self._select(desc.graph_uri, EDGE_QUERY)
        except OknError as exc:
            raise EndpointError(f"schema query for graph {desc.name!r} failed: {exc}", getattr(exc, "status", None)) from exc
        summary = SchemaSummary(desc.name)
        summary.classes = _by_count(
            (r["class"].value, int(r["count"].value)) for r in classes.rows if "class" in r and "count" in r
        )
        summary.predicates = _by_count(
            (r["p"].value, int(r["count"].value)) for r in preds.rows if "p" in r and "count" in r
        )
        usage = dict(summary.predicates)
        summary.datatype_properties = sorted(
            ((r["p"].value, r["datatype"].value) for r in dts.rows if "p" in r and "datatype" in r),
            key=lambda x: (-usage.get(x[0], 0), x[0]),
        )
        summary.edges = sorted(
            (r["subjectClass"].value, r["p"].value, r["objectClass"].value)
            for r in edges.rows
            if "subjectClass" in r and "objectClass" in r
        )
        summary.truncated = any(
            len(rs.rows) >= lim
            for rs, lim in ((classes, CLASS_LIMIT), (preds, PREDICATE_LIMIT), (dts, PREDICATE_LIMIT), (edges, EDGE_LIMIT))
        )
        with self._lock:
            self._cache[desc.name] = summary
        return summary


# ---------------------------------------------------------------- templates

_SLOT_RE = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class QueryTemplate:
    template_id: str
    title: str
    description: str
    sparql_pattern: str
    placeholders: tuple[tuple[str, str], ...]  # (slot name, expected kind)

    def __post_init__(self):
        in_pattern = set(_SLOT_RE.findall(self.sparql_pattern))
        declared = {name for name, _ in self.placeholders}
        if in_pattern != declared:
            raise ValueError(f"template {self.template_id}: placeholders {sorted(declared)} != pattern slots {sorted(in_pattern)}")

    def render(self, **values) -> str:
        missing = {n for n, _ in self.placeholders} - set(values)
        if missing:
            raise ArgumentError(f"missing template values: {sorted(missing)}")
        return _SLOT_RE.sub(lambda m: str(values[m.group(1)]), self.sparql_pattern)

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "title": self.title,
            "description": self.description,
            "sparql_pattern": self.sparql_pattern,
            "placeholders": [{"name": n, "kind": k} for n, k in self.placeholders],
        }


TEMPLATES = {
    t.template_id: t
    for t in (
        QueryTemplate(
            "reified_edge_properties",
            "Properties of reified edges",
            "Edges stored as rdf:Statement nodes carry their own properties "
            "(p-values, fold changes, sources). Match the statement node, then read its extra triples.",
            f"""PREFIX rdf: <{RDF}>
SELECT ?subject ?object ?property ?value WHERE {{
  ?statement rdf:type rdf:Statement ;
             rdf:subject ?subject ;
             rdf:predicate <{{{{predicate_uri}}}}> ;
             rdf:object ?object ;
             ?property ?value .
  FILTER(?property NOT IN (rdf:type, rdf:subject, rdf:predicate, rdf:object))
}}
LIMIT {{{{limit}}}}""",
            (("predicate_uri", "uri"), ("limit", "integer")),
        ),
        QueryTemplate(
            "class_instances",
            "Instances of a class",
            "List instances of one class in the graph, with labels when present.",
            f"""PREFIX rdf: <{RDF}>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
SELECT ?instance ?label WHERE {{
  ?instance rdf:type <{{{{class_uri}}}}> .
  OPTIONAL {{ ?instance rdfs:label ?label }}
}}
LIMIT {{{{limit}}}}""",
            (("class_uri", "uri"), ("limit", "integer")),
        ),
        QueryTemplate(
            "annotation_counts",
            "Counts per annotation value",
            "Count distinct items per value of an annotation predicate, largest groups first.",
            """SELECT ?annotation (COUNT(DISTINCT ?item) AS ?count) WHERE {
  ?item <{{annotation_predicate}}> ?annotation .
}
GROUP BY ?annotation
ORDER BY DESC(?count) ?annotation
LIMIT {{limit}}""",
            (("annotation_predicate", "uri"), ("limit", "integer")),
        ),
        QueryTemplate(
            "ontology_expanded_filter",
            "Filter on an ontology term and its descendants",
            "Constrain a term variable to one ontology URI. The query tool expands the FILTER "
            "to the term's subclasses automatically and runs the expansion in batches.",
            """SELECT ?term (COUNT(DISTINCT ?item) AS ?count) WHERE {
  ?item <{{annotation_predicate}}> ?term .
  FILTER(?term = <{{ontology_term_uri}}>)
}
GROUP BY ?term
ORDER BY DESC(?count) ?term
LIMIT {{limit}}""",
            (("annotation_predicate", "uri"), ("ontology_term_uri", "uri"), ("limit", "integer")),
        ),
    )
}


def get_query_template(template_id: str) -> QueryTemplate:
    try:
        return TEMPLATES[template_id]
    except KeyError:
        raise NotFoundError(f"unknown template {template_id!r}; available: {', '.join(TEMPLATES)}") from None


# ---------------------------------------------------------------- diagrams


def _local_name(u: str) -> str:
    tail = re.split(r"[#/]", u.rstrip("/#"))[-1]
    return tail or u


def _quote(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', "'")


def visualize_schema(schema: SchemaSummary, format: str = "mermaid") -> str:
    """Render classes as nodes and co-occurring predicates as edges."""
    fmt = (format or "").lower()
    if fmt not in ("dot", "mermaid"):
        raise ArgumentError(f"unsupported diagram format {format!r}; use 'dot' or 'mermaid'")
    ids = {u: f"c{i}" for i, (u, _) in enumerate(schema.classes)}
    labels = {u: f"{_local_name(u)} ({n})" for u, n in schema.classes}
    edges = [(s, p, o) for s, p, o in schema.edges if s in ids and o in ids]
    if fmt == "mermaid":
        lines = ["graph LR"]
        lines += [f'  {ids[u]}["{_quote(labels[u])}"]' for u, _ in schema.classes]
        lines += [f"  {ids[s]} -->|{_quote(_local_name(p)).replace('|', '/')}| {ids[o]}" for s, p, o in edges]
    else:
        lines = ["digraph schema {", "  rankdir=LR;", "  node [shape=box];"]
        lines += [f'  {ids[u]} [label="{_quote(labels[u])}"];' for u, _ in schema.classes]
        lines += [f'  {ids[s]} -> {ids[o]} [label="{_quote(_local_name(p))}"];' for s, p, o in edges]
        lines.append("}")
    return "\n".join(lines) + "\n"
