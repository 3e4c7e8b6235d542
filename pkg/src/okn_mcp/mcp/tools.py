"""Tool catalog: names, JSON schemas, and handlers bound to the service modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..engine import QueryEngine
from ..errors import ArgumentError
from ..ontology import ExpansionConfig, OntologyService
from ..registry import Registry, get_description, list_graphs, route_query
from ..schema import SchemaTools, get_query_template, visualize_schema
from ..sparql.client import SparqlClient
from ..sparql.terms import is_absolute_uri
from ..transcript import TranscriptStore


@dataclass(frozen=True)
class ToolDefinition:
    name: str
    category: str
    description: str
    input_schema: dict
    output_schema: dict
    examples: tuple = ()
    output_kind: str = "structured"

    def to_wire(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema,
            "outputSchema": self.output_schema,
            "annotations": {"title": self.name.replace("_", " "), "readOnlyHint": True},
        }


def _obj(properties: dict, required=(), examples=None) -> dict:
    schema = {"type": "object", "properties": properties, "required": list(required), "additionalProperties": False}
    if examples:
        schema["examples"] = list(examples)
    return schema


def _out(properties: dict, required=None) -> dict:
    return {"type": "object", "properties": properties, "required": list(required or properties)}


STR = {"type": "string"}
STR_LIST = {"type": "array", "items": STR}
GRAPH = {"type": "string", "minLength": 1, "description": "registered graph name, e.g. spoke-genelab"}
SPARQL = {"type": "string", "minLength": 1, "description": "SPARQL SELECT query"}
EXPANSION_PROPS = {
    "expand": {"type": "boolean", "default": True, "description": "expand ontology URIs to their descendants"},
    "max_descendants": {"type": "integer", "minimum": 0},
    "batch_size": {"type": "integer", "minimum": 1},
    "include_seed": {"type": "boolean"},
}
SUMMARY = _out({"name": STR, "graph_uri": STR, "domains": STR_LIST, "entity_types": STR_LIST, "namespaces": STR_LIST})
WARNING = _out({"code": STR, "message": STR})
REPORT = _out({
    "seed_uri": STR, "namespace_prefix": STR, "descendant_count": {"type": "integer"},
    "batch_count": {"type": "integer"}, "batch_size": {"type": "integer"},
    "truncated": {"type": "boolean"}, "elapsed": {"type": "number"},
})
ANALYSIS = _out({
    "scoped_graph": STR, "warnings": {"type": "array", "items": WARNING},
    "expansion": {"anyOf": [REPORT, {"type": "null"}]}, "row_count": {"type": "integer"},
    "truncated": {"type": "boolean"}, "elapsed": {"type": "number"}, "batches": {"type": "integer"},
})
ROWS = {"type": "array", "items": {"type": "object", "additionalProperties": {"type": ["string", "null"]}}}

EX_QUERY = (
    "PREFIX schema: <http://schema.org/>\n"
    "SELECT ?disease (COUNT(DISTINCT ?dataset) AS ?datasets) WHERE {\n"
    "  ?dataset schema:healthCondition ?disease .\n"
    "  FILTER(?disease = <http://purl.obolibrary.org/obo/MONDO_0004995>)\n"
    "} GROUP BY ?disease ORDER BY DESC(?datasets) LIMIT 20"
)

CATALOG: tuple[ToolDefinition, ...] = (
    ToolDefinition(
        "list_graphs", "discovery",
        "List every registered knowledge graph with its domains, entity types and identifier namespaces.",
        _obj({}, examples=[{}]),
        _out({"graphs": {"type": "array", "items": SUMMARY}}),
        ({},),
    ),
    ToolDefinition(
        "get_description", "discovery",
        "Full description of one graph: named-graph URI, documentation link and example queries.",
        _obj({"graph": GRAPH}, ["graph"], [{"graph": "spoke-genelab"}]),
        _out({
            "name": STR, "graph_uri": STR, "domains": STR_LIST, "entity_types": STR_LIST,
            "namespaces": STR_LIST, "description": STR, "doc_url": {"type": ["string", "null"]},
            "examples": {"type": "array", "items": _out({"title": STR, "sparql": STR})},
        }),
        ({"graph": "spoke-genelab"},),
    ),
    ToolDefinition(
        "route_query", "discovery",
        "Suggest candidate graphs for a natural-language question. Mention a graph as @name to pin it first.",
        _obj({"question": {"type": "string", "minLength": 1}}, ["question"],
             [{"question": "@spoke-genelab differential expression in thymus"}]),
        _out({"candidates": {"type": "array", "items": _out({
            "graph": STR, "score": {"type": "integer", "minimum": 1}, "matched_terms": STR_LIST})}}),
        ({"question": "@spoke-genelab differential expression in thymus"},),
    ),
    ToolDefinition(
        "get_schema", "schema",
        "Classes with instance counts, predicates with usage counts, and literal-valued properties of a graph.",
        _obj({"graph": GRAPH}, ["graph"], [{"graph": "nde"}]),
        _out({
            "graph": STR,
            "classes": {"type": "array", "items": _out({"uri": STR, "count": {"type": "integer"}})},
            "predicates": {"type": "array", "items": _out({"uri": STR, "count": {"type": "integer"}})},
            "datatype_properties": {"type": "array", "items": _out({"uri": STR, "datatype": STR})},
            "edges": {"type": "array", "items": _out({"subject_class": STR, "predicate": STR, "object_class": STR})},
            "truncated": {"type": "boolean"},
        }),
        ({"graph": "nde"},),
    ),
    ToolDefinition(
        "get_query_template", "schema",
        "SPARQL pattern for structures that need special handling, such as reified edge properties.",
        _obj({"template_id": {"type": "string", "minLength": 1}}, ["template_id"],
             [{"template_id": "reified_edge_properties"}]),
        _out({
            "template_id": STR, "title": STR, "description": STR, "sparql_pattern": STR,
            "placeholders": {"type": "array", "items": _out({"name": STR, "kind": STR})},
        }),
        ({"template_id": "reified_edge_properties"},),
    ),
    ToolDefinition(
        "visualize_schema", "documentation",
        "Render a graph's class/predicate schema as Mermaid or Graphviz DOT source.",
        _obj({"graph": GRAPH, "format": {"type": "string", "enum": ["mermaid", "dot"], "default": "mermaid"}},
             ["graph"], [{"graph": "spoke-okn", "format": "mermaid"}]),
        _out({"graph": STR, "format": STR, "diagram": STR}),
        ({"graph": "spoke-okn", "format": "mermaid"},),
    ),
    ToolDefinition(
        "query", "query",
        "Run a SPARQL SELECT against one graph. The query is scoped to the graph's named-graph URI and "
        "ontology terms (MONDO, UBERON, HP, GO, CL, CHEBI) are expanded to their descendants in batches.",
        _obj({"graph": GRAPH, "sparql": SPARQL, **EXPANSION_PROPS}, ["graph", "sparql"],
             [{"graph": "nde", "sparql": EX_QUERY}]),
        _out({"graph": STR, "variables": STR_LIST, "rows": ROWS, "analysis": ANALYSIS}),
        ({"graph": "nde", "sparql": EX_QUERY},),
    ),
    ToolDefinition(
        "multi_graph_query", "query",
        "Run one SPARQL SELECT against several graphs; each row is tagged with its source_graph.",
        _obj({"graphs": {"type": "array", "items": GRAPH, "minItems": 1}, "sparql": SPARQL, **EXPANSION_PROPS},
             ["graphs", "sparql"],
             [{"graphs": ["spoke-okn", "spoke-genelab"], "sparql": "SELECT ?s WHERE { ?s ?p ?o } LIMIT 5"}]),
        _out({
            "variables": STR_LIST, "rows": ROWS,
            "per_graph_counts": {"type": "object", "additionalProperties": {"type": "integer"}},
            "errors": {"type": "object", "additionalProperties": STR},
            "warnings": {"type": "array", "items": WARNING},
            "analyses": {"type": "object", "additionalProperties": ANALYSIS},
        }),
        ({"graphs": ["spoke-okn", "spoke-genelab"], "sparql": "SELECT ?s WHERE { ?s ?p ?o } LIMIT 5"},),
    ),
    ToolDefinition(
        "lookup_uri", "ontology",
        "Resolve a label or CURIE (e.g. MONDO:0004995) to ontology URIs with labels.",
        _obj({"text": {"type": "string", "minLength": 1}}, ["text"], [{"text": "cardiovascular disease"}]),
        _out({"matches": {"type": "array", "items": _out({"uri": STR, "label": STR})}}),
        ({"text": "cardiovascular disease"},),
    ),
    ToolDefinition(
        "get_descendants", "ontology",
        "Transitive subclass descendants of an ontology URI or CURIE, with expansion metadata.",
        _obj({"uri": {"type": "string", "minLength": 1}, "max_descendants": {"type": "integer", "minimum": 1},
              "include_seed": {"type": "boolean"}, "batch_size": {"type": "integer", "minimum": 1}},
             ["uri"], [{"uri": "MONDO:0004995"}]),
        _out({"descendants": STR_LIST, "report": REPORT}),
        ({"uri": "MONDO:0004995"},),
    ),
    ToolDefinition(
        "get_join_strategy", "ontology",
        "Recommend how to combine two graphs: a direct join on shared identifier namespaces or a bridge graph.",
        _obj({"graph_a": GRAPH, "graph_b": GRAPH}, ["graph_a", "graph_b"],
             [{"graph_a": "spoke-genelab", "graph_b": "spoke-okn"}]),
        _out({"kind": {"type": "string", "enum": ["direct", "bridge", "none"]}, "shared_namespaces": STR_LIST,
              "bridge_graph": {"type": ["string", "null"]}, "explanation": STR}),
        ({"graph_a": "spoke-genelab", "graph_b": "spoke-okn"},),
    ),
    ToolDefinition(
        "create_chat_transcript", "documentation",
        "Markdown record of this session's tool calls, optionally with a narrative supplied by the client.",
        _obj({"title": {"type": "string", "minLength": 1}, "narrative": STR, "session_id": STR},
             ["title"], [{"title": "Cardiovascular datasets in NDE"}]),
        _out({"session_id": STR, "markdown": STR, "tool_calls": {"type": "integer"}}),
        ({"title": "Cardiovascular datasets in NDE"},),
    ),
)

TOOL_NAMES = tuple(t.name for t in CATALOG)


@dataclass
class ToolOutcome:
    structured: dict
    summary: str
    row_count: Optional[int] = None


@dataclass
class Services:
    """Everything the tool handlers need, built once per server."""

    registry: Registry
    client: SparqlClient = field(default_factory=SparqlClient)
    transcripts: TranscriptStore = field(default_factory=TranscriptStore)
    ontology: OntologyService = None
    schema: SchemaTools = None
    engine: QueryEngine = None

    def __post_init__(self):
        if self.ontology is None:
            self.ontology = OntologyService(self.registry.ontology(), self.registry.namespaces, self.client)
        if self.schema is None:
            self.schema = SchemaTools(self.registry, self.client)
        if self.engine is None:
            self.engine = QueryEngine(self.registry, self.client, self.ontology, self.schema)


def _expansion(services: Services, args: dict) -> ExpansionConfig:
    base = services.registry.expansion
    if args.get("expand") is False:
        return ExpansionConfig.disabled()
    return ExpansionConfig(
        max_descendants=args.get("max_descendants", base.max_descendants),
        batch_size=args.get("batch_size", base.batch_size),
        include_seed=args.get("include_seed", base.include_seed),
        enabled_namespaces=base.enabled_namespaces,
    )


def _analysis_summary(analysis) -> str:
    parts = [f"{analysis.row_count} rows"]
    if analysis.expansion:
        e = analysis.expansion
        parts.append(f"expanded {e.seed_uri} to {e.descendant_count} descendants in {e.batch_count} batches")
    if analysis.warnings:
        parts.append("warnings: " + ", ".join(analysis.warning_codes))
    return "; ".join(parts)


def _list_graphs(s: Services, a, session_id):
    graphs = list_graphs(s.registry)
    return ToolOutcome({"graphs": graphs}, f"{len(graphs)} graphs", len(graphs))


def _get_description(s: Services, a, session_id):
    d = get_description(s.registry, a["graph"])
    return ToolOutcome(d.to_dict(), f"description of {d.name}")


def _route_query(s: Services, a, session_id):
    cands = route_query(s.registry, a["question"])
    out = [{"graph": c.graph, "score": c.score, "matched_terms": list(c.matched_terms)} for c in cands]
    top = ", ".join(c.graph for c in cands[:3]) or "no candidates"
    return ToolOutcome({"candidates": out}, f"top candidates: {top}", len(out))


def _get_schema(s: Services, a, session_id):
    schema = s.schema.get_schema(a["graph"])
    return ToolOutcome(schema.to_dict(), f"{len(schema.classes)} classes, {len(schema.predicates)} predicates")


def _get_query_template(s: Services, a, session_id):
    t = get_query_template(a["template_id"])
    return ToolOutcome(t.to_dict(), f"template {t.template_id}")


def _visualize_schema(s: Services, a, session_id):
    fmt = a.get("format", "mermaid")
    schema = s.schema.cached(s.registry.get(a["graph"]).name) or s.schema.get_schema(a["graph"])
    diagram = visualize_schema(schema, fmt)
    return ToolOutcome({"graph": schema.graph, "format": fmt, "diagram": diagram}, f"{fmt} diagram of {schema.graph}")


def _query(s: Services, a, session_id):
    rs, analysis = s.engine.query(a["graph"], a["sparql"], _expansion(s, a))
    out = {"graph": s.registry.get(a["graph"]).name, "variables": rs.variables,
           "rows": rs.simple_rows(), "analysis": analysis.to_dict()}
    return ToolOutcome(out, _analysis_summary(analysis), len(rs.rows))


def _multi_graph_query(s: Services, a, session_id):
    res = s.engine.multi_graph_query(a["graphs"], a["sparql"], _expansion(s, a))
    rows = [{v: (row[v].value if v in row else None) for v in res.variables} for row in res.rows]
    out = {
        "variables": res.variables, "rows": rows, "per_graph_counts": res.per_graph_counts,
        "errors": res.errors, "warnings": [{"code": c, "message": m} for c, m in res.warnings],
        "analyses": {g: an.to_dict() for g, an in res.analyses.items()},
    }
    summary = ", ".join(f"{g}: {n}" for g, n in res.per_graph_counts.items())
    if res.errors:
        summary += "; failed: " + ", ".join(res.errors)
    return ToolOutcome(out, summary, len(rows))


def _lookup_uri(s: Services, a, session_id):
    matches = [{"uri": u, "label": lab} for u, lab in s.ontology.lookup_uri(a["text"])]
    return ToolOutcome({"matches": matches}, f"{len(matches)} matches", len(matches))


def _get_descendants(s: Services, a, session_id):
    target = a["uri"].strip()
    if not is_absolute_uri(target) or target.split(":", 1)[0].upper() in {n.prefix.upper() for n in s.registry.namespaces}:
        target = s.ontology.curie_to_uri(target)
    base = s.registry.expansion
    config = ExpansionConfig(
        max_descendants=a.get("max_descendants", base.max_descendants or 1),
        batch_size=a.get("batch_size", base.batch_size),
        include_seed=a.get("include_seed", False),
        enabled_namespaces=base.enabled_namespaces,
    )
    uris, report = s.ontology.get_descendants(target, config)
    return ToolOutcome({"descendants": uris, "report": report.to_dict()},
                       f"{report.descendant_count} descendants of {target}", len(uris))


def _get_join_strategy(s: Services, a, session_id):
    j = s.engine.get_join_strategy(a["graph_a"], a["graph_b"])
    return ToolOutcome(j.to_dict(), f"{j.kind} join" + (f" via {j.bridge_graph}" if j.bridge_graph else ""))


def _create_chat_transcript(s: Services, a, session_id):
    sid = a.get("session_id") or session_id
    md = s.transcripts.create_chat_transcript(sid, a["title"], a.get("narrative"))
    calls = len(s.transcripts.snapshot(sid).entries)
    return ToolOutcome({"session_id": sid, "markdown": md, "tool_calls": calls}, f"transcript of {calls} tool calls")


HANDLERS: dict[str, Callable[[Services, dict, str], ToolOutcome]] = {
    "list_graphs": _list_graphs,
    "get_description": _get_description,
    "route_query": _route_query,
    "get_schema": _get_schema,
    "get_query_template": _get_query_template,
    "visualize_schema": _visualize_schema,
    "query": _query,
    "multi_graph_query": _multi_graph_query,
    "lookup_uri": _lookup_uri,
    "get_descendants": _get_descendants,
    "get_join_strategy": _get_join_strategy,
    "create_chat_transcript": _create_chat_transcript,
}
assert set(HANDLERS) == set(TOOL_NAMES)


def call_tool(services: Services, name: str, args: dict[str, Any], session_id: str) -> ToolOutcome:
    if name not in HANDLERS:
        raise ArgumentError(f"unknown tool {name!r}")
    return HANDLERS[name](services, args, session_id)
