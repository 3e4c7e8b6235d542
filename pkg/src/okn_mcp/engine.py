"""Graph-scoped query execution with analysis and automatic ontology expansion,
multi-graph execution with provenance, and join-strategy recommendation."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    ArgumentError, ExpansionSkipped, MultiGraphError, OknError, QueryExecutionError,
    RewriteError, SparqlSyntaxError,
)
from .ontology import ExpansionConfig, ExpansionReport, OntologyService, detect_expandable_uris, expand_query
from .registry import Registry
from .schema import SchemaTools
from .sparql.client import SparqlClient
from .sparql.parser import Call, Const, SelectQuery, TriplePattern, Var, iter_elements, parse_query
from .sparql.rewrite import scope_to_graph
from .sparql.terms import XSD_INTEGER, RdfTerm, SparqlResultSet, literal, sort_key

log = logging.getLogger(__name__)

WARNING_CODES = frozenset({
    "no_limit",
    "no_graph_scope_added",
    "unparsed_fallback",
    "expansion_truncated",
    "expansion_skipped_multiple_seeds",
    "duplicate_graph",
    "unknown_predicate",
})
SOURCE_VAR = "source_graph"


@dataclass
class QueryAnalysis:
    scoped_graph: str
    warnings: list[tuple[str, str]] = field(default_factory=list)
    expansion: Optional[ExpansionReport] = None
    row_count: int = 0
    truncated: bool = False
    elapsed: float = 0.0
    batches: int = 1

    def warn(self, code: str, message: str):
        if code not in WARNING_CODES:
            raise ValueError(f"undocumented warning code {code!r}")
        self.warnings.append((code, message))

    @property
    def warning_codes(self) -> list[str]:
        return [c for c, _ in self.warnings]

    def to_dict(self) -> dict:
        return {
            "scoped_graph": self.scoped_graph,
            "warnings": [{"code": c, "message": m} for c, m in self.warnings],
            "expansion": self.expansion.to_dict() if self.expansion else None,
            "row_count": self.row_count,
            "truncated": self.truncated,
            "elapsed": self.elapsed,
            "batches": self.batches,
        }


@dataclass
class AnnotatedResultSet:
    variables: list[str]
    rows: list[dict[str, RdfTerm]] = field(default_factory=list)
    per_graph_counts: dict[str, int] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    analyses: dict[str, QueryAnalysis] = field(default_factory=dict)
    warnings: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class JoinStrategy:
    kind: str  # direct | bridge | none
    shared_namespaces: frozenset = frozenset()
    bridge_graph: Optional[str] = None
    explanation: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "shared_namespaces": sorted(self.shared_namespaces),
            "bridge_graph": self.bridge_graph,
            "explanation": self.explanation,
        }


# ---------------------------------------------------------------- merging


def _simple_order_keys(parsed: SelectQuery):
    keys = []
    for cond in parsed.order_by:
        if not isinstance(cond.expr, Var):
            return None
        keys.append((cond.expr.name, cond.descending))
    return keys


def _sort_rows(rows, keys):
    for name, desc in reversed(keys):
        rows.sort(key=lambda r, n=name: sort_key(r.get(n)), reverse=desc)
    return rows


def _reaggregate(parsed: SelectQuery, rows: list[dict]) -> list[dict]:
    """Combine per-batch groups: COUNT/SUM add up, MIN/MAX fold, SAMPLE keeps the first."""
    aggs = {p.var: p.expr.name for p in parsed.projection or [] if isinstance(p.expr, Call) and p.expr.is_aggregate}
    keys = [p.var for p in parsed.projection or [] if p.var not in aggs]
    groups: dict[tuple, dict] = {}
    for row in rows:
        key = tuple(row.get(k) for k in keys)
        acc = groups.get(key)
        if acc is None:
            groups[key] = dict(row)
            continue
        for var, fn in aggs.items():
            new = row.get(var)
            old = acc.get(var)
            if new is None:
                continue
            if old is None:
                acc[var] = new
            elif fn in ("COUNT", "SUM"):
                a, b = old.numeric_value(), new.numeric_value()
                if a is not None and b is not None:
                    total = a + b
                    acc[var] = RdfTerm("literal", str(total), XSD_INTEGER if total == int(total) else old.datatype)
            elif fn == "MIN":
                acc[var] = min(old, new, key=sort_key)
            elif fn == "MAX":
                acc[var] = max(old, new, key=sort_key)
    return list(groups.values())


def _widen_window(parsed: SelectQuery, batch: str) -> str:
    """Swap the trailing LIMIT/OFFSET for ``LIMIT offset+limit`` so the window is applied once, after the merge."""
    tail = parsed.text[parsed.modifiers_start:].rstrip()
    body = batch.rstrip()
    if not body.endswith(tail):
        raise RewriteError("LIMIT/OFFSET clause not found at the end of the batch query")
    head = body[: len(body) - len(tail)]
    return head + (f"LIMIT {parsed.offset + parsed.limit}" if parsed.limit is not None else "")


def merge_batches(parsed: Optional[SelectQuery], results: list[SparqlResultSet]) -> SparqlResultSet:
    if len(results) == 1:
        return results[0]
    variables = list(dict.fromkeys(v for r in results for v in r.variables))
    rows = [row for r in results for row in r.rows]
    if parsed is not None and parsed.has_aggregate:
        rows = _reaggregate(parsed, rows)
    elif parsed is None or parsed.distinct:
        # partitions are disjoint, so a plain concat already equals the unbatched bag;
        # only DISTINCT needs the cross-batch pass
        seen = set()
        unique = []
        for row in rows:
            key = tuple(row.get(v) for v in variables)
            if key not in seen:
                seen.add(key)
                unique.append(row)
        rows = unique
    if parsed is not None:
        keys = _simple_order_keys(parsed)
        if keys:
            _sort_rows(rows, keys)
        if parsed.offset:
            rows = rows[parsed.offset:]
        if parsed.limit is not None:
            rows = rows[: parsed.limit]
    return SparqlResultSet(variables, rows, truncated=any(r.truncated for r in results))


# ---------------------------------------------------------------- engine


class QueryEngine:
    def __init__(
        self,
        registry: Registry,
        client: Optional[SparqlClient] = None,
        ontology: Optional[OntologyService] = None,
        schema: Optional[SchemaTools] = None,
    ):
        self.registry = registry
        self.client = client or SparqlClient()
        self.ontology = ontology or OntologyService(registry.ontology(), registry.namespaces, self.client)
        self.schema = schema or SchemaTools(registry, self.client)

    def plan(self, graph: str, sparql: str, expansion: Optional[ExpansionConfig] = None):
        """Return ``(parsed or None, batch queries, analysis)`` without executing."""
        desc = self.registry.get(graph)
        if not sparql or not sparql.strip():
            raise ArgumentError("sparql is empty")
        expansion = expansion if expansion is not None else self.registry.expansion
        analysis = QueryAnalysis(scoped_graph=desc.graph_uri)
        try:
            parsed = parse_query(sparql)
        except SparqlSyntaxError as exc:
            analysis.warn("unparsed_fallback", f"query executed verbatim without scoping or expansion: {exc}")
            return None, [sparql], analysis

        batches = [sparql]
        hits = detect_expandable_uris(parsed, expansion, self.registry.namespaces)
        supported = [h for h in hits if h.supported]
        if hits and not supported:
            where = ", ".join(sorted({h.location for h in hits}))
            analysis.warn("unparsed_fallback", f"ontology URI(s) in {where} position cannot be expanded; ran unexpanded")
        if supported:
            hit = supported[0]
            others = [h for h in hits if h is not hit]
            if others:
                analysis.warn(
                    "expansion_skipped_multiple_seeds",
                    f"expanded only {hit.uri}; left unexpanded: " + ", ".join(dict.fromkeys(h.uri for h in others)),
                )
            try:
                uris, report = self.ontology.get_descendants(hit.uri, expansion)
            except ExpansionSkipped:
                report = None
            if report is not None:
                analysis.expansion = report
                if report.truncated:
                    analysis.warn(
                        "expansion_truncated",
                        f"descendant list for {hit.uri} hit the bound of {expansion.max_descendants}",
                    )
                if report.descendant_count > 0:
                    try:
                        batches = expand_query(parsed, hit, uris, expansion, self.registry.namespaces)
                    except RewriteError as exc:
                        analysis.warn("unparsed_fallback", f"expansion rewrite failed, ran unexpanded: {exc}")
                        report.batch_count = 0

        if len(batches) > 1 and parsed.offset:
            batches = [_widen_window(parsed, b) for b in batches]
        if parsed.has_graph_block:
            analysis.warn("no_graph_scope_added", "query already names a GRAPH; scope left as written")
        else:
            batches = [scope_to_graph(b, desc.graph_uri) for b in batches]
        if parsed.limit is None and not parsed.has_aggregate:
            analysis.warn("no_limit", "query has no LIMIT; results may be cut at the endpoint row cap")
        cached = self.schema.cached(desc.name)
        if cached is not None:
            known = cached.predicate_uris
            for el in iter_elements(parsed.where):
                if isinstance(el, TriplePattern) and isinstance(el.p, Const) and el.p.term.value not in known:
                    analysis.warn("unknown_predicate", f"predicate <{el.p.term.value}> not seen in {desc.name} schema")
        analysis.batches = len(batches)
        return parsed, batches, analysis

    def query(self, graph: str, sparql: str, expansion: Optional[ExpansionConfig] = None):
        started = time.perf_counter()
        parsed, batches, analysis = self.plan(graph, sparql, expansion)
        endpoint = self.registry.federation()
        name = self.registry.get(graph).name

        def run(indexed):
            i, q = indexed
            try:
                return self.client.execute_select(endpoint, q)
            except OknError as exc:
                raise QueryExecutionError(
                    f"graph {name!r}, batch {i + 1}/{len(batches)}: {exc}", batch_index=i, graph=name
                ) from exc

        if len(batches) == 1:
            results = [run((0, batches[0]))]
        else:
            with ThreadPoolExecutor(max_workers=min(len(batches), endpoint.max_concurrency)) as pool:
                results = list(pool.map(run, enumerate(batches)))
        merged = merge_batches(parsed, results)
        analysis.row_count = len(merged.rows)
        analysis.truncated = merged.truncated
        analysis.elapsed = round(time.perf_counter() - started, 6)
        return merged, analysis

    def multi_graph_query(
        self, graphs: list[str], sparql: str, expansion: Optional[ExpansionConfig] = None
    ) -> AnnotatedResultSet:
        if not graphs:
            raise ArgumentError("at least one graph is required")
        names: list[str] = []
        warnings = []
        for g in graphs:
            name = self.registry.get(g).name
            if name in names:
                warnings.append(("duplicate_graph", f"graph {name!r} listed more than once; executed once"))
            else:
                names.append(name)

        def run(name):
            try:
                return name, self.query(name, sparql, expansion), None
            except OknError as exc:
                return name, None, str(exc)

        cap = self.registry.federation().max_concurrency
        with ThreadPoolExecutor(max_workers=min(len(names), cap)) as pool:
            outcomes = list(pool.map(run, names))

        out = AnnotatedResultSet(variables=[SOURCE_VAR], warnings=warnings)
        for name, result, error in outcomes:
            if error is not None:
                out.errors[name] = error
                continue
            rs, analysis = result
            out.analyses[name] = analysis
            for v in rs.variables:
                if v not in out.variables:
                    out.variables.append(v)
            tag = literal(name)
            for row in rs.rows:
                out.rows.append({**row, SOURCE_VAR: tag})
            out.per_graph_counts[name] = len(rs.rows)
        if len(out.errors) == len(names):
            raise MultiGraphError(out.errors)
        return out

    def get_join_strategy(self, graph_a: str, graph_b: str) -> JoinStrategy:
        return get_join_strategy(graph_a, graph_b, self.registry)


def get_join_strategy(graph_a: str, graph_b: str, registry: Registry) -> JoinStrategy:
    a = registry.get(graph_a)
    b = registry.get(graph_b)
    if a.name == b.name:
        raise ArgumentError("join strategy needs two distinct graphs")
    na, nb = set(a.namespaces), set(b.namespaces)
    shared = na & nb
    if shared:
        listed = ", ".join(sorted(shared))
        return JoinStrategy(
            "direct", frozenset(shared), None,
            f"{a.name} and {b.name} share identifier namespace(s) {listed}; join result sets on those identifiers.",
        )
    best = None
    for c in registry.graphs:
        if c.name in (a.name, b.name):
            continue
        nc = set(c.namespaces)
        oa, ob = na & nc, nb & nc
        if oa and ob:
            score = min(len(oa), len(ob))
            if best is None or score > best[0]:
                best = (score, c, oa, ob)
    if best is not None:
        _, c, oa, ob = best
        return JoinStrategy(
            "bridge", frozenset(oa | ob), c.name,
            f"no shared namespaces; bridge through {c.name}, which shares {', '.join(sorted(oa))} with {a.name} "
            f"and {', '.join(sorted(ob))} with {b.name}. Map identifiers in {c.name}, then join.",
        )
    return JoinStrategy(
        "none", frozenset(), None,
        f"{a.name} and {b.name} share no identifier namespaces and no registered graph bridges them.",
    )
