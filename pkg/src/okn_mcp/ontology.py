"""Ontology identifier resolution, descendant retrieval and query expansion.

A query constraining a variable to one ontology term (as a triple object,
a FILTER equality/IN, or a VALUES row) is rewritten so the variable ranges
over the term and all of its transitive subclasses. The term set is split
into fixed-size chunks and each chunk becomes one VALUES-block query.
"""

from __future__ import annotations

import math
import re
import threading
import time
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import ArgumentError, ExpansionSkipped, NotFoundError, RewriteError, SparqlSyntaxError
from .sparql.client import EndpointConfig, SparqlClient
from .sparql.parser import (
    Binary, Call, Const, Filter, GraphPattern, GroupPattern, InExpr, Not,
    OptionalPattern, SelectQuery, TriplePattern, ValuesBlock, Var, parse_query,
)
from .sparql.rewrite import apply_edits
from .sparql.terms import RDFS, escape_string

OBO = "http://purl.obolibrary.org/obo/"
OBO_IN_OWL = "http://www.geneontology.org/formats/oboInOwl#"

SUPPORTED_LOCATIONS = ("object", "filter-equality", "filter-in", "values")
EXPANDED_VAR = "okn_expanded"


@dataclass(frozen=True)
class OntologyNamespace:
    prefix: str
    uri_pattern: str  # e.g. "http://purl.obolibrary.org/obo/MONDO_{id}"
    expandable: bool = False

    def __post_init__(self):
        if self.uri_pattern.count("{id}") != 1:
            raise ValueError(f"uri_pattern for {self.prefix} needs exactly one {{id}} slot")

    def to_uri(self, local_id: str) -> str:
        return self.uri_pattern.replace("{id}", local_id)

    def local_id(self, uri: str) -> Optional[str]:
        head, tail = self.uri_pattern.split("{id}")
        if uri.startswith(head) and uri.endswith(tail) and len(uri) > len(head) + len(tail):
            local = uri[len(head) : len(uri) - len(tail)]
            if re.fullmatch(r"[A-Za-z0-9_.\-]+", local):
                return local
        return None


def _obo(prefix, expandable=True):
    return OntologyNamespace(prefix, f"{OBO}{prefix}_{{id}}", expandable)


DEFAULT_NAMESPACES = (
    _obo("MONDO"), _obo("UBERON"), _obo("HP"), _obo("GO"), _obo("CL"), _obo("CHEBI"),
    OntologyNamespace("NCBIGene", "http://identifiers.org/ncbigene/{id}"),
    OntologyNamespace("MGI", "http://identifiers.org/mgi/MGI:{id}"),
    OntologyNamespace("UniProtKB", "http://purl.uniprot.org/uniprot/{id}"),
)
DEFAULT_EXPANDABLE = frozenset(n.prefix for n in DEFAULT_NAMESPACES if n.expandable)


@dataclass(frozen=True)
class ExpansionConfig:
    max_descendants: int = 5000  # 0 disables expansion
    batch_size: int = 20
    include_seed: bool = True
    enabled_namespaces: frozenset = DEFAULT_EXPANDABLE

    def __post_init__(self):
        if self.max_descendants < 0:
            raise ArgumentError("max_descendants must be >= 0")
        if self.batch_size < 1:
            raise ArgumentError("batch_size must be >= 1")
        object.__setattr__(self, "enabled_namespaces", frozenset(p.upper() for p in self.enabled_namespaces))

    @property
    def enabled(self) -> bool:
        return self.max_descendants > 0 and bool(self.enabled_namespaces)

    @classmethod
    def disabled(cls) -> "ExpansionConfig":
        return cls(max_descendants=0, enabled_namespaces=frozenset())


@dataclass
class ExpansionReport:
    seed_uri: str
    namespace_prefix: str
    descendant_count: int = 0
    batch_count: int = 0
    batch_size: int = 20
    truncated: bool = False
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def find_namespace(uri: str, namespaces: Iterable[OntologyNamespace]) -> Optional[OntologyNamespace]:
    for ns in namespaces:
        if ns.local_id(uri) is not None:
            return ns
    return None


_CURIE_RE = re.compile(r"^([A-Za-z][A-Za-z0-9_.]*):([A-Za-z0-9_.\-]+)$")


def curie_to_uri(curie: str, namespaces: Iterable[OntologyNamespace] = DEFAULT_NAMESPACES) -> str:
    m = _CURIE_RE.match((curie or "").strip())
    if not m:
        raise ArgumentError(f"not a CURIE (PREFIX:LOCALID): {curie!r}")
    prefix, local = m.groups()
    for ns in namespaces:
        if ns.prefix.upper() == prefix.upper():
            return ns.to_uri(local)
    known = ", ".join(ns.prefix for ns in namespaces)
    raise NotFoundError(f"unknown CURIE prefix {prefix!r}; known prefixes: {known}")


def uri_set(seed: str, descendants: Iterable[str], include_seed: bool) -> list[str]:
    """Seed first (if included), then deduplicated descendants in lexicographic order."""
    rest = sorted(set(descendants) - {seed})
    return [seed, *rest] if include_seed else rest


def partition(items: Sequence, size: int) -> list[list]:
    if size < 1:
        raise ArgumentError("batch size must be >= 1")
    return [list(items[i : i + size]) for i in range(0, len(items), size)]


def batch_count(total: int, size: int) -> int:
    return math.ceil(total / size) if total else 0


# ---------------------------------------------------------------- detection


@dataclass
class ExpandableHit:
    uri: str
    location: str
    namespace: str
    # rewrite anchors; not part of the public comparison
    group: Optional[GroupPattern] = field(default=None, compare=False, repr=False)
    node: object = field(default=None, compare=False, repr=False)
    sub: object = field(default=None, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)

    @property
    def supported(self) -> bool:
        return self.location in SUPPORTED_LOCATIONS


def _parse(query) -> SelectQuery:
    if isinstance(query, SelectQuery):
        return query
    try:
        return parse_query(query)
    except SparqlSyntaxError as exc:
        raise RewriteError(f"cannot analyse query: {exc}") from exc


def detect_expandable_uris(
    query, config: ExpansionConfig, namespaces: Iterable[OntologyNamespace] = DEFAULT_NAMESPACES
) -> list[ExpandableHit]:
    """Find URIs from enabled namespaces, in source order, with their location."""
    parsed = _parse(query)
    if not config.enabled:
        return []
    enabled = [ns for ns in namespaces if ns.prefix.upper() in config.enabled_namespaces]
    hits: list[ExpandableHit] = []

    def consider(term_node, location, **anchors):
        if isinstance(term_node, Const) and term_node.term.is_uri:
            ns = find_namespace(term_node.term.value, enabled)
            if ns is not None:
                hits.append(ExpandableHit(term_node.term.value, location, ns.prefix, **anchors))

    def visit_expr(expr, filt, conj):
        if isinstance(expr, Binary):
            if expr.op == "&&":
                visit_expr(expr.left, filt, conj)
                visit_expr(expr.right, filt, conj)
            elif expr.op == "=" and isinstance(expr.left, Var) != isinstance(expr.right, Var) and (
                isinstance(expr.left, Const) or isinstance(expr.right, Const)
            ):
                const = expr.right if isinstance(expr.right, Const) else expr.left
                consider(const, "filter-equality" if conj else "filter-other", node=filt, sub=expr)
            else:
                visit_expr(expr.left, filt, False)
                visit_expr(expr.right, filt, False)
        elif isinstance(expr, InExpr):
            ok = conj and not expr.negated and isinstance(expr.expr, Var)
            for item in expr.items:
                consider(item, "filter-in" if ok else "filter-other", node=filt, sub=expr)
            visit_expr(expr.expr, filt, False)
        elif isinstance(expr, Not):
            visit_expr(expr.expr, filt, False)
        elif isinstance(expr, Call):
            for a in expr.args:
                visit_expr(a, filt, False)
        elif isinstance(expr, Const):
            consider(expr, "filter-other", node=filt, sub=expr)

    def walk(group: GroupPattern):
        for el in group.elements:
            if isinstance(el, TriplePattern):
                consider(el.s, "subject", group=group, node=el)
                consider(el.p, "predicate", group=group, node=el)
                consider(el.o, "object", group=group, node=el, sub=el.o)
            elif isinstance(el, Filter):
                visit_expr(el.expr, el, True)
            elif isinstance(el, ValuesBlock):
                for row in el.rows:
                    for col, cell in enumerate(row):
                        if cell is not None:
                            consider(cell, "values", group=group, node=el, column=col)
            elif isinstance(el, GraphPattern):
                consider(el.name, "graph", group=group, node=el)
                walk(el.group)
            elif isinstance(el, OptionalPattern):
                walk(el.group)
            elif isinstance(el, GroupPattern):
                walk(el)

    walk(parsed.where)
    return hits


# ---------------------------------------------------------------- rewriting


def _fresh_var(parsed: SelectQuery) -> str:
    used = set(parsed.in_scope_variables()) | set(parsed.result_variables())
    name = EXPANDED_VAR
    n = 1
    while name in used:
        n += 1
        name = f"{EXPANDED_VAR}{n}"
    return name


def _cell(c) -> str:
    return "UNDEF" if c is None else c.term.n3()


def _values_text(variables: list[str], rows: list[tuple[str, ...]]) -> str:
    """Render a VALUES block from rows of already-rendered cell text."""
    if len(variables) == 1:
        return f"VALUES ?{variables[0]} {{ {' '.join(r[0] for r in rows)} }}"
    head = " ".join(f"?{v}" for v in variables)
    body = " ".join("(" + " ".join(r) + ")" for r in rows)
    return f"VALUES ({head}) {{ {body} }}"


def expand_query(
    query,
    seed,
    descendants: Sequence[str],
    config: ExpansionConfig,
    namespaces: Iterable[OntologyNamespace] = DEFAULT_NAMESPACES,
) -> list[str]:
    """Rewrite the constraint on ``seed`` into one VALUES-block query per batch.

    ``seed`` is a URI or an :class:`ExpandableHit` from
    :func:`detect_expandable_uris` on the same query.
    """
    parsed = _parse(query)
    if isinstance(seed, ExpandableHit):
        hit = seed
        if hit.node is None:
            raise RewriteError("hit carries no rewrite anchor")
    else:
        forced = ExpansionConfig(
            max_descendants=max(config.max_descendants, 1),
            batch_size=config.batch_size,
            include_seed=config.include_seed,
            enabled_namespaces=frozenset(ns.prefix for ns in namespaces),
        )
        candidates = [h for h in detect_expandable_uris(parsed, forced, namespaces) if h.uri == seed]
        if not candidates:
            raise RewriteError(f"{seed} does not occur in the query")
        supported = [h for h in candidates if h.supported]
        if not supported:
            raise RewriteError(
                f"{seed} occurs only in unsupported position(s): "
                + ", ".join(sorted({h.location for h in candidates}))
                + "; expansion needs an object constant, FILTER equality/IN, or VALUES member"
            )
        hit = supported[0]
    if not hit.supported:
        raise RewriteError(f"cannot expand a URI in {hit.location} position")
    uris = uri_set(hit.uri, descendants, config.include_seed)
    if not uris:
        raise RewriteError("nothing to expand: no descendants and seed excluded")
    chunks = partition(uris, config.batch_size)
    universe = set(uris)
    text = parsed.text
    out = []
    for index, chunk in enumerate(chunks):
        edits = _edits_for(parsed, hit, chunk, index == 0, universe)
        batch = apply_edits(text, edits)
        try:
            parse_query(batch)
        except SparqlSyntaxError as exc:  # pragma: no cover - guards rewrite bugs
            raise RewriteError(f"rewrite produced an invalid query: {exc}") from exc
        out.append(batch)
    return out


def _edits_for(parsed: SelectQuery, hit: ExpandableHit, chunk: list[str], first: bool, universe: set):
    chunk_cells = [f"<{u}>" for u in chunk]
    if hit.location == "object":
        var = _fresh_var(parsed)
        start, end = hit.sub.span
        group_open = hit.group.span[0] + 1
        return [
            (group_open, group_open, " " + _values_text([var], [(c,) for c in chunk_cells]) + " "),
            (start, end, f"?{var}"),
        ]
    if hit.location in ("filter-equality", "filter-in"):
        filt: Filter = hit.node
        sub = hit.sub
        extra = []
        if hit.location == "filter-equality":
            var = sub.left.name if isinstance(sub.left, Var) else sub.right.name
        else:
            var = sub.expr.name
            for item in sub.items:
                if not isinstance(item, Const):
                    raise RewriteError("FILTER IN list must contain only constants to be expanded")
                if item.term.value not in universe and item.term.value != hit.uri:
                    extra.append(_cell(item))
        cells = chunk_cells + (extra if first else [])
        values = _values_text([var], [(c,) for c in dict.fromkeys(cells)])
        if sub is filt.expr:
            return [(filt.span[0], filt.span[1], values)]
        return [(sub.span[0], sub.span[1], "true"), (filt.span[1], filt.span[1], " " + values)]
    if hit.location == "values":
        block: ValuesBlock = hit.node
        col = hit.column
        seed_rows = [[_cell(c) for c in row] for row in block.rows if row[col] is not None and row[col].term.value == hit.uri]
        universe_cells = {f"<{u}>" for u in universe}

        def generated(cells):
            # produced from some seed row in some batch
            return cells[col] in universe_cells and any(
                all(a == b for i, (a, b) in enumerate(zip(cells, sr)) if i != col) for sr in seed_rows
            )

        rows: dict[tuple[str, ...], None] = {}
        for cells in seed_rows:
            for u in chunk_cells:
                rows[tuple(u if i == col else c for i, c in enumerate(cells))] = None
        if first:
            for row in block.rows:
                cells = [_cell(c) for c in row]
                if not generated(cells) and not (row[col] is not None and row[col].term.value == hit.uri):
                    rows[tuple(cells)] = None
        return [(block.span[0], block.span[1], _values_text(block.variables, list(rows)))]
    raise RewriteError(f"cannot expand a URI in {hit.location} position")


# ---------------------------------------------------------------- service


class OntologyService:
    """Label lookup and descendant retrieval against a reference-ontology endpoint."""

    LABEL_LIMIT = 20

    def __init__(
        self,
        endpoint: EndpointConfig,
        namespaces: Sequence[OntologyNamespace] = DEFAULT_NAMESPACES,
        client: Optional[SparqlClient] = None,
        cache_size: int = 256,
    ):
        self.endpoint = endpoint
        self.namespaces = tuple(namespaces)
        self.client = client or SparqlClient()
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def curie_to_uri(self, curie: str) -> str:
        return curie_to_uri(curie, self.namespaces)

    def label(self, uri: str) -> Optional[str]:
        q = (
            f"PREFIX rdfs: <{RDFS}>\n"
            f"SELECT ?label WHERE {{ <{uri}> rdfs:label ?label . }} LIMIT 1"
        )
        rows = self.client.execute_select(self.endpoint, q).rows
        return rows[0]["label"].value if rows and "label" in rows[0] else None

    def lookup_uri(self, text: str) -> list[tuple[str, str]]:
        text = (text or "").strip()
        if not text:
            raise ArgumentError("lookup text is empty")
        if _CURIE_RE.match(text):
            try:
                resolved = self.curie_to_uri(text)
            except NotFoundError:
                resolved = None
            if resolved is not None:
                return [(resolved, self.label(resolved) or "")]
        needle = text.lower()
        q = (
            f"PREFIX rdfs: <{RDFS}>\n"
            f"PREFIX oboInOwl: <{OBO_IN_OWL}>\n"
            "SELECT DISTINCT ?uri ?label ?text WHERE {\n"
            "  VALUES ?labelPredicate { rdfs:label oboInOwl:hasExactSynonym }\n"
            "  ?uri ?labelPredicate ?text .\n"
            "  ?uri rdfs:label ?label .\n"
            f'  FILTER(isIRI(?uri) && CONTAINS(LCASE(STR(?text)), "{escape_string(needle)}"))\n'
            "}\nLIMIT 500"
        )
        result = self.client.execute_select(self.endpoint, q)
        best: dict[str, tuple] = {}
        for row in result.rows:
            u, lab, txt = row["uri"].value, row["label"].value, row["text"].value
            # exact label/synonym matches first, then shorter labels
            key = (txt.lower() != needle, len(lab), lab.lower(), u, lab)
            if u not in best or key < best[u]:
                best[u] = key
        ranked = sorted(best.values())[: self.LABEL_LIMIT]
        return [(key[3], key[4]) for key in ranked]

    def namespace_for(self, uri: str) -> Optional[OntologyNamespace]:
        return find_namespace(uri, self.namespaces)

    def get_descendants(self, uri: str, config: ExpansionConfig) -> tuple[list[str], ExpansionReport]:
        started = time.perf_counter()
        ns = self.namespace_for(uri)
        if ns is None or not config.enabled or ns.prefix.upper() not in config.enabled_namespaces:
            raise ExpansionSkipped(f"{uri} is not in an enabled ontology namespace")
        descendants, truncated = self._descendants(uri, config.max_descendants)
        uris = uri_set(uri, descendants, config.include_seed)
        report = ExpansionReport(
            seed_uri=uri,
            namespace_prefix=ns.prefix,
            descendant_count=len(descendants),
            batch_count=batch_count(len(uris), config.batch_size) if descendants else 0,
            batch_size=config.batch_size,
            truncated=truncated,
            elapsed=round(time.perf_counter() - started, 6),
        )
        return uris, report

    def _descendants(self, uri: str, bound: int) -> tuple[list[str], bool]:
        key = (uri, bound)
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        found = self._fetch(uri, bound)
        with self._lock:
            self._cache[key] = found
            self._cache.move_to_end(key)
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return found

    def _fetch(self, uri: str, bound: int) -> tuple[list[str], bool]:
        # one row past the bound tells "exactly bound" apart from "cut off"
        want = bound + 1
        page = self.endpoint.max_results_per_request
        out: list[str] = []
        offset = 0
        while len(out) < want:
            limit = min(page, want - len(out))
            q = (
                f"PREFIX rdfs: <{RDFS}>\n"
                "SELECT DISTINCT ?descendant WHERE {\n"
                f"  ?descendant rdfs:subClassOf <{uri}> .\n"
                f"  FILTER(isIRI(?descendant) && ?descendant != <{uri}>)\n"
                "}\nORDER BY ?descendant\n"
                f"LIMIT {limit}" + (f" OFFSET {offset}" if offset else "")
            )
            rows = self.client.execute_select(self.endpoint, q).rows
            out.extend(r["descendant"].value for r in rows if "descendant" in r)
            offset += len(rows)
            if len(rows) < limit:
                break
        out = sorted(set(out))
        return out[:bound], len(out) > bound
