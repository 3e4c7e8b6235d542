"""Text-level query rewrites driven by parser spans."""

from __future__ import annotations

from ..errors import RewriteError, SparqlSyntaxError
from .parser import SelectQuery, parse_query
from .terms import is_absolute_uri


def apply_edits(text: str, edits: list[tuple[int, int, str]]) -> str:
    """Apply non-overlapping ``(start, end, replacement)`` edits to ``text``."""
    out = text
    last = None
    for start, end, repl in sorted(edits, key=lambda e: (e[0], e[1]), reverse=True):
        if last is not None and end > last:
            raise RewriteError("overlapping rewrite edits")
        out = out[:start] + repl + out[end:]
        last = start
    return out


def _parse_for_rewrite(query) -> SelectQuery:
    if isinstance(query, SelectQuery):
        return query
    try:
        return parse_query(query)
    except SparqlSyntaxError as exc:
        raise RewriteError(f"cannot rewrite query: {exc}") from exc


def has_graph_block(query) -> bool:
    return _parse_for_rewrite(query).has_graph_block


def scope_to_graph(query, graph_uri: str) -> str:
    """Restrict the WHERE pattern of a SELECT query to one named graph.

    Queries that already name a GRAPH are returned unchanged; callers that
    want to report that should check :func:`has_graph_block` first.
    """
    if not is_absolute_uri(graph_uri) or any(c in graph_uri for c in "<>\" {}"):
        raise RewriteError(f"graph URI is not an absolute IRI: {graph_uri!r}")
    parsed = _parse_for_rewrite(query)
    if parsed.has_graph_block:
        return parsed.text
    open_at = parsed.where.span[0]
    close_at = parsed.where.span[1] - 1
    return apply_edits(
        parsed.text,
        [
            (open_at + 1, open_at + 1, f" GRAPH <{graph_uri}> {{"),
            (close_at, close_at, "} "),
        ],
    )
