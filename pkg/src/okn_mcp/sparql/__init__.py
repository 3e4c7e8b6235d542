from .client import EndpointConfig, SparqlClient, execute_select
from .parser import SelectQuery, parse_query
from .rewrite import has_graph_block, scope_to_graph
from .terms import RdfTerm, SparqlResultSet, bnode, literal, uri

__all__ = [
    "EndpointConfig",
    "RdfTerm",
    "SelectQuery",
    "SparqlClient",
    "SparqlResultSet",
    "bnode",
    "execute_select",
    "has_graph_block",
    "literal",
    "parse_query",
    "scope_to_graph",
    "uri",
]
