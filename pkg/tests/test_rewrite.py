import pytest
from hypothesis import given, strategies as st

from okn_mcp.errors import RewriteError
from okn_mcp.sparql.parser import parse_query
from okn_mcp.sparql.rewrite import apply_edits, has_graph_block, scope_to_graph

G = "https://purl.org/okn/frink/kg/nde"


def test_scope_wraps_where_body():
    q = "SELECT ?s WHERE { ?s ?p ?o } LIMIT 3"
    out = scope_to_graph(q, G)
    assert out == f"SELECT ?s WHERE {{ GRAPH <{G}> {{ ?s ?p ?o }} }} LIMIT 3"
    assert has_graph_block(parse_query(out))


def test_scope_idempotent_when_graph_present():
    q = f"SELECT ?s WHERE {{ GRAPH <{G}> {{ ?s ?p ?o }} }}"
    assert scope_to_graph(q, G) == q
    assert scope_to_graph(scope_to_graph("SELECT * { ?s ?p ?o }", G), G) == scope_to_graph("SELECT * { ?s ?p ?o }", G)


def test_scope_preserves_prefixes_and_modifiers():
    q = "PREFIX x: <http://x/>\n# note\nSELECT ?s WHERE {\n  ?s x:p ?o .\n}\nORDER BY ?s"
    out = scope_to_graph(q, G)
    assert out.startswith("PREFIX x: <http://x/>\n# note\nSELECT ?s WHERE {")
    assert out.endswith("\nORDER BY ?s")
    assert "  ?s x:p ?o .\n" in out


def test_scope_rejects_unparseable():
    with pytest.raises(RewriteError):
        scope_to_graph("DESCRIBE <http://x>", G)


def test_scope_rejects_bad_graph_uri():
    with pytest.raises(RewriteError):
        scope_to_graph("SELECT * { ?s ?p ?o }", "not a uri")


def test_apply_edits_overlap():
    with pytest.raises(RewriteError):
        apply_edits("abcdef", [(0, 3, "x"), (2, 4, "y")])


@given(st.text("abcdefgh", min_size=1, max_size=30), st.data())
def test_apply_edits_matches_manual(text, data):
    # non-overlapping edits applied in any order give the left-to-right splice
    cuts = sorted(data.draw(st.lists(st.integers(0, len(text)), min_size=0, max_size=6, unique=True)))
    pairs = list(zip(cuts[0::2], cuts[1::2]))
    edits = [(a, b, f"<{i}>") for i, (a, b) in enumerate(pairs)]
    expected, pos = "", 0
    for a, b, rep in edits:
        expected += text[pos:a] + rep
        pos = b
    expected += text[pos:]
    shuffled = data.draw(st.permutations(edits))
    assert apply_edits(text, list(shuffled)) == expected
