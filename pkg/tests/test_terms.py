import pytest
from hypothesis import given, strategies as st

from okn_mcp.errors import ResultParseError
from okn_mcp.sparql.terms import (
    XSD_INTEGER, RdfTerm, SparqlResultSet, bnode, escape_string, literal, sort_key, term_from_json, uri,
)


def test_uri_requires_absolute():
    with pytest.raises(ValueError):
        uri("relative/path")


def test_literal_cannot_have_language_and_datatype():
    with pytest.raises(ValueError):
        RdfTerm("literal", "x", XSD_INTEGER, "en")


def test_xsd_string_normalised():
    assert literal("a", "http://www.w3.org/2001/XMLSchema#string") == literal("a")


def test_n3_forms():
    assert uri("http://x.org/a").n3() == "<http://x.org/a>"
    assert literal('say "hi"').n3() == '"say \\"hi\\""'
    assert literal("chat", language="fr").n3() == '"chat"@fr'
    assert literal("3", XSD_INTEGER).n3() == f'"3"^^<{XSD_INTEGER}>'
    assert bnode("b0").n3() == "_:b0"


def test_numeric_value():
    assert literal("2.50", "http://www.w3.org/2001/XMLSchema#decimal").numeric_value() == 2.5
    assert literal("2").numeric_value() is None
    assert literal("abc", XSD_INTEGER).numeric_value() is None


def test_sort_key_order():
    terms = [literal("b"), literal("10", XSD_INTEGER), uri("http://a.org/"), bnode("z"), None, literal("9", XSD_INTEGER)]
    ordered = sorted(terms, key=sort_key)
    assert ordered[0] is None
    assert ordered[1].kind == "blank"
    assert ordered[2].kind == "uri"
    assert [t.value for t in ordered[3:5]] == ["9", "10"]
    assert ordered[5].value == "b"


terms_strategy = st.one_of(
    st.builds(lambda s: uri("http://example.org/" + s), st.text("abcxyz0123/#_", max_size=12)),
    st.builds(literal, st.text(max_size=20)),
    st.builds(lambda s, l: literal(s, language=l), st.text(max_size=10), st.sampled_from(["en", "fr", "de-ch"])),
    st.builds(lambda n: literal(str(n), XSD_INTEGER), st.integers(-1000, 1000)),
    st.builds(bnode, st.text("abc123", min_size=1, max_size=6)),
)


@given(st.lists(st.dictionaries(st.sampled_from(["a", "b", "c"]), terms_strategy), max_size=6))
def test_result_json_roundtrip(rows):
    rs = SparqlResultSet(["a", "b", "c"], rows)
    again = SparqlResultSet.from_json(rs.to_json())
    assert again.variables == rs.variables
    assert again.rows == rs.rows


@given(terms_strategy)
def test_term_json_roundtrip(term):
    assert term_from_json(term.to_json()) == term


@pytest.mark.parametrize("doc", [
    None, [], {"head": {}}, {"head": {"vars": ["x"]}},
    {"head": {"vars": ["x"]}, "results": {"bindings": [{"x": {"type": "weird", "value": "1"}}]}},
])
def test_malformed_results_raise(doc):
    with pytest.raises(ResultParseError):
        SparqlResultSet.from_json(doc)


def test_typed_literal_json_variant():
    term = term_from_json({"type": "typed-literal", "value": "5", "datatype": XSD_INTEGER})
    assert term == literal("5", XSD_INTEGER)


def test_escape_string():
    assert escape_string('a\\b"c\nd') == 'a\\\\b\\"c\\nd'


def test_simple_rows_and_tuples():
    rs = SparqlResultSet(["x", "y"], [{"x": uri("http://a.org/1")}])
    assert rs.simple_rows() == [{"x": "http://a.org/1", "y": None}]
    assert rs.row_tuples() == [(uri("http://a.org/1"), None)]
