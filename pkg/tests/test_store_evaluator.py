import pytest

from okn_mcp.errors import EvaluationError, FixtureParseError
from okn_mcp.fixture import TripleStore, evaluate, parse_ntriples
from okn_mcp.fixture.federation import GRAPH_FILES, DATA
from okn_mcp.sparql.terms import literal, uri

RDFS_SUB = "http://www.w3.org/2000/01/rdf-schema#subClassOf"


def test_parse_ntriples_forms():
    text = ('<http://a.org/s> <http://a.org/p> "x"@en .\n'
            '# comment\n\n'
            '_:b1 <http://a.org/p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
            '<http://a.org/s> <http://a.org/p> "esc \\"q\\"" .\n')
    triples = list(parse_ntriples(text))
    assert len(triples) == 3
    assert triples[0][2] == literal("x", language="en")
    assert triples[1][0].kind == "blank"
    assert triples[2][2].value == 'esc "q"'


@pytest.mark.parametrize("bad", ['<rel> <http://a/p> <http://a/o> .', '<http://a/s> <http://a/p> ?x .'])
def test_parse_ntriples_errors(bad):
    with pytest.raises(FixtureParseError) as info:
        list(parse_ntriples("\n" + bad))
    assert info.value.line == 2


def test_shipped_fixtures_parse():
    for name in [*GRAPH_FILES.values(), "ontology.nt"]:
        triples = list(parse_ntriples((DATA / name).read_text()))
        assert triples, name


def test_store_dedup_and_union():
    s = TripleStore()
    t = (uri("http://a/s"), uri("http://a/p"), uri("http://a/o"))
    assert s.add("http://g/1", t)
    assert not s.add("http://g/1", t)
    s.add("http://g/2", t)
    assert len(s) == 2
    assert list(s.triples()) == [t]
    assert len(list(s.match(None, p=uri("http://a/p")))) == 1


def test_transitive_closure():
    s = TripleStore()
    nt = "\n".join(f"<http://x/{c}> <{RDFS_SUB}> <http://x/{p}> ." for c, p in [("b", "a"), ("c", "b"), ("d", "c"), ("d", "a")])
    added = s.load_fixture(nt, "http://g/o", transitive_subclass=True)
    pairs = {(a.value[-1], b.value[-1]) for a, _, b in s.triples("http://g/o")}
    assert pairs == {("b", "a"), ("c", "b"), ("d", "c"), ("d", "a"), ("c", "a"), ("d", "b")}
    assert added == 6


def q(store, text):
    return evaluate(store, text).simple_rows()


@pytest.fixture()
def small():
    s = TripleStore()
    s.load_fixture('<http://a/1> <http://a/name> "one" .\n<http://a/2> <http://a/name> "two" .\n'
                   '<http://a/1> <http://a/score> "3"^^<http://www.w3.org/2001/XMLSchema#integer> .', "http://g/A")
    s.load_fixture('<http://a/3> <http://a/name> "three" .', "http://g/B")
    return s


def test_default_graph_is_union(small):
    assert len(q(small, "SELECT ?s WHERE { ?s <http://a/name> ?n }")) == 3


def test_graph_variable(small):
    rows = q(small, "SELECT ?g ?s WHERE { GRAPH ?g { ?s <http://a/name> ?n } } ORDER BY ?s")
    assert [r["g"] for r in rows] == ["http://g/A", "http://g/A", "http://g/B"]


def test_optional_and_bound(small):
    rows = q(small, "SELECT ?s ?v WHERE { ?s <http://a/name> ?n OPTIONAL { ?s <http://a/score> ?v } } ORDER BY ?s")
    assert [r["v"] for r in rows] == ["3", None, None]


def test_filter_type_error_is_false(small):
    rows = q(small, "SELECT ?s WHERE { ?s <http://a/name> ?n FILTER(?n > 2) }")
    assert rows == []


def test_count_empty_group(small):
    assert q(small, "SELECT (COUNT(*) AS ?c) WHERE { ?s <http://a/none> ?o }") == [{"c": "0"}]


def test_unsupported_rejected(small):
    with pytest.raises(EvaluationError):
        evaluate(small, "SELECT ?s WHERE { ?s ?p ?o UNION { ?s ?p ?o } }")
    with pytest.raises(EvaluationError):
        evaluate(small, "SELECT ?s (COUNT(?o) AS ?c) WHERE { ?s ?p ?o }")
