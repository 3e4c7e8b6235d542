import pytest

from okn_mcp.engine import WARNING_CODES, QueryAnalysis, QueryEngine, get_join_strategy, merge_batches
from okn_mcp.errors import EndpointError, MultiGraphError, NotFoundError, QueryExecutionError
from okn_mcp.sparql.client import SparqlClient
from okn_mcp.ontology import ExpansionConfig
from okn_mcp.registry import load_registry
from okn_mcp.sparql.parser import parse_query
from okn_mcp.sparql.terms import XSD_INTEGER, SparqlResultSet, literal, uri

CVD = "http://purl.obolibrary.org/obo/MONDO_0004995"
HC = "<http://schema.org/healthCondition>"


@pytest.fixture()
def engine(services):
    return services.engine


def codes(analysis):
    return analysis.warning_codes


def test_warning_codes_closed():
    a = QueryAnalysis("http://g")
    with pytest.raises(ValueError):
        a.warn("made_up", "x")
    assert len(WARNING_CODES) == 7


def test_plan_scopes_and_warns_no_limit(engine):
    _, batches, a = engine.plan("nde", "SELECT ?s WHERE { ?s ?p ?o }")
    assert batches == ["SELECT ?s WHERE { GRAPH <https://purl.org/okn/frink/kg/nde> { ?s ?p ?o } }"]
    assert codes(a) == ["no_limit"]


def test_aggregate_needs_no_limit(engine):
    _, _, a = engine.plan("nde", "SELECT (COUNT(*) AS ?n) WHERE { ?s ?p ?o }")
    assert codes(a) == []


def test_existing_graph_block_kept(engine):
    q = "SELECT ?s WHERE { GRAPH <https://purl.org/okn/frink/kg/prokn> { ?s ?p ?o } } LIMIT 1"
    _, batches, a = engine.plan("nde", q)
    assert batches == [q]
    assert codes(a) == ["no_graph_scope_added"]


def test_unparsed_fallback_runs_verbatim(engine, fed):
    q = "SELECT ?s WHERE { { ?s ?p ?o } UNION { ?s ?p ?o } } LIMIT 1"
    parsed, batches, a = engine.plan("nde", q)
    assert parsed is None and batches == [q]
    assert codes(a) == ["unparsed_fallback"]
    # the fixture endpoint can't run UNION either, so execution surfaces a batch error
    with pytest.raises(QueryExecutionError) as info:
        engine.query("nde", q)
    assert info.value.batch_index == 0 and info.value.graph == "nde"


def test_unsupported_location_warns(engine):
    _, batches, a = engine.plan("nde", f"SELECT ?p WHERE {{ <{CVD}> ?p ?o }} LIMIT 5")
    assert len(batches) == 1 and codes(a) == ["unparsed_fallback"]
    assert a.expansion is None


def test_multiple_seeds_warn(engine):
    q = f"SELECT ?d WHERE {{ ?d {HC} <{CVD}> . ?d {HC} <http://purl.obolibrary.org/obo/MONDO_9900020> }} LIMIT 5"
    _, _, a = engine.plan("nde", q)
    assert "expansion_skipped_multiple_seeds" in codes(a)
    assert a.expansion.seed_uri == CVD


def test_expansion_truncated_warns(engine):
    q = f"SELECT ?d WHERE {{ ?d {HC} <{CVD}> }} LIMIT 5"
    _, batches, a = engine.plan("nde", q, ExpansionConfig(max_descendants=3))
    assert "expansion_truncated" in codes(a)
    assert a.expansion.descendant_count == 3
    assert len(batches) == 1 and batches[0].count("MONDO_") == 4


def test_unknown_predicate_after_schema(engine):
    engine.schema.get_schema("nde")
    _, _, a = engine.plan("nde", "SELECT ?s WHERE { ?s <http://schema.org/typo> ?o } LIMIT 1")
    assert codes(a) == ["unknown_predicate"]


def test_unknown_graph(engine):
    with pytest.raises(NotFoundError):
        engine.plan("nope", "SELECT * { ?s ?p ?o }")


def test_expansion_disabled_by_config(engine):
    q = f"SELECT ?d WHERE {{ ?d {HC} <{CVD}> }}"
    rs, a = engine.query("nde", q, ExpansionConfig.disabled())
    assert a.expansion is None and len(rs.rows) == 4


def test_batching_does_not_change_results(engine):
    q = f"SELECT ?d WHERE {{ ?d {HC} <{CVD}> }} ORDER BY ?d"
    one, a1 = engine.query("nde", q)
    many, a5 = engine.query("nde", q, ExpansionConfig(batch_size=3))
    assert a1.batches == 1 and a5.batches == 7
    assert many.rows == one.rows
    assert len(one.rows) == 51


@pytest.mark.parametrize("window", ["OFFSET 10", "LIMIT 7 OFFSET 10", "OFFSET 45 LIMIT 20", "LIMIT 5"])
def test_batched_window_applied_once(engine, window):
    base = f"SELECT ?d WHERE {{ ?d {HC} <{CVD}> }} ORDER BY ?d"
    everything, _ = engine.query("nde", base, ExpansionConfig(batch_size=3))
    parsed = parse_query(f"{base} {window}")
    expected = everything.rows[parsed.offset or 0:]
    if parsed.limit is not None:
        expected = expected[: parsed.limit]
    many, a = engine.query("nde", f"{base} {window}", ExpansionConfig(batch_size=3))
    assert a.batches == 7
    assert many.rows == expected
    one, _ = engine.query("nde", f"{base} {window}")
    assert one.rows == expected


def test_batched_aggregate_reaggregated(engine):
    q = (f"SELECT ?c (COUNT(?d) AS ?n) (MIN(?d) AS ?first) WHERE {{ ?d {HC} ?c FILTER(?c = <{CVD}>) }} "
         "GROUP BY ?c ORDER BY DESC(?n) ?c")
    one, _ = engine.query("nde", q)
    q_all = f"SELECT (COUNT(?d) AS ?n) WHERE {{ ?d {HC} ?c FILTER(?c = <{CVD}>) }}"
    total_one, _ = engine.query("nde", q_all)
    total_many, a = engine.query("nde", q_all, ExpansionConfig(batch_size=4))
    assert a.batches == 5
    assert total_many.rows == total_one.rows == [{"n": literal("51", XSD_INTEGER)}]
    many, _ = engine.query("nde", q, ExpansionConfig(batch_size=4))
    assert many.rows == one.rows


def test_merge_limit_and_order():
    parsed = parse_query("SELECT ?x WHERE { ?x ?p ?o } ORDER BY DESC(?x) LIMIT 3")
    a = SparqlResultSet(["x"], [{"x": uri(f"http://e/{i}")} for i in (1, 4, 5)])
    b = SparqlResultSet(["x"], [{"x": uri(f"http://e/{i}")} for i in (2, 3, 6)])
    out = merge_batches(parsed, [a, b])
    assert [r["x"].value[-1] for r in out.rows] == ["6", "5", "4"]


def test_merge_distinct_only_dedups_when_asked():
    rows = [{"x": uri("http://e/1")}]
    plain = merge_batches(parse_query("SELECT ?x WHERE { ?x ?p ?o }"), [SparqlResultSet(["x"], rows)] * 2)
    distinct = merge_batches(parse_query("SELECT DISTINCT ?x WHERE { ?x ?p ?o }"), [SparqlResultSet(["x"], rows)] * 2)
    assert len(plain.rows) == 2 and len(distinct.rows) == 1


def test_batch_failure_names_batch(engine, fed):
    q = f"SELECT ?d WHERE {{ ?d {HC} <{CVD}> }}"
    engine.ontology.get_descendants(CVD, ExpansionConfig())  # warm cache so only batches hit the federation
    endpoint = engine.registry.federation()
    fed.federation.fail_next(endpoint.max_retries + 1, 500)
    with pytest.raises(QueryExecutionError) as info:
        engine.query("nde", q, ExpansionConfig(batch_size=100))
    assert info.value.batch_index == 0


class FailFor(SparqlClient):
    """Fails every request whose text mentions ``marker``."""

    def __init__(self, marker):
        super().__init__()
        self.marker = marker

    def execute_select(self, endpoint, query):
        if self.marker in query:
            raise EndpointError("boom", status=500)
        return super().execute_select(endpoint, query)


def test_multi_graph_partial_failure(fed):
    eng = QueryEngine(fed.registry, client=FailFor("kg/prokn>"))
    q = "SELECT ?s WHERE { ?s <http://www.w3.org/2000/01/rdf-schema#label> ?l } LIMIT 2"
    res = eng.multi_graph_query(["biobricks", "prokn", "biobricks"], q)
    assert res.warnings[0][0] == "duplicate_graph"
    assert res.per_graph_counts == {"biobricks": 2}
    assert list(res.errors) == ["prokn"] and "boom" in res.errors["prokn"]
    assert {r["source_graph"].value for r in res.rows} == {"biobricks"}


def test_multi_graph_all_fail(engine, fed):
    fed.federation.fail_next(20, 500)
    try:
        with pytest.raises(MultiGraphError) as info:
            engine.multi_graph_query(["nde", "prokn"], "SELECT ?s WHERE { ?s ?p ?o } LIMIT 1")
        assert set(info.value.causes) == {"nde", "prokn"}
    finally:
        fed.federation._faults.clear()


def test_join_strategies():
    reg = load_registry()
    d = get_join_strategy("spoke-genelab", "spoke-okn", reg)
    assert d.kind == "direct" and d.shared_namespaces == {"NCBIGene"} and d.bridge_graph is None
    n = get_join_strategy("prokn", "gene-expression-atlas", reg)
    assert n.kind == "none"
    custom = load_registry({
        "federation_endpoint": "http://x/s", "ontology_endpoint": "http://x/o",
        "graphs": [
            {"name": "a", "graph_uri": "http://g/a", "namespaces": ["MGI"]},
            {"name": "b", "graph_uri": "http://g/b", "namespaces": ["CHEBI"]},
            {"name": "weak", "graph_uri": "http://g/w", "namespaces": ["MGI", "CHEBI"]},
            {"name": "tie", "graph_uri": "http://g/t", "namespaces": ["MGI", "CHEBI"]},
            {"name": "none", "graph_uri": "http://g/n", "namespaces": ["GO"]},
        ],
    })
    b = get_join_strategy("a", "b", custom)
    assert b.kind == "bridge" and b.bridge_graph == "weak"
    assert "weak" in b.explanation
