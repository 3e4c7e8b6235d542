import math

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from okn_mcp.errors import ArgumentError, ExpansionSkipped, NotFoundError, RewriteError
from okn_mcp.fixture import FixtureEndpoint, TripleStore
from okn_mcp.ontology import (
    DEFAULT_NAMESPACES, ExpansionConfig, OntologyService, batch_count, curie_to_uri, detect_expandable_uris,
    expand_query, partition, uri_set,
)
from okn_mcp.sparql.client import EndpointConfig
from okn_mcp.sparql.parser import parse_query

OBO = "http://purl.obolibrary.org/obo/"
SUB = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
CVD = OBO + "MONDO_0004995"


def m(i):
    return f"{OBO}MONDO_{i:07d}"


# ---------------------------------------------------------------- pure helpers

def test_curie_to_uri():
    assert curie_to_uri("MONDO:0004995") == CVD
    assert curie_to_uri("mondo:0004995") == CVD
    assert curie_to_uri("NCBIGene:7157") == "http://identifiers.org/ncbigene/7157"
    assert curie_to_uri("MGI:98834") == "http://identifiers.org/mgi/MGI:98834"
    with pytest.raises(ArgumentError):
        curie_to_uri("MONDO_0004995")
    with pytest.raises(NotFoundError) as info:
        curie_to_uri("FOO:1")
    assert "MONDO" in str(info.value)


def test_namespace_roundtrip():
    for ns in DEFAULT_NAMESPACES:
        assert ns.local_id(ns.to_uri("123")) == "123"


def test_config_defaults():
    c = ExpansionConfig()
    assert (c.max_descendants, c.batch_size, c.include_seed) == (5000, 20, True)
    assert c.enabled_namespaces == {"MONDO", "UBERON", "HP", "GO", "CL", "CHEBI"}
    assert not ExpansionConfig(max_descendants=0).enabled
    with pytest.raises(ArgumentError):
        ExpansionConfig(batch_size=0)


def test_eighty_batches():
    seeds = uri_set(m(1), [m(i) for i in range(2, 1594)], True)
    assert len(seeds) == 1593
    assert batch_count(len(seeds), ExpansionConfig().batch_size) == 80
    assert len(partition(seeds, 20)) == 80


@given(st.lists(st.integers(), max_size=300), st.integers(1, 50))
def test_partition_properties(items, size):
    chunks = partition(items, size)
    assert [x for c in chunks for x in c] == items
    assert all(1 <= len(c) <= size for c in chunks)
    assert len(chunks) == batch_count(len(items), size) == math.ceil(len(items) / size)


@given(st.sets(st.integers(0, 500), max_size=60), st.booleans())
def test_uri_set_order(ids, include):
    seed = m(9999)
    desc = [m(i) for i in ids] + [seed]
    out = uri_set(seed, desc, include)
    assert (seed in out) == include
    assert not include or out[0] == seed
    rest = out[1:] if include else out
    assert rest == sorted({m(i) for i in ids})


# ---------------------------------------------------------------- detection

CFG = ExpansionConfig()


@pytest.mark.parametrize("where, location", [
    (f"?d <http://schema.org/healthCondition> <{CVD}>", "object"),
    (f"<{CVD}> <http://x/p> ?o", "subject"),
    (f"?s <{CVD}> ?o", "predicate"),
    (f"GRAPH <{CVD}> {{ ?s ?p ?o }}", "graph"),
    (f"?d ?p ?c FILTER(?c = <{CVD}>)", "filter-equality"),
    (f"?d ?p ?c FILTER(<{CVD}> = ?c && BOUND(?d))", "filter-equality"),
    (f"?d ?p ?c FILTER(?c IN (<{CVD}>, <http://x/other>))", "filter-in"),
    (f"?d ?p ?c FILTER(?c != <{CVD}>)", "filter-other"),
    (f"?d ?p ?c FILTER(?c = <{CVD}> || BOUND(?d))", "filter-other"),
    (f"?d ?p ?c FILTER(?c NOT IN (<{CVD}>))", "filter-other"),
    (f"VALUES ?c {{ <{CVD}> }} ?d ?p ?c", "values"),
])
def test_locations(where, location):
    hits = detect_expandable_uris(f"SELECT * WHERE {{ {where} }}", CFG)
    assert [h.location for h in hits] == [location]
    assert hits[0].uri == CVD and hits[0].namespace == "MONDO"


def test_non_obo_ignored():
    q = "SELECT * WHERE { ?g <http://x/p> <http://identifiers.org/ncbigene/7157> }"
    assert detect_expandable_uris(q, CFG) == []


def test_disabled_detects_nothing():
    q = f"SELECT * WHERE {{ ?d ?p <{CVD}> }}"
    assert detect_expandable_uris(q, ExpansionConfig.disabled()) == []
    assert detect_expandable_uris(q, ExpansionConfig(enabled_namespaces=frozenset({"GO"}))) == []


# ---------------------------------------------------------------- rewriting

def test_object_rewrite_batches_and_bytes():
    q = f"PREFIX s: <http://schema.org/>\nSELECT ?d WHERE {{ ?d s:healthCondition <{CVD}> . ?d s:name ?n }} LIMIT 5"
    desc = [m(9900000 + i) for i in range(1, 45)]
    out = expand_query(q, CVD, desc, ExpansionConfig())
    assert len(out) == 3
    seen = []
    for text in out:
        parsed = parse_query(text)
        values = [e for e in parsed.where.elements if type(e).__name__ == "ValuesBlock"]
        assert len(values) == 1
        seen += [row[0].term.value for row in values[0].rows]
        assert text.startswith("PREFIX s: <http://schema.org/>\nSELECT ?d WHERE {")
        assert text.endswith("?d s:name ?n } LIMIT 5")
        assert CVD not in text.split("VALUES")[0]
    assert seen == uri_set(CVD, desc, True)


def test_filter_equality_replaced_by_values():
    q = f"SELECT ?c WHERE {{ ?d ?p ?c FILTER(?c = <{CVD}>) }}"
    [out] = expand_query(q, CVD, [m(1)], ExpansionConfig())
    assert "FILTER" not in out
    assert parse_query(out).where.elements[-1].variables == ["c"]


def test_filter_conjunct_kept():
    q = f'SELECT ?c WHERE {{ ?d ?p ?c ; <http://x/n> ?n FILTER(?c = <{CVD}> && CONTAINS(?n, "a")) }}'
    [out] = expand_query(q, CVD, [m(1)], ExpansionConfig())
    assert 'CONTAINS(?n, "a")' in out
    assert f"?c = <{CVD}>" not in out


def test_in_list_extras_go_to_first_batch_only():
    other = "http://example.org/other"
    q = f"SELECT ?d WHERE {{ ?d ?p ?c FILTER(?c IN (<{CVD}>, <{other}>)) }}"
    out = expand_query(q, CVD, [m(i) for i in range(1, 30)], ExpansionConfig(batch_size=10))
    assert len(out) == 3
    assert [other in t for t in out] == [True, False, False]


def test_values_rows_replicated():
    q = f'SELECT ?c ?t WHERE {{ VALUES (?c ?t) {{ (<{CVD}> "cv") (<http://x/y> "other") }} ?d ?p ?c }}'
    out = expand_query(q, CVD, [m(1), m(2)], ExpansionConfig(batch_size=2))
    rows0 = parse_query(out[0]).where.elements[0].rows
    rows1 = parse_query(out[1]).where.elements[0].rows
    assert [(r[0].term.value, r[1].term.value) for r in rows0] == [(CVD, "cv"), (m(1), "cv"), ("http://x/y", "other")]
    assert [(r[0].term.value, r[1].term.value) for r in rows1] == [(m(2), "cv")]


def test_fresh_variable_avoids_collision():
    q = f"SELECT ?okn_expanded WHERE {{ ?okn_expanded ?p <{CVD}> }}"
    [out] = expand_query(q, CVD, [m(1)], ExpansionConfig())
    assert "?okn_expanded2" in out


def test_unsupported_position_raises():
    with pytest.raises(RewriteError, match="subject"):
        expand_query(f"SELECT * WHERE {{ <{CVD}> ?p ?o }}", CVD, [m(1)], ExpansionConfig())
    with pytest.raises(RewriteError, match="does not occur"):
        expand_query("SELECT * WHERE { ?s ?p ?o }", CVD, [m(1)], ExpansionConfig())


# ---------------------------------------------------------------- service vs endpoint

@pytest.fixture(scope="module")
def onto_endpoint():
    ep = FixtureEndpoint(TripleStore()).start()
    yield ep
    ep.stop()


def load_dag(ep, edges, n):
    store = TripleStore()
    store.create_graph("http://example.org/onto")
    nt = "\n".join(f"<{m(c)}> <{SUB}> <{m(p)}> ." for c, p in edges)
    nt += "\n" + "\n".join(f'<{m(i)}> <http://www.w3.org/2000/01/rdf-schema#label> "term {i}" .' for i in range(n))
    store.load_fixture(nt, "http://example.org/onto", transitive_subclass=True)
    ep.store = store


def brute_closure(edges, seed):
    children = {}
    for c, p in edges:
        children.setdefault(p, set()).add(c)
    out, stack = set(), [seed]
    while stack:
        for c in children.get(stack.pop(), ()):
            if c not in out:
                out.add(c)
                stack.append(c)
    out.discard(seed)
    return out


@st.composite
def dags(draw, max_nodes=60):
    n = draw(st.integers(2, max_nodes))
    edges = set()
    for child in range(1, n):
        for parent in draw(st.sets(st.integers(0, child - 1), max_size=3)):
            edges.add((child, parent))
    return n, sorted(edges)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(dags(), st.data())
def test_descendants_equal_closure(onto_endpoint, dag, data):
    n, edges = dag
    load_dag(onto_endpoint, edges, n)
    seed = data.draw(st.integers(0, n - 1))
    # a tiny page size forces several OFFSET pages
    svc = OntologyService(EndpointConfig(onto_endpoint.url, max_results_per_request=7, backoff=0.01))
    uris, report = svc.get_descendants(m(seed), ExpansionConfig(include_seed=False))
    assert set(uris) == {m(i) for i in brute_closure(edges, seed)}
    assert report.descendant_count == len(uris) and not report.truncated


def test_truncation_bound(onto_endpoint):
    edges = [(i, 0) for i in range(1, 11)]
    load_dag(onto_endpoint, edges, 11)
    svc = OntologyService(EndpointConfig(onto_endpoint.url))
    uris, rep = svc.get_descendants(m(0), ExpansionConfig(max_descendants=4, include_seed=False))
    assert len(uris) == 4 and rep.truncated
    uris, rep = svc.get_descendants(m(0), ExpansionConfig(max_descendants=10, include_seed=False))
    assert len(uris) == 10 and not rep.truncated


def test_cache_hits_skip_endpoint(onto_endpoint):
    load_dag(onto_endpoint, [(1, 0), (2, 1)], 3)
    svc = OntologyService(EndpointConfig(onto_endpoint.url), cache_size=1)
    svc.get_descendants(m(0), CFG)
    before = len(onto_endpoint.received)
    svc.get_descendants(m(0), CFG)
    assert len(onto_endpoint.received) == before
    svc.get_descendants(m(1), CFG)  # evicts m(0)
    svc.get_descendants(m(0), CFG)
    assert len(onto_endpoint.received) == before + 2


def test_skipped_namespace(onto_endpoint):
    svc = OntologyService(EndpointConfig(onto_endpoint.url))
    with pytest.raises(ExpansionSkipped):
        svc.get_descendants("http://identifiers.org/ncbigene/7157", CFG)
    with pytest.raises(ExpansionSkipped):
        svc.get_descendants(CVD, ExpansionConfig(max_descendants=0))


def test_lookup_on_fixture(fed):
    svc = OntologyService(fed.registry.ontology(), fed.registry.namespaces)
    assert svc.lookup_uri("cardiovascular disease")[0] == (CVD, "cardiovascular disorder")
    assert svc.lookup_uri("MONDO:0004995") == [(CVD, "cardiovascular disorder")]
    hits = svc.lookup_uri("syndrome")
    assert len(hits) >= 3 and all("syndrome" in lab.lower() for _, lab in hits)
    assert svc.lookup_uri("zzzz no such thing") == []
    with pytest.raises(ArgumentError):
        svc.lookup_uri(" ")


def test_fixture_cvd_descendants(fed):
    from okn_mcp.fixture.federation import expected_cardiovascular_counts

    svc = OntologyService(fed.registry.ontology(), fed.registry.namespaces)
    uris, report = svc.get_descendants(CVD, CFG)
    assert uris[0] == CVD
    assert report.descendant_count == expected_cardiovascular_counts()["descendant_count"]
    assert report.batch_count == 1
