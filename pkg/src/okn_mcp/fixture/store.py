"""In-memory named-graph triple store loaded from N-Triples documents."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from ..errors import FixtureParseError, SparqlSyntaxError
from ..sparql.parser import tokenize, _unescape
from ..sparql.terms import RDFS, RdfTerm, is_absolute_uri

Triple = tuple[RdfTerm, RdfTerm, RdfTerm]
SUBCLASS_OF = RDFS + "subClassOf"


class _Graph:
    __slots__ = ("triples", "by_s", "by_p", "by_o")

    def __init__(self):
        self.triples: dict[Triple, None] = {}  # insertion-ordered set
        self.by_s: dict[RdfTerm, list[Triple]] = defaultdict(list)
        self.by_p: dict[RdfTerm, list[Triple]] = defaultdict(list)
        self.by_o: dict[RdfTerm, list[Triple]] = defaultdict(list)

    def add(self, t: Triple) -> bool:
        if t in self.triples:
            return False
        self.triples[t] = None
        self.by_s[t[0]].append(t)
        self.by_p[t[1]].append(t)
        self.by_o[t[2]].append(t)
        return True

    def match(self, s, p, o) -> Iterable[Triple]:
        candidates = None
        for term, index in ((s, self.by_s), (o, self.by_o), (p, self.by_p)):
            if term is not None:
                bucket = index.get(term, ())
                if candidates is None or len(bucket) < len(candidates):
                    candidates = bucket
        if candidates is None:
            return self.triples.keys()
        return [t for t in candidates if (s is None or t[0] == s) and (p is None or t[1] == p) and (o is None or t[2] == o)]


class TripleStore:
    """Named graphs of RDF triples. The default graph is the union of all graphs."""

    def __init__(self):
        self._graphs: dict[str, _Graph] = {}

    def __len__(self):
        return sum(len(g.triples) for g in self._graphs.values())

    @property
    def graph_uris(self) -> list[str]:
        return list(self._graphs)

    def graph_size(self, graph_uri: str) -> int:
        g = self._graphs.get(graph_uri)
        return len(g.triples) if g else 0

    def add(self, graph_uri: str, triple: Triple) -> bool:
        if not is_absolute_uri(graph_uri):
            raise ValueError(f"graph URI must be absolute: {graph_uri!r}")
        g = self._graphs.get(graph_uri)
        if g is None:
            g = self._graphs[graph_uri] = _Graph()
        return g.add(triple)

    def create_graph(self, graph_uri: str):
        if not is_absolute_uri(graph_uri):
            raise ValueError(f"graph URI must be absolute: {graph_uri!r}")
        self._graphs.setdefault(graph_uri, _Graph())

    def triples(self, graph_uri: Optional[str] = None) -> Iterator[Triple]:
        if graph_uri is not None:
            g = self._graphs.get(graph_uri)
            if g:
                yield from g.triples
            return
        seen = set()
        for g in self._graphs.values():
            for t in g.triples:
                if t not in seen:
                    seen.add(t)
                    yield t

    def match(self, graph_uri: Optional[str], s=None, p=None, o=None) -> Iterable[Triple]:
        if graph_uri is not None:
            g = self._graphs.get(graph_uri)
            return g.match(s, p, o) if g else ()
        if len(self._graphs) == 1:
            return next(iter(self._graphs.values())).match(s, p, o)
        out: dict[Triple, None] = {}
        for g in self._graphs.values():
            for t in g.match(s, p, o):
                out[t] = None
        return out.keys()

    def load_fixture(self, source: Union[str, Path], graph_uri: str, transitive_subclass: bool = False) -> int:
        """Load an N-Triples document (text or path) into ``graph_uri``.

        With ``transitive_subclass`` the graph's rdfs:subClassOf edges are
        closed transitively after loading. Returns the number of new triples.
        """
        if isinstance(source, Path):
            source = source.read_text(encoding="utf-8")
        self.create_graph(graph_uri)
        added = sum(self.add(graph_uri, t) for t in parse_ntriples(source))
        if transitive_subclass:
            added += self.close_subclass(graph_uri)
        return added

    def close_subclass(self, graph_uri: str) -> int:
        sub = RdfTerm("uri", SUBCLASS_OF)
        parents: dict[RdfTerm, set[RdfTerm]] = defaultdict(set)
        for s, _, o in list(self.match(graph_uri, None, sub, None)):
            if o.kind == "uri":
                parents[s].add(o)
        added = 0
        for node in list(parents):
            stack = list(parents[node])
            reached = set()
            while stack:
                cur = stack.pop()
                if cur in reached:
                    continue
                reached.add(cur)
                stack.extend(parents.get(cur, ()))
            reached.discard(node)
            for anc in sorted(reached, key=lambda t: t.value):
                added += self.add(graph_uri, (node, sub, anc))
        return added


def parse_ntriples(text: str) -> Iterator[Triple]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            tokens = tokenize(stripped)
        except SparqlSyntaxError as exc:
            raise FixtureParseError(str(exc), lineno) from None
        terms = []
        i = 0
        while i < len(tokens) and tokens[i].kind not in ("eof",) and not (tokens[i].kind == "punct" and tokens[i].text == "."):
            tok = tokens[i]
            if tok.kind == "iri":
                value = tok.text[1:-1]
                if not is_absolute_uri(value):
                    raise FixtureParseError(f"relative IRI {value!r}", lineno)
                terms.append(RdfTerm("uri", value))
            elif tok.kind == "bnode":
                terms.append(RdfTerm("blank", tok.text[2:]))
            elif tok.kind == "string":
                value = _unescape(tok.text[1:-1])
                nxt = tokens[i + 1]
                if nxt.kind == "langtag":
                    terms.append(RdfTerm("literal", value, None, nxt.text[1:].lower()))
                    i += 1
                elif nxt.kind == "dtype":
                    dt = tokens[i + 2]
                    if dt.kind != "iri":
                        raise FixtureParseError("datatype must be an IRI", lineno)
                    datatype = dt.text[1:-1]
                    terms.append(RdfTerm("literal", value, None if datatype.endswith("#string") else datatype))
                    i += 2
                else:
                    terms.append(RdfTerm("literal", value))
            else:
                raise FixtureParseError(f"unexpected token {tok.text!r}", lineno)
            i += 1
        if len(terms) != 3 or tokens[i].kind == "eof":
            raise FixtureParseError("expected '<s> <p> <o> .'", lineno)
        if terms[0].kind == "literal" or terms[1].kind != "uri":
            raise FixtureParseError("subject must be IRI/blank and predicate an IRI", lineno)
        yield (terms[0], terms[1], terms[2])
