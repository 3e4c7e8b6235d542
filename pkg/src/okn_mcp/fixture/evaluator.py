"""SELECT evaluator over a :class:`TripleStore` for the supported subset.

Group elements are folded left to right (join for triples, VALUES, GRAPH and
nested groups; left join for OPTIONAL); FILTERs apply to their whole group.
Anything outside the subset raises :class:`EvaluationError`.
"""

from __future__ import annotations

import re
from collections import defaultdict
from decimal import Decimal
from typing import Optional

from ..errors import EvaluationError, SparqlSyntaxError
from ..sparql.parser import (
    Binary, Call, Const, Filter, GraphPattern, GroupPattern, InExpr, Not,
    OptionalPattern, SelectQuery, Star, TriplePattern, ValuesBlock, Var, parse_query,
)
from ..sparql.terms import (
    XSD_BOOLEAN, XSD_INTEGER, XSD_STRING, RdfTerm, SparqlResultSet, sort_key,
)
from .store import TripleStore

Solution = dict[str, RdfTerm]

TRUE = RdfTerm("literal", "true", XSD_BOOLEAN)
FALSE = RdfTerm("literal", "false", XSD_BOOLEAN)


class _TypeError(Exception):
    """SPARQL expression error; makes a FILTER reject the solution."""


def evaluate(store: TripleStore, query) -> SparqlResultSet:
    if not isinstance(query, SelectQuery):
        try:
            query = parse_query(query)
        except SparqlSyntaxError as exc:
            raise EvaluationError(f"query outside supported subset: {exc}") from exc
    return _Evaluator(store).run(query)


class _Evaluator:
    def __init__(self, store: TripleStore):
        self.store = store

    def run(self, q: SelectQuery) -> SparqlResultSet:
        sols = self.eval_group(q.where, None)
        variables = q.result_variables()
        if q.has_aggregate:
            sols = self.aggregate(q, sols)
        elif q.projection:
            for p in q.projection:
                if p.expr is not None:
                    for mu in sols:
                        try:
                            mu[p.var] = self.eval_expr(p.expr, mu)
                        except _TypeError:
                            pass
        if q.order_by:
            for cond in reversed(q.order_by):
                sols.sort(key=lambda mu, c=cond: sort_key(self._try(c.expr, mu)), reverse=cond.descending)
        rows = [{v: mu[v] for v in variables if v in mu} for mu in sols]
        if q.distinct:
            seen = set()
            unique = []
            for row in rows:
                key = tuple(row.get(v) for v in variables)
                if key not in seen:
                    seen.add(key)
                    unique.append(row)
            rows = unique
        start = q.offset or 0
        rows = rows[start:] if q.limit is None else rows[start : start + q.limit]
        return SparqlResultSet(variables, rows)

    # -- patterns
    def eval_group(self, group: GroupPattern, graph: Optional[str]) -> list[Solution]:
        sols, filters = self.eval_group_unfiltered(group, graph)
        return [mu for mu in sols if all(self.ebv_filter(f, mu) for f in filters)]

    def eval_group_unfiltered(self, group: GroupPattern, graph: Optional[str]):
        sols: list[Solution] = [{}]
        filters = []
        for el in group.elements:
            if isinstance(el, Filter):
                filters.append(el.expr)
            elif isinstance(el, TriplePattern):
                sols = [nu for mu in sols for nu in self.match_triple(el, mu, graph)]
            elif isinstance(el, OptionalPattern):
                inner, inner_filters = self.eval_group_unfiltered(el.group, graph)
                sols = self.left_join(sols, inner, inner_filters)
            elif isinstance(el, GraphPattern):
                sols = join(sols, self.eval_graph(el))
            elif isinstance(el, ValuesBlock):
                sols = join(sols, values_solutions(el))
            elif isinstance(el, GroupPattern):
                sols = join(sols, self.eval_group(el, graph))
            else:
                raise EvaluationError(f"unsupported pattern element {type(el).__name__}")
            if not sols:
                break
        return sols, filters

    def eval_graph(self, el: GraphPattern) -> list[Solution]:
        if isinstance(el.name, Const):
            if not el.name.term.is_uri:
                raise EvaluationError("GRAPH name must be an IRI")
            return self.eval_group(el.group, el.name.term.value)
        out = []
        for g in self.store.graph_uris:
            gterm = RdfTerm("uri", g)
            for mu in self.eval_group(el.group, g):
                if el.name.name in mu and mu[el.name.name] != gterm:
                    continue
                nu = dict(mu)
                nu[el.name.name] = gterm
                out.append(nu)
        return out

    def match_triple(self, tp: TriplePattern, mu: Solution, graph: Optional[str]):
        bound = []
        for pos in (tp.s, tp.p, tp.o):
            if isinstance(pos, Const):
                bound.append(pos.term)
            else:
                bound.append(mu.get(pos.name))
        for triple in self.store.match(graph, *bound):
            nu = dict(mu)
            ok = True
            for pos, term in zip((tp.s, tp.p, tp.o), triple):
                if isinstance(pos, Var):
                    prev = nu.get(pos.name)
                    if prev is None:
                        nu[pos.name] = term
                    elif prev != term:
                        ok = False
                        break
            if ok:
                yield nu

    def left_join(self, left, right, filters):
        out = []
        index = _HashIndex(right)
        for mu in left:
            matched = False
            for nu in index.candidates(mu):
                if compatible(mu, nu):
                    merged = {**mu, **nu}
                    if all(self.ebv_filter(f, merged) for f in filters):
                        out.append(merged)
                        matched = True
            if not matched:
                out.append(mu)
        return out

    # -- aggregation
    def aggregate(self, q: SelectQuery, sols: list[Solution]) -> list[Solution]:
        groups: dict[tuple, list[Solution]] = {}
        if q.group_by:
            for mu in sols:
                key = tuple(mu.get(v) for v in q.group_by)
                groups.setdefault(key, []).append(mu)
        else:
            groups[()] = sols
        out = []
        for key, members in groups.items():
            row: Solution = {v: t for v, t in zip(q.group_by, key) if t is not None}
            for p in q.projection or []:
                if p.expr is None:
                    if p.var not in q.group_by:
                        raise EvaluationError(f"variable ?{p.var} is neither grouped nor aggregated")
                    continue
                if not (isinstance(p.expr, Call) and p.expr.is_aggregate):
                    raise EvaluationError("only bare aggregates are supported in grouped projections")
                value = self.eval_aggregate(p.expr, members)
                if value is not None:
                    row[p.var] = value
            out.append(row)
        return out

    def eval_aggregate(self, call: Call, members: list[Solution]) -> Optional[RdfTerm]:
        if call.name == "COUNT" and call.args and isinstance(call.args[0], Star):
            if call.distinct:
                return _int(len({tuple(sorted(m.items(), key=lambda kv: kv[0])) for m in members}))
            return _int(len(members))
        if len(call.args) != 1:
            raise EvaluationError(f"{call.name} takes one argument")
        values = []
        for mu in members:
            try:
                values.append(self.eval_expr(call.args[0], mu))
            except _TypeError:
                continue
        if call.distinct:
            values = list(dict.fromkeys(values))
        if call.name == "COUNT":
            return _int(len(values))
        if call.name == "SAMPLE":
            return values[0] if values else None
        if call.name in ("MIN", "MAX"):
            if not values:
                return None
            return (min if call.name == "MIN" else max)(values, key=sort_key)
        if call.name == "SUM":
            total = Decimal(0)
            for v in values:
                n = v.numeric_value()
                if n is None:
                    return None
                total += n
            return _int(int(total)) if total == int(total) else RdfTerm("literal", str(total), "http://www.w3.org/2001/XMLSchema#decimal")
        raise EvaluationError(f"unsupported aggregate {call.name}")

    # -- expressions
    def _try(self, expr, mu):
        try:
            return self.eval_expr(expr, mu)
        except _TypeError:
            return None

    def ebv_filter(self, expr, mu) -> bool:
        try:
            return ebv(self.eval_expr(expr, mu))
        except _TypeError:
            return False

    def eval_expr(self, expr, mu: Solution) -> RdfTerm:
        if isinstance(expr, Var):
            if expr.name not in mu:
                raise _TypeError("unbound")
            return mu[expr.name]
        if isinstance(expr, Const):
            return expr.term
        if isinstance(expr, Not):
            return _bool(not ebv(self.eval_expr(expr.expr, mu)))
        if isinstance(expr, Binary):
            if expr.op == "&&":
                left = self._ebv_or_error(expr.left, mu)
                if left is False:
                    return FALSE
                right = self._ebv_or_error(expr.right, mu)
                if right is False:
                    return FALSE
                if left is None or right is None:
                    raise _TypeError("error in &&")
                return TRUE
            if expr.op == "||":
                left = self._ebv_or_error(expr.left, mu)
                if left is True:
                    return TRUE
                right = self._ebv_or_error(expr.right, mu)
                if right is True:
                    return TRUE
                if left is None or right is None:
                    raise _TypeError("error in ||")
                return FALSE
            a = self.eval_expr(expr.left, mu)
            b = self.eval_expr(expr.right, mu)
            return _bool(compare(expr.op, a, b))
        if isinstance(expr, InExpr):
            a = self.eval_expr(expr.expr, mu)
            found = False
            errored = False
            for item in expr.items:
                try:
                    if compare("=", a, self.eval_expr(item, mu)):
                        found = True
                        break
                except _TypeError:
                    errored = True
            if not found and errored:
                raise _TypeError("error in IN")
            return _bool(found != expr.negated)
        if isinstance(expr, Call):
            return self.call(expr, mu)
        raise EvaluationError(f"unsupported expression {type(expr).__name__}")

    def _ebv_or_error(self, expr, mu):
        try:
            return ebv(self.eval_expr(expr, mu))
        except _TypeError:
            return None

    def call(self, c: Call, mu: Solution) -> RdfTerm:
        name = c.name
        if c.is_aggregate:
            raise EvaluationError(f"aggregate {name} outside a projection")
        if name == "BOUND":
            if not c.args or not isinstance(c.args[0], Var):
                raise EvaluationError("BOUND needs a variable")
            return _bool(c.args[0].name in mu)
        args = [self.eval_expr(a, mu) for a in c.args]
        if name in ("ISIRI", "ISURI"):
            return _bool(args[0].is_uri)
        if name == "ISLITERAL":
            return _bool(args[0].is_literal)
        if name == "ISBLANK":
            return _bool(args[0].is_blank)
        if name == "SAMETERM":
            return _bool(args[0] == args[1])
        if name == "STR":
            if args[0].is_blank:
                raise _TypeError("STR of blank node")
            return RdfTerm("literal", args[0].value)
        if name == "LANG":
            if not args[0].is_literal:
                raise _TypeError("LANG of non-literal")
            return RdfTerm("literal", args[0].language or "")
        if name == "DATATYPE":
            if not args[0].is_literal:
                raise _TypeError("DATATYPE of non-literal")
            return RdfTerm("uri", args[0].effective_datatype)
        if name in ("LCASE", "UCASE"):
            s = _string_arg(args[0])
            value = s.value.lower() if name == "LCASE" else s.value.upper()
            return RdfTerm("literal", value, s.datatype, s.language)
        if name in ("CONTAINS", "STRSTARTS", "STRENDS"):
            a, b = _string_arg(args[0]).value, _string_arg(args[1]).value
            fn = {"CONTAINS": str.__contains__, "STRSTARTS": str.startswith, "STRENDS": str.endswith}[name]
            return _bool(fn(a, b))
        if name == "REGEX":
            text = _string_arg(args[0]).value
            pattern = _string_arg(args[1]).value
            flags = re.IGNORECASE if len(args) > 2 and "i" in _string_arg(args[2]).value else 0
            return _bool(re.search(pattern, text, flags) is not None)
        raise EvaluationError(f"unsupported function {name}")


def _string_arg(term: RdfTerm) -> RdfTerm:
    if not term.is_literal or term.effective_datatype not in (XSD_STRING, "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"):
        raise _TypeError("string function on non-string")
    return term


def _bool(value: bool) -> RdfTerm:
    return TRUE if value else FALSE


def _int(n: int) -> RdfTerm:
    return RdfTerm("literal", str(n), XSD_INTEGER)


def ebv(term: RdfTerm) -> bool:
    if term.is_literal:
        dt = term.effective_datatype
        if dt == XSD_BOOLEAN:
            return term.value in ("true", "1")
        num = term.numeric_value()
        if num is not None:
            return num != 0
        if dt in (XSD_STRING, "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"):
            return term.value != ""
    raise _TypeError("no effective boolean value")


def compare(op: str, a: RdfTerm, b: RdfTerm) -> bool:
    na, nb = a.numeric_value(), b.numeric_value()
    if na is not None and nb is not None:
        x, y = na, nb
    elif op in ("=", "!="):
        if a.is_literal and b.is_literal and a.effective_datatype != b.effective_datatype:
            known = {XSD_STRING, XSD_BOOLEAN, "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"}
            if a.effective_datatype not in known or b.effective_datatype not in known:
                raise _TypeError("incomparable literals")
        same = a == b
        return same if op == "=" else not same
    elif a.is_literal and b.is_literal and a.effective_datatype == b.effective_datatype:
        x, y = a.value, b.value
    else:
        raise _TypeError("incomparable terms")
    return {
        "=": x == y, "!=": x != y, "<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y,
    }[op]


def compatible(mu: Solution, nu: Solution) -> bool:
    for k, v in nu.items():
        w = mu.get(k)
        if w is not None and w != v:
            return False
    return True


class _HashIndex:
    """Buckets solutions by the variables bound in every one of them."""

    def __init__(self, sols: list[Solution]):
        self.sols = sols
        keys = set(sols[0]) if sols else set()
        for nu in sols[1:]:
            keys &= set(nu)
        self.keys = sorted(keys)
        self.buckets: dict[tuple, list[Solution]] = defaultdict(list)
        for nu in sols:
            self.buckets[tuple(nu[k] for k in self.keys)].append(nu)

    def candidates(self, mu: Solution):
        if self.keys and all(k in mu for k in self.keys):
            return self.buckets.get(tuple(mu[k] for k in self.keys), ())
        return self.sols


def join(left: list[Solution], right: list[Solution]) -> list[Solution]:
    if not left or not right:
        return []
    index = _HashIndex(right)
    return [{**mu, **nu} for mu in left for nu in index.candidates(mu) if compatible(mu, nu)]


def values_solutions(block: ValuesBlock) -> list[Solution]:
    out = []
    for row in block.rows:
        out.append({v: c.term for v, c in zip(block.variables, row) if c is not None})
    return out
