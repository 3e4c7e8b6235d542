"""Recursive-descent parser for the SELECT subset used by the query rewriter
and the fixture evaluator.

Every AST node keeps the character span it came from, so rewrites can be
applied as text edits and everything the parser did not touch reaches the
endpoint byte-for-byte.

Supported: PREFIX/BASE, SELECT [DISTINCT|REDUCED] with variables or
``(aggregate AS ?v)`` projections, WHERE groups containing triple blocks,
OPTIONAL, FILTER, VALUES, GRAPH and nested groups; GROUP BY, ORDER BY,
LIMIT, OFFSET.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import SparqlSyntaxError
from .terms import RDF, XSD, XSD_BOOLEAN, RdfTerm

Span = tuple[int, int]

AGGREGATES = frozenset({"COUNT", "SUM", "MIN", "MAX", "SAMPLE"})
FUNCTIONS = frozenset({
    "STR", "LCASE", "UCASE", "LANG", "DATATYPE", "CONTAINS", "STRSTARTS", "STRENDS",
    "ISIRI", "ISURI", "ISLITERAL", "ISBLANK", "BOUND", "REGEX", "SAMETERM",
})
UNSUPPORTED_KEYWORDS = frozenset({
    "UNION", "MINUS", "BIND", "SERVICE", "HAVING", "FROM", "CONSTRUCT", "ASK",
    "DESCRIBE", "INSERT", "DELETE", "LOAD", "CLEAR", "DROP", "CREATE", "EXISTS",
})

# ---------------------------------------------------------------- tokens


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\x00-\x20]*>)
  | (?P<var>[?$][A-Za-z0-9_]+)
  | (?P<lstring>\"\"\"(?:[^"\\]|\\.|"(?!""))*\"\"\"|'''(?:[^'\\]|\\.|'(?!''))*''')
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<langtag>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
  | (?P<dtype>\^\^)
  | (?P<number>(?:\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?))
  | (?P<bnode>_:[A-Za-z0-9_][A-Za-z0-9_\-.]*)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_\-.]*)?:(?:[A-Za-z0-9_\-.:%]*))
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>&&|\|\||!=|<=|>=|[{}().,;*=<>!+\-/\[\]])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SparqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start, end = m.span()
        if kind == "pname":
            # a prefixed name never ends with '.'; give the dot back to the triple block
            raw = m.group()
            stripped = raw.rstrip(".")
            end = start + len(stripped)
            if stripped.split(":", 1)[0].endswith("."):
                raise SparqlSyntaxError("prefix may not end with '.'", start)
        if kind == "number" and text[start] == "." and tokens and tokens[-1].kind in ("var", "iri", "pname"):
            # ``?x .5`` is ambiguous; in triple context a lone dot separates patterns
            tokens.append(Token("punct", ".", start, start + 1))
            pos = start + 1
            continue
        if kind != "ws":
            if kind == "lstring":
                kind = "string"
            tokens.append(Token(kind, text[start:end], start, end))
        pos = end
    tokens.append(Token("eof", "", n, n))
    return tokens


# ---------------------------------------------------------------- AST


@dataclass
class Var:
    name: str
    span: Span = (0, 0)


@dataclass
class Const:
    term: RdfTerm
    span: Span = (0, 0)


PatternTerm = Union[Var, Const]


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = (0, 0)


@dataclass
class Not:
    expr: "Expr"
    span: Span = (0, 0)


@dataclass
class InExpr:
    expr: "Expr"
    items: list
    negated: bool = False
    span: Span = (0, 0)


@dataclass
class Call:
    name: str  # upper-cased
    args: list
    distinct: bool = False
    span: Span = (0, 0)

    @property
    def is_aggregate(self):
        return self.name in AGGREGATES


@dataclass
class Star:
    span: Span = (0, 0)


Expr = Union[Var, Const, Binary, Not, InExpr, Call, Star]


@dataclass
class TriplePattern:
    s: PatternTerm
    p: PatternTerm
    o: PatternTerm


@dataclass
class Filter:
    expr: Expr
    span: Span = (0, 0)


@dataclass
class OptionalPattern:
    group: "GroupPattern"
    span: Span = (0, 0)


@dataclass
class GraphPattern:
    name: PatternTerm
    group: "GroupPattern"
    span: Span = (0, 0)


@dataclass
class ValuesBlock:
    variables: list[str]
    rows: list[tuple]  # tuples of Optional[Const]; None is UNDEF
    span: Span = (0, 0)


@dataclass
class GroupPattern:
    elements: list = field(default_factory=list)
    span: Span = (0, 0)


@dataclass
class Projection:
    var: str
    expr: Optional[Expr] = None  # None for a plain variable
    span: Span = (0, 0)


@dataclass
class OrderCondition:
    expr: Expr
    descending: bool = False


@dataclass
class SelectQuery:
    text: str
    prefixes: dict[str, str]
    distinct: bool
    projection: Optional[list[Projection]]  # None for SELECT *
    where: GroupPattern
    group_by: list[str] = field(default_factory=list)
    order_by: list[OrderCondition] = field(default_factory=list)
    limit: Optional[int] = None
    offset: Optional[int] = None
    modifiers_start: Optional[int] = None  # offset of the first LIMIT/OFFSET keyword

    @property
    def has_aggregate(self) -> bool:
        if self.group_by:
            return True
        return any(p.expr is not None and _contains_aggregate(p.expr) for p in self.projection or [])

    @property
    def has_graph_block(self) -> bool:
        return any(isinstance(el, GraphPattern) for el in iter_elements(self.where))

    def in_scope_variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for el in iter_elements(self.where):
            if isinstance(el, TriplePattern):
                for t in (el.s, el.p, el.o):
                    if isinstance(t, Var):
                        seen.setdefault(t.name)
            elif isinstance(el, ValuesBlock):
                for v in el.variables:
                    seen.setdefault(v)
            elif isinstance(el, GraphPattern) and isinstance(el.name, Var):
                seen.setdefault(el.name.name)
        return list(seen)

    def result_variables(self) -> list[str]:
        if self.projection is None:
            return self.in_scope_variables()
        return [p.var for p in self.projection]


def _contains_aggregate(expr) -> bool:
    if isinstance(expr, Call):
        return expr.is_aggregate or any(_contains_aggregate(a) for a in expr.args)
    if isinstance(expr, Binary):
        return _contains_aggregate(expr.left) or _contains_aggregate(expr.right)
    if isinstance(expr, Not):
        return _contains_aggregate(expr.expr)
    if isinstance(expr, InExpr):
        return _contains_aggregate(expr.expr)
    return False


def iter_elements(group: GroupPattern):
    """Yield every element of a group pattern, depth first, groups included."""
    for el in group.elements:
        yield el
        if isinstance(el, GroupPattern):
            yield from iter_elements(el)
        elif isinstance(el, (OptionalPattern, GraphPattern)):
            yield from iter_elements(el.group)


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.base: Optional[str] = None

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def is_kw(self, *words) -> bool:
        t = self.tok
        return t.kind == "name" and t.text.upper() in words

    def is_punct(self, *chars) -> bool:
        return self.tok.kind == "punct" and self.tok.text in chars

    def expect_punct(self, ch) -> Token:
        if not self.is_punct(ch):
            self.fail(f"expected {ch!r}")
        return self.advance()

    def expect_kw(self, word) -> Token:
        if not self.is_kw(word):
            self.fail(f"expected {word}")
        return self.advance()

    def fail(self, message):
        t = self.tok
        if t.kind == "name" and t.text.upper() in UNSUPPORTED_KEYWORDS:
            raise SparqlSyntaxError(f"unsupported construct {t.text.upper()}", t.start)
        found = "end of query" if t.kind == "eof" else repr(t.text)
        raise SparqlSyntaxError(f"{message}, found {found}", t.start)

    # -- entry
    def parse(self) -> SelectQuery:
        self.parse_prologue()
        if not self.is_kw("SELECT"):
            if self.tok.kind == "name" and self.tok.text.upper() in UNSUPPORTED_KEYWORDS:
                raise SparqlSyntaxError(
                    f"only SELECT queries are supported, got {self.tok.text.upper()}", self.tok.start
                )
            self.fail("expected SELECT")
        self.advance()
        distinct = False
        if self.is_kw("DISTINCT", "REDUCED"):
            distinct = self.advance().text.upper() == "DISTINCT"
        projection = self.parse_projection()
        if self.is_kw("WHERE"):
            self.advance()
        where = self.parse_group()
        query = SelectQuery(self.text, dict(self.prefixes), distinct, projection, where)
        self.parse_modifiers(query)
        if self.tok.kind != "eof":
            self.fail("unexpected trailing input")
        return query

    def parse_prologue(self):
        while True:
            if self.is_kw("PREFIX"):
                self.advance()
                t = self.advance()
                if t.kind != "pname" or not t.text.endswith(":") or t.text.count(":") != 1:
                    raise SparqlSyntaxError("malformed PREFIX declaration", t.start)
                iri = self.advance()
                if iri.kind != "iri":
                    raise SparqlSyntaxError("PREFIX needs an IRI", iri.start)
                self.prefixes[t.text[:-1]] = self.resolve_iri(iri.text[1:-1])
            elif self.is_kw("BASE"):
                self.advance()
                iri = self.advance()
                if iri.kind != "iri":
                    raise SparqlSyntaxError("BASE needs an IRI", iri.start)
                self.base = iri.text[1:-1]
            else:
                return

    def resolve_iri(self, value: str) -> str:
        if self.base and not re.match(r"^[A-Za-z][A-Za-z0-9+.\-]*:", value):
            return self.base + value
        return value

    def parse_projection(self) -> Optional[list[Projection]]:
        if self.is_punct("*"):
            self.advance()
            return None
        items = []
        while True:
            t = self.tok
            if t.kind == "var":
                self.advance()
                items.append(Projection(t.text[1:], None, (t.start, t.end)))
            elif self.is_punct("("):
                start = self.advance().start
                expr = self.parse_expression()
                self.expect_kw("AS")
                v = self.advance()
                if v.kind != "var":
                    raise SparqlSyntaxError("expected variable after AS", v.start)
                end = self.expect_punct(")").end
                items.append(Projection(v.text[1:], expr, (start, end)))
            else:
                break
        if not items:
            self.fail("expected projection")
        return items

    def parse_modifiers(self, query: SelectQuery):
        if self.is_kw("GROUP"):
            self.advance()
            self.expect_kw("BY")
            while self.tok.kind == "var":
                query.group_by.append(self.advance().text[1:])
            if not query.group_by:
                self.fail("GROUP BY supports variables only")
        if self.is_kw("ORDER"):
            self.advance()
            self.expect_kw("BY")
            while True:
                if self.is_kw("ASC", "DESC"):
                    desc = self.advance().text.upper() == "DESC"
                    self.expect_punct("(")
                    expr = self.parse_expression()
                    self.expect_punct(")")
                    query.order_by.append(OrderCondition(expr, desc))
                elif self.tok.kind == "var":
                    t = self.advance()
                    query.order_by.append(OrderCondition(Var(t.text[1:], (t.start, t.end))))
                elif self.is_punct("("):
                    self.advance()
                    expr = self.parse_expression()
                    self.expect_punct(")")
                    query.order_by.append(OrderCondition(expr))
                else:
                    break
            if not query.order_by:
                self.fail("expected ORDER BY condition")
        while self.is_kw("LIMIT", "OFFSET"):
            if query.modifiers_start is None:
                query.modifiers_start = self.tok.start
            which = self.advance().text.upper()
            t = self.advance()
            if t.kind != "number" or not t.text.isdigit():
                raise SparqlSyntaxError(f"{which} needs a non-negative integer", t.start)
            if which == "LIMIT":
                query.limit = int(t.text)
            else:
                query.offset = int(t.text)

    # -- group patterns
    def parse_group(self) -> GroupPattern:
        start = self.expect_punct("{").start
        group = GroupPattern()
        while not self.is_punct("}"):
            t = self.tok
            if t.kind == "eof":
                self.fail("unterminated group")
            if self.is_kw("FILTER"):
                group.elements.append(self.parse_filter())
            elif self.is_kw("OPTIONAL"):
                s = self.advance().start
                g = self.parse_group()
                group.elements.append(OptionalPattern(g, (s, g.span[1])))
            elif self.is_kw("GRAPH"):
                s = self.advance().start
                name = self.parse_var_or_iri()
                g = self.parse_group()
                group.elements.append(GraphPattern(name, g, (s, g.span[1])))
            elif self.is_kw("VALUES"):
                group.elements.append(self.parse_values())
            elif self.is_punct("{"):
                if self.peek().kind == "name" and self.peek().text.upper() == "SELECT":
                    raise SparqlSyntaxError("unsupported construct sub-SELECT", self.peek().start)
                group.elements.append(self.parse_group())
            elif self.is_punct("."):
                self.advance()
            elif t.kind == "name" and t.text.upper() in UNSUPPORTED_KEYWORDS:
                self.fail("unsupported")
            else:
                self.parse_triples(group.elements)
        end = self.advance().end
        group.span = (start, end)
        return group

    def parse_filter(self) -> Filter:
        start = self.advance().start
        if self.is_punct("("):
            self.advance()
            expr = self.parse_expression()
            end = self.expect_punct(")").end
        elif self.tok.kind == "name":
            expr = self.parse_primary()
            end = expr.span[1]
        else:
            self.fail("expected FILTER constraint")
        return Filter(expr, (start, end))

    def parse_values(self) -> ValuesBlock:
        start = self.advance().start
        variables = []
        multi = False
        if self.tok.kind == "var":
            variables.append(self.advance().text[1:])
        elif self.is_punct("("):
            multi = True
            self.advance()
            while self.tok.kind == "var":
                variables.append(self.advance().text[1:])
            self.expect_punct(")")
        else:
            self.fail("expected VALUES variables")
        self.expect_punct("{")
        rows = []
        while not self.is_punct("}"):
            if multi:
                self.expect_punct("(")
                row = []
                while not self.is_punct(")"):
                    row.append(self.parse_data_value())
                self.advance()
                if len(row) != len(variables):
                    self.fail("VALUES row width does not match variables")
                rows.append(tuple(row))
            else:
                rows.append((self.parse_data_value(),))
        end = self.advance().end
        return ValuesBlock(variables, rows, (start, end))

    def parse_data_value(self) -> Optional[Const]:
        if self.is_kw("UNDEF"):
            self.advance()
            return None
        t = self.parse_term(allow_var=False)
        return t

    def parse_triples(self, out: list):
        subject = self.parse_term(allow_literal=False)
        while True:
            verb = self.parse_verb()
            while True:
                obj = self.parse_term()
                out.append(TriplePattern(subject, verb, obj))
                if self.is_punct(","):
                    self.advance()
                    continue
                break
            if self.is_punct(";"):
                self.advance()
                while self.is_punct(";"):
                    self.advance()
                if self.is_punct(".", "}") or self.is_kw("FILTER", "OPTIONAL", "GRAPH", "VALUES"):
                    break
                continue
            break
        if self.is_punct("."):
            self.advance()

    def parse_verb(self) -> PatternTerm:
        t = self.tok
        if t.kind == "name" and t.text == "a":
            self.advance()
            return Const(RdfTerm("uri", RDF + "type"), (t.start, t.end))
        return self.parse_var_or_iri()

    def parse_var_or_iri(self) -> PatternTerm:
        t = self.tok
        if t.kind == "var":
            self.advance()
            return Var(t.text[1:], (t.start, t.end))
        if t.kind in ("iri", "pname"):
            self.advance()
            return Const(RdfTerm("uri", self.iri_value(t)), (t.start, t.end))
        self.fail("expected variable or IRI")

    def iri_value(self, t: Token) -> str:
        if t.kind == "iri":
            value = self.resolve_iri(t.text[1:-1])
        else:
            prefix, local = t.text.split(":", 1)
            if prefix not in self.prefixes:
                raise SparqlSyntaxError(f"undeclared prefix {prefix!r}", t.start)
            value = self.prefixes[prefix] + local.replace("\\", "")
        try:
            RdfTerm("uri", value)
        except ValueError as exc:
            raise SparqlSyntaxError(str(exc), t.start) from None
        return value

    def parse_term(self, allow_var=True, allow_literal=True) -> PatternTerm:
        t = self.tok
        if t.kind == "var" and allow_var:
            self.advance()
            return Var(t.text[1:], (t.start, t.end))
        if t.kind in ("iri", "pname"):
            self.advance()
            return Const(RdfTerm("uri", self.iri_value(t)), (t.start, t.end))
        if t.kind == "bnode":
            self.advance()
            return Const(RdfTerm("blank", t.text[2:]), (t.start, t.end))
        if allow_literal and (t.kind in ("string", "number") or self.is_kw("TRUE", "FALSE") or self.is_punct("-", "+")):
            return self.parse_literal()
        if self.is_punct("["):
            raise SparqlSyntaxError("unsupported construct blank node property list", t.start)
        self.fail("expected RDF term")

    def parse_literal(self) -> Const:
        t = self.advance()
        start = t.start
        if t.kind == "punct":  # signed number
            num = self.advance()
            if num.kind != "number":
                raise SparqlSyntaxError("expected number after sign", num.start)
            return Const(_number_term(t.text + num.text), (start, num.end))
        if t.kind == "number":
            return Const(_number_term(t.text), (start, t.end))
        if t.kind == "name":
            return Const(RdfTerm("literal", t.text.lower(), XSD_BOOLEAN), (start, t.end))
        value = _unescape(t.text[3:-3] if t.text[:3] in ('"""', "'''") else t.text[1:-1])
        end = t.end
        if self.tok.kind == "langtag":
            lt = self.advance()
            return Const(RdfTerm("literal", value, None, lt.text[1:].lower()), (start, lt.end))
        if self.tok.kind == "dtype":
            self.advance()
            dt = self.advance()
            if dt.kind not in ("iri", "pname"):
                raise SparqlSyntaxError("expected datatype IRI", dt.start)
            datatype = self.iri_value(dt)
            return Const(RdfTerm("literal", value, None if datatype == XSD + "string" else datatype), (start, dt.end))
        return Const(RdfTerm("literal", value), (start, end))

    # -- expressions
    def parse_expression(self) -> Expr:
        left = self.parse_and()
        while self.is_punct("||"):
            self.advance()
            right = self.parse_and()
            left = Binary("||", left, right, (left.span[0], right.span[1]))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_relational()
        while self.is_punct("&&"):
            self.advance()
            right = self.parse_relational()
            left = Binary("&&", left, right, (left.span[0], right.span[1]))
        return left

    def parse_relational(self) -> Expr:
        left = self.parse_unary()
        if self.is_punct("=", "!=", "<", ">", "<=", ">="):
            op = self.advance().text
            right = self.parse_unary()
            return Binary(op, left, right, (left.span[0], right.span[1]))
        negated = False
        if self.is_kw("NOT") and self.peek().kind == "name" and self.peek().text.upper() == "IN":
            self.advance()
            negated = True
        if self.is_kw("IN"):
            self.advance()
            self.expect_punct("(")
            items = []
            while not self.is_punct(")"):
                items.append(self.parse_expression())
                if self.is_punct(","):
                    self.advance()
            end = self.advance().end
            return InExpr(left, items, negated, (left.span[0], end))
        return left

    def parse_unary(self) -> Expr:
        if self.is_punct("!"):
            start = self.advance().start
            inner = self.parse_unary()
            return Not(inner, (start, inner.span[1]))
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.tok
        if self.is_punct("("):
            self.advance()
            expr = self.parse_expression()
            self.expect_punct(")")
            return expr
        if t.kind == "var":
            self.advance()
            return Var(t.text[1:], (t.start, t.end))
        if t.kind in ("iri", "pname", "string", "number") or self.is_kw("TRUE", "FALSE") or self.is_punct("-", "+"):
            return self.parse_term(allow_var=False)
        if t.kind == "name":
            name = t.text.upper()
            if name not in FUNCTIONS and name not in AGGREGATES:
                raise SparqlSyntaxError(f"unsupported construct function {t.text}", t.start)
            self.advance()
            self.expect_punct("(")
            distinct = False
            if self.is_kw("DISTINCT"):
                if name not in AGGREGATES:
                    self.fail("DISTINCT only allowed in aggregates")
                self.advance()
                distinct = True
            args: list = []
            if self.is_punct("*"):
                if name != "COUNT":
                    self.fail("'*' only allowed in COUNT")
                st = self.advance()
                args.append(Star((st.start, st.end)))
            else:
                while not self.is_punct(")"):
                    args.append(self.parse_expression())
                    if self.is_punct(","):
                        self.advance()
                    elif not self.is_punct(")"):
                        self.fail("expected ',' or ')'")
            end = self.expect_punct(")").end
            return Call(name, args, distinct, (t.start, end))
        self.fail("expected expression")


def _number_term(text: str) -> RdfTerm:
    if re.fullmatch(r"[+-]?\d+", text):
        return RdfTerm("literal", text, XSD + "integer")
    if "e" in text.lower():
        return RdfTerm("literal", text, XSD + "double")
    return RdfTerm("literal", text, XSD + "decimal")


_UNESCAPE = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            if nxt in _UNESCAPE:
                out.append(_UNESCAPE[nxt])
                i += 2
                continue
            if nxt in "uU":
                width = 4 if nxt == "u" else 8
                out.append(chr(int(body[i + 2 : i + 2 + width], 16)))
                i += 2 + width
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def parse_query(text: str) -> SelectQuery:
    """Parse ``text`` or raise :class:`SparqlSyntaxError`."""
    if not text or not text.strip():
        raise SparqlSyntaxError("empty query")
    return _Parser(text).parse()
