"""RDF terms and SPARQL result sets, with the SPARQL 1.1 JSON results codec."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from ..errors import ResultParseError

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_BOOLEAN = XSD + "boolean"
RDF_LANGSTRING = RDF + "langString"

NUMERIC_TYPES = frozenset(
    XSD + t
    for t in (
        "integer", "decimal", "double", "float", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
        "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte",
    )
)

_ABSOLUTE_URI = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|\\^`]*$")


def is_absolute_uri(value: str) -> bool:
    return bool(_ABSOLUTE_URI.match(value))


@dataclass(frozen=True)
class RdfTerm:
    kind: str  # "uri" | "literal" | "blank"
    value: str
    datatype: Optional[str] = None
    language: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("uri", "literal", "blank"):
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind == "uri":
            if self.datatype or self.language:
                raise ValueError("URI terms carry no datatype or language")
            if not is_absolute_uri(self.value):
                raise ValueError(f"not an absolute URI: {self.value!r}")
        if self.language and self.kind != "literal":
            raise ValueError("language tags only apply to literals")
        if self.language and self.datatype:
            raise ValueError("a literal has a language tag or a datatype, not both")

    @property
    def is_uri(self):
        return self.kind == "uri"

    @property
    def is_literal(self):
        return self.kind == "literal"

    @property
    def is_blank(self):
        return self.kind == "blank"

    @property
    def effective_datatype(self) -> Optional[str]:
        if self.kind != "literal":
            return None
        if self.language:
            return RDF_LANGSTRING
        return self.datatype or XSD_STRING

    def numeric_value(self) -> Optional[Decimal]:
        if self.kind != "literal" or self.effective_datatype not in NUMERIC_TYPES:
            return None
        try:
            return Decimal(self.value)
        except InvalidOperation:
            return None

    def n3(self) -> str:
        """Render in SPARQL / N-Triples surface syntax."""
        if self.kind == "uri":
            return f"<{self.value}>"
        if self.kind == "blank":
            return f"_:{self.value}"
        text = '"' + escape_string(self.value) + '"'
        if self.language:
            return f"{text}@{self.language}"
        if self.datatype and self.datatype != XSD_STRING:
            return f"{text}^^<{self.datatype}>"
        return text

    def to_json(self) -> dict:
        if self.kind == "uri":
            return {"type": "uri", "value": self.value}
        if self.kind == "blank":
            return {"type": "bnode", "value": self.value}
        out: dict[str, Any] = {"type": "literal", "value": self.value}
        if self.language:
            out["xml:lang"] = self.language
        elif self.datatype and self.datatype != XSD_STRING:
            out["datatype"] = self.datatype
        return out

    def __str__(self):
        return self.n3()


def uri(value: str) -> RdfTerm:
    return RdfTerm("uri", value)


def literal(value, datatype: Optional[str] = None, language: Optional[str] = None) -> RdfTerm:
    if isinstance(value, bool):
        return RdfTerm("literal", "true" if value else "false", XSD_BOOLEAN)
    if isinstance(value, int):
        return RdfTerm("literal", str(value), datatype or XSD_INTEGER)
    if datatype == XSD_STRING:
        datatype = None
    return RdfTerm("literal", str(value), datatype, language)


def bnode(label: str) -> RdfTerm:
    return RdfTerm("blank", label)


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_string(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def term_from_json(obj: dict) -> RdfTerm:
    try:
        kind = obj["type"]
        value = obj["value"]
    except (KeyError, TypeError) as exc:
        raise ResultParseError(f"binding lacks type/value: {obj!r}") from exc
    if kind == "uri":
        return RdfTerm("uri", value)
    if kind == "bnode":
        return RdfTerm("blank", value)
    if kind in ("literal", "typed-literal"):
        datatype = obj.get("datatype")
        return RdfTerm(
            "literal", value, None if datatype == XSD_STRING else datatype, obj.get("xml:lang")
        )
    raise ResultParseError(f"unknown binding type {kind!r}")


def sort_key(term: Optional[RdfTerm]):
    """Total order used by ORDER BY and by merged-result sorting.

    Unbound < blank < URI < numeric literal < other literal, SPARQL-style.
    """
    if term is None:
        return (0, 0, "")
    if term.kind == "blank":
        return (1, 0, term.value)
    if term.kind == "uri":
        return (2, 0, term.value)
    num = term.numeric_value()
    if num is not None:
        return (3, num, "")
    return (4, 0, term.value + "\x00" + (term.language or term.datatype or ""))


@dataclass
class SparqlResultSet:
    variables: list[str]
    rows: list[dict[str, RdfTerm]] = field(default_factory=list)
    truncated: bool = False

    def __post_init__(self):
        known = set(self.variables)
        for row in self.rows:
            extra = set(row) - known
            if extra:
                raise ValueError(f"binding for undeclared variable(s) {sorted(extra)}")

    def __len__(self):
        return len(self.rows)

    def to_json(self) -> dict:
        return {
            "head": {"vars": list(self.variables)},
            "results": {
                "bindings": [{k: v.to_json() for k, v in row.items()} for row in self.rows]
            },
        }

    @classmethod
    def from_json(cls, doc: Any) -> "SparqlResultSet":
        try:
            variables = list(doc["head"].get("vars", []))
            bindings = doc["results"]["bindings"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise ResultParseError("not a SPARQL JSON results document") from exc
        if not isinstance(bindings, list):
            raise ResultParseError("results.bindings must be a list")
        rows = []
        for b in bindings:
            if not isinstance(b, dict):
                raise ResultParseError("binding rows must be objects")
            rows.append({k: term_from_json(v) for k, v in b.items()})
        try:
            return cls(variables, rows)
        except ValueError as exc:
            raise ResultParseError(str(exc)) from exc

    def simple_rows(self) -> list[dict[str, Optional[str]]]:
        """Rows as plain ``{var: value-string}`` dicts, for tabular display."""
        return [{v: (row[v].value if v in row else None) for v in self.variables} for row in self.rows]

    def row_tuples(self) -> list[tuple]:
        return [tuple(row.get(v) for v in self.variables) for row in self.rows]
