"""Concepts: named unary predicates over the objects of a factual model.

A concept body is a conjunction of atoms.  An atom is either a category test
``cat(Person)`` or a comparison ``Age < 16`` / ``HasHairColor = "Green"``.
Evaluation is three-valued: an atom that reads a property or link missing on
the object is *undefined* (``None``), and undefinedness absorbs conjunction.

Source format, one definition per line::

    # People and hair
    T4 := Age < 16
    T5 := Age >= 16 & Age < 25
    T3 := HasHairColor = "Green"
"""

import operator
import re
from dataclasses import dataclass
from typing import Tuple, Union

from .errors import (
    ConceptSyntaxError,
    DuplicateName,
    KindMismatch,
    UnknownConcept,
    UnknownObject,
    UnknownSymbol,
)
from .facts import LINK, Ref

__all__ = [
    "CategoryIs",
    "Compare",
    "Concept",
    "ConceptSet",
    "Literal",
    "ObjectDescription",
    "parse_concepts",
    "parse_literal",
    "eval_atom",
    "eval_concept",
    "eval_literal",
]

_OPS = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
ORDERING_OPS = frozenset({"<", "<=", ">", ">="})
NUMERIC_KINDS = frozenset({"int", "real"})


@dataclass(frozen=True)
class CategoryIs:
    category: str

    def __str__(self):
        return f"cat({self.category})"

    def gloss(self):
        return self.category


@dataclass(frozen=True)
class Compare:
    """``key op value``; against a link ``key`` this is a link-target test."""

    key: str
    op: str
    value: Union[str, int, float, bool]

    def __str__(self):
        return f"{self.key} {self.op} {_format_literal(self.value)}"

    def gloss(self):
        value = self.value
        if isinstance(value, bool):
            value = "true" if value else "false"
        return f"{self.key} {self.op} {value}"


Atom = Union[CategoryIs, Compare]


def _format_literal(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return repr(value)


@dataclass(frozen=True)
class Concept:
    name: str
    body: Tuple[Atom, ...]

    def __str__(self):
        return f"{self.name} := " + " & ".join(str(a) for a in self.body)

    def gloss(self):
        """Human-readable rendering of the body, e.g. ``Age >= 16 and Age < 25``."""
        return " and ".join(a.gloss() for a in self.body)


@dataclass(frozen=True, order=True)
class Literal:
    """A concept or its negation."""

    concept: str
    positive: bool = True

    def __invert__(self):
        return Literal(self.concept, not self.positive)

    def sort_key(self):
        return (self.concept, not self.positive)

    def __str__(self):
        return self.concept if self.positive else "¬" + self.concept

    def to_dict(self):
        return {"concept": self.concept, "sign": self.positive}

    @classmethod
    def from_dict(cls, d):
        return cls(d["concept"], bool(d["sign"]))


def parse_literal(text):
    """Parse ``T4``, ``!T4``, ``~T4``, ``¬T4`` or ``not T4``."""
    text = text.strip()
    positive = True
    for prefix in ("not ", "!", "~", "¬", "-"):
        if text.startswith(prefix):
            positive = False
            text = text[len(prefix):].strip()
            break
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", text):
        raise UnknownConcept(f"not a literal: {text!r}")
    return Literal(text, positive)


class ConceptSet:
    """Ordered, immutable collection of concepts keyed by name."""

    def __init__(self, concepts=(), source=None):
        self._concepts = {}
        for c in concepts:
            if c.name in self._concepts:
                raise DuplicateName(f"concept {c.name!r} defined twice")
            self._concepts[c.name] = c
        self.source = source if source is not None else "".join(f"{c}\n" for c in concepts)

    def __getitem__(self, name):
        try:
            return self._concepts[name]
        except KeyError:
            raise UnknownConcept(f"unknown concept {name!r}") from None

    def __contains__(self, name):
        return name in self._concepts

    def __iter__(self):
        return iter(self._concepts.values())

    def __len__(self):
        return len(self._concepts)

    @property
    def names(self):
        return tuple(self._concepts)

    def gloss(self, name):
        return self[name].gloss() if name in self._concepts else name

    def categories(self):
        """Categories tested by any concept body."""
        return {a.category for c in self for a in c.body if isinstance(a, CategoryIs)}

    def check(self, model):
        """Verify every symbol exists in ``model`` with a compatible kind."""
        categories = set(model.categories)
        for concept in self:
            for atom in concept.body:
                if isinstance(atom, CategoryIs):
                    if atom.category not in categories:
                        raise UnknownSymbol(
                            f"{concept.name}: unknown category {atom.category!r}"
                        )
                    continue
                kind = model.kind_of(atom.key)
                if kind is None:
                    raise UnknownSymbol(f"{concept.name}: unknown property or link {atom.key!r}")
                _check_compare(atom, kind, concept.name)
        return self

    def __repr__(self):
        return f"ConceptSet({list(self._concepts)})"


def _literal_kind(value):
    if isinstance(value, bool):
        return "flag"
    if isinstance(value, (int, float)):
        return "number"
    return "text"


def _check_compare(atom, kind, where):
    lit = _literal_kind(atom.value)
    if atom.op in ORDERING_OPS and kind not in NUMERIC_KINDS:
        raise KindMismatch(f"{where}: ordering {atom.op!r} on non-numeric {atom.key!r} ({kind})")
    if kind in NUMERIC_KINDS:
        ok = lit == "number"
    elif kind == "flag":
        ok = lit == "flag"
    else:
        ok = lit == "text"
    if not ok:
        raise KindMismatch(f"{where}: {atom.key!r} holds {kind} values, compared with {atom.value!r}")
    if kind == LINK and atom.op not in ("=", "!="):
        raise KindMismatch(f"{where}: link {atom.key!r} supports only = and !=")


# -- evaluation ---------------------------------------------------------------


def eval_atom(source, atom, obj):
    """True/False, or None when the atom reads a missing property or link."""
    if isinstance(atom, CategoryIs):
        return source.has_category(atom.category, obj)
    value = source.get_value(atom.key, obj)
    if value is None:
        return None
    if isinstance(value, Ref):
        value = value.target
    if _literal_kind(value) != _literal_kind(atom.value):
        raise KindMismatch(f"cannot compare {atom.key}={value!r} with {atom.value!r}")
    return _OPS[atom.op](value, atom.value)


def eval_concept(source, concept, obj):
    result = True
    for atom in concept.body:
        v = eval_atom(source, atom, obj)
        if v is None:
            return None
        result = result and v
    return result


def eval_literal(model, concepts, lit, obj):
    """Evaluate ``lit`` on ``obj``: True, False or None (undefined)."""
    if obj not in model:
        raise UnknownObject(f"unknown object {obj!r}")
    v = eval_concept(model, concepts[lit.concept], obj)
    if v is None:
        return None
    return v if lit.positive else not v


class ObjectDescription:
    """A partial description of one fresh object, used as prediction input.

    ``assignments`` maps property or link names to values and ``categories``
    lists the categories the object belongs to.  It answers the same two
    queries as :class:`~semlearn.facts.FactualModel`, for a single object.
    """

    OBJ = "_"

    def __init__(self, assignments=None, categories=()):
        self.assignments = dict(assignments or {})
        self.categories = frozenset(categories)

    @classmethod
    def from_dict(cls, d, schema=None, known_categories=()):
        """Split a flat JSON object into assignments and categories.

        A key is a category when it names a known category (or, without a
        schema, is not a property) and its value is ``true``.
        """
        assignments, cats = {}, set()
        known_categories = set(known_categories)
        for key, value in d.items():
            if value is None:
                continue
            if isinstance(value, dict) and set(value) == {"ref"}:
                value = Ref(value["ref"])
            if schema is None:
                if value is True and key in known_categories:
                    cats.add(key)
                else:
                    assignments[key] = value
                continue
            kind = schema.get(key)
            if kind is None:
                if value is True:
                    cats.add(key)
                    continue
                raise UnknownSymbol(f"unknown property or link {key!r}")
            if _description_kind(value, kind) != kind:
                raise KindMismatch(f"{key!r} holds {kind} values, got {value!r}")
            assignments[key] = value
        return cls(assignments, cats)

    def has_category(self, category, obj=OBJ):
        return category in self.categories

    def get_value(self, key, obj=OBJ):
        return self.assignments.get(key)

    def __contains__(self, obj):
        return obj == self.OBJ

    def valuation(self, concepts):
        """Map every concept name to True, False or None on this object."""
        return {c.name: eval_concept(self, c, self.OBJ) for c in concepts}

    def __repr__(self):
        return f"ObjectDescription({self.assignments!r}, categories={sorted(self.categories)!r})"


def _description_kind(value, expected):
    if isinstance(value, bool):
        return "flag"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "real"
    if isinstance(value, Ref):
        return "ref"
    if isinstance(value, str):
        return LINK if expected == LINK else "text"
    return type(value).__name__


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<define>:=)
  | (?P<op><=|>=|!=|=|<|>)
  | (?P<amp>&)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(line, lineno):
    pos, tokens = 0, []
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ConceptSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return tokens


class _LineParser:
    def __init__(self, tokens, lineno, width):
        self.tokens = tokens
        self.i = 0
        self.lineno = lineno
        self.width = width

    def error(self, message):
        col = self.tokens[self.i][2] if self.i < len(self.tokens) else self.width + 1
        raise ConceptSyntaxError(message, self.lineno, col)

    def take(self, kind, what):
        if self.i >= len(self.tokens) or self.tokens[self.i][0] != kind:
            self.error(f"expected {what}")
        tok = self.tokens[self.i]
        self.i += 1
        return tok[1]

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def definition(self):
        name = self.take("ident", "concept name")
        self.take("define", "':='")
        body = [self.atom()]
        while self.peek() == "amp":
            self.i += 1
            body.append(self.atom())
        if self.i != len(self.tokens):
            self.error("expected '&' or end of line")
        return Concept(name, tuple(body))

    def atom(self):
        ident = self.take("ident", "atom")
        if ident == "cat" and self.peek() == "lparen":
            self.i += 1
            category = self.take("ident", "category name")
            self.take("rparen", "')'")
            return CategoryIs(category)
        op = self.take("op", "comparison operator")
        kind = self.peek()
        if kind == "string":
            raw = self.take("string", "literal")[1:-1]
            value = re.sub(r"\\(.)", r"\1", raw)
        elif kind == "number":
            text = self.take("number", "literal")
            value = float(text) if any(ch in text for ch in ".eE") else int(text)
        elif kind == "ident" and self.tokens[self.i][1] in ("true", "false"):
            value = self.take("ident", "literal") == "true"
        else:
            self.error("expected a quoted text, number, true or false")
        if op in ORDERING_OPS and (isinstance(value, bool) or not isinstance(value, (int, float))):
            self.error(f"ordering operator {op!r} needs a numeric literal")
        return Compare(ident, op, value)


def parse_concepts(source, model=None):
    """Parse concept definitions; with ``model`` also check conservativity."""
    concepts = []
    seen = set()
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0] if '"' not in raw else _strip_comment(raw)
        if not line.strip():
            continue
        concept = _LineParser(_tokenize(line, lineno), lineno, len(line)).definition()
        if concept.name in seen:
            raise DuplicateName(f"line {lineno}: concept {concept.name!r} defined twice")
        seen.add(concept.name)
        concepts.append(concept)
    result = ConceptSet(concepts, source=source)
    if model is not None:
        result.check(model)
    return result


def _strip_comment(line):
    in_string, escaped = False, False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\" and in_string:
            escaped = True
        elif ch == '"':
            in_string = not in_string
        elif ch == "#" and not in_string:
            return line[:i]
    return line


def load_concepts(path, model=None):
    with open(path, encoding="utf-8") as fh:
        return parse_concepts(fh.read(), model=model)
