"""The factual model: objects, categorical facts, property values and links.

A :class:`FactualModel` is the deterministic tier of a semantic model.  It is
built by asserting facts one at a time and is frozen before mining, after
which it is safe to share between readers.

Properties and links are single-valued: ``Age(Ann) = 15`` admits no second
age for ``Ann``.  Value kinds are inferred per key from the first fact that
uses it and enforced afterwards.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Union

from .errors import (
    DanglingRef,
    DuplicateFunctionalFact,
    FactFormatError,
    FrozenModelError,
    KindMismatch,
)

__all__ = [
    "Ref",
    "Categorical",
    "Property",
    "Link",
    "Fact",
    "FactualModel",
    "value_kind",
    "assert_fact",
    "objects_of",
    "fact_from_dict",
    "fact_to_dict",
    "load_facts",
    "dump_facts",
]


@dataclass(frozen=True)
class Ref:
    """A property value pointing at another object."""

    target: str

    def __str__(self):
        return self.target


@dataclass(frozen=True)
class Categorical:
    category: str
    obj: str


@dataclass(frozen=True)
class Property:
    prop: str
    obj: str
    value: Any


@dataclass(frozen=True)
class Link:
    link: str
    obj: str
    target: str


Fact = Union[Categorical, Property, Link]

LINK = "link"


def value_kind(value):
    """Return the kind tag of a property value: flag, int, real, text or ref."""
    # bool is a subclass of int, test it first
    if isinstance(value, bool):
        return "flag"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise KindMismatch(f"real values must be finite, got {value!r}")
        return "real"
    if isinstance(value, str):
        return "text"
    if isinstance(value, Ref):
        return "ref"
    raise KindMismatch(f"unsupported value type {type(value).__name__}")


def _check_token(token, what):
    if not isinstance(token, str) or not token:
        raise FactFormatError(f"{what} must be a non-empty string, got {token!r}")


class FactualModel:
    """Deterministic store of categorical facts, properties and links.

    Objects are indexed in first-seen order; that order fixes the bit layout
    used by the counting index, which keeps every count reproducible.
    """

    def __init__(self, facts=()):
        self._objects = {}
        self._categories = {}
        self._values = {}
        self._kinds = {}
        self._n_facts = 0
        self._frozen = False
        self._fingerprint = None
        for fact in facts:
            self.assert_fact(fact)

    # -- construction -------------------------------------------------------

    def _add_object(self, obj):
        if obj not in self._objects:
            self._objects[obj] = len(self._objects)

    def _check_kind(self, key, kind):
        known = self._kinds.get(key)
        if known is not None and known != kind:
            raise KindMismatch(f"{key!r} holds {known} values, got {kind}")

    def assert_fact(self, fact):
        """Add ``fact`` and return the model.

        Re-asserting an identical fact is a no-op.  A second, different value
        for the same property or link of an object raises
        :class:`DuplicateFunctionalFact`.
        """
        if self._frozen:
            raise FrozenModelError("model is frozen; build a new snapshot instead")
        if isinstance(fact, Categorical):
            _check_token(fact.category, "category")
            _check_token(fact.obj, "object")
            members = self._categories.setdefault(fact.category, {})
            if fact.obj in members:
                return self
            self._add_object(fact.obj)
            members[fact.obj] = None
            self._n_facts += 1
            return self

        if isinstance(fact, Property):
            key, obj, value = fact.prop, fact.obj, fact.value
            _check_token(key, "property")
            kind = value_kind(value)
            if kind == "ref" and value.target not in self._objects:
                raise DanglingRef(f"{key}({obj}) refers to unknown object {value.target!r}")
        elif isinstance(fact, Link):
            key, obj, value = fact.link, fact.obj, fact.target
            _check_token(key, "link")
            _check_token(value, "link target")
            kind = LINK
            if value not in self._objects:
                raise DanglingRef(f"{key}({obj}) links to unknown object {value!r}")
        else:
            raise FactFormatError(f"not a fact: {fact!r}")

        _check_token(obj, "object")
        self._check_kind(key, kind)
        column = self._values.setdefault(key, {})
        if obj in column:
            if column[obj] == value:
                return self
            raise DuplicateFunctionalFact(
                f"{key}({obj}) is already {column[obj]!r}, refusing {value!r}"
            )
        self._kinds[key] = kind
        self._add_object(obj)
        column[obj] = value
        self._n_facts += 1
        return self

    def extend(self, facts):
        for fact in facts:
            self.assert_fact(fact)
        return self

    def freeze(self):
        """Forbid further assertions; returns the model."""
        self._frozen = True
        return self

    @property
    def frozen(self):
        return self._frozen

    # -- queries ------------------------------------------------------------

    @property
    def objects(self):
        """Object ids in insertion order."""
        return tuple(self._objects)

    @property
    def n_objects(self):
        return len(self._objects)

    @property
    def n_facts(self):
        return self._n_facts

    def __len__(self):
        return self._n_facts

    def __contains__(self, obj):
        return obj in self._objects

    def index_of(self, obj):
        return self._objects[obj]

    @property
    def schema(self):
        """Mapping of property/link name to its value kind."""
        return dict(self._kinds)

    @property
    def categories(self):
        return tuple(self._categories)

    def kind_of(self, key):
        return self._kinds.get(key)

    def objects_of(self, category):
        return set(self._categories.get(category, ()))

    def has_category(self, category, obj):
        return obj in self._categories.get(category, ())

    def get_value(self, key, obj):
        """Value of property/link ``key`` on ``obj``, or ``None`` when missing."""
        column = self._values.get(key)
        if column is None:
            return None
        return column.get(obj)

    def column(self, key):
        """Read-only view of ``{obj: value}`` for one property or link."""
        return self._values.get(key, {})

    def members(self, category):
        return self._categories.get(category, {})

    def facts(self) -> Iterator[Fact]:
        for category, members in self._categories.items():
            for obj in members:
                yield Categorical(category, obj)
        for key, column in self._values.items():
            is_link = self._kinds[key] == LINK
            for obj, value in column.items():
                yield Link(key, obj, value) if is_link else Property(key, obj, value)

    def fingerprint(self):
        """Content hash, independent of assertion order; cached once frozen."""
        if self._frozen and self._fingerprint is not None:
            return self._fingerprint
        rows = [("cat", c, o) for c, members in self._categories.items() for o in members]
        for key, column in self._values.items():
            kind = self._kinds[key]
            rows.extend((kind, key, o, repr(v)) for o, v in column.items())
        rows.sort()
        h = hashlib.sha256()
        for row in rows:
            h.update(repr(row).encode("utf-8"))
            h.update(b"\n")
        digest = "sha256:" + h.hexdigest()
        if self._frozen:
            self._fingerprint = digest
        return digest

    def __repr__(self):
        return f"FactualModel(objects={self.n_objects}, facts={self.n_facts})"


def assert_fact(model, fact):
    return model.assert_fact(fact)


def objects_of(model, category):
    return model.objects_of(category)


# -- JSON Lines -------------------------------------------------------------

_KEYS = {
    "cat": {"type", "category", "object"},
    "prop": {"type", "property", "object", "value"},
    "link": {"type", "link", "object", "target"},
}


def _value_from_json(raw):
    if isinstance(raw, dict):
        if set(raw) != {"ref"} or not isinstance(raw["ref"], str):
            raise FactFormatError(f"bad value object {raw!r}; expected {{\"ref\": id}}")
        return Ref(raw["ref"])
    if raw is None or isinstance(raw, list):
        raise FactFormatError(f"unsupported value {raw!r}")
    return raw


def _value_to_json(value):
    if isinstance(value, Ref):
        return {"ref": value.target}
    return value


def fact_from_dict(d):
    if not isinstance(d, dict):
        raise FactFormatError("fact must be a JSON object")
    kind = d.get("type")
    if kind not in _KEYS:
        raise FactFormatError(f"unknown fact type {kind!r}")
    keys = set(d)
    if keys != _KEYS[kind]:
        extra = sorted(keys - _KEYS[kind])
        missing = sorted(_KEYS[kind] - keys)
        raise FactFormatError(f"{kind} fact: unknown keys {extra}, missing keys {missing}")
    if kind == "cat":
        return Categorical(d["category"], d["object"])
    if kind == "prop":
        return Property(d["property"], d["object"], _value_from_json(d["value"]))
    return Link(d["link"], d["object"], d["target"])


def fact_to_dict(fact):
    if isinstance(fact, Categorical):
        return {"type": "cat", "category": fact.category, "object": fact.obj}
    if isinstance(fact, Property):
        return {
            "type": "prop",
            "property": fact.prop,
            "object": fact.obj,
            "value": _value_to_json(fact.value),
        }
    return {"type": "link", "link": fact.link, "object": fact.obj, "target": fact.target}


def _reject_constant(name):
    raise FactFormatError(f"non-finite number {name} not allowed")


def parse_facts(lines: Iterable[str]):
    """Yield facts from JSON Lines text; blank lines are skipped."""
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise FactFormatError(f"line {lineno}: {exc.msg}") from None
        try:
            yield fact_from_dict(raw)
        except FactFormatError as exc:
            raise FactFormatError(f"line {lineno}: {exc}") from None


def load_facts(path, model=None):
    """Read a fact file into ``model`` (a fresh one by default)."""
    model = FactualModel() if model is None else model
    with open(path, encoding="utf-8") as fh:
        for fact in parse_facts(fh):
            model.assert_fact(fact)
    return model


def dumps_facts(facts):
    return "".join(
        json.dumps(fact_to_dict(f), ensure_ascii=False, separators=(",", ":")) + "\n"
        for f in facts
    )


def dump_facts(facts_or_model, path):
    facts = facts_or_model.facts() if isinstance(facts_or_model, FactualModel) else facts_or_model
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_facts(facts))
