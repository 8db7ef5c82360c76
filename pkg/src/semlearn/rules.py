"""Causal rules, their conditional probabilities and the probabilistic-law test.

A rule ``T1* & ... & Tn* -> T0*`` is scored by counting: ``support`` is the
number of objects satisfying the premises and ``hits`` those that also
satisfy the conclusion.  Objects on which any concept of the rule is
undefined are left out of both counts.  Probabilities are exact
:class:`~fractions.Fraction` values, so every acceptance decision is made on
integers.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Tuple

from .concepts import Literal, parse_literal
from .errors import InvalidRule, LawFormatError

__all__ = [
    "Rule",
    "RuleStats",
    "Law",
    "LawSet",
    "Verdict",
    "conditional_probability",
    "is_probabilistic_law",
    "proper_subsets",
    "explain",
    "format_fraction",
    "parse_fraction",
]


def _premise_key(premises):
    return tuple(lit.sort_key() for lit in premises)


@dataclass(frozen=True)
class Rule:
    premises: Tuple[Literal, ...]
    conclusion: Literal

    def __post_init__(self):
        premises = tuple(sorted(self.premises, key=Literal.sort_key))
        concepts = [lit.concept for lit in premises]
        if len(set(concepts)) != len(concepts):
            raise InvalidRule(f"premises repeat a concept: {[str(p) for p in premises]}")
        if self.conclusion.concept in concepts:
            raise InvalidRule(f"conclusion concept {self.conclusion.concept!r} also in premises")
        object.__setattr__(self, "premises", premises)

    @property
    def length(self):
        return len(self.premises)

    def sort_key(self):
        return (len(self.premises), _premise_key(self.premises), self.conclusion.sort_key())

    def __str__(self):
        lhs = " ∧ ".join(str(p) for p in self.premises) or "∅"
        return f"{lhs} → {self.conclusion}"


@dataclass(frozen=True)
class RuleStats:
    support: int
    hits: int

    @property
    def p(self) -> Optional[Fraction]:
        """``hits / support``, or ``None`` when the premises are never satisfied."""
        if self.support == 0:
            return None
        return Fraction(self.hits, self.support)

    @property
    def defined(self):
        return self.support > 0


@dataclass(frozen=True)
class Law:
    rule: Rule
    stats: RuleStats
    subset_max_p: Optional[Fraction] = field(default=None, compare=False)

    @property
    def p(self):
        return self.stats.p

    @property
    def premises(self):
        return self.rule.premises

    @property
    def conclusion(self):
        return self.rule.conclusion

    def to_dict(self):
        return {
            "premises": [lit.to_dict() for lit in self.rule.premises],
            "conclusion": self.rule.conclusion.to_dict(),
            "support": self.stats.support,
            "hits": self.stats.hits,
            "p": format_fraction(self.stats.p),
        }

    @classmethod
    def from_dict(cls, d):
        expected = {"premises", "conclusion", "support", "hits", "p"}
        if not isinstance(d, dict) or set(d) != expected:
            raise LawFormatError(f"law record must have exactly the keys {sorted(expected)}")
        try:
            rule = Rule(
                tuple(Literal.from_dict(x) for x in d["premises"]),
                Literal.from_dict(d["conclusion"]),
            )
            stats = RuleStats(int(d["support"]), int(d["hits"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise LawFormatError(f"malformed law record: {exc}") from None
        if stats.p != parse_fraction(d["p"]):
            raise LawFormatError(f"p {d['p']!r} does not match hits/support")
        return cls(rule, stats)

    def __str__(self):
        return f"{self.rule} [[{format_fraction(self.p)}]]"


def format_fraction(p):
    if p is None:
        return None
    return f"{p.numerator}/{p.denominator}"


def parse_fraction(text):
    if text is None:
        return None
    try:
        num, den = str(text).split("/")
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise LawFormatError(f"bad fraction {text!r}") from None


def conditional_probability(index, rule):
    """Exact support, hits and conditional probability of ``rule``."""
    support, hits = index.rule_counts(rule.premises, rule.conclusion)
    return RuleStats(support, hits)


def proper_subsets(premises):
    """All proper subsets of a premise tuple, smallest first."""
    for k in range(len(premises)):
        yield from combinations(premises, k)


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`is_probabilistic_law`.

    ``reason`` is ``None`` on acceptance, ``"low_support"`` or
    ``"redundant"`` otherwise; ``witness`` holds the premise subset that
    made a rule redundant.
    """

    accepted: bool
    stats: RuleStats
    subset_max_p: Optional[Fraction] = None
    reason: Optional[str] = None
    witness: Optional[Tuple[Literal, ...]] = None

    def __bool__(self):
        return self.accepted

    def law(self, rule):
        return Law(rule, self.stats, self.subset_max_p)


def is_probabilistic_law(index, rule, min_support=1):
    """Check the law condition by exhaustive recount of every premise subset.

    Accepted iff support reaches ``min_support`` and every proper subset of
    the premises yields a strictly smaller (or undefined) probability.
    """
    stats = conditional_probability(index, rule)
    if stats.support < min_support or stats.p is None:
        return Verdict(False, stats, reason="low_support")
    best = None
    for subset in proper_subsets(rule.premises):
        p = conditional_probability(index, Rule(subset, rule.conclusion)).p
        if p is None:
            continue
        if p >= stats.p:
            return Verdict(False, stats, p, reason="redundant", witness=subset)
        if best is None or p > best:
            best = p
    return Verdict(True, stats, best)


@dataclass
class LawSet:
    """Mined laws plus the provenance needed to reproduce them."""

    laws: Tuple[Law, ...] = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.laws = tuple(self.laws)

    def __iter__(self):
        return iter(self.laws)

    def __len__(self):
        return len(self.laws)

    def __getitem__(self, i):
        return self.laws[i]

    def find(self, premises, conclusion):
        """The law with exactly this rule, or ``None``.  Literals may be strings."""
        premises = tuple(parse_literal(p) if isinstance(p, str) else p for p in premises)
        if isinstance(conclusion, str):
            conclusion = parse_literal(conclusion)
        rule = Rule(premises, conclusion)
        for law in self.laws:
            if law.rule == rule:
                return law
        return None

    def for_target(self, target):
        return [law for law in self.laws if law.conclusion == target]

    def rules(self):
        return {law.rule: law.stats for law in self.laws}

    def to_jsonl(self):
        return "".join(
            json.dumps(law.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n"
            for law in self.laws
        )

    @classmethod
    def from_jsonl(cls, text, provenance=None):
        laws = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                laws.append(Law.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise LawFormatError(f"line {lineno}: {exc.msg}") from None
            except LawFormatError as exc:
                raise LawFormatError(f"line {lineno}: {exc}") from None
        return cls(laws, dict(provenance or {}))

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonl(fh.read())


def _format_p(p):
    text = f"{float(p):.3f}".rstrip("0").rstrip(".")
    return text or "0"


def _render_literal(lit, concepts):
    gloss = concepts.gloss(lit.concept) if concepts is not None else lit.concept
    if lit.positive:
        return gloss
    if " and " in gloss:
        gloss = f"({gloss})"
    return f"not {gloss}"


def explain(law, concepts=None):
    """Render a law as one English sentence.

    >>> explain(law)                                    # doctest: +SKIP
    'If Age < 16 then HasOccupation = Student (probability 0.98, support 50).'
    """
    head = _render_literal(law.conclusion, concepts)
    p = _format_p(law.p)
    if not law.premises:
        return f"Unconditionally, {head} (probability {p})."
    body = " and ".join(_render_literal(lit, concepts) for lit in law.premises)
    return f"If {body} then {head} (probability {p}, support {law.stats.support})."
