"""Slow, obviously-correct reference implementations used by the tests.

Nothing here calls the package's evaluator or counting index: the oracle
rebuilds a per-object table straight from ``model.facts()`` and answers
every question by looping over objects.
"""

import operator
from fractions import Fraction
from itertools import combinations, product

from semlearn.concepts import CategoryIs, Literal
from semlearn.facts import Categorical, Link, Property, Ref
from semlearn.rules import Rule

OPS = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def object_table(model):
    """``{obj: (set of categories, {key: value})}`` from the raw fact list."""
    table = {obj: (set(), {}) for obj in model.objects}
    for fact in model.facts():
        if isinstance(fact, Categorical):
            table[fact.obj][0].add(fact.category)
        elif isinstance(fact, Property):
            value = fact.value.target if isinstance(fact.value, Ref) else fact.value
            table[fact.obj][1][fact.prop] = value
        elif isinstance(fact, Link):
            table[fact.obj][1][fact.link] = fact.target
    return table


def atom_value(row, atom):
    categories, values = row
    if isinstance(atom, CategoryIs):
        return atom.category in categories
    if atom.key not in values:
        return None
    return OPS[atom.op](values[atom.key], atom.value)


def concept_value(row, concept):
    values = [atom_value(row, a) for a in concept.body]
    if any(v is None for v in values):
        return None
    return all(values)


def literal_value(row, concepts, lit):
    v = concept_value(row, concepts[lit.concept])
    if v is None:
        return None
    return v if lit.positive else not v


def count(model, concepts, literals):
    """N(literals): objects where every literal is defined and true."""
    n = 0
    for row in object_table(model).values():
        if all(literal_value(row, concepts, lit) is True for lit in literals):
            n += 1
    return n


def rule_stats(model, concepts, rule, table=None):
    """``(support, hits)`` over objects where the conclusion is defined."""
    table = object_table(model) if table is None else table
    support = hits = 0
    for row in table.values():
        head = literal_value(row, concepts, rule.conclusion)
        if head is None:
            continue
        if all(literal_value(row, concepts, lit) is True for lit in rule.premises):
            support += 1
            hits += head
    return support, hits


def probability(model, concepts, rule, table=None):
    support, hits = rule_stats(model, concepts, rule, table)
    return None if support == 0 else Fraction(hits, support)


def is_law(model, concepts, rule, min_support=1, table=None):
    """Brute-force law test: support threshold plus strict subset improvement."""
    table = object_table(model) if table is None else table
    support, hits = rule_stats(model, concepts, rule, table)
    if support < min_support or support == 0:
        return False
    p = Fraction(hits, support)
    for k in range(len(rule.premises)):
        for subset in combinations(rule.premises, k):
            q = probability(model, concepts, Rule(subset, rule.conclusion), table)
            if q is not None and q >= p:
                return False
    return True


def all_laws(model, concepts, targets, vocabulary, max_premises, min_support, min_p):
    """Every law by enumeration; returns ``{rule: (support, hits)}``."""
    table = object_table(model)
    out = {}
    for target in targets:
        names = sorted(n for n in vocabulary if n != target.concept)
        for k in range(max_premises + 1):
            for chosen in combinations(names, k):
                for signs in product((True, False), repeat=k):
                    rule = Rule(tuple(map(Literal, chosen, signs)), target)
                    if is_law(model, concepts, rule, min_support, table):
                        support, hits = rule_stats(model, concepts, rule, table)
                        if Fraction(hits, support) >= min_p:
                            out[rule] = (support, hits)
    return out
