import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semlearn.concepts import Compare, Concept, ConceptSet, Literal
from semlearn.datasets import random_model
from semlearn.encoding import build_index
from semlearn.errors import InvalidRule, LawFormatError
from semlearn.facts import FactualModel, Property
from semlearn.rules import (
    Law,
    LawSet,
    Rule,
    RuleStats,
    conditional_probability,
    explain,
    format_fraction,
    is_probabilistic_law,
    parse_fraction,
)
from semlearn.selfcheck import random_rule

from . import oracles

T = Literal


def rule(premises, conclusion):
    return Rule(tuple(parse(p) for p in premises), parse(conclusion))


def parse(text):
    return T(text[1:], False) if text.startswith("!") else T(text)


def test_rule_normalises_and_validates():
    r = rule(["T5", "T3"], "!T9")
    assert [str(p) for p in r.premises] == ["T3", "T5"]
    assert str(r) == "T3 ∧ T5 → ¬T9"
    with pytest.raises(InvalidRule):
        rule(["T4", "!T4"], "T10")
    with pytest.raises(InvalidRule):
        rule(["T10"], "!T10")


def test_hair10_probabilities(h10_index):
    stats = conditional_probability(h10_index, rule(["T4"], "T10"))
    assert (stats.support, stats.hits, stats.p) == (4, 3, Fraction(3, 4))
    base = conditional_probability(h10_index, rule([], "T10"))
    assert (base.support, base.hits, base.p) == (10, 4, Fraction(2, 5))


def test_contradictory_or_empty_premises_are_undefined(h10_index):
    assert h10_index.count([T("T4"), T("T4", False)]) == 0
    stats = conditional_probability(h10_index, rule(["T4", "T7"], "T10"))
    assert stats == RuleStats(0, 0) and stats.p is None


def test_law_accepted(h10_index):
    verdict = is_probabilistic_law(h10_index, rule(["T4"], "T10"), min_support=3)
    assert verdict
    assert verdict.subset_max_p == Fraction(2, 5)


def test_redundant_premise_rejected(h10_index):
    verdict = is_probabilistic_law(h10_index, rule(["T4", "T1"], "T10"), min_support=1)
    assert not verdict
    assert verdict.stats.p == Fraction(3, 4)
    assert verdict.reason == "redundant"
    assert verdict.witness == (T("T4"),)


def test_low_support_rejected(h10_index):
    verdict = is_probabilistic_law(h10_index, rule(["T4"], "T10"), min_support=5)
    assert not verdict and verdict.reason == "low_support"


def test_subset_max_p_is_reported():
    model = FactualModel()
    for i, (a, b) in enumerate([(1, 1), (1, 1), (0, 1), (0, 0)]):
        model.assert_fact(Property("A", f"o{i}", a))
        model.assert_fact(Property("B", f"o{i}", b))
    concepts = ConceptSet([
        Concept("A1", (Compare("A", "=", 1),)),
        Concept("B1", (Compare("B", "=", 1),)),
    ])
    index = build_index(model, concepts)
    verdict = is_probabilistic_law(index, rule(["A1"], "B1"))
    assert verdict and verdict.stats.p == 1 and verdict.subset_max_p == Fraction(3, 4)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_probability_and_law_test_match_oracle(seed):
    rng = random.Random(seed)
    model, concepts = random_model(rng)
    index = build_index(model, concepts)
    r = random_rule(rng, concepts.names)
    stats = conditional_probability(index, r)
    assert (stats.support, stats.hits) == oracles.rule_stats(model, concepts, r)
    assert 0 <= stats.hits <= stats.support
    min_support = rng.randint(1, 3)
    assert bool(is_probabilistic_law(index, r, min_support)) == oracles.is_law(model, concepts, r, min_support)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_complementary_base_rates(seed):
    model, concepts = random_model(random.Random(seed))
    index = build_index(model, concepts)
    for name in concepts.names:
        pos = conditional_probability(index, Rule((), T(name)))
        neg = conditional_probability(index, Rule((), T(name, False)))
        assert pos.support == neg.support
        if pos.support:
            assert pos.p + neg.p == 1


def test_law_json_format():
    law = Law(rule(["T3", "T5"], "!T9"), RuleStats(2, 2))
    line = json.dumps(law.to_dict(), separators=(",", ":"))
    assert line == (
        '{"premises":[{"concept":"T3","sign":true},{"concept":"T5","sign":true}],'
        '"conclusion":{"concept":"T9","sign":false},"support":2,"hits":2,"p":"1/1"}'
    )
    assert Law.from_dict(json.loads(line)) == law


def test_law_json_is_validated():
    good = Law(rule(["T4"], "T10"), RuleStats(50, 49)).to_dict()
    with pytest.raises(LawFormatError):
        Law.from_dict({**good, "p": "1/2"})
    with pytest.raises(LawFormatError):
        Law.from_dict({**good, "extra": 1})
    with pytest.raises(LawFormatError):
        LawSet.from_jsonl(json.dumps(good) + "\n{oops\n")


def test_fractions():
    assert format_fraction(Fraction(98, 100)) == "49/50"
    assert format_fraction(Fraction(1)) == "1/1"
    assert parse_fraction("999/1000") == Fraction(999, 1000)
    with pytest.raises(LawFormatError):
        parse_fraction("0.5")


def test_lawset_round_trip(tmp_path):
    laws = LawSet([
        Law(rule(["T4"], "T10"), RuleStats(50, 49)),
        Law(rule([], "!T3"), RuleStats(1120, 1090)),
    ])
    path = tmp_path / "laws.jsonl"
    laws.save(path)
    again = LawSet.load(path)
    assert again.laws == laws.laws
    assert path.read_text() == laws.to_jsonl()
    assert again.find([T("T4")], T("T10")).p == Fraction(49, 50)
    assert again.find([T("T5")], T("T10")) is None
    assert again.find([], "¬T3") == again.find([], T("T3", False)) is not None


def test_explain_sentences(h100):
    _, concepts = h100
    law = Law(rule(["T4"], "T10"), RuleStats(50, 49))
    assert explain(law, concepts) == (
        "If Age < 16 then HasOccupation = Student (probability 0.98, support 50)."
    )
    law = Law(rule(["T3", "T5"], "!T9"), RuleStats(20, 19))
    assert explain(law, concepts) == (
        "If HasHairColor = Green and Age >= 16 and Age < 25 "
        "then not HasOccupation = Researcher (probability 0.95, support 20)."
    )
    law = Law(rule(["!T5"], "T10"), RuleStats(3, 1))
    assert explain(law, concepts).startswith("If not (Age >= 16 and Age < 25) then")
    law = Law(rule([], "!T3"), RuleStats(1000, 999))
    assert explain(law, concepts) == "Unconditionally, not HasHairColor = Green (probability 0.999)."
    assert explain(law) == "Unconditionally, not T3 (probability 0.999)."
