"""Randomised self-checks against slow reference implementations.

Each suite draws small random factual models and compares a fast code path
with a direct one:

* ``counting`` - bitset rule counts vs. filtering objects one at a time;
* ``miner`` - the pruned lattice search vs. unpruned enumeration;
* ``audit`` - every mined law re-checked against all its premise subsets;
* ``consistency`` - predictions never contain both ``T`` and ``not T``.

Run them with ``semlearn selfcheck``.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List

from .concepts import Literal, eval_literal
from .datasets import random_model
from .encoding import build_index
from .miner import MiningParams, audit_laws, mine_laws, oracle_mine
from .predictor import predict
from .rules import Rule, RuleStats, conditional_probability

__all__ = ["SuiteResult", "filter_count", "random_rule", "random_valuation", "run_selfcheck", "SUITES"]


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "suite": self.name,
            "cases": self.cases,
            "passed": self.passed,
            "failures": self.failures[:5],
        }

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<12} {self.cases} cases, {len(self.failures)} failures"


def filter_count(model, concepts, rule):
    """Rule stats by evaluating every object separately."""
    support = hits = 0
    for obj in model.objects:
        values = [eval_literal(model, concepts, lit, obj) for lit in rule.premises]
        head = eval_literal(model, concepts, rule.conclusion, obj)
        if head is None or any(v is not True for v in values):
            continue
        support += 1
        hits += head
    return RuleStats(support, hits)


def random_rule(rng, names, max_premises=3):
    names = list(names)
    rng.shuffle(names)
    k = rng.randint(0, min(max_premises, len(names) - 1))
    premises = tuple(Literal(n, rng.random() < 0.5) for n in names[1:k + 1])
    return Rule(premises, Literal(names[0], rng.random() < 0.5))


def random_valuation(rng, names):
    return {n: rng.choice((True, False, None)) for n in names}


def random_params(rng, names, max_premises=3):
    targets = [Literal(n, rng.random() < 0.5) for n in rng.sample(names, min(len(names), 2))]
    return MiningParams(
        targets=tuple(targets),
        max_premises=rng.randint(0, max_premises),
        min_support=rng.randint(1, 3),
        min_p=rng.choice((Fraction(0), Fraction(1, 2), Fraction(2, 3))),
    )


def check_counting(rng, cases):
    result = SuiteResult("counting")
    for _ in range(cases):
        model, concepts = random_model(rng)
        index = build_index(model, concepts)
        rule = random_rule(rng, concepts.names)
        result.cases += 1
        fast = conditional_probability(index, rule)
        slow = filter_count(model, concepts, rule)
        if fast != slow:
            result.failures.append(f"{rule}: {fast} != {slow}")
    return result


def check_miner(rng, cases):
    result = SuiteResult("miner")
    for _ in range(cases):
        model, concepts = random_model(rng)
        index = build_index(model, concepts)
        params = random_params(rng, list(concepts.names))
        result.cases += 1
        fast, slow = mine_laws(index, params), oracle_mine(index, params)
        if fast.laws != slow.laws:
            result.failures.append(f"{params.to_dict()}: {len(fast)} vs {len(slow)} laws")
    return result


def check_audit(rng, cases):
    result = SuiteResult("audit")
    for _ in range(cases):
        model, concepts = random_model(rng)
        index = build_index(model, concepts)
        laws = mine_laws(index, random_params(rng, list(concepts.names)))
        result.cases += len(laws)
        result.failures.extend(f"{law}: {why}" for law, why in audit_laws(index, laws))
    return result


def check_consistency(rng, cases):
    result = SuiteResult("consistency")
    for _ in range(cases):
        model, concepts = random_model(rng)
        index = build_index(model, concepts)
        names = list(concepts.names)
        params = MiningParams(
            targets=tuple(Literal(n, s) for n in names for s in (True, False)),
            max_premises=2,
            min_support=1,
            min_p=0,
        )
        laws = mine_laws(index, params)
        valuation = random_valuation(rng, names)
        result.cases += 1
        report = predict(valuation, laws)
        concluded = [lit.concept for lit in report.literals()]
        if len(concluded) != len(set(concluded)):
            result.failures.append(f"{valuation}: {[str(l) for l in report.literals()]}")
    return result


SUITES = {
    "counting": check_counting,
    "miner": check_miner,
    "audit": check_audit,
    "consistency": check_consistency,
}


def run_selfcheck(seed=0, cases=100, suites=None):
    """Run the named suites (all by default); returns a list of results."""
    results = []
    for name in suites or SUITES:
        rng = random.Random(f"{seed}:{name}")
        results.append(SUITES[name](rng, cases))
    return results
