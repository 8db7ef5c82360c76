"""Consistent one-step prediction from a law set.

For every concept ``T`` the applicable laws concluding ``T`` or ``¬T`` compete.
A law is discarded when another applicable law in that group has a strictly
larger premise set (it describes a narrower reference class).  Among the
survivors the best law per sign is chosen by probability, then premise
count, then literal order.  If the best ``T`` and ``¬T`` laws tie on both
probability and premise count the concept is reported as ambiguous and
nothing is predicted for it.  The output therefore never holds both ``T``
and ``¬T``.
"""

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .concepts import Literal, ObjectDescription
from .rules import Law, format_fraction

__all__ = ["Prediction", "PredictionReport", "applicable_laws", "predict", "valuation_of"]


def valuation_of(desc, concepts):
    """Concept truth values of a description (dict or ObjectDescription)."""
    if isinstance(desc, dict):
        desc = ObjectDescription.from_dict(desc, known_categories=concepts.categories())
    return desc.valuation(concepts)


def _holds(valuation, lit):
    v = valuation.get(lit.concept)
    if v is None:
        return False
    return v if lit.positive else not v


def applicable_laws(desc, laws, concepts=None):
    """Laws whose premises are all true for ``desc``.

    ``desc`` is a valuation (concept name to True/False/None) or, when
    ``concepts`` is given, a description to evaluate.  An undefined or
    unknown premise concept makes a law inapplicable.
    """
    valuation = desc if concepts is None else valuation_of(desc, concepts)
    return [law for law in laws if all(_holds(valuation, lit) for lit in law.premises)]


@dataclass(frozen=True)
class Prediction:
    literal: Literal
    law: Law
    rivals: Tuple[Law, ...] = ()

    @property
    def confidence(self):
        return self.law.p

    def to_dict(self):
        return {
            "concept": self.literal.concept,
            "sign": self.literal.positive,
            "p": format_fraction(self.confidence),
            "law": self.law.to_dict(),
        }


@dataclass
class PredictionReport:
    predicted: List[Prediction] = field(default_factory=list)
    ambiguous: List[str] = field(default_factory=list)
    rivals: List[Law] = field(default_factory=list)

    def literals(self):
        return [pr.literal for pr in self.predicted]

    def get(self, concept) -> Optional[Prediction]:
        for pr in self.predicted:
            if pr.literal.concept == concept:
                return pr
        return None

    def to_dict(self):
        return {
            "predicted": [pr.to_dict() for pr in self.predicted],
            "ambiguous": list(self.ambiguous),
            "rivals": [law.to_dict() for law in self.rivals],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))


def _rank(law):
    # smaller is better: higher p, then more premises, then literal order
    return (-law.p, -len(law.premises), tuple(lit.sort_key() for lit in law.premises))


def _maximal(group):
    """Drop laws whose premise set is strictly inside another's."""
    sets = [frozenset(law.premises) for law in group]
    return [law for law, s in zip(group, sets) if not any(s < other for other in sets)]


def predict(desc, laws, concepts=None):
    """Predict concept values for one object; see the module docstring."""
    groups: Dict[str, List[Law]] = {}
    for law in applicable_laws(desc, laws, concepts):
        groups.setdefault(law.conclusion.concept, []).append(law)

    report = PredictionReport()
    for concept in sorted(groups):
        group = groups[concept]
        survivors = _maximal(group)
        best = {}
        for sign in (True, False):
            same = [law for law in survivors if law.conclusion.positive is sign]
            if same:
                best[sign] = min(same, key=_rank)
        if len(best) == 2:
            pos, neg = best[True], best[False]
            if pos.p == neg.p and len(pos.premises) == len(neg.premises):
                report.ambiguous.append(concept)
                report.rivals.extend(group)
                continue
            winner = min(pos, neg, key=_rank)
        else:
            (winner,) = best.values()
        rivals = tuple(law for law in group if law is not winner)
        report.predicted.append(Prediction(winner.conclusion, winner, rivals))
        report.rivals.extend(rivals)
    return report
