"""Probabilistic law mining over factual models.

Store facts about objects, define concepts over them, mine the laws that
hold between concepts with exact counting, and predict new objects'
concepts without ever concluding both ``T`` and ``not T``.
"""

from .concepts import (
    CategoryIs,
    Compare,
    Concept,
    ConceptSet,
    Literal,
    ObjectDescription,
    eval_literal,
    load_concepts,
    parse_concepts,
    parse_literal,
)
from .encoding import ConceptEncoder, LiteralIndex, build_index, count_satisfying
from .errors import SemlearnError
from .facts import Categorical, FactualModel, Link, Property, Ref, load_facts
from .miner import LawMiner, MiningParams, audit_laws, mine_laws, oracle_mine
from .predictor import Prediction, PredictionReport, applicable_laws, predict
from .rules import (
    Law,
    LawSet,
    Rule,
    RuleStats,
    conditional_probability,
    explain,
    is_probabilistic_law,
)

__version__ = "0.1.0"

__all__ = [
    "Categorical",
    "CategoryIs",
    "Compare",
    "Concept",
    "ConceptEncoder",
    "ConceptSet",
    "FactualModel",
    "Law",
    "LawMiner",
    "LawSet",
    "Link",
    "Literal",
    "LiteralIndex",
    "MiningParams",
    "ObjectDescription",
    "Prediction",
    "PredictionReport",
    "Property",
    "Ref",
    "Rule",
    "RuleStats",
    "SemlearnError",
    "applicable_laws",
    "audit_laws",
    "build_index",
    "conditional_probability",
    "count_satisfying",
    "eval_literal",
    "explain",
    "is_probabilistic_law",
    "load_concepts",
    "load_facts",
    "mine_laws",
    "oracle_mine",
    "parse_concepts",
    "parse_literal",
    "predict",
]
