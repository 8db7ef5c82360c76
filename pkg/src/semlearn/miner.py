"""Search for probabilistic laws over the premise lattice.

For each target literal the search walks premise sets level by level, from
the empty premise upwards.  Two facts keep it exact and small:

* support is anti-monotone, so a premise set below ``min_support`` has no
  surviving supersets (Apriori-style candidate generation);
* every node carries the best probability found among its proper subsets,
  so acceptance needs no re-enumeration.  Once that value reaches 1 no
  superset can be a law, and the branch is dropped.

:func:`oracle_mine` is the unpruned reference used in tests.
"""

from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Optional, Tuple

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .concepts import Literal, ObjectDescription, parse_literal
from .encoding import LiteralIndex, build_index, check_concepts, check_literal_matrix
from .errors import InvalidParams, OracleTooLarge, VocabularyTooLarge
from .facts import FactualModel
from .rules import (
    Law,
    LawSet,
    Rule,
    RuleStats,
    format_fraction,
    is_probabilistic_law,
    explain,
)

__all__ = [
    "MiningParams",
    "mine_laws",
    "oracle_mine",
    "audit_laws",
    "candidate_count",
    "LawMiner",
]

MAX_PREMISES_CAP = 5
ORACLE_MAX_VOCABULARY = 12
ORACLE_MAX_PREMISES = 3


def as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # str() keeps the decimal the user typed: 0.98 -> 49/50
        return Fraction(str(value))
    return Fraction(value)


def as_literal(value):
    return value if isinstance(value, Literal) else parse_literal(str(value))


@dataclass(frozen=True)
class MiningParams:
    targets: Tuple[Literal, ...]
    vocabulary: Optional[Tuple[str, ...]] = None
    max_premises: int = 3
    min_support: int = 3
    min_p: Fraction = Fraction(1, 2)
    beam_width: int = 0
    max_nodes: int = 10**7

    def __post_init__(self):
        targets = []
        for t in self.targets:
            lit = as_literal(t)
            if lit not in targets:
                targets.append(lit)
        object.__setattr__(self, "targets", tuple(targets))
        if self.vocabulary is not None:
            object.__setattr__(self, "vocabulary", tuple(dict.fromkeys(self.vocabulary)))
        object.__setattr__(self, "min_p", as_fraction(self.min_p))
        if not 0 <= self.max_premises <= MAX_PREMISES_CAP:
            raise InvalidParams(f"max_premises must be in [0, {MAX_PREMISES_CAP}]")
        if self.min_support < 1:
            raise InvalidParams("min_support must be >= 1")
        if not 0 <= self.min_p <= 1:
            raise InvalidParams("min_p must be in [0, 1]")
        if self.beam_width < 0:
            raise InvalidParams("beam_width must be >= 0")

    def resolve(self, index):
        """Vocabulary with defaults applied, checked against ``index``."""
        vocab = self.vocabulary if self.vocabulary is not None else index.names
        for name in vocab:
            index.require(name)
        for t in self.targets:
            index.require(t.concept)
            if t.concept not in vocab:
                raise InvalidParams(f"target concept {t.concept!r} not in vocabulary")
        return vocab

    def to_dict(self):
        d = asdict(self)
        d["targets"] = [str(t) for t in self.targets]
        d["vocabulary"] = None if self.vocabulary is None else list(self.vocabulary)
        d["min_p"] = format_fraction(self.min_p)
        return d


def _candidates(vocab, target):
    names = sorted(n for n in vocab if n != target.concept)
    return [Literal(n, s) for n in names for s in (True, False)]


def candidate_count(n_concepts, max_premises):
    """Size of the premise lattice over ``n_concepts`` signed concepts."""
    return sum(comb(n_concepts, k) * 2**k for k in range(max_premises + 1))


def _law_order(params):
    rank = {t: i for i, t in enumerate(params.targets)}
    return lambda law: (rank[law.conclusion],) + law.rule.sort_key()


def _level_search(index, target, candidates, params):
    head = index.literal_mask(target)
    masks = [index.literal_mask(lit) for lit in candidates]
    concepts = [lit.concept for lit in candidates]
    min_support, min_p = params.min_support, params.min_p
    laws = []

    def visit(key, mask, best):
        support = mask.bit_count()
        if support < min_support:
            return None
        hits = (mask & head).bit_count()
        p = Fraction(hits, support)
        if (best is None or p > best) and p >= min_p:
            rule = Rule(tuple(candidates[i] for i in key), target)
            laws.append(Law(rule, RuleStats(support, hits), best))
        return mask, p, best

    root = visit((), index.defined_mask(target.concept), None)
    if root is None:
        return laws
    level = {(): root}
    for _ in range(params.max_premises):
        nxt = {}
        for key, (mask, _, _) in level.items():
            used = {concepts[i] for i in key}
            for j in range(key[-1] + 1 if key else 0, len(candidates)):
                if concepts[j] in used:
                    continue
                new = key + (j,)
                best = None
                for drop in range(len(new)):
                    pred = level.get(new[:drop] + new[drop + 1:])
                    if pred is None:
                        break
                    _, p, b = pred
                    if b is not None and b > p:
                        p = b
                    if best is None or p > best:
                        best = p
                else:
                    if best == 1:
                        continue
                    node = visit(new, mask & masks[j], best)
                    if node is not None:
                        nxt[new] = node
        if not nxt:
            break
        level = nxt
    return laws


def _beam_search(index, target, candidates, params):
    head = index.literal_mask(target)
    concepts = [lit.concept for lit in candidates]
    seen = {}

    def stats(key):
        mask = index.defined_mask(target.concept)
        for i in key:
            mask &= index.literal_mask(candidates[i])
        support = mask.bit_count()
        return support, (mask & head).bit_count()

    def rank(key):
        support, hits = seen[key]
        return (-Fraction(hits, support), len(key), tuple(candidates[i].sort_key() for i in key))

    frontier = [()]
    seen[()] = stats(())
    if seen[()][0] < params.min_support:
        return []
    for _ in range(params.max_premises):
        children = set()
        for key in frontier:
            used = {concepts[i] for i in key}
            for j in range(len(candidates)):
                if concepts[j] not in used:
                    children.add(tuple(sorted(key + (j,))))
        alive = []
        for key in sorted(children):
            if key not in seen:
                seen[key] = stats(key)
            if seen[key][0] >= params.min_support:
                alive.append(key)
        frontier = sorted(alive, key=rank)[: params.beam_width]
        if not frontier:
            break

    laws = []
    for key, (support, _) in seen.items():
        if support < params.min_support:
            continue
        rule = Rule(tuple(candidates[i] for i in key), target)
        verdict = is_probabilistic_law(index, rule, params.min_support)
        if verdict and verdict.stats.p >= params.min_p:
            laws.append(verdict.law(rule))
    return laws


def audit_laws(index, laws):
    """Recount every law and each of its premise subsets.

    Returns a list of ``(law, reason)`` pairs; empty means all laws hold.
    """
    problems = []
    for law in laws:
        verdict = is_probabilistic_law(index, law.rule, 1)
        if verdict.stats != law.stats:
            problems.append((law, f"stats recount {verdict.stats} != {law.stats}"))
        elif not verdict:
            problems.append((law, f"{verdict.reason}: {verdict.witness}"))
    return problems


def _provenance(index, params, mode):
    return {
        "params": params.to_dict(),
        "mode": mode,
        "fingerprint": index.fingerprint,
        "n_objects": index.n_objects,
    }


def mine_laws(index, params):
    """All probabilistic laws for ``params.targets`` in deterministic order.

    With ``beam_width == 0`` the result is exact.  With a positive beam only
    the best ``beam_width`` nodes per level are expanded; every law returned
    is still a verified law, but some may be missed.
    """
    vocab = params.resolve(index)
    exhaustive = params.beam_width == 0
    if exhaustive:
        total = sum(
            candidate_count(len(_candidates(vocab, t)) // 2, params.max_premises)
            for t in params.targets
        )
        if total > params.max_nodes:
            raise VocabularyTooLarge(
                f"{total} lattice nodes exceed the ceiling of {params.max_nodes}; "
                "shrink the vocabulary, lower max_premises or use a beam"
            )
    search = _level_search if exhaustive else _beam_search
    laws = []
    for target in params.targets:
        laws.extend(search(index, target, _candidates(vocab, target), params))
    laws.sort(key=_law_order(params))
    problems = audit_laws(index, laws)
    if problems:
        raise RuntimeError(f"law audit failed: {problems[0][1]} for {problems[0][0]}")
    return LawSet(laws, _provenance(index, params, "exhaustive" if exhaustive else "beam"))


def oracle_mine(index, params):
    """Enumerate every premise set and test it directly; no pruning."""
    vocab = params.resolve(index)
    if len(vocab) > ORACLE_MAX_VOCABULARY:
        raise OracleTooLarge(f"oracle handles at most {ORACLE_MAX_VOCABULARY} concepts")
    if params.max_premises > ORACLE_MAX_PREMISES:
        raise OracleTooLarge(f"oracle handles at most {ORACLE_MAX_PREMISES} premises")
    laws = []
    for target in params.targets:
        names = sorted(n for n in vocab if n != target.concept)
        for k in range(params.max_premises + 1):
            for chosen in combinations(names, k):
                for signs in product((True, False), repeat=k):
                    rule = Rule(tuple(map(Literal, chosen, signs)), target)
                    verdict = is_probabilistic_law(index, rule, params.min_support)
                    if verdict and verdict.stats.p >= params.min_p:
                        laws.append(verdict.law(rule))
    laws.sort(key=_law_order(params))
    return LawSet(laws, _provenance(index, params, "oracle"))


def _is_descriptions(X):
    if isinstance(X, (dict, ObjectDescription)):
        return True
    return isinstance(X, (list, tuple)) and all(isinstance(x, (dict, ObjectDescription)) for x in X)


class LawMiner(BaseEstimator):
    """Mine probabilistic laws and predict with maximal specificity.

    ``fit`` accepts either a :class:`~semlearn.facts.FactualModel` (then
    ``concepts`` is required) or a literal matrix: a DataFrame or 2-d array
    with entries 1/0 and -1 or NaN for undefined, one column per concept.

    Parameters
    ----------
    concepts : str or ConceptSet, optional
        Concept definitions, needed when fitting on a factual model.
    targets : list of str or Literal, optional
        Conclusions to mine for. Defaults to every concept, both signs.
    vocabulary : list of str, optional
        Concepts usable in premises. Defaults to every concept.
    max_premises, min_support, min_p, beam_width, max_nodes
        Search controls, see :class:`MiningParams`.

    Attributes
    ----------
    laws_ : LawSet
    index_ : LiteralIndex
    concepts_ : ConceptSet or None
    feature_names_in_ : tuple of str
    """

    def __init__(self, concepts=None, targets=None, vocabulary=None, max_premises=3,
                 min_support=3, min_p=0.5, beam_width=0, max_nodes=10**7):
        self.concepts = concepts
        self.targets = targets
        self.vocabulary = vocabulary
        self.max_premises = max_premises
        self.min_support = min_support
        self.min_p = min_p
        self.beam_width = beam_width
        self.max_nodes = max_nodes

    def _index(self, X):
        if isinstance(X, FactualModel):
            if self.concepts is None:
                raise InvalidParams("fitting on a FactualModel requires concepts")
            self.concepts_ = check_concepts(self.concepts, X)
            return build_index(X, self.concepts_)
        self.concepts_ = None
        matrix, names = check_literal_matrix(X)
        return LiteralIndex.from_matrix(matrix, names)

    def params_for(self, index):
        targets = self.targets
        if targets is None:
            names = self.vocabulary if self.vocabulary is not None else index.names
            targets = [Literal(n, s) for n in names for s in (True, False)]
        elif isinstance(targets, (str, Literal)):
            targets = [targets]
        return MiningParams(
            targets=tuple(targets),
            vocabulary=None if self.vocabulary is None else tuple(self.vocabulary),
            max_premises=self.max_premises,
            min_support=self.min_support,
            min_p=self.min_p,
            beam_width=self.beam_width,
            max_nodes=self.max_nodes,
        )

    def fit(self, X, y=None):
        index = self._index(X)
        self.params_ = self.params_for(index)
        self.laws_ = mine_laws(index, self.params_)
        self.index_ = index
        self.feature_names_in_ = index.names
        return self

    def valuations(self, X):
        """Concept truth values for each description or matrix row."""
        check_is_fitted(self, "laws_")
        if _is_descriptions(X):
            if self.concepts_ is None:
                raise InvalidParams("descriptions need a miner fitted on a FactualModel")
            items = [X] if isinstance(X, (dict, ObjectDescription)) else X
            out = []
            for item in items:
                if isinstance(item, dict):
                    item = ObjectDescription.from_dict(
                        item, known_categories=self.concepts_.categories()
                    )
                out.append(item.valuation(self.concepts_))
            return out
        matrix, _ = check_literal_matrix(X, self.feature_names_in_)
        return [
            {n: (None if v == -1 else bool(v)) for n, v in zip(self.feature_names_in_, row)}
            for row in matrix
        ]

    def predict(self, X):
        """One :class:`~semlearn.predictor.PredictionReport` per input."""
        from .predictor import predict

        return [predict(v, self.laws_) for v in self.valuations(X)]

    def explain(self):
        check_is_fitted(self, "laws_")
        return [explain(law, self.concepts_) for law in self.laws_]
