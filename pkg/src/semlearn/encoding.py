"""Concept encoding and exact counting.

Each concept is reduced to two bitsets over the objects of a model: where it
is *defined* and where it is *true*.  Bit ``i`` corresponds to object ``i`` in
the model's insertion order.  Counting a conjunction of literals is then a
chain of ``&`` operations followed by a popcount, and all counts are exact.

:class:`ConceptEncoder` exposes the same information as a dense
``(n_objects, n_concepts)`` matrix with entries ``1`` (true), ``0`` (false)
and ``-1`` (undefined), so a factual model can be handed to numpy, pandas or
scikit-learn tooling.
"""

import hashlib

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .concepts import CategoryIs, ConceptSet, Literal, eval_atom, parse_concepts
from .errors import InvalidParams, UnknownConcept

__all__ = [
    "LiteralIndex",
    "ConceptEncoder",
    "build_index",
    "count_satisfying",
    "check_concepts",
    "check_literal_matrix",
]

UNDEFINED = -1


def _to_bits(mask):
    """Pack a boolean array into a Python int, bit i = mask[i]."""
    if not mask.any():
        return 0
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def _atom_arrays(model, atom, n):
    defined = np.zeros(n, dtype=bool)
    truth = np.zeros(n, dtype=bool)
    if isinstance(atom, CategoryIs):
        defined[:] = True
        members = model.members(atom.category)
        if members:
            truth[[model.index_of(o) for o in members]] = True
        return defined, truth
    column = model.column(atom.key)
    for obj in column:
        i = model.index_of(obj)
        defined[i] = True
        truth[i] = eval_atom(model, atom, obj)
    return defined, truth


def concept_arrays(model, concepts):
    """Per-concept ``(defined, truth)`` boolean arrays, in concept order."""
    n = model.n_objects
    out = {}
    cache = {}
    for concept in concepts:
        defined = np.ones(n, dtype=bool)
        truth = np.ones(n, dtype=bool)
        for atom in concept.body:
            if atom not in cache:
                cache[atom] = _atom_arrays(model, atom, n)
            d, t = cache[atom]
            defined &= d
            truth &= t
        out[concept.name] = (defined, truth & defined)
    return out


class LiteralIndex:
    """Bitset view of concept truth values used for all counting.

    Build one with :func:`build_index` (from a model and concepts) or
    :meth:`from_matrix` (from an encoded literal matrix).
    """

    def __init__(self, names, defined, truth, n_objects, fingerprint=None):
        self.names = tuple(names)
        self._defined = dict(defined)
        self._truth = dict(truth)
        self.n_objects = n_objects
        self._fingerprint = fingerprint
        self._all = (1 << n_objects) - 1

    @classmethod
    def from_matrix(cls, matrix, names, fingerprint=None):
        matrix = np.asarray(matrix)
        defined, truth = {}, {}
        for j, name in enumerate(names):
            col = matrix[:, j]
            defined[name] = _to_bits(col != UNDEFINED)
            truth[name] = _to_bits(col == 1)
        if fingerprint is None:
            h = hashlib.sha256(np.ascontiguousarray(matrix, dtype=np.int8).tobytes())
            h.update("\x00".join(names).encode("utf-8"))
            fingerprint = "sha256:" + h.hexdigest()
        return cls(names, defined, truth, matrix.shape[0], fingerprint)

    @property
    def fingerprint(self):
        """Content hash of the indexed data (computed on first use)."""
        if callable(self._fingerprint):
            self._fingerprint = self._fingerprint()
        return self._fingerprint

    def __contains__(self, name):
        return name in self._defined

    def require(self, name):
        if name not in self._defined:
            raise UnknownConcept(f"unknown concept {name!r}")

    def defined_mask(self, name):
        self.require(name)
        return self._defined[name]

    def literal_mask(self, lit):
        """Objects on which ``lit`` is defined and true."""
        self.require(lit.concept)
        t = self._truth[lit.concept]
        return t if lit.positive else self._defined[lit.concept] & ~t

    def conjunction_mask(self, literals):
        mask = self._all
        for lit in literals:
            mask &= self.literal_mask(lit)
        return mask

    def count(self, literals=()):
        return self.conjunction_mask(literals).bit_count()

    def rule_counts(self, premises, conclusion):
        """``(support, hits)`` over objects on which every literal is defined."""
        head = self.literal_mask(conclusion)
        dom = self._defined[conclusion.concept]
        for lit in premises:
            dom &= self.literal_mask(lit)
        return dom.bit_count(), (dom & head).bit_count()

    def truth_value(self, name, i):
        """True/False/None for concept ``name`` on object index ``i``."""
        self.require(name)
        if not self._defined[name] >> i & 1:
            return None
        return bool(self._truth[name] >> i & 1)

    def __repr__(self):
        return f"LiteralIndex(concepts={len(self.names)}, objects={self.n_objects})"


def check_concepts(concepts, model=None):
    """Coerce DSL text or a :class:`ConceptSet`; optionally check it against ``model``."""
    if isinstance(concepts, str):
        return parse_concepts(concepts, model=model)
    if not isinstance(concepts, ConceptSet):
        concepts = ConceptSet(concepts)
    if model is not None:
        concepts.check(model)
    return concepts


def build_index(model, concepts):
    concepts = check_concepts(concepts)
    arrays = concept_arrays(model, concepts)
    defined = {name: _to_bits(d) for name, (d, _) in arrays.items()}
    truth = {name: _to_bits(t) for name, (_, t) in arrays.items()}
    return LiteralIndex(concepts.names, defined, truth, model.n_objects, model.fingerprint)


def count_satisfying(model, concepts, literals=()):
    """Number of objects on which every literal is defined and true."""
    if isinstance(model, LiteralIndex):
        return model.count(literals)
    return build_index(model, concepts).count(literals)


def check_literal_matrix(X, feature_names=None):
    """Validate a literal matrix and return ``(int8 array, names)``.

    Accepts a pandas DataFrame or any 2-d array-like.  Entries must be
    true/false (``1``/``0``/bool) or undefined (``-1``, ``NaN`` or ``None``).
    """
    if hasattr(X, "columns") and hasattr(X, "to_numpy"):
        names = tuple(str(c) for c in X.columns) if feature_names is None else tuple(feature_names)
        raw = X.to_numpy(dtype=object)
    else:
        raw = np.asarray(X, dtype=object)
        names = None if feature_names is None else tuple(feature_names)
    if raw.ndim != 2:
        raise InvalidParams(f"expected a 2-d literal matrix, got {raw.ndim} dimension(s)")
    if names is None:
        names = tuple(f"x{j}" for j in range(raw.shape[1]))
    if len(names) != raw.shape[1]:
        raise InvalidParams(f"{len(names)} feature names for {raw.shape[1]} columns")
    if len(set(names)) != len(names):
        raise InvalidParams("feature names must be unique")
    out = np.empty(raw.shape, dtype=np.int8)
    for idx, v in np.ndenumerate(raw):
        if v is None or (isinstance(v, float) and np.isnan(v)):
            out[idx] = UNDEFINED
        elif v is True or v is False or isinstance(v, np.bool_):
            out[idx] = int(bool(v))
        elif v in (0, 1, -1):
            out[idx] = int(v)
        else:
            raise InvalidParams(f"literal matrix entry {v!r} at {idx} not in {{1, 0, -1}}")
    return out, names


class ConceptEncoder(TransformerMixin, BaseEstimator):
    """Encode the objects of a factual model as a concept truth matrix.

    Parameters
    ----------
    concepts : str or ConceptSet
        Concept definitions (DSL text is parsed on ``fit``).
    check : bool, default=True
        Verify on ``fit`` that every symbol the concepts use exists in the
        model with a compatible kind.
    """

    def __init__(self, concepts=None, check=True):
        self.concepts = concepts
        self.check = check

    def fit(self, X, y=None):
        if self.concepts is None:
            raise InvalidParams("ConceptEncoder needs concepts")
        self.concepts_ = check_concepts(self.concepts, X if self.check else None)
        self.feature_names_out_ = np.asarray(self.concepts_.names, dtype=object)
        self.n_features_out_ = len(self.concepts_)
        return self

    def transform(self, X):
        check_is_fitted(self, "concepts_")
        arrays = concept_arrays(X, self.concepts_)
        out = np.full((X.n_objects, self.n_features_out_), UNDEFINED, dtype=np.int8)
        for j, name in enumerate(self.concepts_.names):
            defined, truth = arrays[name]
            out[defined, j] = truth[defined]
        return out

    def index(self, X):
        """The :class:`LiteralIndex` of ``X`` for the fitted concepts."""
        check_is_fitted(self, "concepts_")
        return build_index(X, self.concepts_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "concepts_")
        return self.feature_names_out_.copy()


def literals_of(names):
    return [Literal(n, s) for n in names for s in (True, False)]
