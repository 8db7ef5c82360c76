"""Exception hierarchy.

Every domain error carries a stable ``code`` (the class name) so the CLI can
emit machine-readable error records.
"""


class SemlearnError(Exception):
    """Base class for all domain errors raised by this package."""

    @property
    def code(self):
        return type(self).__name__

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class KindMismatch(SemlearnError):
    pass


class DuplicateFunctionalFact(SemlearnError):
    pass


class DanglingRef(SemlearnError):
    pass


class FactFormatError(SemlearnError):
    pass


class FrozenModelError(SemlearnError):
    pass


class UnknownObject(SemlearnError):
    pass


class UnknownConcept(SemlearnError):
    pass


class UnknownSymbol(SemlearnError):
    """A concept body mentions a category, property or link the model lacks."""


class DuplicateName(SemlearnError):
    pass


class ConceptSyntaxError(SemlearnError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column

    def to_dict(self):
        d = super().to_dict()
        d.update(line=self.line, column=self.column)
        return d


class InvalidRule(SemlearnError):
    pass


class InvalidParams(SemlearnError):
    pass


class VocabularyTooLarge(SemlearnError):
    pass


class OracleTooLarge(SemlearnError):
    pass


class LawFormatError(SemlearnError):
    pass


class InsufficientExploration(SemlearnError):
    pass


class NoLawFound(SemlearnError):
    pass
