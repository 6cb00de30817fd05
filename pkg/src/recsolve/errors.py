"""Exception hierarchy shared by every module of the package."""


class RecsolveError(Exception):
    """Base class for all library errors."""


class EvaluationError(RecsolveError):
    pass


class UnboundSymbol(EvaluationError):
    pass


class NonIntegerExponent(EvaluationError):
    pass


class DomainError(EvaluationError):
    pass


class IrrationalValue(EvaluationError):
    """Exact evaluation produced a value outside the rationals."""


class NotExpPoly(RecsolveError):
    pass


class NoSignChange(RecsolveError):
    pass


class ParseError(RecsolveError):
    """Input text does not match the recurrence grammar."""

    def __init__(self, message, position=None, expected=None, text=None):
        self.position = position
        self.expected = expected
        self.text = text
        super().__init__(message)

    def diagnostic(self):
        lines = [str(self)]
        if self.text is not None and self.position is not None:
            lines.append("  " + self.text)
            lines.append("  " + " " * self.position + "^")
        return "\n".join(lines)


class InconsistentArity(ParseError):
    pass


class MixedForm(ParseError):
    pass


class DuplicateCondition(ParseError):
    pass


class NotHypergeometric(RecsolveError):
    pass


class NotGosperSummable(RecsolveError):
    """Gosper's polynomial equation has no solution: the term has no
    hypergeometric antidifference."""


class NotFactorable(RecsolveError):
    pass


class NotReducible(RecsolveError):
    pass


class SingularSystem(RecsolveError):
    pass


class NotEliminable(RecsolveError):
    pass


class NotFirstOrder(RecsolveError):
    pass


class CoefficientVanishes(RecsolveError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class NotPowerProduct(RecsolveError):
    pass


class NonPositiveConstant(RecsolveError):
    pass


class NotSupportedShape(RecsolveError):
    pass


class NoInvariantCombination(RecsolveError):
    pass


class IllFormed(RecsolveError):
    pass


class Unsupported(RecsolveError):
    pass


class NoPositiveRoot(RecsolveError):
    pass


class MissingInitialCondition(RecsolveError):
    pass


class SymbolicBlocked(RecsolveError):
    pass


class AssumptionViolated(RecsolveError):
    pass


class NotPolynomial(RecsolveError):
    pass
