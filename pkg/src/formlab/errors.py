"""Exception hierarchy shared by every formlab module."""


class FormlabError(Exception):
    """Base class for all errors raised by formlab."""


class ExprSyntaxError(FormlabError, SyntaxError):
    """Malformed expression text.

    ``offset`` is the 0-based byte offset into the UTF-8 encoded input.
    """

    def __init__(self, message, text="", offset=0):
        SyntaxError.__init__(self, f"{message} at byte {offset}")
        self.msg = message
        self.text = text
        self.offset = offset


class UnknownToken(ExprSyntaxError):
    pass


class UnboundSymbol(FormlabError):
    pass


class DomainError(FormlabError):
    pass


class IntegrationError(FormlabError):
    """No antiderivative in the supported table."""


class ChartMismatch(FormlabError):
    pass


class DegreeError(FormlabError):
    pass


class UnsupportedDegree(DegreeError):
    pass


class ArityError(FormlabError):
    pass


class MetricError(FormlabError):
    pass


class ConstraintError(FormlabError):
    pass


class NotClosed(FormlabError):
    pass


class UnsupportedCoefficient(FormlabError):
    pass


class NotFound(FormlabError):
    """Integrating-factor ansatz ladder exhausted."""


class NotClosedOnPseudostructure(FormlabError):
    pass


class DegenerateError(FormlabError):
    pass


class NonFinite(FormlabError):
    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class GridError(FormlabError):
    pass


class UnmappedCombination(FormlabError):
    pass


class ScriptError(FormlabError):
    """Error located in a DSL script (1-based line and column)."""

    def __init__(self, message, line=0, column=0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScriptSyntaxError(ScriptError):
    pass


class UndeclaredName(ScriptError):
    pass


class DegreeOutOfRange(ScriptError):
    pass
