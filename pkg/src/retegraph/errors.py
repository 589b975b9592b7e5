"""Exception hierarchy shared across the engine.

User-facing errors (bad documents, bad queries, bad deltas) derive from
:class:`UserError`; :class:`InternalError` marks engine inconsistencies that
indicate a bug rather than bad input.  The CLI maps these to exit codes 1
and 2 respectively.
"""


class RetegraphError(Exception):
    pass


class UserError(RetegraphError):
    pass


class InternalError(RetegraphError):
    pass


# --- graph documents and deltas ---------------------------------------------

class GraphParseError(UserError):
    """Malformed graph document or delta record."""


class DuplicateIdError(UserError):
    """An element id was declared twice (vertex and edge ids share one namespace)."""


class DanglingEdgeError(UserError):
    """An edge references a vertex id that does not exist."""


class UnknownIdError(UserError):
    """A delta names an element id that does not exist."""


class VertexHasEdgesError(UserError):
    """remove-vertex without detach on a vertex with incident edges."""


class TypeMismatchError(UserError):
    """A property value falls outside the supported value domain."""


class UnknownQueryError(UserError):
    """A session command names a query that was never registered."""


# --- query frontend ----------------------------------------------------------

class QueryError(UserError):
    """Base for errors that carry a source position."""

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self):
        if self.line is not None:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


class QuerySyntaxError(QueryError):
    pass


class UnsupportedFeatureError(QueryError):
    """Recognized openCypher syntax that is deliberately out of scope."""


class ValidationError(QueryError):
    pass


class UnboundVariableError(ValidationError):
    pass


class DuplicateVariableError(ValidationError):
    pass


class MisplacedAggregateError(ValidationError):
    pass


# --- planning ----------------------------------------------------------------

class InferenceError(InternalError):
    """Required-property inference hit a variable no child schema binds."""


class SchemaMismatchError(UserError):
    """Union operands disagree on their flat schema."""


# --- runtime -----------------------------------------------------------------

class EvaluationError(UserError):
    """Type-mismatched arithmetic or an undefined numeric result."""


class PathBudgetExceededError(UserError):
    """A transitive node would cache more paths than the configured budget."""


class InconsistentRetractionError(InternalError):
    """A negative tuple exceeded the cached multiplicity (store/engine desync)."""
