"""Exception hierarchy shared by every module.

Tool handlers in the MCP front end turn any ``OknError`` into a tool-error
result, so modules raise these instead of returning error values.
"""


class OknError(Exception):
    """Base class for all errors raised by this package."""


class RegistryLoadError(OknError):
    pass


class NotFoundError(OknError, LookupError):
    pass


class ArgumentError(OknError, ValueError):
    pass


class SparqlSyntaxError(OknError):
    """The query text could not be parsed into the supported subset."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at offset {position})")
        self.position = position


class RewriteError(OknError):
    pass


class EndpointError(OknError):
    def __init__(self, message, status=None, excerpt=""):
        super().__init__(message)
        self.status = status
        self.excerpt = excerpt

    @property
    def transient(self):
        return self.status is not None and self.status >= 500


class EndpointTimeout(EndpointError):
    @property
    def transient(self):
        return True


class ResultParseError(OknError):
    pass


class ExpansionSkipped(OknError):
    """The URI is not in an enabled ontology namespace; caller does not expand."""


class QueryExecutionError(OknError):
    def __init__(self, message, batch_index=None, graph=None):
        super().__init__(message)
        self.batch_index = batch_index
        self.graph = graph


class MultiGraphError(OknError):
    def __init__(self, causes):
        joined = "; ".join(f"{g}: {msg}" for g, msg in causes.items())
        super().__init__(f"all graphs failed: {joined}")
        self.causes = dict(causes)


class EvaluationError(OknError):
    """Raised by the fixture evaluator for constructs outside its subset."""


class FixtureParseError(OknError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line
