"""Exception hierarchy shared by the library and the CLI."""


class PeriodicRGError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(PeriodicRGError, ValueError):
    """A system or scenario file does not match the expected layout.

    ``path`` is the dotted/indexed location of the offending field.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ValidationError(PeriodicRGError):
    """A periodic system violates one of the standing assumptions A1-A4."""

    def __init__(self, report):
        self.report = report
        details = "; ".join(f"{aid}: {msg}" for aid, msg in report.assumption_failures)
        super().__init__(f"system failed validation ({details})")


class LpIterationLimit(PeriodicRGError):
    """The simplex method hit its pivot budget before reaching a verdict."""


class PolytopeError(PeriodicRGError):
    """Geometric query on a polytope that does not satisfy its preconditions."""


class NotFinitelyDetermined(PeriodicRGError):
    """The admissible-set recursion did not terminate within the step cap."""


class InfeasibleGovernorState(PeriodicRGError):
    """The governed state has left the admissible set (b_i < -tol)."""
