"""Exception hierarchy shared by all cspgap modules."""


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ToolkitError, ValueError):
    """Malformed input data or a violated object invariant."""


class BudgetError(ToolkitError, RuntimeError):
    """An enumeration or search exceeded its configured budget."""


class InternalError(ToolkitError, RuntimeError):
    """A postcondition self-check failed; indicates a bug, not bad input."""
