"""Exception taxonomy shared across the package.

CLI exit-code mapping: ParseError and usage problems -> 2,
BudgetExceededError -> 3, domain answers ("invalid graph") -> 1.
"""


class GraphdistError(Exception):
    pass


class ParseError(GraphdistError):
    """Malformed graph text or adjacency CSV."""


class DimensionMismatchError(GraphdistError):
    """Two graphs with different vertex counts were combined."""


class InvalidGraphError(GraphdistError):
    """A graph failed a class-validity precondition."""


class InconsistentBackgroundError(GraphdistError):
    """Background orientations contradict the base graph or its closure."""


class UnsupportedClassError(GraphdistError):
    """The requested operation is undefined for this graph class."""


class NotGradedError(UnsupportedClassError):
    """A rank function was requested for a class without one."""


class BudgetExceededError(GraphdistError):
    """Enumeration or search exceeded its documented size budget."""
