"""Exception types shared across the package."""


class GraphError(Exception):
    """Base class for graph construction and mutation errors."""


class EdgeAbsent(GraphError):
    """An operation referenced an edge that is not in the graph."""


class IllegalRemark(GraphError):
    """Attempt to overwrite a tail or arrow mark with a different mark."""


class IllegalEdgeType(GraphError):
    """An edge would end up outside the mark vocabulary (tail/tail, tail/circle)."""


class MissingSepset(Exception):
    """A nonadjacent pair has no recorded separator; the skeleton stage is broken."""


class NoRemovableNode(Exception):
    """Node elimination stalled: a nonempty working graph with nothing removable."""

    def __init__(self, message, remaining=(), graph=None):
        super().__init__(message)
        self.remaining = tuple(remaining)
        self.graph = graph


class QueryOnHidden(Exception):
    """An independence query touched a hidden variable."""


class StateSpaceTooLarge(Exception):
    """Joint state count exceeds the exact-enumeration guard."""


class NodeSetMismatch(Exception):
    """Compared graphs are defined over different node sets."""


class PropertyViolation(Exception):
    """A structural-correctness check failed; carries the witnesses."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class InputError(Exception):
    """A data file failed to parse or validate; the message names the spot."""
