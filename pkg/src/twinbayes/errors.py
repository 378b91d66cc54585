"""Exception hierarchy.

Every error raised on bad user input derives from :class:`TwinBayesError`;
the CLI maps these to exit status 1 (domain) or 2 (input/parse).
"""


class TwinBayesError(Exception):
    """Base class for all domain errors."""


class InputError(TwinBayesError):
    """Malformed input document (bad JSON, unknown fields, wrong types)."""


class GraphError(TwinBayesError):
    pass


class CycleError(GraphError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("edges contain a directed cycle: " + " -> ".join(self.cycle))


class UnknownNode(GraphError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown node {name!r}")


class BadCardinality(GraphError):
    pass


class ReservedName(GraphError):
    pass


class OverlappingSets(GraphError):
    pass


class LatentTarget(TwinBayesError):
    pass


class BadIntervention(TwinBayesError):
    pass


class InvalidTwin(TwinBayesError):
    pass


class DimensionMismatch(TwinBayesError):
    pass


class SizeError(TwinBayesError):
    pass


class MissingColumn(TwinBayesError):
    pass


class UnknownColumn(TwinBayesError):
    pass


class MissingValueInObservedColumn(TwinBayesError):
    pass


class LatentNodePresent(TwinBayesError):
    pass


class NoLatentNodes(TwinBayesError):
    pass


class NonPositivePrior(TwinBayesError):
    pass


class BadSampleCount(TwinBayesError):
    pass
