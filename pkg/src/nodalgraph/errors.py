"""Exception hierarchy shared by every module.

Each exception carries an ``exit_code`` used by the command-line front end:
2 for bad input, 3 for numerical failure, 4 for a model mismatch.
"""

from __future__ import annotations


class NodalGraphError(Exception):
    exit_code = 1


class InputError(NodalGraphError, ValueError):
    exit_code = 2


class NumericalError(NodalGraphError, ArithmeticError):
    exit_code = 3


class ModelMismatch(NodalGraphError):
    exit_code = 4


# graph construction
class DisconnectedGraph(InputError):
    pass


class SelfLoop(InputError):
    pass


class ParallelEdge(InputError):
    pass


class NotATree(ModelMismatch):
    pass


class ZeroSign(InputError):
    """A sign pattern or vector vanishes at a vertex."""

    def __init__(self, message: str, vertex: int | None = None):
        super().__init__(message)
        self.vertex = vertex


# discrete operator
class ConvergenceFailure(NumericalError):
    pass


class DisconnectingCut(InputError):
    pass


class VanishingEndpoint(InputError):
    pass


# riccati
class BracketingFailure(NumericalError):
    pass


class NonGenericSweep(NumericalError):
    pass


# metric graphs
class ScanResolutionFailure(NumericalError):
    pass


class DegenerateChoice(NumericalError):
    pass


class IdenticallyZeroEdge(NumericalError):
    pass


class ZeroAtVertex(NumericalError):
    def __init__(self, message: str, vertex: int | None = None):
        super().__init__(message)
        self.vertex = vertex


class NoNonzeroCutPoint(NumericalError):
    pass


class PoleProximity(NumericalError):
    pass


class DirichletForm(InputError):
    pass


# verification harness
class PerturbationExhausted(NumericalError):
    pass
