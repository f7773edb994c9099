"""Exception hierarchy for the silt package.

``PreconditionError`` carries the violated invariant verbatim in its
message so front ends can surface it unchanged; ``QuadratureError``
signals that an adaptive integration failed to converge within budget
instead of returning an unreliable value.
"""

from __future__ import annotations


class SiltError(Exception):
    """Base class for all silt-specific errors."""


class PreconditionError(SiltError, ValueError):
    """An operation was called with arguments violating its preconditions.

    The message states the violated invariant.
    """


class QuadratureError(SiltError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class WeightOverflowError(SiltError, OverflowError):
    """A Monte Carlo reweighting produced numerically overflowing weights."""
