"""
Exception hierarchy shared by every layer of the toolkit.

Solver outcomes such as infeasibility are statuses on a Solution, not
exceptions; the classes below cover misuse and broken preconditions.
"""


class HcaError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(HcaError, ValueError):
    """Invalid parameters, malformed files or inconsistent dimensions."""


class StructuralError(HcaError):
    """An SCM whose wiring is not a DAG or references unknown variables."""


class ProvenanceError(HcaError):
    """A dataset that was not produced by the SCM it is paired with."""


class DegenerateSolutionError(HcaError):
    """A solution vector that is not a 0/1 code within rounding tolerance."""


class UnsupportedEstimatorError(HcaError):
    """A gradient estimator requested for a noise family it cannot handle."""


class PreconditionError(HcaError):
    """An operation refused because its documented precondition fails."""


class SolverError(HcaError):
    """The simplex solver could not finish (iteration or size limits)."""
