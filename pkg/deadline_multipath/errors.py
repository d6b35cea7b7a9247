#!/usr/bin/env python3
"""
Exception hierarchy for the deadline-aware multipath toolkit.
File: deadline_multipath/errors.py

Infeasible or unbounded programs are reported through Solution.status,
never raised.
"""


class MultipathError(Exception):
    """Root of every error raised by the package."""


class ScenarioError(MultipathError, ValueError):
    """Invalid configuration or a violated domain-type invariant."""


class NetworkShapeError(ScenarioError):
    """Combination, vector or network does not fit the expected shape."""


class SolverError(MultipathError, RuntimeError):
    """The simplex could not finish."""


class CyclingError(SolverError):
    """Pivot budget exhausted even with Bland's rule engaged."""


class TimeoutUndefinedError(MultipathError):
    """No retransmission timeout exists for the requested path."""

# End of file #
