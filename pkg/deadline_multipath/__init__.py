#!/usr/bin/env python3
"""
Deadline-aware multipath transmission planning
File: deadline_multipath/__init__.py

Decides what fraction of an application's traffic goes along each sequence
of paths (first transmission, then retransmissions) so that as much data as
possible arrives before its deadline, and simulates the result.
"""

from deadline_multipath.config import ScenarioConfig, load_scenario
from deadline_multipath.delay_models import FixedDelay, ShiftedGammaDelay
from deadline_multipath.lp import SolverConfig, solve
from deadline_multipath.model import (
    Network, PathSpec, Solution, Workload, augment_blackhole, build_cost_lp, build_quality_lp,
    quality,
)
from deadline_multipath.scheduler import AssignmentState, select_path_combination
from deadline_multipath.sim import plan_sender, run, sensitivity_sweep
from deadline_multipath.stochastic import build_stochastic_quality_lp, optimize_timeout


# Package metadata
__version__ = "20261018.0"
__author__ = "Deadline Multipath Tools"
__description__ = "Plan and simulate deadline-aware multipath transmission"

__all__ = [
    "AssignmentState",
    "FixedDelay",
    "Network",
    "PathSpec",
    "ScenarioConfig",
    "ShiftedGammaDelay",
    "Solution",
    "SolverConfig",
    "Workload",
    "augment_blackhole",
    "build_cost_lp",
    "build_quality_lp",
    "build_stochastic_quality_lp",
    "load_scenario",
    "optimize_timeout",
    "plan_sender",
    "quality",
    "run",
    "select_path_combination",
    "sensitivity_sweep",
    "solve",
]

# End of file #
