#!/usr/bin/env python3
"""
Discretization of a fractional assignment into per-packet decisions.
File: deadline_multipath/scheduler.py

Every new packet goes to the combination that lags furthest behind its
target share; the very first packet goes to the largest share. Ties go to the
lowest index.
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from deadline_multipath.errors import ScenarioError
from deadline_multipath.model import BLACKHOLE_INDEX


DENOMINATOR_CAP = 10_000
TIE_EPSILON = 1e-12


class AssignmentState:
    """Per-flow counters of packets assigned to each combination."""

    def __init__(self, target: Sequence[float], denominator_cap: int = DENOMINATOR_CAP):
        target = np.asarray(target, dtype=float)
        if target.ndim != 1 or target.size == 0:
            raise ScenarioError("target assignment must be a non-empty vector")
        if np.any(target < -1e-9) or abs(float(target.sum()) - 1.0) > 1e-7:
            raise ScenarioError("target assignment must be non-negative and sum to 1")
        self.target = np.clip(target, 0.0, None)
        self.assigned: List[int] = [0] * target.size
        self.total = 0
        self._support = [i for i, value in enumerate(self.target) if value > TIE_EPSILON]
        self._first = int(np.argmax(self.target))
        self._numerators, self._denominator = _exact_shares(self.target, denominator_cap)

    @property
    def exact(self) -> bool:
        return self._numerators is not None

    def select(self) -> int:
        if self.total == 0:
            choice = self._first
        elif self._numerators is not None:
            # assigned/total - a/D compared as assigned*D - a*total
            total, denominator, numerators = self.total, self._denominator, self._numerators
            choice = min(self._support,
                         key=lambda i: (self.assigned[i] * denominator - numerators[i] * total, i))
        else:
            choice = self._support[0]
            best = math.inf
            for i in self._support:
                deficit = self.assigned[i] / self.total - self.target[i]
                if deficit < best - TIE_EPSILON:
                    best, choice = deficit, i
        self.assigned[choice] += 1
        self.total += 1
        return choice

    def discrepancy(self) -> float:
        """max_i |assigned[i] - total * x_i|."""
        return float(np.max(np.abs(np.asarray(self.assigned) - self.total * self.target)))


def _exact_shares(target: np.ndarray, cap: int):
    fractions = [Fraction(float(value)).limit_denominator(cap) for value in target]
    if any(abs(float(f) - value) > 1e-9 for f, value in zip(fractions, target)):
        return None, 1
    if sum(fractions) != 1:
        return None, 1
    denominator = 1
    for f in fractions:
        denominator = denominator * f.denominator // math.gcd(denominator, f.denominator)
    return [int(f * denominator) for f in fractions], denominator


def select_path_combination(state: AssignmentState) -> int:
    """Pick the combination for the next packet and record it."""
    return state.select()


class ActionKind(str, Enum):
    SEND = "send"
    DROP = "drop"
    ABANDON = "abandon"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    path: Optional[int] = None


def next_action(combo: Sequence[int], attempt_index: int, has_blackhole: bool = True) -> Action:
    """What to do with attempt `attempt_index` of a datum assigned to `combo`."""
    if attempt_index >= len(combo):
        return Action(ActionKind.ABANDON)
    path = combo[attempt_index]
    if has_blackhole and path == BLACKHOLE_INDEX:
        return Action(ActionKind.DROP)
    return Action(ActionKind.SEND, path)

# End of file #
