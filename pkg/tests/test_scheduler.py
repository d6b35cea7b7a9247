#!/usr/bin/env python3
"""
Test the per-packet combination selection and the attempt actions.
File: tests/test_scheduler.py
"""

import sys
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

# Add the parent directory (containing the package) to Python path
package_parent = Path(__file__).parent.parent
sys.path.insert(0, str(package_parent))

from deadline_multipath.errors import ScenarioError
from deadline_multipath.scheduler import (
    ActionKind, AssignmentState, next_action, select_path_combination,
)
from network_fixtures import assignment, run_tests, two_path_network, workload


def picks(target, count, **kwargs):
    state = AssignmentState(target, **kwargs)
    return state, [select_path_combination(state) for _ in range(count)]


def test_single_combination():
    state, chosen = picks([1.0, 0.0, 0.0], 50)
    assert chosen == [0] * 50
    assert state.discrepancy() == 0.0


def test_even_split_alternates():
    _, chosen = picks([0.5, 0.5], 4)
    assert chosen == [0, 1, 0, 1]
    _, chosen = picks([0.25, 0.75], 4)
    print(f"(1/4, 3/4): {chosen}")
    assert chosen[0] == 1
    assert chosen.count(0) == 1 and chosen.count(1) == 3


def test_lambda_100_solution_converges():
    load = workload(100, 800)
    net = two_path_network(load)
    target = assignment(net, {(0, 0): F(4, 25), (1, 2): F(4, 5), (2, 2): F(1, 25)})
    state, _ = picks(target, 100_000)
    assert state.exact
    frequencies = np.asarray(state.assigned) / state.total
    print(f"max frequency error: {np.max(np.abs(frequencies - target)):.2e}")
    assert np.max(np.abs(frequencies - target)) <= 1e-5
    assert state.discrepancy() <= 1.0 + 1e-9


def test_discrepancy_stays_bounded():
    """Running count never drifts more than 1 + H_K packets from N * x."""
    rng = np.random.default_rng(5)
    for k in range(1, 17):
        for _ in range(5):
            target = rng.dirichlet(np.ones(k))
            if k > 1 and rng.random() < 0.3:
                target[rng.integers(k)] = 0.0
                target = target / target.sum()
            bound = 1.0 + sum(1.0 / q for q in range(1, k + 1))
            state = AssignmentState(target)
            worst = 0.0
            for _ in range(2000):
                state.select()
                worst = max(worst, state.discrepancy())
            assert worst < bound, f"K={k}: {worst:.3f} >= {bound:.3f}"
            assert all(state.assigned[i] == 0 for i in range(k) if target[i] == 0.0)


def test_discrepancy_over_long_runs():
    """The drift bound holds across 100000 selections for up to 16 combinations."""
    rng = np.random.default_rng(13)
    for k in (4, 9, 16):
        target = rng.dirichlet(np.ones(k))
        bound = 1.0 + sum(1.0 / q for q in range(1, k + 1))
        state = AssignmentState(target)
        assigned = np.zeros(k)
        worst = 0.0
        for step in range(1, 100_001):
            assigned[state.select()] += 1
            worst = max(worst, float(np.max(np.abs(assigned - step * state.target))))
        print(f"K={k}: worst drift {worst:.3f} (bound {bound:.3f}), exact {state.exact}")
        assert worst < bound
        assert state.discrepancy() == pytest.approx(float(np.max(np.abs(assigned - 100_000 * state.target))))


def test_frequency_error_at_large_n():
    rng = np.random.default_rng(8)
    for k in (3, 9, 16):
        target = rng.dirichlet(np.ones(k))
        state, _ = picks(target, 100_000)
        error = np.max(np.abs(np.asarray(state.assigned) / state.total - target))
        assert error <= 1e-3


def test_selection_is_deterministic():
    target = np.random.default_rng(2).dirichlet(np.ones(7))
    _, first = picks(target, 3000)
    _, second = picks(target, 3000)
    assert first == second


def test_exact_and_float_modes_agree():
    target = [0.2, 0.3, 0.5]
    exact, chosen_exact = picks(target, 1000)
    approximate, chosen_float = picks(target, 1000, denominator_cap=1)
    assert exact.exact and not approximate.exact
    assert exact.assigned == [200, 300, 500]
    assert approximate.assigned == [200, 300, 500]
    assert chosen_exact[0] == chosen_float[0] == 2


def test_invalid_targets():
    for bad in ([], [0.5, 0.6], [1.2, -0.2], [[0.5, 0.5]]):
        with pytest.raises(ScenarioError):
            AssignmentState(bad)


def test_next_action():
    assert next_action((1, 2), 0).kind == ActionKind.SEND
    assert next_action((1, 2), 0).path == 1
    assert next_action((1, 2), 1).path == 2
    assert next_action((1, 2), 2).kind == ActionKind.ABANDON
    assert next_action((0, 2), 0).kind == ActionKind.DROP
    assert next_action((1, 0), 1).kind == ActionKind.DROP
    assert next_action((0, 1), 0, has_blackhole=False).kind == ActionKind.SEND


def main():
    tests = [
        ("Single Combination", test_single_combination),
        ("Even Split", test_even_split_alternates),
        ("Convergence at 100 Mbps", test_lambda_100_solution_converges),
        ("Bounded Discrepancy", test_discrepancy_stays_bounded),
        ("Long-Run Discrepancy", test_discrepancy_over_long_runs),
        ("Frequency Error", test_frequency_error_at_large_n),
        ("Determinism", test_selection_is_deterministic),
        ("Exact and Float Modes", test_exact_and_float_modes_agree),
        ("Invalid Targets", test_invalid_targets),
        ("Next Action", test_next_action),
    ]
    return run_tests("Scheduler Tests", tests)


if __name__ == "__main__":
    exit(main())

# End of file #
