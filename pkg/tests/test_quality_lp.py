#!/usr/bin/env python3
"""
Test the quality and cost linear programs on the two-path network and on
random networks.
File: tests/test_quality_lp.py
"""

import sys
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

# Add the parent directory (containing the package) to Python path
package_parent = Path(__file__).parent.parent
sys.path.insert(0, str(package_parent))

from deadline_multipath.delay_models import FixedDelay
from deadline_multipath.errors import NetworkShapeError
from deadline_multipath.lp import best_single_path_quality, single_path_quality, solve
from deadline_multipath.model import (
    Network, PathSpec, SolveStatus, Workload, augment_blackhole, build_cost_lp,
    build_quality_lp, deterministic_coefficients, quality, sent_rate, total_cost,
)
from network_fixtures import MBPS, assignment, run_tests, two_path_network, workload


RATE_ROWS = [
    (10, 1.0, {(2, 2): F(1)}),
    (20, 1.0, {(2, 2): F(1)}),
    (40, 1.0, {(1, 2): F(5, 8), (2, 2): F(3, 8)}),
    (60, 1.0, {(1, 2): F(5, 6), (2, 2): F(1, 6)}),
    (80, 1.0, {(1, 2): F(15, 16), (2, 2): F(1, 16)}),
    (100, 0.84, {(0, 0): F(4, 25), (1, 2): F(4, 5), (2, 2): F(1, 25)}),
    (120, 0.70, {(0, 0): F(3, 10), (1, 2): F(2, 3), (2, 2): F(1, 30)}),
    (140, 0.60, {(0, 0): F(2, 5), (1, 2): F(4, 7), (2, 2): F(1, 35)}),
]

LIFETIME_ROWS = [
    (150, 2 / 9, {(0, 0): F(7, 9), (2, 2): F(2, 9)}),
    (400, 2 / 9, {(0, 0): F(7, 9), (2, 2): F(2, 9)}),
    (450, 38 / 45, {(1, 0): F(7, 9), (2, 2): F(2, 9)}),
    (700, 38 / 45, {(1, 0): F(7, 9), (2, 2): F(2, 9)}),
    (750, 14 / 15, {(0, 0): F(1, 15), (1, 2): F(8, 9), (2, 2): F(2, 45)}),
    (1000, 14 / 15, {(0, 0): F(1, 15), (1, 2): F(8, 9), (2, 2): F(2, 45)}),
    (1050, 14 / 15, {(0, 0): F(1, 27), (1, 1): F(20, 27), (2, 2): F(2, 9)}),
    (1500, 14 / 15, {(0, 0): F(1, 27), (1, 1): F(20, 27), (2, 2): F(2, 9)}),
]


def check_reference_solution(net: Network, load: Workload, shares, optimum: float) -> None:
    """The reference x is feasible and reaches the optimum."""
    problem = build_quality_lp(net, load)
    x = assignment(net, shares)
    assert x.sum() == pytest.approx(1.0, abs=1e-12)
    lhs = problem.ineq_matrix @ x
    finite = np.isfinite(problem.ineq_rhs)
    assert np.all(lhs[finite] <= problem.ineq_rhs[finite] * (1 + 1e-9))
    assert float(problem.objective @ x) == pytest.approx(optimum, abs=1e-9)


def check_solution_invariants(net: Network, load: Workload, problem, solution) -> None:
    assert solution.is_optimal
    x = solution.x
    assert np.all(x >= 0.0)
    assert x.sum() == pytest.approx(1.0, abs=1e-7)
    bandwidths = np.array([path.bandwidth_bits_per_s for path in net.paths])
    assert np.all(sent_rate(net, load, x) <= bandwidths * (1 + 1e-6))
    assert total_cost(net, load, x) <= load.cost_bound * (1 + 1e-9)
    assert -1e-9 <= solution.objective_value <= 1 + 1e-9
    assert quality(net, load, x) == pytest.approx(solution.objective_value, abs=1e-9)


def random_network(rng: np.random.Generator, paths: int = 2, attempts: int = 2):
    specs = tuple(
        PathSpec(bandwidth_bits_per_s=float(rng.uniform(5, 100)) * MBPS,
                 delay=FixedDelay(float(rng.uniform(0.02, 0.5))),
                 loss_prob=float(rng.uniform(0.0, 0.5)),
                 cost_per_bit=float(rng.uniform(0.0, 2.0)))
        for _ in range(paths)
    )
    load = Workload(rate_bits_per_s=float(rng.uniform(10, 150)) * MBPS,
                    lifetime_s=float(rng.uniform(0.1, 1.2)),
                    cost_bound=float(rng.uniform(10, 200)) * MBPS)
    return Network(paths=specs, attempts=attempts), load


def test_rate_rows():
    """delta = 800 ms, lambda from 10 to 140 Mbps."""
    for rate, expected, shares in RATE_ROWS:
        load = workload(rate, 800)
        net = two_path_network(load)
        problem = build_quality_lp(net, load)
        solution = solve(problem)
        print(f"lambda {rate:>3} Mbps: Q = {solution.objective_value:.6f}")
        assert solution.objective_value == pytest.approx(expected, abs=1e-6)
        check_solution_invariants(net, load, problem, solution)
        check_reference_solution(net, load, shares, expected)


def test_lifetime_rows():
    """lambda = 90 Mbps, delta across the four regimes."""
    for lifetime, expected, shares in LIFETIME_ROWS:
        load = workload(90, lifetime)
        net = two_path_network(load)
        problem = build_quality_lp(net, load)
        solution = solve(problem)
        print(f"delta {lifetime:>4} ms: Q = {solution.objective_value:.6f}")
        assert solution.objective_value == pytest.approx(expected, abs=1e-6)
        check_solution_invariants(net, load, problem, solution)
        check_reference_solution(net, load, shares, expected)


def test_single_perfect_path():
    load = workload(10, 800)
    paths = (PathSpec(20 * MBPS, FixedDelay(0.1), 0.0),)
    net = augment_blackhole(Network(paths=paths), load)
    solution = solve(build_quality_lp(net, load))
    assert solution.objective_value == pytest.approx(1.0, abs=1e-9)
    delivery = deterministic_coefficients(net, load).delivery
    assert float(solution.x[delivery < 1.0 - 1e-12].sum()) == pytest.approx(0.0, abs=1e-9)


def test_always_feasible_after_augmentation():
    rng = np.random.default_rng(17)
    for _ in range(200):
        base, load = random_network(rng, paths=int(rng.integers(1, 4)))
        net = augment_blackhole(base, load)
        problem = build_quality_lp(net, load)
        solution = solve(problem)
        check_solution_invariants(net, load, problem, solution)


def test_requires_augmentation():
    load = workload(90, 800)
    bare = Network(paths=(PathSpec(80 * MBPS, FixedDelay(0.45), 0.2),))
    with pytest.raises(NetworkShapeError):
        build_quality_lp(bare, load)
    with pytest.raises(NetworkShapeError):
        build_cost_lp(bare, load, 0.5)


def test_monotonicity():
    """Relaxing the deadline, a bandwidth or the cost bound never lowers Q."""
    rng = np.random.default_rng(23)
    for _ in range(100):
        base, load = random_network(rng)
        net = augment_blackhole(base, load)
        q = solve(build_quality_lp(net, load)).objective_value

        later = Workload(load.rate_bits_per_s, load.lifetime_s * 1.5, load.cost_bound)
        assert solve(build_quality_lp(net, later)).objective_value >= q - 1e-9

        richer = Workload(load.rate_bits_per_s, load.lifetime_s, load.cost_bound * 2)
        assert solve(build_quality_lp(net, richer)).objective_value >= q - 1e-9

        wider_paths = tuple(
            PathSpec(p.bandwidth_bits_per_s * 1.5, p.delay, p.loss_prob, p.cost_per_bit)
            for p in base.paths
        )
        wider = augment_blackhole(Network(paths=wider_paths), load)
        assert solve(build_quality_lp(wider, load)).objective_value >= q - 1e-9

        more_attempts = augment_blackhole(base.with_attempts(3), load)
        assert solve(build_quality_lp(more_attempts, load)).objective_value >= q - 1e-9


def test_single_path_bound():
    for rate, expected, _ in RATE_ROWS:
        load = workload(rate, 800)
        net = two_path_network(load)
        single = best_single_path_quality(net, load)
        print(f"lambda {rate:>3} Mbps: multipath {expected:.4f}, best single path {single:.4f}")
        assert expected >= single - 1e-9
        if rate >= 40:
            assert expected > single + 1e-6

    load = workload(90, 800)
    net = two_path_network(load)
    # path 2 alone carries 20 of 90 Mbps
    assert single_path_quality(net, load, 2) == pytest.approx(2 / 9, abs=1e-9)
    with pytest.raises(NetworkShapeError):
        single_path_quality(net, load, 0)

    rng = np.random.default_rng(29)
    for _ in range(100):
        base, load = random_network(rng, paths=3)
        net = augment_blackhole(base, load)
        q = solve(build_quality_lp(net, load)).objective_value
        assert q >= best_single_path_quality(net, load) - 1e-9


def test_cost_lp():
    load = workload(100, 800)
    net = two_path_network(load, costs=(1.0, 1.0))
    zero = solve(build_cost_lp(net, load, 0.0))
    assert zero.is_optimal
    assert zero.objective_value == pytest.approx(0.0, abs=1e-9)

    reference = assignment(net, {(0, 0): F(4, 25), (1, 2): F(4, 5), (2, 2): F(1, 25)})
    reference_cost = total_cost(net, load, reference)
    cheapest = solve(build_cost_lp(net, load, 0.84))
    print(f"cost at Q >= 0.84: {cheapest.objective_value:.6g} (reference {reference_cost:.6g})")
    assert cheapest.is_optimal
    assert cheapest.objective_value <= reference_cost * (1 + 1e-9)
    assert quality(net, load, cheapest.x) >= 0.84 - 1e-9

    bounded = Workload(load.rate_bits_per_s, load.lifetime_s, cost_bound=cheapest.objective_value)
    assert solve(build_quality_lp(net, bounded)).objective_value >= 0.84 - 1e-7

    lossy = (PathSpec(100 * MBPS, FixedDelay(0.5), 0.3), PathSpec(100 * MBPS, FixedDelay(0.6), 0.1))
    lossy_net = augment_blackhole(Network(paths=lossy), load)
    assert solve(build_cost_lp(lossy_net, load, 1.0)).status == SolveStatus.INFEASIBLE


def main():
    tests = [
        ("Rate Rows", test_rate_rows),
        ("Lifetime Rows", test_lifetime_rows),
        ("Single Perfect Path", test_single_perfect_path),
        ("Always Feasible", test_always_feasible_after_augmentation),
        ("Requires Augmentation", test_requires_augmentation),
        ("Monotonicity", test_monotonicity),
        ("Single-Path Bound", test_single_path_bound),
        ("Cost LP", test_cost_lp),
    ]
    return run_tests("Quality LP Tests", tests)


if __name__ == "__main__":
    exit(main())

# End of file #
