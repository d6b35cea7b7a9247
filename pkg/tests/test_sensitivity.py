#!/usr/bin/env python3
"""
Test planning with mis-estimated path metrics and simulating on the truth.
File: tests/test_sensitivity.py
"""

import sys
from pathlib import Path

import pytest

# Add the parent directory (containing the package) to Python path
package_parent = Path(__file__).parent.parent
sys.path.insert(0, str(package_parent))

from deadline_multipath.errors import ScenarioError
from deadline_multipath.sim import fan_out, plan_sender, run, sensitivity_points, sensitivity_sweep
from network_fixtures import MS, run_tests, two_path_network, workload


PACKETS = 20_000
SETTINGS = dict(total_packets=PACKETS, padding_s=(0.0, 50 * MS, 50 * MS), guard_s=100 * MS)


def truth_and_load():
    load = workload(90, 800)
    return two_path_network(load, delays_ms=(400.0, 100.0)), load


def test_unit_factor_is_the_undistorted_run():
    truth, load = truth_and_load()
    point, = sensitivity_points(truth, load, "bandwidth", [1.0], seed=3, **SETTINGS)
    plan = plan_sender(truth, load, SETTINGS["padding_s"], SETTINGS["guard_s"])
    report = run(truth, load, plan.solution, plan.timeouts, 3, PACKETS)
    assert point.value == 1.0
    assert point.theoretical_q == pytest.approx(14 / 15)
    assert point.simulated_q == report.realized_quality
    print(f"best single path {point.single_path_best_q:.4f}")
    assert point.single_path_best_q < point.theoretical_q


def test_bandwidth_errors():
    truth, load = truth_and_load()
    low, exact, high = sensitivity_points(truth, load, "bandwidth", [0.5, 1.0, 1.3], seed=1, **SETTINGS)
    print(f"bandwidth x0.5 {low.simulated_q:.4f}, x1.0 {exact.simulated_q:.4f}, "
          f"x1.3 {high.simulated_q:.4f}")
    assert low.simulated_q < exact.simulated_q - 0.05
    assert high.simulated_q == pytest.approx(exact.simulated_q, abs=0.03)


def test_small_delay_errors_per_path():
    truth, load = truth_and_load()
    for path in (1, 2):
        points = sensitivity_points(truth, load, "delay", [0.9, 1.1], seed=2, paths=[path], **SETTINGS)
        for point in points:
            print(f"path {path} delay x{point.value}: {point.simulated_q:.4f}")
            assert point.simulated_q == pytest.approx(14 / 15, abs=0.02)


def test_sweep_pairs_and_parallel_order():
    truth, load = truth_and_load()
    pairs = sensitivity_sweep(truth, load, "loss", [0.5, 1.0], seed=4, **SETTINGS)
    assert [factor for factor, _ in pairs] == [0.5, 1.0]
    assert all(0.0 <= q <= 1.0 for _, q in pairs)
    assert sensitivity_sweep(truth, load, "loss", [], seed=4, **SETTINGS) == []
    assert fan_out(abs, [-3, 2, -1], jobs=2) == [3, 2, 1]


def test_invalid_sweeps():
    truth, load = truth_and_load()
    for factor in (0.0, -0.5):
        with pytest.raises(ScenarioError):
            sensitivity_points(truth, load, "delay", [1.0, factor], **SETTINGS)
    with pytest.raises(ScenarioError):
        sensitivity_points(truth, load, "jitter", [1.0], **SETTINGS)


def main():
    tests = [
        ("Unit Factor", test_unit_factor_is_the_undistorted_run),
        ("Bandwidth Errors", test_bandwidth_errors),
        ("Delay Errors Per Path", test_small_delay_errors_per_path),
        ("Sweep Pairs", test_sweep_pairs_and_parallel_order),
        ("Invalid Sweeps", test_invalid_sweeps),
    ]
    return run_tests("Sensitivity Tests", tests)


if __name__ == "__main__":
    exit(main())

# End of file #
