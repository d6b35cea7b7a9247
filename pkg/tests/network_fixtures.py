#!/usr/bin/env python3
"""
Shared networks, workloads and the script runner used by the test modules.
File: tests/network_fixtures.py
"""

import sys
import traceback
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

# Add the parent directory (containing the package) to Python path
package_parent = Path(__file__).parent.parent
sys.path.insert(0, str(package_parent))

from deadline_multipath.delay_models import FixedDelay, ShiftedGammaDelay
from deadline_multipath.model import Network, PathSpec, Workload, augment_blackhole


MBPS = 1e6
MS = 1e-3


def workload(rate_mbps: float = 90.0, lifetime_ms: float = 800.0, **kwargs) -> Workload:
    return Workload(rate_bits_per_s=rate_mbps * MBPS, lifetime_s=lifetime_ms * MS, **kwargs)


def two_path_network(load: Workload, delays_ms: Tuple[float, float] = (450.0, 150.0),
                     attempts: int = 2, costs: Tuple[float, float] = (0.0, 0.0),
                     bandwidths_mbps: Tuple[float, float] = (80.0, 20.0)) -> Network:
    """The 80/20 Mbps, tau 0.2/0 network; model delays 450/150 ms by default."""
    paths = (
        PathSpec(bandwidths_mbps[0] * MBPS, FixedDelay(delays_ms[0] * MS), 0.2, costs[0]),
        PathSpec(bandwidths_mbps[1] * MBPS, FixedDelay(delays_ms[1] * MS), 0.0, costs[1]),
    )
    return augment_blackhole(Network(paths=paths, attempts=attempts), load)


def gamma_network(load: Workload) -> Network:
    """Shifted-gamma network: eta 400/100 ms, alpha 10/5, beta 4/2 ms."""
    paths = (
        PathSpec(80 * MBPS, ShiftedGammaDelay(0.400, 10.0, 0.004), 0.2),
        PathSpec(20 * MBPS, ShiftedGammaDelay(0.100, 5.0, 0.002), 0.0),
    )
    return augment_blackhole(Network(paths=paths, attempts=2), load)


def assignment(net: Network, shares: Dict[Tuple[int, ...], Fraction]) -> np.ndarray:
    """Dense x from {combination: share}."""
    x = np.zeros(net.combination_count)
    for combo, share in shares.items():
        x[net.combination_index(combo)] = float(share)
    return x


def run_tests(title: str, tests: Sequence[Tuple[str, Callable[[], None]]]) -> int:
    """Run (name, function) pairs as a script; a test passes when it does not raise."""
    print(title)
    print("=" * 60)
    results: List[bool] = []
    for test_name, test_func in tests:
        print(f"Running {test_name} test...")
        print("-" * 40)
        try:
            test_func()
            results.append(True)
            print(f"✓ {test_name}: PASS")
        except AssertionError as e:
            traceback.print_exc()
            print(f"✗ {test_name}: FAIL - {e}")
            results.append(False)
        except Exception as e:
            traceback.print_exc()
            print(f"✗ {test_name}: ERROR - {e}")
            results.append(False)
        print()

    passed = sum(results)
    total = len(results)
    print("=" * 60)
    print(f"{title}: {passed}/{total} tests passed")
    return 0 if passed == total else 1

# End of file #
