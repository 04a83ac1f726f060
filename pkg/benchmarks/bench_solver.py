"""Benchmark the exhaustive search kernel: compiled extension vs pure Python.

Usage: python benchmarks/bench_solver.py [--instances 40] [--n 8] [--repeat 3]

Times `search_exhaustive` on identical packed instances for every available
backend and verifies the outputs match while doing so.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import make_poi, random_instance  # noqa: E402
from travelkit.model import ConstraintSet, Money, TimeWindow  # noqa: E402
from travelkit.solver import PlanInstance  # noqa: E402
from travelkit.solver import kernel  # noqa: E402
from travelkit.solver._packing import pack_instance  # noqa: E402


def dense_instance(rng: random.Random, n: int) -> PlanInstance:
    """Loose constraints so the search tree stays near its worst case."""
    pois = [
        make_poi(
            f"p{i:02d}",
            lat=40.0 + rng.uniform(-0.01, 0.01),
            lon=-73.0 + rng.uniform(-0.01, 0.01),
            price=rng.randrange(0, 5) * 100,
            utility=round(rng.uniform(0.0, 10.0), 2),
            open_minutes=0,
            close_minutes=1440,
            duration=30,
        )
        for i in range(n)
    ]
    constraints = ConstraintSet(day_window=TimeWindow(0, 1440), budget=Money(10**6))
    return PlanInstance(candidates=tuple(pois), constraints=constraints)


def bench(backend, packed_instances, repeat: int) -> tuple[float, list]:
    best = float("inf")
    results = []
    for _ in range(repeat):
        start = time.perf_counter()
        results = [backend.search_exhaustive(p) for p in packed_instances]
        best = min(best, time.perf_counter() - start)
    return best, results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=40)
    parser.add_argument("--n", type=int, default=8, help="candidates per instance (<= 8)")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--dense", action="store_true", help="worst-case trees: all-day windows, loose budget")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    build = dense_instance if args.dense else random_instance
    packed = [pack_instance(build(rng, args.n)) for _ in range(args.instances)]

    backends = kernel.available_backends()
    print(f"backends available: {sorted(backends)} (active default: {kernel.backend_name})")
    print(f"{args.instances} instances, n={args.n}, best of {args.repeat} runs\n")

    timings = {}
    outputs = {}
    for name in sorted(backends):
        elapsed, results = bench(backends[name], packed, args.repeat)
        timings[name] = elapsed
        outputs[name] = results
        per_instance = elapsed / args.instances * 1e3
        print(f"  {name:7s} {elapsed:8.3f} s total   {per_instance:8.3f} ms/instance")

    if len(outputs) == 2:
        matches = sum(1 for a, b in zip(outputs["c"], outputs["python"]) if a == b)
        print(f"\noutput parity: {matches}/{args.instances} identical")
        if matches != args.instances:
            print("MISMATCH between backends", file=sys.stderr)
            return 1
        print(f"speedup (python / c): {timings['python'] / timings['c']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
