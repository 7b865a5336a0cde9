#!/usr/bin/env python3
"""Compare the compiled and reference kernel backends.

Times the three kernels that dominate the package's runtime: the MAC
simulator, the shared-throughput expectation, and the contender-count
distribution.  Both backends run the same workloads and their results are
cross-checked before any number is reported.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py [--cycles N] [--repeat K]
"""

import argparse
import json
import random
import time

import numpy as np

import cogmesh as cm
from cogmesh import _reference
from cogmesh.enumeration import build_contention_query, build_share_query
from cogmesh.simulator import _csr

try:
    from cogmesh import _speedups
except ImportError:
    _speedups = None


def sim_args(inst, asg, cycles, seed, window):
    ms = inst.num_sus
    idle = np.array([q for pu in inst.pus for q in pu.idle_prob], dtype=np.float64)
    su_pu = _csr([inst.sus[s].pu_neighbors for s in range(ms)])
    sep = _csr([sorted(asg.separate[s]) for s in range(ms)])
    com = _csr([sorted(asg.common[s]) for s in range(ms)])
    adj = cm.adjacency(inst)
    adj_csr = _csr([sorted(adj[s]) for s in range(ms)])
    return (
        idle, *su_pu, *sep, *com, *adj_csr,
        inst.num_channels, inst.num_pus, cycles, seed, window,
    )


def dense_queries(seed, count):
    """Share/contention queries from random instances with heavy sharing."""
    rng = random.Random(seed)
    share, contend = [], []
    while len(share) < count:
        n = rng.randint(3, 6)
        num_pus = rng.randint(2, 4)
        num_sus = rng.randint(4, 7)
        payload = {
            "num_channels": n,
            "pus": [
                {"id": p, "idle_prob": [round(rng.uniform(0.3, 0.95), 3) for _ in range(n)]}
                for p in range(num_pus)
            ],
            "sus": [
                {"id": s, "pu_neighbors": sorted(rng.sample(range(num_pus), 2))}
                for s in range(num_sus)
            ],
            "su_edges": [
                [a, b]
                for a in range(num_sus)
                for b in range(a + 1, num_sus)
                if rng.random() < 0.5
            ],
        }
        inst = cm.parse_instance(json.dumps(payload))
        shared = tuple(frozenset(range(n)) for _ in range(num_sus))
        asg = cm.ChannelAssignment(
            separate=tuple(frozenset() for _ in range(num_sus)), common=shared
        )
        query = build_share_query(inst, asg, 0)
        if query is None:
            continue
        share.append(query)
        contend.append(build_contention_query(inst, asg, 0)[:2])
    return share, contend


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cycles", type=int, default=100_000, help="simulator cycles")
    parser.add_argument("--repeat", type=int, default=3, help="runs per measurement")
    parser.add_argument("--queries", type=int, default=30, help="enumeration queries")
    args = parser.parse_args()

    if _speedups is None:
        parser.error("compiled backend is not built; run pip install -e . first")

    inst = cm.load_instance("instances/mesh8.json")
    outcome = cm.assign_overlapping(inst)
    window = cm.select_window(inst, outcome.assignment, 0.03).global_window
    sargs = sim_args(inst, outcome.assignment, args.cycles, 7, window)

    ref = _reference.simulate_counts(*sargs)
    fast = _speedups.simulate_counts(*sargs)
    for a, b in zip(ref, fast):
        assert np.array_equal(a, b), "backend results diverge"

    share, contend = dense_queries(11, args.queries)
    for space, layout in share:
        assert abs(
            _reference.share_expectation(space, layout)
            - _speedups.share_expectation(space, layout)
        ) < 1e-12, "backend results diverge"

    rows = []
    rows.append(
        (
            f"simulate_counts ({args.cycles} cycles, 8 SUs)",
            timeit(lambda: _reference.simulate_counts(*sargs), args.repeat),
            timeit(lambda: _speedups.simulate_counts(*sargs), args.repeat),
        )
    )
    rows.append(
        (
            f"share_expectation ({len(share)} dense queries)",
            timeit(lambda: [_reference.share_expectation(s, l) for s, l in share], args.repeat),
            timeit(lambda: [_speedups.share_expectation(s, l) for s, l in share], args.repeat),
        )
    )
    rows.append(
        (
            f"contention_distribution ({len(contend)} queries)",
            timeit(lambda: [_reference.contention_distribution(s, l) for s, l in contend], args.repeat),
            timeit(lambda: [_speedups.contention_distribution(s, l) for s, l in contend], args.repeat),
        )
    )

    print(f"{'workload':<45} {'reference':>11} {'compiled':>11} {'speedup':>9}")
    print("-" * 79)
    for name, slow, quick in rows:
        print(f"{name:<45} {slow:>10.4f}s {quick:>10.4f}s {slow / quick:>8.1f}x")


if __name__ == "__main__":
    main()
