"""Cycle-accurate simulator of the synchronized multichannel MAC.

Every cycle: primary activity is drawn per (PU, channel); each SU senses
its channels; an SU with an available separate channel transmits on one of
them immediately (no contention, full cycle of payload); otherwise it picks
one available shared channel uniformly at random, draws a backoff from
{0, ..., window-1}, and enters the contention stage.  Contention proceeds
in rounds of the smallest remaining counter: counters reaching zero
together collide when their owners are neighbors, a sole reacher wins and
its handshake silences same-channel neighbors for the rest of the cycle,
and everyone else keeps counting, so SUs outside each other's range reuse
channels in the same cycle.  A won shared cycle carries (1 - delta) of
payload, delta being the MAC overhead fraction for the window in use.

Randomness is counter-based: every draw is a hash of (seed, stream, cycle,
lane), so runs are reproducible and identical across backends.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import _reference, kernels
from .assignment import ChannelAssignment, validate_assignment
from .mac import DEFAULT_TIMING, MacTiming, overhead
from .model import NetworkInstance, adjacency

__all__ = [
    "SimConfig",
    "CycleOutcome",
    "SimReport",
    "run_simulation",
    "resolve_contention",
    "trace_lines",
    "OUTCOME_NAMES",
]

# Outcome labels for per-cycle traces, indexed by the kernel's outcome code.
OUTCOME_NAMES = ("IDLE", "SEPARATE_TX", "WIN", "QUIT", "COLLIDE", "NO_CHANNEL")

_RESULT_NAME = {_reference.WIN: "WIN", _reference.COLLIDE: "COLLIDE", _reference.QUIT: "QUIT"}


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; the seed fixes every random draw."""

    cycles: int
    seed: int
    window: int
    timing: MacTiming = DEFAULT_TIMING
    record_trace: bool = False


@dataclass(frozen=True, eq=False)
class CycleOutcome:
    """Everything that happened in one cycle, for tracing and debugging."""

    pu_busy: np.ndarray  # bool (num_pus, num_channels)
    su_choice: tuple[int, ...]  # picked channel, -1 when none
    su_backoff: tuple[int, ...]  # drawn backoff, -1 outside contention
    transmitted: tuple[bool, ...]
    collided: tuple[bool, ...]
    outcome: tuple[str, ...]


@dataclass(frozen=True)
class SimReport:
    """Aggregated simulation results.

    ``per_su_throughput`` counts a full cycle per separate-channel
    transmission and (1 - delta) per contention win.  ``collision_rate`` is
    collisions divided by contention entries (zero when the SU never
    contended).
    """

    per_su_throughput: tuple[float, ...]
    collision_rate: tuple[float, ...]
    cycles_run: int
    per_su_separate_tx: tuple[int, ...]
    per_su_wins: tuple[int, ...]
    per_su_collisions: tuple[int, ...]
    per_su_contentions: tuple[int, ...]
    trace: Optional[tuple[CycleOutcome, ...]] = None


def resolve_contention(contenders, neighbor_sets) -> dict[int, str]:
    """Resolve one contention stage; returns {su: "WIN" | "COLLIDE" | "QUIT"}.

    ``contenders`` holds (su, channel, backoff) triples; ``neighbor_sets``
    maps each SU to its contention neighbors.  See the module docstring for
    the round rules.
    """
    raw = _reference.resolve_contention(contenders, neighbor_sets)
    return {su: _RESULT_NAME[code] for su, code in raw.items()}


def _csr(groups) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(groups) + 1, dtype=np.int32)
    for i, g in enumerate(groups):
        ptr[i + 1] = ptr[i] + len(g)
    idx = np.fromiter((v for g in groups for v in g), dtype=np.int32, count=int(ptr[-1]))
    return ptr, idx


def run_simulation(
    instance: NetworkInstance, assignment: ChannelAssignment, config: SimConfig
) -> SimReport:
    """Simulate the MAC for a fixed assignment and aggregate per-SU results."""
    validate_assignment(instance, assignment)
    if config.cycles < 1:
        raise ValueError(f"cycles must be positive, got {config.cycles}")
    if config.window < 2:
        raise ValueError(f"window must be at least 2, got {config.window}")
    delta = overhead(config.window, config.timing)

    ms = instance.num_sus
    idle = np.array(
        [q for pu in instance.pus for q in pu.idle_prob], dtype=np.float64
    )
    su_pu_ptr, su_pu_idx = _csr([instance.sus[s].pu_neighbors for s in range(ms)])
    sep_ptr, sep_idx = _csr([sorted(assignment.separate[s]) for s in range(ms)])
    com_ptr, com_idx = _csr([sorted(assignment.common[s]) for s in range(ms)])
    adj = adjacency(instance)
    adj_ptr, adj_idx = _csr([sorted(adj[s]) for s in range(ms)])

    args = (
        idle,
        su_pu_ptr,
        su_pu_idx,
        sep_ptr,
        sep_idx,
        com_ptr,
        com_idx,
        adj_ptr,
        adj_idx,
        instance.num_channels,
        instance.num_pus,
        config.cycles,
        config.seed,
        config.window,
    )
    trace = None
    if config.record_trace:
        records: list = []
        sep_tx, wins, collisions, entries = _reference.simulate_counts(*args, collect=records)
        trace = tuple(
            CycleOutcome(
                pu_busy=busy,
                su_choice=choice,
                su_backoff=backoff,
                transmitted=tuple(OUTCOME_NAMES[c] in ("SEPARATE_TX", "WIN") for c in code),
                collided=tuple(OUTCOME_NAMES[c] == "COLLIDE" for c in code),
                outcome=tuple(OUTCOME_NAMES[c] for c in code),
            )
            for busy, choice, backoff, code in records
        )
    else:
        sep_tx, wins, collisions, entries = kernels.simulate_counts(*args)

    cycles = config.cycles
    throughput = tuple(
        (int(sep_tx[s]) + int(wins[s]) * (1.0 - delta)) / cycles for s in range(ms)
    )
    rate = tuple(
        int(collisions[s]) / int(entries[s]) if entries[s] else 0.0 for s in range(ms)
    )
    return SimReport(
        per_su_throughput=throughput,
        collision_rate=rate,
        cycles_run=cycles,
        per_su_separate_tx=tuple(int(v) for v in sep_tx),
        per_su_wins=tuple(int(v) for v in wins),
        per_su_collisions=tuple(int(v) for v in collisions),
        per_su_contentions=tuple(int(v) for v in entries),
        trace=trace,
    )


def trace_lines(report: SimReport) -> Iterator[str]:
    """Render a recorded trace as TSV lines (header first)."""
    if report.trace is None:
        raise ValueError("simulation was run without record_trace")
    yield "cycle\tsu\tchannel\tbackoff\toutcome"
    for cycle, rec in enumerate(report.trace):
        for su in range(len(rec.outcome)):
            yield (
                f"{cycle}\t{su}\t{rec.su_choice[su]}\t{rec.su_backoff[su]}\t{rec.outcome[su]}"
            )
