"""Analytic per-SU throughput for a fixed channel assignment.

Throughput has two disjoint contributions.  The exclusive part is the
probability that at least one channel of the SU's separate set is free of
primary activity; such a slot carries a full cycle of payload.  The shared
part covers cycles where every separate channel is blocked and the SU falls
back to picking one of its available shared channels uniformly at random:
it then wins the contention stage against the neighbors that picked the
same channel with probability 1/(1 + rivals), and a won cycle is discounted
by the MAC overhead fraction delta.  The shared part is computed exactly by
enumerating the reduced joint state space of the relevant primary activity
variables (see :mod:`cogmesh.enumeration`).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import TYPE_CHECKING, Iterator

import numpy as np

from . import kernels
from .enumeration import DEFAULT_STATE_CAP, build_share_query, require_within_cap
from .model import AvailabilityMatrix, NetworkInstance, adjacency, availability

if TYPE_CHECKING:
    from .assignment import ChannelAssignment

__all__ = [
    "exclusive_throughput",
    "contention_throughput_exact",
    "total_throughput",
    "GroupCensus",
    "group_census",
    "PuStateOutcome",
    "enumerate_pu_states",
]


def exclusive_throughput(su: int, assignment: "ChannelAssignment", avail: AvailabilityMatrix) -> float:
    """Probability that some channel of the SU's separate set is available."""
    row = avail.p[su]
    miss = 1.0
    for ch in sorted(assignment.separate[su]):
        miss *= 1.0 - row[ch]
    return float(1.0 - miss)


def contention_throughput_exact(
    su: int,
    assignment: "ChannelAssignment",
    instance: NetworkInstance,
    delta: float,
    *,
    max_states: int = DEFAULT_STATE_CAP,
) -> float:
    """Exact expected shared-channel throughput, discounted by overhead.

    Exactly zero when the SU has no shared channels.  Raises
    EnumerationCapError when the reduced state space exceeds ``max_states``.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    query = build_share_query(instance, assignment, su)
    if query is None:
        return 0.0
    space, layout = query
    require_within_cap(space, max_states)
    return (1.0 - delta) * kernels.share_expectation(space, layout)


def total_throughput(
    su: int,
    assignment: "ChannelAssignment",
    instance: NetworkInstance,
    delta: float,
    *,
    max_states: int = DEFAULT_STATE_CAP,
) -> float:
    """Exclusive plus shared throughput for one SU."""
    return exclusive_throughput(su, assignment, availability(instance)) + contention_throughput_exact(
        su, assignment, instance, delta, max_states=max_states
    )


@dataclass(frozen=True)
class PuStateOutcome:
    """One joint primary-activity realization and its probability."""

    busy: np.ndarray  # bool (num_pus, num_channels)
    probability: float


def enumerate_pu_states(instance: NetworkInstance) -> Iterator[PuStateOutcome]:
    """Yield every joint (PU, channel) activity realization with its probability.

    The state count is 2 ** (num_pus * num_channels); intended for small
    instances, demonstrations, and cross-checks.
    """
    num_pus, n = instance.num_pus, instance.num_channels
    idle = np.array([pu.idle_prob for pu in instance.pus], dtype=np.float64).reshape(num_pus, n)
    for flags in product((False, True), repeat=num_pus * n):
        busy = np.array(flags, dtype=bool).reshape(num_pus, n)
        probability = float(np.where(busy, 1.0 - idle, idle).prod()) if num_pus else 1.0
        yield PuStateOutcome(busy=busy, probability=probability)


@dataclass(frozen=True)
class GroupCensus:
    """Classification of the neighbors sharing one channel with an SU.

    For a fixed activity realization and fixed channel picks, each neighbor
    carrying the channel falls in exactly one class: the channel is blocked
    for it, it has a free separate channel and sits out of contention, it
    contends but picked a different shared channel, or it picked the same
    channel and is a rival.
    """

    blocked: int
    separate_free: int
    picked_other: int
    picked_target: int

    @property
    def total(self) -> int:
        return self.blocked + self.separate_free + self.picked_other + self.picked_target


def _is_free(instance: NetworkInstance, busy: np.ndarray, su: int, ch: int) -> bool:
    return not any(busy[p, ch] for p in instance.sus[su].pu_neighbors)


def group_census(
    realization,
    picks,
    su: int,
    channel: int,
    assignment: "ChannelAssignment",
    instance: NetworkInstance,
) -> GroupCensus:
    """Classify the channel-sharing neighbors of an SU under one realization.

    ``realization`` is a PuStateOutcome or a bool busy matrix; ``picks`` maps
    each SU to its picked shared channel or None.  Picks are checked for
    consistency with the realization: a pick must be an available shared
    channel of an SU with every separate channel blocked, and an SU in that
    situation must have a pick.
    """
    busy = realization.busy if isinstance(realization, PuStateOutcome) else np.asarray(realization, dtype=bool)
    if channel not in assignment.common[su]:
        raise ValueError(f"channel {channel} is not in the shared set of SU {su}")

    def pick_of(s):
        return picks[s] if not isinstance(picks, dict) or s in picks else None

    for s in range(instance.num_sus):
        pick = pick_of(s)
        sep_free = any(_is_free(instance, busy, s, c) for c in assignment.separate[s])
        open_com = [c for c in assignment.common[s] if _is_free(instance, busy, s, c)]
        if pick is None:
            if not sep_free and open_com:
                raise ValueError(f"inconsistent picks: SU {s} must pick a shared channel")
            continue
        if sep_free:
            raise ValueError(f"inconsistent picks: SU {s} has a free separate channel")
        if pick not in assignment.common[s] or pick not in open_com:
            raise ValueError(f"inconsistent picks: SU {s} cannot pick channel {pick}")

    blocked = separate_free = picked_other = picked_target = 0
    for k in sorted(adjacency(instance)[su]):
        if channel not in assignment.total(k):
            continue
        if not _is_free(instance, busy, k, channel):
            blocked += 1
        elif any(_is_free(instance, busy, k, c) for c in assignment.separate[k]):
            separate_free += 1
        elif pick_of(k) == channel:
            picked_target += 1
        else:
            picked_other += 1
    return GroupCensus(
        blocked=blocked,
        separate_free=separate_free,
        picked_other=picked_other,
        picked_target=picked_target,
    )
