"""Contention-window sizing and MAC overhead.

Each MAC cycle spends a fixed budget on the handshake (sensing, RTS/CTS,
inter-frame spacings, synchronization) plus an expected half-window of
backoff slots.  The window is sized per SU so that the probability of the
first handshake colliding stays below a target, then the network adopts the
largest per-SU window so every neighborhood meets its target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .enumeration import DEFAULT_STATE_CAP, build_contention_query, require_within_cap
from .errors import OverheadError, WindowSearchError
from .model import NetworkInstance

if TYPE_CHECKING:
    from .assignment import ChannelAssignment

__all__ = [
    "MacTiming",
    "DEFAULT_TIMING",
    "WindowResult",
    "first_collision_prob_conditional",
    "contend_count_distribution",
    "collision_prob",
    "select_window",
    "overhead",
]


@dataclass(frozen=True)
class MacTiming:
    """MAC timing constants in seconds."""

    slot_time: float = 20e-6
    t_rts: float = 48e-6
    t_cts: float = 40e-6
    t_sifs: float = 28e-6
    t_sen: float = 0.0
    t_syn: float = 0.0
    t_cycle: float = 3e-3

    def __post_init__(self):
        for name in ("slot_time", "t_rts", "t_cts", "t_sifs", "t_sen", "t_syn"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if self.t_cycle <= 0.0:
            raise ValueError("t_cycle must be positive")


DEFAULT_TIMING = MacTiming()


@dataclass(frozen=True)
class WindowResult:
    """Outcome of window selection for one assignment."""

    per_su_window: tuple[int, ...]
    global_window: int
    per_su_collision_prob: tuple[float, ...]  # at each SU's own window
    epsilon: float


def first_collision_prob_conditional(m: int, w: int) -> float:
    """Probability the first countdown winner collides, given m contenders.

    Backoffs are i.i.d. uniform on {0, ..., w-1}; a collision happens when
    two or more contenders share the smallest drawn value.  Evaluated as the
    sum over j >= 2 sharers and each possible non-minimal remainder level l:
    C(m, j) * (1/w)^j * ((w-l-1)/w)^(m-j).
    """
    if w < 2:
        raise ValueError(f"window must be at least 2, got {w}")
    if m < 0:
        raise ValueError(f"contender count must be nonnegative, got {m}")
    if m < 2:
        return 0.0
    levels = np.arange(w - 1, dtype=np.float64)  # l = 0 .. w-2
    terms = []
    for j in range(2, m + 1):
        tail = float(np.sum(((w - levels - 1.0) / w) ** (m - j)))
        terms.append(math.comb(m, j) * (1.0 / w) ** j * tail)
    return math.fsum(terms)


def contend_count_distribution(
    su: int,
    assignment: "ChannelAssignment",
    instance: NetworkInstance,
    *,
    max_states: int = DEFAULT_STATE_CAP,
) -> np.ndarray:
    """Exact distribution of how many neighbors of an SU enter contention.

    Index m of the returned array is the probability that exactly m
    contention-graph neighbors have every separate channel blocked and some
    shared channel available.  Length is (neighbor count + 1).
    """
    space, layout, degree = build_contention_query(instance, assignment, su)
    require_within_cap(space, max_states)
    dist = kernels.contention_distribution(space, layout)
    out = np.zeros(degree + 1)
    out[: len(dist)] = dist
    return out


def collision_prob(
    su: int,
    assignment: "ChannelAssignment",
    instance: NetworkInstance,
    window: int,
    *,
    max_states: int = DEFAULT_STATE_CAP,
) -> float:
    """First-collision probability for an SU's contention stage.

    Mixes the conditional collision probability over the neighbor-contender
    distribution; the SU itself always counts as one contender.
    """
    dist = contend_count_distribution(su, assignment, instance, max_states=max_states)
    return _mix_collision(dist, window)


def _mix_collision(dist: np.ndarray, window: int) -> float:
    return math.fsum(
        float(dist[m]) * first_collision_prob_conditional(m + 1, window)
        for m in range(1, len(dist))
        if dist[m] > 0.0
    )


def select_window(
    instance: NetworkInstance,
    assignment: "ChannelAssignment",
    epsilon: float,
    *,
    max_window: int = 4096,
    max_states: int = DEFAULT_STATE_CAP,
) -> WindowResult:
    """Smallest per-SU windows meeting the collision target, and their maximum.

    Scans w = 2, 3, ... per SU until the mixed collision probability drops
    to ``epsilon`` or below; the network-wide window is the largest per-SU
    choice.  Raises WindowSearchError if an SU needs more than
    ``max_window``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    windows = []
    probs = []
    for su in range(instance.num_sus):
        dist = contend_count_distribution(su, assignment, instance, max_states=max_states)
        for w in range(2, max_window + 1):
            p = _mix_collision(dist, w)
            if p <= epsilon:
                windows.append(w)
                probs.append(p)
                break
        else:
            raise WindowSearchError(
                f"SU {su} meets no window up to {max_window} for epsilon={epsilon}"
            )
    return WindowResult(
        per_su_window=tuple(windows),
        global_window=max(windows),
        per_su_collision_prob=tuple(probs),
        epsilon=epsilon,
    )


def overhead(window: int, timing: MacTiming = DEFAULT_TIMING) -> float:
    """Fraction of a cycle consumed by the MAC before payload transfer.

    Charges the expected backoff of the winner, (window-1)/2 slots, plus the
    fixed handshake budget.  Raises OverheadError when the overhead meets or
    exceeds the full cycle.
    """
    if window < 1:
        raise ValueError(f"window must be at least 1, got {window}")
    delta = (
        (window - 1) * timing.slot_time / 2
        + timing.t_rts
        + timing.t_cts
        + 3 * timing.t_sifs
        + timing.t_sen
        + timing.t_syn
    ) / timing.t_cycle
    if delta >= 1.0:
        raise OverheadError(f"overhead {delta:.3f} consumes the whole cycle at window {window}")
    return delta
