"""Exact weighted enumeration over joint primary-activity states.

Channel availability is driven by independent Bernoulli activity variables,
one per (PU, channel) pair.  The builders here reduce a query about a small
set of SUs to the smallest equivalent enumeration problem:

* variables that do not influence any tracked (SU, channel) cell are dropped,
* deterministic variables (idle probability exactly 0 or 1) are folded into
  the initial state,
* variables with identical influence sets are merged into one Bernoulli
  factor whose idle probability is the product of the merged ones (a cell is
  available only when all of its variables are idle, so the merge is exact).

Both computation backends consume the same reduced problem, so results are
backend-independent up to floating point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import EnumerationCapError
from .model import NetworkInstance, adjacency

if TYPE_CHECKING:
    from .assignment import ChannelAssignment

__all__ = [
    "StateSpace",
    "ScopeLayout",
    "DEFAULT_STATE_CAP",
    "build_share_query",
    "build_contention_query",
    "state_count",
    "require_within_cap",
]

DEFAULT_STATE_CAP = 1 << 24

# Fixed-size polynomial buffers in the compiled backend bound the tracked
# SU count per query; realistic contention degrees sit far below this.
MAX_SCOPE = 32


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Reduced Bernoulli product space for one enumeration query.

    A *slot* is one tracked (SU, channel) availability cell.  Slot ``t`` is
    available in a state iff it is not blocked and every factor listed in
    ``slot_idx[slot_ptr[t]:slot_ptr[t+1]]`` is idle.  ``factor_ptr`` /
    ``factor_idx`` hold the transposed mapping for incremental updates.
    """

    probs: np.ndarray  # float64 (n_factors,) idle probability, strictly inside (0, 1)
    slot_ptr: np.ndarray  # int32 (n_slots + 1,)
    slot_idx: np.ndarray  # int32, factor ids grouped per slot
    factor_ptr: np.ndarray  # int32 (n_factors + 1,)
    factor_idx: np.ndarray  # int32, slot ids grouped per factor
    blocked: np.ndarray  # uint8 (n_slots,), 1 = never available

    @property
    def n_factors(self) -> int:
        return len(self.probs)

    @property
    def n_slots(self) -> int:
        return len(self.blocked)


@dataclass(frozen=True, eq=False)
class ScopeLayout:
    """Slot grouping for the SUs tracked by a query.

    Scope member ``s`` owns the separate-set slots
    ``sep_idx[sep_ptr[s]:sep_ptr[s+1]]`` and the shared-set slots
    ``com_idx[com_ptr[s]:com_ptr[s+1]]``.  For contention-share queries the
    target SU is scope member 0 and ``target_slot[t]`` is its slot for the
    t-th shared channel; competitors of that channel are listed in
    ``comp_scope`` / ``comp_slot`` between ``comp_ptr[t]`` and
    ``comp_ptr[t+1]``.
    """

    n_scope: int
    sep_ptr: np.ndarray
    sep_idx: np.ndarray
    com_ptr: np.ndarray
    com_idx: np.ndarray
    target_slot: np.ndarray
    comp_ptr: np.ndarray
    comp_scope: np.ndarray
    comp_slot: np.ndarray


def state_count(space: StateSpace) -> int:
    return 1 << space.n_factors


def require_within_cap(space: StateSpace, max_states: int) -> None:
    if state_count(space) > max_states:
        raise EnumerationCapError(
            f"enumeration needs {state_count(space)} states, cap is {max_states}"
        )


def _csr(groups: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(groups) + 1, dtype=np.int32)
    for i, g in enumerate(groups):
        ptr[i + 1] = ptr[i] + len(g)
    idx = np.fromiter((v for g in groups for v in g), dtype=np.int32, count=int(ptr[-1]))
    return ptr, idx


def _build_space(
    instance: NetworkInstance, scope: list[int], channels_of: dict[int, tuple[list[int], list[int]]]
) -> tuple[StateSpace, ScopeLayout, dict[tuple[int, int], int]]:
    """Assemble the reduced state space plus slot bookkeeping for a scope.

    ``channels_of[s]`` gives (separate channels, shared channels) for each
    scope member, already sorted.  Returns the slot map so callers can wire
    up query-specific statistics.
    """
    if len(scope) > MAX_SCOPE:
        raise EnumerationCapError(f"query tracks {len(scope)} SUs, limit is {MAX_SCOPE}")
    slot_of: dict[tuple[int, int], int] = {}
    sep_groups: list[list[int]] = []
    com_groups: list[list[int]] = []
    for s in scope:
        sep_chs, com_chs = channels_of[s]
        sep_slots, com_slots = [], []
        for ch in sep_chs:
            slot_of[(s, ch)] = len(slot_of)
            sep_slots.append(slot_of[(s, ch)])
        for ch in com_chs:
            slot_of[(s, ch)] = len(slot_of)
            com_slots.append(slot_of[(s, ch)])
        sep_groups.append(sep_slots)
        com_groups.append(com_slots)

    n_slots = len(slot_of)
    raw: dict[tuple[int, int], set[int]] = {}
    for (s, ch), slot in slot_of.items():
        for pu_id in instance.sus[s].pu_neighbors:
            raw.setdefault((pu_id, ch), set()).add(slot)

    blocked = np.zeros(n_slots, dtype=np.uint8)
    merged: dict[tuple[int, ...], float] = {}
    for (pu_id, ch) in sorted(raw):
        slots = raw[(pu_id, ch)]
        q = instance.pus[pu_id].idle_prob[ch]
        if q <= 0.0:
            for t in slots:
                blocked[t] = 1
        elif q >= 1.0:
            continue  # always idle: no influence
        else:
            sig = tuple(sorted(slots))
            merged[sig] = merged.get(sig, 1.0) * q

    sigs = sorted(merged)
    probs = np.array([merged[sig] for sig in sigs], dtype=np.float64)
    slot_lists: list[list[int]] = [[] for _ in range(n_slots)]
    factor_lists: list[list[int]] = []
    for f, sig in enumerate(sigs):
        factor_lists.append(list(sig))
        for t in sig:
            slot_lists[t].append(f)
    slot_ptr, slot_idx = _csr(slot_lists)
    factor_ptr, factor_idx = _csr(factor_lists)
    sep_ptr, sep_idx = _csr(sep_groups)
    com_ptr, com_idx = _csr(com_groups)

    space = StateSpace(
        probs=probs,
        slot_ptr=slot_ptr,
        slot_idx=slot_idx,
        factor_ptr=factor_ptr,
        factor_idx=factor_idx,
        blocked=blocked,
    )
    layout = ScopeLayout(
        n_scope=len(scope),
        sep_ptr=sep_ptr,
        sep_idx=sep_idx,
        com_ptr=com_ptr,
        com_idx=com_idx,
        target_slot=np.zeros(0, dtype=np.int32),
        comp_ptr=np.zeros(1, dtype=np.int32),
        comp_scope=np.zeros(0, dtype=np.int32),
        comp_slot=np.zeros(0, dtype=np.int32),
    )
    return space, layout, slot_of


def build_share_query(
    instance: NetworkInstance, assignment: "ChannelAssignment", su: int
) -> tuple[StateSpace, ScopeLayout] | None:
    """Query for an SU's expected win share on its shared channels.

    Tracks the SU itself (scope member 0) plus every contention neighbor
    that shares at least one of its channels.  Returns None when the SU has
    no shared channels, in which case the expectation is exactly zero.
    """
    com_su = assignment.common[su]
    if not com_su:
        return None
    neighbors = sorted(
        k for k in adjacency(instance)[su] if assignment.total(k) & com_su
    )
    scope = [su] + neighbors
    channels_of = {
        s: (sorted(assignment.separate[s]), sorted(assignment.common[s])) for s in scope
    }
    space, layout, slot_of = _build_space(instance, scope, channels_of)

    targets = sorted(com_su)
    target_slot = np.array([slot_of[(su, ch)] for ch in targets], dtype=np.int32)
    comp_groups: list[list[tuple[int, int]]] = []
    for ch in targets:
        comps = []
        for s_idx, k in enumerate(neighbors, start=1):
            if ch in assignment.common[k]:
                comps.append((s_idx, slot_of[(k, ch)]))
        comp_groups.append(comps)
    comp_ptr, _ = _csr([[0] * len(g) for g in comp_groups])
    comp_scope = np.fromiter(
        (s for g in comp_groups for s, _ in g), dtype=np.int32, count=int(comp_ptr[-1])
    )
    comp_slot = np.fromiter(
        (t for g in comp_groups for _, t in g), dtype=np.int32, count=int(comp_ptr[-1])
    )
    layout = ScopeLayout(
        n_scope=layout.n_scope,
        sep_ptr=layout.sep_ptr,
        sep_idx=layout.sep_idx,
        com_ptr=layout.com_ptr,
        com_idx=layout.com_idx,
        target_slot=target_slot,
        comp_ptr=comp_ptr,
        comp_scope=comp_scope,
        comp_slot=comp_slot,
    )
    return space, layout


def build_contention_query(
    instance: NetworkInstance, assignment: "ChannelAssignment", su: int
) -> tuple[StateSpace, ScopeLayout, int]:
    """Query counting how many neighbors of an SU enter the contention stage.

    A neighbor contends when all of its separate channels are busy and at
    least one shared channel is available; neighbors without shared channels
    never contend and are dropped from the scope.  Returns the query plus
    the SU's full neighbor count so callers can pad the distribution.
    """
    neighbors = sorted(adjacency(instance)[su])
    scope = [k for k in neighbors if assignment.common[k]]
    channels_of = {
        s: (sorted(assignment.separate[s]), sorted(assignment.common[s])) for s in scope
    }
    space, layout, _ = _build_space(instance, scope, channels_of)
    return space, layout, len(neighbors)
