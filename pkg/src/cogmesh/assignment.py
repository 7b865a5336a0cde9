"""Channel assignment engines maximizing the minimum per-SU throughput.

Three solvers share one outcome type.  The greedy engine hands exclusive
channels to whichever SU currently has the lowest throughput, always giving
it its best still-available channel; a channel granted to an SU stops being
available to it and to its contention neighbors.  The overlapping engine
runs the greedy pass first, then lets minimum-throughput SUs join channels
already owned nearby, reclassifying those channels as shared and accepting
only moves that strictly raise the global minimum of the analytic model.
The brute-force engine enumerates every assignment under a size guard and
is the ground truth the heuristics are measured against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .analytics import total_throughput
from .enumeration import DEFAULT_STATE_CAP
from .errors import AssignmentInvariantError, EnumerationCapError, SearchSpaceError
from .mac import DEFAULT_TIMING, MacTiming, overhead, select_window
from .model import NetworkInstance, adjacency, availability

__all__ = [
    "ChannelAssignment",
    "AssignmentOutcome",
    "validate_assignment",
    "nonoverlap_throughput",
    "throughput_delta",
    "assign_nonoverlapping",
    "assign_overlapping",
    "brute_force",
    "DEFAULT_BRUTE_BITS",
]

DEFAULT_BRUTE_BITS = 20

_SATURATED = 1.0 - 1e-12


@dataclass(frozen=True)
class ChannelAssignment:
    """Per-SU channel sets: ``separate`` is exclusive, ``common`` is shared."""

    separate: tuple[frozenset[int], ...]
    common: tuple[frozenset[int], ...]

    def total(self, su: int) -> frozenset[int]:
        return self.separate[su] | self.common[su]

    @classmethod
    def from_sets(cls, separate, common=None) -> "ChannelAssignment":
        sep = tuple(frozenset(s) for s in separate)
        com = tuple(frozenset(c) for c in common) if common is not None else tuple(
            frozenset() for _ in sep
        )
        return cls(separate=sep, common=com)

    @classmethod
    def empty(cls, num_sus: int) -> "ChannelAssignment":
        return cls.from_sets([()] * num_sus)


@dataclass(frozen=True)
class AssignmentOutcome:
    """Result of one solver run, with search-effort counters."""

    assignment: ChannelAssignment
    per_su_throughput: tuple[float, ...]
    min_throughput: float
    iterations: int
    evaluations: int


def validate_assignment(instance: NetworkInstance, assignment: ChannelAssignment) -> None:
    """Raise AssignmentInvariantError when the assignment is malformed.

    Checks: set sizes match the SU count, channels are in range, separate
    and shared sets are disjoint, no separate channel appears anywhere in a
    neighbor's sets, and every shared channel really is carried by at least
    one neighbor.
    """
    ms, n = instance.num_sus, instance.num_channels
    if len(assignment.separate) != ms or len(assignment.common) != ms:
        raise AssignmentInvariantError("assignment size does not match the SU count")
    for su in range(ms):
        sep, com = assignment.separate[su], assignment.common[su]
        for ch in sep | com:
            if not 0 <= ch < n:
                raise AssignmentInvariantError(f"SU {su} carries unknown channel {ch}")
        if sep & com:
            raise AssignmentInvariantError(
                f"SU {su} lists {sorted(sep & com)} as both separate and shared"
            )
    adj = adjacency(instance)
    for a, b in sorted(instance.su_edges):
        for x, y in ((a, b), (b, a)):
            clash = assignment.separate[x] & assignment.total(y)
            if clash:
                raise AssignmentInvariantError(
                    f"separate channels {sorted(clash)} of SU {x} also appear at neighbor SU {y}"
                )
    for su in range(ms):
        for ch in assignment.common[su]:
            if not any(ch in assignment.total(k) for k in adj[su]):
                raise AssignmentInvariantError(
                    f"channel {ch} of SU {su} is shared with no neighbor; it belongs in separate"
                )


def nonoverlap_throughput(channels, avail_row) -> float:
    """Probability at least one of the channels is available: 1 - prod(1 - p)."""
    miss = 1.0
    for ch in sorted(channels):
        miss *= 1.0 - avail_row[ch]
    return float(1.0 - miss)


def throughput_delta(channels, candidate: int, avail_row) -> float:
    """Gain from adding one channel to an exclusive set.

    Equals p_candidate times the probability all current channels are busy,
    which is exactly the closed-form difference.
    """
    if candidate in channels:
        raise ValueError(f"channel {candidate} is already assigned")
    miss = 1.0
    for ch in sorted(channels):
        miss *= 1.0 - avail_row[ch]
    return float(avail_row[candidate] * miss)


def assign_nonoverlapping(instance: NetworkInstance) -> AssignmentOutcome:
    """Greedy max-min assignment of exclusive channels.

    Repeatedly finds the SUs at the current minimum throughput, offers each
    its best available channel (highest availability, lowest index on ties),
    and grants the offer with the largest closed-form gain (lowest SU, then
    lowest channel, on ties).  The granted channel disappears from the
    winner's and its neighbors' available sets.  Stops when every minimum
    SU is exhausted or the minimum throughput is within 1e-12 of one.
    """
    rows = availability(instance).p
    adj = adjacency(instance)
    ms, n = instance.num_sus, instance.num_channels
    separate: list[set[int]] = [set() for _ in range(ms)]
    open_chs: list[set[int]] = [set(range(n)) for _ in range(ms)]
    tput = [0.0] * ms
    iterations = 0
    evaluations = 0
    while True:
        tmin = min(tput)
        if tmin >= _SATURATED:
            break
        best = None  # (gain, su, channel)
        for su in range(ms):
            if tput[su] != tmin or not open_chs[su]:
                continue
            pick = None
            for ch in sorted(open_chs[su]):
                if pick is None or rows[su][ch] > rows[su][pick]:
                    pick = ch
            gain = throughput_delta(separate[su], pick, rows[su])
            evaluations += 1
            if best is None or gain > best[0]:
                best = (gain, su, pick)
        if best is None:
            break
        _, su, ch = best
        separate[su].add(ch)
        open_chs[su].discard(ch)
        for k in adj[su]:
            open_chs[k].discard(ch)
        tput[su] = nonoverlap_throughput(separate[su], rows[su])
        iterations += 1
    assignment = ChannelAssignment.from_sets(separate)
    validate_assignment(instance, assignment)
    return AssignmentOutcome(
        assignment=assignment,
        per_su_throughput=tuple(tput),
        min_throughput=min(tput),
        iterations=iterations,
        evaluations=evaluations,
    )


def _local_key(su, sep, com, neighbors):
    """Cache key capturing everything the analytic model reads for one SU."""
    sharing = tuple(
        sorted(
            (k, frozenset(sep[k]), frozenset(com[k]))
            for k in neighbors
            if (sep[k] | com[k]) & com[su]
        )
    )
    return (su, frozenset(sep[su]), frozenset(com[su]), sharing)


def assign_overlapping(
    instance: NetworkInstance,
    *,
    epsilon: float = 0.03,
    timing: MacTiming = DEFAULT_TIMING,
    delta: float | None = None,
    max_states: int = DEFAULT_STATE_CAP,
) -> AssignmentOutcome:
    """Two-phase max-min assignment allowing shared channels.

    Phase one is the greedy exclusive assignment.  Phase two iterates: every
    SU at the current minimum throughput, in ascending id order, tries
    joining one channel carried by a neighbor (whether owned exclusively or
    already shared); joining moves the channel into the shared sets of the
    joiner and of every neighbor that held it exclusively.  Each such SU
    keeps the candidate maximizing the tentative global minimum (ties: its
    own throughput, then the lowest channel), skipping moves that lower the
    tentative minimum or fail to raise its own throughput.  The whole batch
    is committed only when it strictly improves the global minimum; one
    joint step is what lets several tied SUs rise together.  Candidates
    whose exact evaluation would exceed ``max_states`` are skipped, so the
    search only adopts structures it can score exactly.  ``delta`` defaults
    to the overhead of the window selected for the phase-one assignment;
    pass 0.0 to compare search structure against overhead-free baselines.
    """
    phase1 = assign_nonoverlapping(instance)
    if delta is None:
        sized = select_window(instance, phase1.assignment, epsilon, max_states=max_states)
        delta = overhead(sized.global_window, timing)
    adj = adjacency(instance)
    ms, n = instance.num_sus, instance.num_channels
    sep = [set(s) for s in phase1.assignment.separate]
    com: list[set[int]] = [set() for _ in range(ms)]
    tput = list(phase1.per_su_throughput)
    cache: dict = {}

    def analytic(su, sep_l, com_l) -> float:
        key = _local_key(su, sep_l, com_l, adj[su])
        if key not in cache:
            trial = ChannelAssignment(
                separate=tuple(frozenset(s) for s in sep_l),
                common=tuple(frozenset(c) for c in com_l),
            )
            cache[key] = total_throughput(su, trial, instance, delta, max_states=max_states)
        return cache[key]

    iterations = 0
    evaluations = 0
    for _ in range(ms * n):
        iterations += 1
        tmin = min(tput)
        min_sus = [su for su in range(ms) if tput[su] == tmin]
        t_sep = [set(s) for s in sep]
        t_com = [set(c) for c in com]
        t_tput = list(tput)
        changed = False
        for su in min_sus:
            carried = set()
            for k in adj[su]:
                carried |= t_sep[k] | t_com[k]
            tentative_min = min(t_tput)
            best = None  # (new_min, own, channel, new values, trial sets)
            for ch in sorted(carried - t_sep[su] - t_com[su]):
                evaluations += 1
                owners = [k for k in sorted(adj[su]) if ch in t_sep[k] or ch in t_com[k]]
                trial_sep = [set(s) for s in t_sep]
                trial_com = [set(c) for c in t_com]
                trial_com[su].add(ch)
                affected = {su} | set(adj[su])
                for k in owners:
                    affected.add(k)
                    affected |= adj[k]
                    if ch in trial_sep[k]:
                        trial_sep[k].discard(ch)
                        trial_com[k].add(ch)
                try:
                    new_vals = {m: analytic(m, trial_sep, trial_com) for m in sorted(affected)}
                except EnumerationCapError:
                    continue
                new_min = min(new_vals.get(m, t_tput[m]) for m in range(ms))
                own = new_vals[su]
                if best is None or (new_min, own, -ch) > (best[0], best[1], -best[2]):
                    best = (new_min, own, ch, new_vals, trial_sep, trial_com)
            if best is None:
                continue
            new_min, own, _, new_vals, trial_sep, trial_com = best
            if new_min < tentative_min or own <= t_tput[su]:
                continue
            t_sep, t_com = trial_sep, trial_com
            for m, val in new_vals.items():
                t_tput[m] = val
            changed = True
        if not changed or min(t_tput) <= tmin:
            break
        sep, com, tput = t_sep, t_com, t_tput
    assignment = ChannelAssignment(
        separate=tuple(frozenset(s) for s in sep),
        common=tuple(frozenset(c) for c in com),
    )
    validate_assignment(instance, assignment)
    return AssignmentOutcome(
        assignment=assignment,
        per_su_throughput=tuple(tput),
        min_throughput=min(tput),
        iterations=iterations,
        evaluations=evaluations,
    )


def _mask_set(mask: int) -> frozenset[int]:
    out = []
    ch = 0
    while mask:
        if mask & 1:
            out.append(ch)
        mask >>= 1
        ch += 1
    return frozenset(out)


def brute_force(
    instance: NetworkInstance,
    evaluator=None,
    overlap_allowed: bool = False,
    *,
    delta: float = 0.0,
    max_bits: int = DEFAULT_BRUTE_BITS,
    max_states: int = DEFAULT_STATE_CAP,
) -> AssignmentOutcome:
    """Exhaustive max-min search over all channel assignments.

    Enumerates every per-SU channel subset combination, 2**(num_channels *
    num_sus) candidates, and keeps the first assignment attaining the best
    minimum throughput.  Without ``overlap_allowed``, assignments where
    neighbors share a channel are skipped and throughput is the closed form;
    with it, each SU's channels are classified as shared when some neighbor
    also carries them and scored with the exact analytic model at ``delta``
    (default 0, the structural upper bound without MAC overhead).  A custom
    ``evaluator(instance, assignment)`` returning per-SU throughputs
    overrides the built-in scoring.  Raises SearchSpaceError when
    num_channels * num_sus exceeds ``max_bits``.
    """
    ms, n = instance.num_sus, instance.num_channels
    bits = ms * n
    if bits > max_bits:
        raise SearchSpaceError(
            f"brute force needs 2^{bits} candidates, guard allows 2^{max_bits}"
        )
    rows = availability(instance).p
    adj = adjacency(instance)
    edges = sorted(instance.su_edges)
    full = 1 << n

    # Closed-form throughput per SU for every channel mask; the recurrence
    # strips the highest channel so products accumulate in ascending order.
    tables = []
    for su in range(ms):
        miss = np.ones(full)
        for mask in range(1, full):
            high = mask.bit_length() - 1
            miss[mask] = miss[mask ^ (1 << high)] * (1.0 - rows[su][high])
        tables.append(1.0 - miss)

    neighbor_idx = [sorted(adj[su]) for su in range(ms)]
    iterations = 0
    evaluations = 0
    best_min = -1.0
    best_masks = None
    best_per = None

    if evaluator is None and not overlap_allowed:
        for masks in product(range(full), repeat=ms):
            iterations += 1
            if any(masks[a] & masks[b] for a, b in edges):
                continue
            evaluations += 1
            per = [float(tables[su][masks[su]]) for su in range(ms)]
            tmin = min(per)
            if tmin > best_min:
                best_min, best_masks, best_per = tmin, masks, per
        sep = list(best_masks)
        com = [0] * ms
    elif evaluator is None:
        cache: dict = {}
        for masks in product(range(full), repeat=ms):
            iterations += 1
            # The closed form over the full channel set bounds the analytic
            # throughput from above, so dominated candidates are skipped.
            if min(tables[su][masks[su]] for su in range(ms)) <= best_min:
                continue
            evaluations += 1
            nb_or = [0] * ms
            for su in range(ms):
                acc = 0
                for k in neighbor_idx[su]:
                    acc |= masks[k]
                nb_or[su] = acc
            com = [masks[su] & nb_or[su] for su in range(ms)]
            sep = [masks[su] & ~com[su] for su in range(ms)]
            per = []
            for su in range(ms):
                key = (
                    su,
                    sep[su],
                    com[su],
                    tuple((k, sep[k], com[k]) for k in neighbor_idx[su] if masks[k] & com[su]),
                )
                if key not in cache:
                    trial = ChannelAssignment(
                        separate=tuple(_mask_set(m) for m in sep),
                        common=tuple(_mask_set(m) for m in com),
                    )
                    cache[key] = total_throughput(
                        su, trial, instance, delta, max_states=max_states
                    )
                per.append(cache[key])
            tmin = min(per)
            if tmin > best_min:
                best_min, best_masks, best_per = tmin, masks, per
        nb_or = [0] * ms
        for su in range(ms):
            acc = 0
            for k in neighbor_idx[su]:
                acc |= best_masks[k]
            nb_or[su] = acc
        com = [best_masks[su] & nb_or[su] for su in range(ms)]
        sep = [best_masks[su] & ~com[su] for su in range(ms)]
    else:
        for masks in product(range(full), repeat=ms):
            iterations += 1
            if not overlap_allowed and any(masks[a] & masks[b] for a, b in edges):
                continue
            if overlap_allowed:
                nb_or = [0] * ms
                for su in range(ms):
                    acc = 0
                    for k in neighbor_idx[su]:
                        acc |= masks[k]
                    nb_or[su] = acc
                com = [masks[su] & nb_or[su] for su in range(ms)]
                sep = [masks[su] & ~com[su] for su in range(ms)]
            else:
                com = [0] * ms
                sep = list(masks)
            trial = ChannelAssignment(
                separate=tuple(_mask_set(m) for m in sep),
                common=tuple(_mask_set(m) for m in com),
            )
            evaluations += 1
            per = [float(v) for v in evaluator(instance, trial)]
            tmin = min(per)
            if tmin > best_min:
                best_min, best_masks, best_per = tmin, masks, per
                best_sep, best_com = sep, com
        sep, com = best_sep, best_com

    assignment = ChannelAssignment(
        separate=tuple(_mask_set(m) for m in sep),
        common=tuple(_mask_set(m) for m in com),
    )
    validate_assignment(instance, assignment)
    return AssignmentOutcome(
        assignment=assignment,
        per_su_throughput=tuple(best_per),
        min_throughput=best_min,
        iterations=iterations,
        evaluations=evaluations,
    )
