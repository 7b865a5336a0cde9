"""Pure Python reference backend.

Implements the three computational kernels exactly as the compiled backend
does: the weighted state-space statistics (win-share expectation, contender
count distribution) and the cycle-level MAC simulator.  Random draws use a
counter-based generator, hash(seed, stream, cycle, lane), so the two
backends consume identical randomness without sharing mutable state.
"""

from __future__ import annotations

import numpy as np

from .enumeration import ScopeLayout, StateSpace

__all__ = [
    "share_expectation",
    "contention_distribution",
    "simulate_counts",
    "resolve_contention",
    "unit_draw",
    "WIN",
    "COLLIDE",
    "QUIT",
    "STREAM_PU",
    "STREAM_CHOICE",
    "STREAM_BACKOFF",
]

_MASK64 = (1 << 64) - 1
STREAM_PU = 1
STREAM_CHOICE = 2
STREAM_BACKOFF = 3

# Contention outcomes, shared with the compiled backend.
WIN = 1
COLLIDE = 2
QUIT = 3


def _mix64(z: int) -> int:
    """Finalizer of the splitmix64 generator; bijective on 64-bit words."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def unit_draw(seed: int, stream: int, cycle: int, lane: int) -> float:
    """Deterministic uniform draw in [0, 1) keyed by (seed, stream, cycle, lane)."""
    x = (
        seed
        + stream * 0x9E3779B97F4A7C15
        + cycle * 0xC2B2AE3D27D4EB4F
        + lane * 0x165667B19E3779F9
    ) & _MASK64
    return (_mix64(x) >> 11) * 2.0**-53


# ---------------------------------------------------------------------------
# Exact enumeration statistics.
#
# States are visited in plain index order, 2^16 at a time; availability of
# every slot is derived per chunk with vectorized any()/sum() reductions.
# ---------------------------------------------------------------------------

_CHUNK_BITS = 16


def _state_chunks(space: StateSpace):
    """Yield (busy_bits, weight) arrays covering the whole state space."""
    n = space.n_factors
    total = 1 << n
    step = min(total, 1 << _CHUNK_BITS)
    shifts = np.arange(n, dtype=np.uint64)
    for lo in range(0, total, step):
        idx = np.arange(lo, min(lo + step, total), dtype=np.uint64)
        bits = ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(bool)
        weights = np.where(bits, 1.0 - space.probs, space.probs).prod(axis=1)
        yield bits, weights


def _slot_available(space: StateSpace, bits: np.ndarray) -> np.ndarray:
    rows = bits.shape[0]
    avail = np.empty((rows, space.n_slots), dtype=bool)
    for t in range(space.n_slots):
        if space.blocked[t]:
            avail[:, t] = False
            continue
        cols = space.slot_idx[space.slot_ptr[t] : space.slot_ptr[t + 1]]
        avail[:, t] = ~bits[:, cols].any(axis=1) if cols.size else True
    return avail


def _scope_reductions(layout: ScopeLayout, avail: np.ndarray):
    """Per scope member: any separate channel available, count of available shared."""
    rows = avail.shape[0]
    sep_any = np.zeros((layout.n_scope, rows), dtype=bool)
    com_cnt = np.zeros((layout.n_scope, rows), dtype=np.int64)
    for s in range(layout.n_scope):
        sep = layout.sep_idx[layout.sep_ptr[s] : layout.sep_ptr[s + 1]]
        if sep.size:
            sep_any[s] = avail[:, sep].any(axis=1)
        com = layout.com_idx[layout.com_ptr[s] : layout.com_ptr[s + 1]]
        if com.size:
            com_cnt[s] = avail[:, com].sum(axis=1)
    return sep_any, com_cnt


def share_expectation(space: StateSpace, layout: ScopeLayout) -> float:
    """E[1{no separate channel free} * 1{target picks j} * 1/(1 + same-pick rivals)].

    The expectation runs over joint primary activity and the uniform random
    channel picks of the target SU (scope member 0) and its rivals, summed
    over the target's shared channels j.  The rival-count distribution for a
    fixed activity state is Poisson binomial; its expectation of 1/(1+count)
    is evaluated by carrying the count polynomial one rival at a time.
    """
    n_targets = len(layout.target_slot)
    max_rivals = int(np.max(np.diff(layout.comp_ptr))) if n_targets else 0
    inv = 1.0 / np.arange(1.0, max_rivals + 2.0)
    total = 0.0
    for bits, weights in _state_chunks(space):
        avail = _slot_available(space, bits)
        sep_any, com_cnt = _scope_reductions(layout, avail)
        active = ~sep_any[0] & (com_cnt[0] > 0)
        if not active.any():
            continue
        rows = len(weights)
        acc = np.zeros(rows)
        for t in range(n_targets):
            pickable = active & avail[:, layout.target_slot[t]]
            if not pickable.any():
                continue
            lo, hi = layout.comp_ptr[t], layout.comp_ptr[t + 1]
            if lo == hi:
                acc += pickable
                continue
            deg = hi - lo
            coeffs = np.zeros((rows, deg + 1))
            coeffs[:, 0] = 1.0
            for s_idx, slot in zip(layout.comp_scope[lo:hi], layout.comp_slot[lo:hi]):
                contending = avail[:, slot] & ~sep_any[s_idx]
                q = np.where(contending, 1.0 / np.maximum(com_cnt[s_idx], 1), 0.0)
                shifted = coeffs[:, :deg] * q[:, None]
                coeffs *= (1.0 - q)[:, None]
                coeffs[:, 1:] += shifted
            acc += np.where(pickable, coeffs @ inv[: deg + 1], 0.0)
        picks = np.maximum(com_cnt[0], 1)
        total += float(np.sum(np.where(active, weights * acc / picks, 0.0)))
    return total


def contention_distribution(space: StateSpace, layout: ScopeLayout) -> np.ndarray:
    """Probability mass of the number of scope members entering contention."""
    out = np.zeros(layout.n_scope + 1)
    for bits, weights in _state_chunks(space):
        avail = _slot_available(space, bits)
        sep_any, com_cnt = _scope_reductions(layout, avail)
        m = (~sep_any & (com_cnt > 0)).sum(axis=0)
        out += np.bincount(m, weights=weights, minlength=layout.n_scope + 1)
    return out


# ---------------------------------------------------------------------------
# MAC cycle simulator.
# ---------------------------------------------------------------------------


def resolve_contention(contenders, neighbor_sets):
    """Resolve one contention stage; returns {su: WIN | COLLIDE | QUIT}.

    ``contenders`` is an iterable of (su, channel, backoff).  Rounds proceed
    by the minimum remaining counter.  Counters reaching zero in the same
    round collide when the owners are contention neighbors regardless of
    channel (their handshakes overlap on the air); otherwise the owner wins
    and transmits.  A still-counting SU quits for the cycle as soon as some
    winning neighbor announces the channel it itself had picked.  Unrelated
    SUs keep counting, which is what allows spatial channel reuse.
    """
    channel = {}
    counter = {}
    for su, ch, backoff in contenders:
        channel[su] = ch
        counter[su] = backoff
    outcome = {}
    active = sorted(channel)
    while active:
        step = min(counter[su] for su in active)
        reached = []
        for su in active:
            counter[su] -= step
            if counter[su] == 0:
                reached.append(su)
        reached_set = set(reached)
        winners = []
        for su in reached:
            if neighbor_sets[su] & reached_set:
                outcome[su] = COLLIDE
            else:
                outcome[su] = WIN
                winners.append(su)
        remaining = []
        for su in active:
            if su in reached_set:
                continue
            if any(su in neighbor_sets[w] and channel[su] == channel[w] for w in winners):
                outcome[su] = QUIT
            else:
                remaining.append(su)
        active = remaining
    return outcome


def simulate_counts(
    idle,
    su_pu_ptr,
    su_pu_idx,
    sep_ptr,
    sep_idx,
    com_ptr,
    com_idx,
    adj_ptr,
    adj_idx,
    num_channels,
    num_pus,
    cycles,
    seed,
    window,
    collect=None,
):
    """Run the synchronized MAC for ``cycles`` cycles; returns count arrays.

    Per cycle: draw primary activity, let every SU sense its channels, serve
    separate channels without contention, then resolve the contention stage
    among SUs that fell back to a shared channel.  Returns int64 arrays
    (separate transmissions, contention wins, collisions, contention entries)
    indexed by SU.  When ``collect`` is a list, one record per cycle is
    appended for trace building: (busy matrix, choice, backoff, outcome code).
    """
    seed &= _MASK64
    num_sus = len(sep_ptr) - 1
    sep_of = [list(sep_idx[sep_ptr[s] : sep_ptr[s + 1]]) for s in range(num_sus)]
    com_of = [list(com_idx[com_ptr[s] : com_ptr[s + 1]]) for s in range(num_sus)]
    pus_of = [list(su_pu_idx[su_pu_ptr[s] : su_pu_ptr[s + 1]]) for s in range(num_sus)]
    neighbor_sets = [
        frozenset(adj_idx[adj_ptr[s] : adj_ptr[s + 1]]) for s in range(num_sus)
    ]
    idle = np.asarray(idle, dtype=np.float64).reshape(num_pus, num_channels)

    sep_tx = np.zeros(num_sus, dtype=np.int64)
    wins = np.zeros(num_sus, dtype=np.int64)
    collisions = np.zeros(num_sus, dtype=np.int64)
    entries = np.zeros(num_sus, dtype=np.int64)

    # Trace outcome codes (shared with the CLI layer).
    IDLE_C, SEP_TX_C, WIN_C, QUIT_C, COLLIDE_C, NO_CHANNEL_C = 0, 1, 2, 3, 4, 5

    for cycle in range(cycles):
        busy = [
            [
                unit_draw(seed, STREAM_PU, cycle, p * num_channels + ch) >= idle[p, ch]
                for ch in range(num_channels)
            ]
            for p in range(num_pus)
        ]

        def free(su, ch):
            return not any(busy[p][ch] for p in pus_of[su])

        contenders = []
        if collect is not None:
            choice = [-1] * num_sus
            backoff_rec = [-1] * num_sus
            code = [IDLE_C] * num_sus
        for su in range(num_sus):
            open_sep = [ch for ch in sep_of[su] if free(su, ch)]
            if open_sep:
                u = unit_draw(seed, STREAM_CHOICE, cycle, su)
                ch = open_sep[min(int(u * len(open_sep)), len(open_sep) - 1)]
                sep_tx[su] += 1
                if collect is not None:
                    choice[su] = ch
                    code[su] = SEP_TX_C
                continue
            open_com = [ch for ch in com_of[su] if free(su, ch)]
            if open_com:
                u = unit_draw(seed, STREAM_CHOICE, cycle, su)
                ch = open_com[min(int(u * len(open_com)), len(open_com) - 1)]
                u = unit_draw(seed, STREAM_BACKOFF, cycle, su)
                bo = min(int(u * window), window - 1)
                contenders.append((su, ch, bo))
                entries[su] += 1
                if collect is not None:
                    choice[su] = ch
                    backoff_rec[su] = bo
            elif collect is not None and (sep_of[su] or com_of[su]):
                code[su] = NO_CHANNEL_C

        if contenders:
            result = resolve_contention(contenders, neighbor_sets)
            for su, res in result.items():
                if res == WIN:
                    wins[su] += 1
                elif res == COLLIDE:
                    collisions[su] += 1
                if collect is not None:
                    code[su] = {WIN: WIN_C, COLLIDE: COLLIDE_C, QUIT: QUIT_C}[res]

        if collect is not None:
            collect.append(
                (
                    np.array(busy, dtype=bool).reshape(num_pus, num_channels),
                    tuple(choice),
                    tuple(backoff_rec),
                    tuple(code),
                )
            )

    return sep_tx, wins, collisions, entries
