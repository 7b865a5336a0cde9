# cython: language_level=3
"""Compiled kernels: exact state enumeration and the MAC cycle simulator.

Mirrors cogmesh._reference function for function.  The enumeration walks
states in Gray-code order so each step flips a single activity variable and
updates slot availability, per-SU open-channel counters, and the state
weight incrementally; the weight is recomputed from scratch every 512 steps
to stop the multiplicative drift.  The simulator consumes the same
counter-based random streams as the reference, so per-SU counts match it
exactly.
"""

from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

import numpy as np

from .enumeration import MAX_SCOPE

cdef uint64_t _G1 = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t _G2 = <uint64_t>0xC2B2AE3D27D4EB4F
cdef uint64_t _G3 = <uint64_t>0x165667B19E3779F9
cdef uint64_t _M1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t _M2 = <uint64_t>0x94D049BB133111EB
cdef double _INV53 = 1.0 / 9007199254740992.0  # 2 ** -53

WIN = 1
COLLIDE = 2
QUIT = 3


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= _M1
    z ^= z >> 27
    z *= _M2
    z ^= z >> 31
    return z


cdef inline double _unit(uint64_t seed, uint64_t stream, uint64_t cycle, uint64_t lane) nogil:
    cdef uint64_t x = seed + stream * _G1 + cycle * _G2 + lane * _G3
    return <double>(_mix64(x) >> 11) * _INV53


def _draw_unit(seed, stream, cycle, lane):
    """Python-visible probe used by backend parity tests."""
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    return _unit(s, <uint64_t>stream, <uint64_t>cycle, <uint64_t>lane)


cdef inline int _ctz(uint64_t x) nogil:
    cdef int c = 0
    while not (x & 1):
        x >>= 1
        c += 1
    return c


cdef class _Walker:
    """Incremental Gray-code walk over a reduced activity state space."""

    cdef int n_factors, n_slots, n_scope
    cdef double[::1] probs
    cdef int32_t[::1] slot_ptr, slot_idx, factor_ptr, factor_idx
    cdef int32_t[::1] slot_group
    cdef uint8_t[::1] slot_is_com
    cdef uint8_t[::1] bits
    cdef int32_t[::1] slot_busy
    cdef int32_t[::1] sep_open, com_open
    cdef double weight

    def __init__(self, space, layout):
        self.n_factors = space.n_factors
        self.n_slots = space.n_slots
        self.n_scope = layout.n_scope
        self.probs = np.ascontiguousarray(space.probs, dtype=np.float64)
        self.slot_ptr = np.ascontiguousarray(space.slot_ptr, dtype=np.int32)
        self.slot_idx = np.ascontiguousarray(space.slot_idx, dtype=np.int32)
        self.factor_ptr = np.ascontiguousarray(space.factor_ptr, dtype=np.int32)
        self.factor_idx = np.ascontiguousarray(space.factor_idx, dtype=np.int32)

        group = np.full(max(space.n_slots, 1), -1, dtype=np.int32)
        is_com = np.zeros(max(space.n_slots, 1), dtype=np.uint8)
        sep_ptr, sep_idx = layout.sep_ptr, layout.sep_idx
        com_ptr, com_idx = layout.com_ptr, layout.com_idx
        for s in range(layout.n_scope):
            group[sep_idx[sep_ptr[s] : sep_ptr[s + 1]]] = s
            slots = com_idx[com_ptr[s] : com_ptr[s + 1]]
            group[slots] = s
            is_com[slots] = 1
        self.slot_group = group
        self.slot_is_com = is_com

        self.bits = np.zeros(max(space.n_factors, 1), dtype=np.uint8)
        self.slot_busy = np.ascontiguousarray(space.blocked, dtype=np.int32).copy() if space.n_slots else np.zeros(1, dtype=np.int32)

        sep_open = np.zeros(max(layout.n_scope, 1), dtype=np.int32)
        com_open = np.zeros(max(layout.n_scope, 1), dtype=np.int32)
        for s in range(layout.n_scope):
            for t in sep_idx[sep_ptr[s] : sep_ptr[s + 1]]:
                if self.slot_busy[t] == 0:
                    sep_open[s] += 1
            for t in com_idx[com_ptr[s] : com_ptr[s + 1]]:
                if self.slot_busy[t] == 0:
                    com_open[s] += 1
        self.sep_open = sep_open
        self.com_open = com_open
        self.refresh_weight()

    cdef void refresh_weight(self) nogil:
        cdef int f
        cdef double w = 1.0
        for f in range(self.n_factors):
            w *= (1.0 - self.probs[f]) if self.bits[f] else self.probs[f]
        self.weight = w

    cdef void flip(self, int f) nogil:
        cdef int delta, i, t, old, s
        cdef double p = self.probs[f]
        if self.bits[f]:
            self.bits[f] = 0
            delta = -1
            self.weight *= p / (1.0 - p)
        else:
            self.bits[f] = 1
            delta = 1
            self.weight *= (1.0 - p) / p
        for i in range(self.factor_ptr[f], self.factor_ptr[f + 1]):
            t = self.factor_idx[i]
            old = self.slot_busy[t]
            self.slot_busy[t] = old + delta
            s = self.slot_group[t]
            if delta == 1 and old == 0:
                if self.slot_is_com[t]:
                    self.com_open[s] -= 1
                else:
                    self.sep_open[s] -= 1
            elif delta == -1 and old == 1:
                if self.slot_is_com[t]:
                    self.com_open[s] += 1
                else:
                    self.sep_open[s] += 1


def share_expectation(space, layout):
    """See cogmesh._reference.share_expectation; identical semantics."""
    cdef _Walker w = _Walker(space, layout)
    cdef int n_targets = len(layout.target_slot)
    cdef int32_t[::1] target_slot = np.ascontiguousarray(layout.target_slot, dtype=np.int32) if n_targets else np.zeros(1, dtype=np.int32)
    cdef int32_t[::1] comp_ptr = np.ascontiguousarray(layout.comp_ptr, dtype=np.int32)
    cdef int32_t[::1] comp_scope = np.ascontiguousarray(layout.comp_scope, dtype=np.int32) if len(layout.comp_scope) else np.zeros(1, dtype=np.int32)
    cdef int32_t[::1] comp_slot = np.ascontiguousarray(layout.comp_slot, dtype=np.int32) if len(layout.comp_slot) else np.zeros(1, dtype=np.int32)

    cdef double[::1] poly = np.zeros(MAX_SCOPE + 2, dtype=np.float64)
    cdef double[::1] inv = 1.0 / np.arange(1.0, MAX_SCOPE + 3.0)

    cdef double acc = 0.0, comp = 0.0, val, tmp  # Neumaier running sum
    cdef uint64_t step, total = (<uint64_t>1) << w.n_factors

    val = _share_stat(w, n_targets, target_slot, comp_ptr, comp_scope, comp_slot, poly, inv)
    acc, comp = _neumaier(acc, comp, val)
    for step in range(1, total):
        w.flip(_ctz(step))
        if (step & 511) == 0:
            w.refresh_weight()
        val = _share_stat(w, n_targets, target_slot, comp_ptr, comp_scope, comp_slot, poly, inv)
        acc, comp = _neumaier(acc, comp, val)
    return acc + comp


cdef inline (double, double) _neumaier(double acc, double comp, double val) nogil:
    cdef double t = acc + val
    if (acc if acc >= 0 else -acc) >= (val if val >= 0 else -val):
        comp += (acc - t) + val
    else:
        comp += (val - t) + acc
    return t, comp


cdef double _share_stat(
    _Walker w,
    int n_targets,
    int32_t[::1] target_slot,
    int32_t[::1] comp_ptr,
    int32_t[::1] comp_scope,
    int32_t[::1] comp_slot,
    double[::1] poly,
    double[::1] inv,
) nogil:
    cdef int t, i, a, m, kk, ks
    cdef double q, stat = 0.0, v
    if w.sep_open[0] != 0 or w.com_open[0] == 0:
        return 0.0
    for t in range(n_targets):
        if w.slot_busy[target_slot[t]] != 0:
            continue
        m = 0
        poly[0] = 1.0
        for i in range(comp_ptr[t], comp_ptr[t + 1]):
            kk = comp_scope[i]
            ks = comp_slot[i]
            if w.slot_busy[ks] != 0 or w.sep_open[kk] != 0:
                continue
            q = 1.0 / w.com_open[kk]
            poly[m + 1] = 0.0
            for a in range(m, -1, -1):
                poly[a + 1] += poly[a] * q
                poly[a] *= 1.0 - q
            m += 1
        v = 0.0
        for a in range(m + 1):
            v += poly[a] * inv[a]
        stat += v
    return w.weight * stat / w.com_open[0]


def contention_distribution(space, layout):
    """See cogmesh._reference.contention_distribution; identical semantics."""
    cdef _Walker w = _Walker(space, layout)
    out_arr = np.zeros(layout.n_scope + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef uint64_t step, total = (<uint64_t>1) << w.n_factors
    cdef int s, m

    m = 0
    for s in range(w.n_scope):
        if w.sep_open[s] == 0 and w.com_open[s] > 0:
            m += 1
    out[m] += w.weight
    for step in range(1, total):
        w.flip(_ctz(step))
        if (step & 511) == 0:
            w.refresh_weight()
        m = 0
        for s in range(w.n_scope):
            if w.sep_open[s] == 0 and w.com_open[s] > 0:
                m += 1
        out[m] += w.weight
    return out_arr


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
):
    """See cogmesh._reference.simulate_counts (sans trace collection)."""
    cdef double[::1] idle_v = np.ascontiguousarray(idle, dtype=np.float64) if len(idle) else np.zeros(1, dtype=np.float64)
    cdef int32_t[::1] supu_p = np.ascontiguousarray(su_pu_ptr, dtype=np.int32)
    cdef int32_t[::1] supu_i = _nz(su_pu_idx)
    cdef int32_t[::1] sep_p = np.ascontiguousarray(sep_ptr, dtype=np.int32)
    cdef int32_t[::1] sep_i = _nz(sep_idx)
    cdef int32_t[::1] com_p = np.ascontiguousarray(com_ptr, dtype=np.int32)
    cdef int32_t[::1] com_i = _nz(com_idx)
    cdef int32_t[::1] adj_p = np.ascontiguousarray(adj_ptr, dtype=np.int32)
    cdef int32_t[::1] adj_i = _nz(adj_idx)

    cdef int n = num_channels
    cdef int mp = num_pus
    cdef int ms = len(su_pu_ptr) - 1
    cdef int64_t n_cycles = cycles
    cdef int win = window
    cdef uint64_t sd = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)

    sep_tx_a = np.zeros(ms, dtype=np.int64)
    wins_a = np.zeros(ms, dtype=np.int64)
    coll_a = np.zeros(ms, dtype=np.int64)
    entr_a = np.zeros(ms, dtype=np.int64)
    cdef int64_t[::1] sep_tx = sep_tx_a
    cdef int64_t[::1] wins = wins_a
    cdef int64_t[::1] coll = coll_a
    cdef int64_t[::1] entr = entr_a

    cdef uint8_t[::1] busy = np.zeros(max(mp * n, 1), dtype=np.uint8)
    cdef int32_t[::1] chbuf = np.zeros(max(n, 1), dtype=np.int32)
    cdef int32_t[::1] act_su = np.zeros(max(ms, 1), dtype=np.int32)
    cdef int32_t[::1] act_ch = np.zeros(max(ms, 1), dtype=np.int32)
    cdef int32_t[::1] act_cnt = np.zeros(max(ms, 1), dtype=np.int32)
    cdef uint8_t[::1] is_zero = np.zeros(max(ms, 1), dtype=np.uint8)
    cdef uint8_t[::1] drop = np.zeros(max(ms, 1), dtype=np.uint8)
    cdef int32_t[::1] win_su = np.zeros(max(ms, 1), dtype=np.int32)
    cdef int32_t[::1] win_ch = np.zeros(max(ms, 1), dtype=np.int32)
    cdef int32_t[::1] pos_of = np.zeros(max(ms, 1), dtype=np.int32)

    cdef int64_t cyc
    cdef int p, ch, su, i, j, cnt, pick, n_act, step_min, nw, keep, lane
    cdef int free_ch, bo
    cdef double u

    with nogil:
        for cyc in range(n_cycles):
            for p in range(mp):
                for ch in range(n):
                    lane = p * n + ch
                    busy[lane] = 1 if _unit(sd, 1, <uint64_t>cyc, <uint64_t>lane) >= idle_v[lane] else 0

            n_act = 0
            for su in range(ms):
                cnt = 0
                for i in range(sep_p[su], sep_p[su + 1]):
                    ch = sep_i[i]
                    free_ch = 1
                    for j in range(supu_p[su], supu_p[su + 1]):
                        if busy[supu_i[j] * n + ch]:
                            free_ch = 0
                            break
                    if free_ch:
                        chbuf[cnt] = ch
                        cnt += 1
                if cnt:
                    sep_tx[su] += 1
                    continue
                cnt = 0
                for i in range(com_p[su], com_p[su + 1]):
                    ch = com_i[i]
                    free_ch = 1
                    for j in range(supu_p[su], supu_p[su + 1]):
                        if busy[supu_i[j] * n + ch]:
                            free_ch = 0
                            break
                    if free_ch:
                        chbuf[cnt] = ch
                        cnt += 1
                if cnt:
                    u = _unit(sd, 2, <uint64_t>cyc, <uint64_t>su)
                    pick = <int>(u * cnt)
                    if pick >= cnt:
                        pick = cnt - 1
                    u = _unit(sd, 3, <uint64_t>cyc, <uint64_t>su)
                    bo = <int>(u * win)
                    if bo >= win:
                        bo = win - 1
                    act_su[n_act] = su
                    act_ch[n_act] = chbuf[pick]
                    act_cnt[n_act] = bo
                    n_act += 1
                    entr[su] += 1

            while n_act:
                step_min = act_cnt[0]
                for i in range(1, n_act):
                    if act_cnt[i] < step_min:
                        step_min = act_cnt[i]
                for i in range(n_act):
                    act_cnt[i] -= step_min
                    is_zero[act_su[i]] = 1 if act_cnt[i] == 0 else 0
                    pos_of[act_su[i]] = i
                    drop[act_su[i]] = 0
                nw = 0
                for i in range(n_act):
                    su = act_su[i]
                    if act_cnt[i] != 0:
                        continue
                    free_ch = 1  # reused as "no zero neighbor" flag
                    for j in range(adj_p[su], adj_p[su + 1]):
                        if is_zero[adj_i[j]]:
                            free_ch = 0
                            break
                    if free_ch:
                        wins[su] += 1
                        win_su[nw] = su
                        win_ch[nw] = act_ch[i]
                        nw += 1
                    else:
                        coll[su] += 1
                for i in range(nw):
                    su = win_su[i]
                    for j in range(adj_p[su], adj_p[su + 1]):
                        p = adj_i[j]  # neighboring SU id
                        if is_zero[p]:
                            continue
                        pick = pos_of[p]
                        if pick < n_act and act_su[pick] == p and act_ch[pick] == win_ch[i]:
                            drop[p] = 1
                for i in range(n_act):
                    is_zero[act_su[i]] = 0
                keep = 0
                for i in range(n_act):
                    su = act_su[i]
                    if act_cnt[i] == 0 or drop[su]:
                        continue
                    act_su[keep] = su
                    act_ch[keep] = act_ch[i]
                    act_cnt[keep] = act_cnt[i]
                    keep = keep + 1
                for i in range(keep):
                    pos_of[act_su[i]] = i
                n_act = keep

    return sep_tx_a, wins_a, coll_a, entr_a


def _nz(arr):
    """Contiguous int32 view, replacing empty input with a one-slot dummy."""
    a = np.ascontiguousarray(arr, dtype=np.int32)
    return a if len(a) else np.zeros(1, dtype=np.int32)
