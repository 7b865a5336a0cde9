"""Window sizing and overhead math."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

import cogmesh as cm
from conftest import make_instance


def exhaustive_first_collision(m, w):
    """Share of backoff tuples whose minimum is tied and below the last slot."""
    hits = 0
    for draw in itertools.product(range(w), repeat=m):
        lo = min(draw)
        if draw.count(lo) >= 2 and lo <= w - 2:
            hits += 1
    return Fraction(hits, w**m)


@pytest.mark.parametrize("m,w,want", [(2, 4, 3 / 16), (2, 2, 1 / 4), (3, 2, 1 / 2)])
def test_conditional_collision_known_values(m, w, want):
    assert cm.first_collision_prob_conditional(m, w) == pytest.approx(want, abs=1e-15)


def test_conditional_collision_matches_exhaustive_count():
    for m in range(2, 5):
        for w in range(2, 7):
            want = float(exhaustive_first_collision(m, w))
            got = cm.first_collision_prob_conditional(m, w)
            assert got == pytest.approx(want, abs=1e-12), (m, w)


def test_conditional_collision_edge_cases():
    assert cm.first_collision_prob_conditional(0, 8) == 0.0
    assert cm.first_collision_prob_conditional(1, 8) == 0.0
    with pytest.raises(ValueError):
        cm.first_collision_prob_conditional(2, 1)
    with pytest.raises(ValueError):
        cm.first_collision_prob_conditional(-1, 8)


def test_conditional_collision_monotone():
    probs_w = [cm.first_collision_prob_conditional(3, w) for w in (2, 4, 8, 16, 64)]
    assert all(a > b for a, b in zip(probs_w, probs_w[1:]))
    probs_m = [cm.first_collision_prob_conditional(m, 16) for m in (2, 3, 4, 6)]
    assert all(a < b for a, b in zip(probs_m, probs_m[1:]))


def _always_contending_pair():
    """Two adjacent SUs that share the only channel and never escape it."""
    inst = make_instance(1, [], [[], []], [(0, 1)])
    asg = cm.ChannelAssignment.from_sets([(), ()], [(0,), (0,)])
    return inst, asg


def test_contend_count_distribution_certain_rival():
    inst, asg = _always_contending_pair()
    for su in range(2):
        dist = cm.contend_count_distribution(su, asg, inst)
        assert dist.shape == (2,)
        assert dist[0] == pytest.approx(0.0, abs=1e-15)
        assert dist[1] == pytest.approx(1.0, abs=1e-15)


def test_contend_count_distribution_with_escape():
    # Neighbor escapes to its separate channel with probability 0.8.
    inst = make_instance(2, [0.8], [[], [0]], [(0, 1)])
    asg = cm.ChannelAssignment.from_sets([(), (1,)], [(0,), (0,)])
    dist = cm.contend_count_distribution(0, asg, inst)
    assert dist.sum() == pytest.approx(1.0, abs=1e-15)
    # contends only when its separate channel is busy and the shared one free
    assert dist[1] == pytest.approx(0.2 * 0.8, abs=1e-15)
    assert dist[0] == pytest.approx(1 - 0.16, abs=1e-15)


def test_collision_prob_mixes_distribution():
    inst, asg = _always_contending_pair()
    for w in (2, 4, 33):
        assert cm.collision_prob(0, asg, inst, w) == pytest.approx(
            cm.first_collision_prob_conditional(2, w), abs=1e-15
        )


def test_select_window_pair_target():
    inst, asg = _always_contending_pair()
    result = cm.select_window(inst, asg, 0.03)
    assert result.global_window == 33
    assert result.per_su_window == (33, 33)
    assert all(p <= 0.03 for p in result.per_su_collision_prob)
    # one step tighter would overshoot the target
    assert cm.collision_prob(0, asg, inst, 32) > 0.03


def test_select_window_isolated_su_needs_no_backoff():
    inst = make_instance(1, [], [[]], [])
    asg = cm.ChannelAssignment.from_sets([(0,)], [()])
    result = cm.select_window(inst, asg, 0.03)
    assert result.per_su_window == (2,)
    assert result.per_su_collision_prob == (0.0,)


def test_select_window_validates_epsilon():
    inst, asg = _always_contending_pair()
    for eps in (0.0, 1.0, -0.5):
        with pytest.raises(ValueError):
            cm.select_window(inst, asg, eps)


def test_select_window_exhausts_search():
    inst, asg = _always_contending_pair()
    with pytest.raises(cm.WindowSearchError):
        cm.select_window(inst, asg, 1e-9, max_window=64)


def test_overhead_reference_points():
    assert cm.overhead(33) == 0.164
    assert cm.overhead(4) == pytest.approx(202 / 3000, abs=1e-12)
    # window 1 leaves only the fixed handshake: 48 + 40 + 3*28 microseconds
    assert cm.overhead(1) == pytest.approx(172 / 3000, abs=1e-15)


def test_overhead_custom_timing():
    timing = cm.MacTiming(
        slot_time=10e-6, t_rts=50e-6, t_cts=50e-6, t_sifs=10e-6,
        t_sen=5e-6, t_syn=5e-6, t_cycle=2e-3,
    )
    want = (3 * 10e-6 / 2 + 50e-6 + 50e-6 + 3 * 10e-6 + 5e-6 + 5e-6) / 2e-3
    assert cm.overhead(4, timing) == pytest.approx(want, abs=1e-15)


def test_overhead_guards():
    with pytest.raises(ValueError):
        cm.overhead(0)
    with pytest.raises(cm.OverheadError):
        cm.overhead(300)  # expected backoff alone exceeds the cycle
    with pytest.raises(ValueError):
        cm.MacTiming(slot_time=-1e-6)
    with pytest.raises(ValueError):
        cm.MacTiming(t_cycle=0.0)
