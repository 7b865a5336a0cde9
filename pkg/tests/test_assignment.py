"""Assignment invariants, greedy solvers, and the exhaustive baseline."""

import itertools
import json
import random

import pytest
from hypothesis import given, strategies as st

import cogmesh as cm
from conftest import desk_instance, make_instance
from oracles import naive_total_throughput, random_network


def test_validate_assignment_accepts_valid(desk3):
    asg = cm.ChannelAssignment.from_sets([(1,), (2,), (3,)], [(0,), (0,), (0,)])
    cm.validate_assignment(desk3, asg)  # does not raise


@pytest.mark.parametrize(
    "separate,common,fragment",
    [
        ([(0,)], [()], "size does not match"),
        ([(9,), (), ()], [(), (), ()], "unknown channel"),
        ([(0,), (), ()], [(0,), (0,), ()], "both separate and shared"),
        ([(0,), (0,), ()], [(), (), ()], "also appear at neighbor"),
        ([(), (3,), (3,)], [(), (), ()], "also appear at neighbor"),
        ([(), (), ()], [(0,), (), ()], "belongs in separate"),
    ],
)
def test_validate_assignment_rejects(desk3, separate, common, fragment):
    asg = cm.ChannelAssignment.from_sets(separate, common)
    with pytest.raises(cm.AssignmentInvariantError) as err:
        cm.validate_assignment(desk3, asg)
    assert fragment in str(err.value)


@given(
    st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=6),
    st.data(),
)
def test_throughput_delta_is_exact_difference(row, data):
    candidate = data.draw(st.integers(0, len(row) - 1))
    channels = data.draw(
        st.sets(st.integers(0, len(row) - 1).filter(lambda c: c != candidate))
    )
    before = cm.nonoverlap_throughput(channels, row)
    after = cm.nonoverlap_throughput(channels | {candidate}, row)
    gain = cm.throughput_delta(channels, candidate, row)
    assert before + gain == pytest.approx(after, abs=1e-12)


def test_throughput_delta_rejects_assigned_channel():
    with pytest.raises(ValueError):
        cm.throughput_delta({0, 1}, 1, [0.5, 0.5])


def test_greedy_single_su_takes_everything():
    inst = make_instance(2, [[0.4, 0.2]], [[0]], [])
    out = cm.assign_nonoverlapping(inst)
    assert out.assignment.separate == (frozenset({0, 1}),)
    assert out.min_throughput == pytest.approx(1 - 0.6 * 0.8, abs=1e-15)
    assert out.per_su_throughput == (out.min_throughput,)


def test_greedy_matches_brute_force_on_desk(desk3):
    greedy = cm.assign_nonoverlapping(desk3)
    brute = cm.brute_force(desk3)
    assert greedy.min_throughput == brute.min_throughput
    assert greedy.min_throughput == pytest.approx(0.8704, abs=1e-12)


def test_greedy_effort_counters(desk3, mesh8):
    for inst in (desk3, mesh8):
        out = cm.assign_nonoverlapping(inst)
        ms, n = inst.num_sus, inst.num_channels
        assert out.iterations <= ms * n
        assert out.evaluations <= ms * ms * n * n


def test_greedy_is_deterministic(mesh8):
    first = cm.assign_nonoverlapping(mesh8)
    second = cm.assign_nonoverlapping(mesh8)
    assert first == second


def test_overlap_search_matches_brute_on_desk(desk3):
    alg2 = cm.assign_overlapping(desk3, delta=0.0)
    brute = cm.brute_force(desk3, overlap_allowed=True)
    assert alg2.min_throughput == brute.min_throughput
    assert alg2.min_throughput == pytest.approx(0.93786112, abs=1e-12)


def test_overlap_never_below_greedy():
    rng = random.Random(8142026)
    cases = [desk_instance(), desk_instance(3, 0.6)]
    while len(cases) < 8:
        inst = cm.parse_instance(json.dumps(random_network(rng, max_sus=5)))
        cases.append(inst)
    for inst in cases:
        alg1 = cm.assign_nonoverlapping(inst)
        alg2 = cm.assign_overlapping(inst, delta=0.0)
        assert alg2.min_throughput >= alg1.min_throughput
        ms, n = inst.num_sus, inst.num_channels
        assert alg2.iterations <= ms * n
        assert alg2.evaluations <= ms * ms * n * n


def test_overlap_reports_consistent_throughput(desk3):
    out = cm.assign_overlapping(desk3, delta=0.0)
    for su in range(desk3.num_sus):
        want = cm.total_throughput(su, out.assignment, desk3, 0.0)
        assert out.per_su_throughput[su] == pytest.approx(want, abs=1e-12)


def test_overlap_default_delta_uses_phase_one_window(desk3):
    phase1 = cm.assign_nonoverlapping(desk3)
    sized = cm.select_window(desk3, phase1.assignment, 0.03)
    delta = cm.overhead(sized.global_window)
    explicit = cm.assign_overlapping(desk3, delta=delta)
    implicit = cm.assign_overlapping(desk3)
    assert implicit == explicit


def _exhaustive_best_min(inst, overlap, delta):
    """Independent max-min search scoring with the naive enumerator."""
    n, ms = inst.num_channels, inst.num_sus
    adj = cm.adjacency(inst)
    best = -1.0
    for masks in itertools.product(range(1 << n), repeat=ms):
        if not overlap and any(masks[a] & masks[b] for a, b in inst.su_edges):
            continue
        sep, com = [], []
        for su in range(ms):
            nearby = 0
            for k in adj[su]:
                nearby |= masks[k]
            shared = masks[su] & nearby if overlap else 0
            com.append({c for c in range(n) if shared >> c & 1})
            sep.append({c for c in range(n) if (masks[su] & ~shared) >> c & 1})
        asg = cm.ChannelAssignment.from_sets(sep, com)
        tmin = min(naive_total_throughput(su, asg, inst, delta) for su in range(ms))
        best = max(best, tmin)
    return best


@pytest.fixture
def lopsided_pair():
    return make_instance(2, [[0.7, 0.5], [0.6, 0.9]], [[0], [0, 1]], [(0, 1)])


def test_brute_force_nonoverlap_is_exhaustive(lopsided_pair):
    out = cm.brute_force(lopsided_pair)
    want = _exhaustive_best_min(lopsided_pair, overlap=False, delta=0.0)
    assert out.min_throughput == pytest.approx(want, abs=1e-12)
    assert all(not c for c in out.assignment.common)


@pytest.mark.parametrize("delta", [0.0, 0.3])
def test_brute_force_overlap_is_exhaustive(lopsided_pair, delta):
    out = cm.brute_force(lopsided_pair, overlap_allowed=True, delta=delta)
    want = _exhaustive_best_min(lopsided_pair, overlap=True, delta=delta)
    assert out.min_throughput == pytest.approx(want, abs=1e-12)


def test_brute_force_overlap_triangle():
    inst = make_instance(
        2, [[0.8, 0.6]], [[0], [0], [0]], [(0, 1), (0, 2), (1, 2)]
    )
    out = cm.brute_force(inst, overlap_allowed=True)
    want = _exhaustive_best_min(inst, overlap=True, delta=0.0)
    assert out.min_throughput == pytest.approx(want, abs=1e-12)


def test_brute_force_custom_evaluator(lopsided_pair):
    def count_channels(instance, assignment):
        return [len(assignment.total(su)) for su in range(instance.num_sus)]

    out = cm.brute_force(lopsided_pair, evaluator=count_channels, overlap_allowed=True)
    assert out.min_throughput == 2
    assert all(asg == frozenset({0, 1}) for asg in (out.assignment.total(0), out.assignment.total(1)))


def test_brute_force_guards_search_space(desk3):
    with pytest.raises(cm.SearchSpaceError):
        cm.brute_force(desk3, max_bits=4)


def test_brute_force_is_deterministic(lopsided_pair):
    runs = [cm.brute_force(lopsided_pair, overlap_allowed=True) for _ in range(2)]
    assert runs[0] == runs[1]
