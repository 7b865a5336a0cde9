"""Shared test helpers and fixtures."""

import json
from pathlib import Path

import pytest

import cogmesh as cm

REPO_ROOT = Path(__file__).resolve().parent.parent
INSTANCE_DIR = REPO_ROOT / "instances"


def make_instance(num_channels, idle, su_pus, edges):
    """Build a validated instance from compact arguments.

    ``idle`` lists one entry per PU: a scalar (homogeneous across channels)
    or a per-channel list.  ``su_pus`` lists each SU's PU neighbors.
    """
    pus = []
    for pid, q in enumerate(idle):
        probs = list(q) if isinstance(q, (list, tuple)) else [q] * num_channels
        pus.append({"id": pid, "idle_prob": probs})
    sus = [{"id": s, "pu_neighbors": sorted(p)} for s, p in enumerate(su_pus)]
    payload = {
        "num_channels": num_channels,
        "pus": pus,
        "sus": sus,
        "su_edges": [sorted(e) for e in edges],
    }
    return cm.parse_instance(json.dumps(payload))


def desk_instance(num_channels=4, idle=0.8):
    """Three SUs in a path, two PUs; the middle SU hears both PUs."""
    return make_instance(
        num_channels,
        [idle, idle],
        [[0], [0, 1], [1]],
        [(0, 1), (1, 2)],
    )


@pytest.fixture
def desk3():
    return cm.load_instance(INSTANCE_DIR / "desk3.json")


@pytest.fixture
def mesh8():
    return cm.load_instance(INSTANCE_DIR / "mesh8.json")
