"""Network model for opportunistic spectrum sharing.

An instance couples three ingredients: licensed (primary) transmitters with
per-channel idle probabilities, secondary user flows tagged with the primary
transmitters whose activity blocks them, and a contention graph whose edges
mark secondary pairs that interfere when transmitting on the same channel.
Instances are immutable; everything else in the package is a pure function
of an instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from .errors import InstanceFormatError, InstanceValidationError

if TYPE_CHECKING:
    from .assignment import ChannelAssignment

__all__ = [
    "PuProfile",
    "SuProfile",
    "NetworkInstance",
    "AvailabilityMatrix",
    "parse_instance",
    "serialize_instance",
    "load_instance",
    "validate_instance",
    "availability",
    "su_neighbors",
    "adjacency",
    "pu_neighbors_of_channel_sharers",
    "with_num_channels",
    "with_homogeneous_idle",
]


@dataclass(frozen=True)
class PuProfile:
    """A licensed transmitter and its per-channel idle probabilities."""

    id: int
    idle_prob: tuple[float, ...]


@dataclass(frozen=True)
class SuProfile:
    """A secondary flow and the primary transmitters that block it."""

    id: int
    pu_neighbors: tuple[int, ...]


@dataclass(frozen=True)
class NetworkInstance:
    """Immutable network description: channels, PUs, SUs, contention edges.

    ``su_edges`` holds normalized ``(low, high)`` index pairs; an edge means
    the two secondary users cannot reuse the same channel simultaneously.
    """

    num_channels: int
    pus: tuple[PuProfile, ...]
    sus: tuple[SuProfile, ...]
    su_edges: frozenset[tuple[int, int]]

    @property
    def num_pus(self) -> int:
        return len(self.pus)

    @property
    def num_sus(self) -> int:
        return len(self.sus)


@dataclass(frozen=True, eq=False)
class AvailabilityMatrix:
    """Per-(SU, channel) probability that no blocking PU occupies the channel."""

    p: np.ndarray

    def __post_init__(self):
        self.p.setflags(write=False)


def validate_instance(instance: NetworkInstance) -> None:
    """Raise InstanceValidationError if the instance breaks an invariant."""
    n = instance.num_channels
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceValidationError("num_channels must be a positive integer")
    for pos, pu in enumerate(instance.pus):
        if pu.id != pos:
            raise InstanceValidationError(f"pus[{pos}].id must equal its position, got {pu.id}")
        if len(pu.idle_prob) != n:
            raise InstanceValidationError(
                f"pus[{pos}].idle_prob must list {n} channel probabilities, got {len(pu.idle_prob)}"
            )
        for j, q in enumerate(pu.idle_prob):
            if not (isinstance(q, (int, float)) and not isinstance(q, bool)) or not 0.0 <= q <= 1.0:
                raise InstanceValidationError(f"pus[{pos}].idle_prob[{j}] must lie in [0, 1], got {q!r}")
    if not instance.sus:
        raise InstanceValidationError("sus must contain at least one secondary user")
    num_pus = instance.num_pus
    for pos, su in enumerate(instance.sus):
        if su.id != pos:
            raise InstanceValidationError(f"sus[{pos}].id must equal its position, got {su.id}")
        if len(set(su.pu_neighbors)) != len(su.pu_neighbors):
            raise InstanceValidationError(f"sus[{pos}].pu_neighbors contains duplicates")
        for p in su.pu_neighbors:
            if not isinstance(p, int) or isinstance(p, bool) or not 0 <= p < num_pus:
                raise InstanceValidationError(
                    f"sus[{pos}].pu_neighbors references unknown PU {p!r} (have {num_pus})"
                )
    num_sus = instance.num_sus
    for edge in instance.su_edges:
        if len(edge) != 2:
            raise InstanceValidationError(f"su_edges entry {edge!r} must pair exactly two SUs")
        a, b = edge
        if a == b:
            raise InstanceValidationError(f"su_edges entry {edge!r} is a self-loop")
        if not (0 <= a < num_sus and 0 <= b < num_sus):
            raise InstanceValidationError(f"su_edges entry {edge!r} references an unknown SU")
        if a > b:
            raise InstanceValidationError(f"su_edges entry {edge!r} is not normalized (low, high)")


_TOP_KEYS = ("num_channels", "pus", "sus", "su_edges")


def _require_keys(obj: dict, keys: tuple[str, ...], where: str) -> None:
    for key in obj:
        if key not in keys:
            raise InstanceValidationError(f"{where}: unknown key {key!r}")
    for key in keys:
        if key not in obj:
            raise InstanceValidationError(f"{where}: missing required key {key!r}")


def parse_instance(text: str) -> NetworkInstance:
    """Parse and validate instance JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"instance is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("instance top level must be a JSON object")
    _require_keys(data, _TOP_KEYS, "instance")
    if not isinstance(data["pus"], list):
        raise InstanceValidationError("pus must be a list")
    if not isinstance(data["sus"], list):
        raise InstanceValidationError("sus must be a list")
    if not isinstance(data["su_edges"], list):
        raise InstanceValidationError("su_edges must be a list")

    pus = []
    for pos, entry in enumerate(data["pus"]):
        if not isinstance(entry, dict):
            raise InstanceValidationError(f"pus[{pos}] must be an object")
        _require_keys(entry, ("id", "idle_prob"), f"pus[{pos}]")
        if not isinstance(entry["idle_prob"], list):
            raise InstanceValidationError(f"pus[{pos}].idle_prob must be a list")
        pus.append(PuProfile(id=entry["id"], idle_prob=tuple(float(q) if isinstance(q, int) and not isinstance(q, bool) else q for q in entry["idle_prob"])))

    sus = []
    for pos, entry in enumerate(data["sus"]):
        if not isinstance(entry, dict):
            raise InstanceValidationError(f"sus[{pos}] must be an object")
        _require_keys(entry, ("id", "pu_neighbors"), f"sus[{pos}]")
        if not isinstance(entry["pu_neighbors"], list):
            raise InstanceValidationError(f"sus[{pos}].pu_neighbors must be a list")
        sus.append(SuProfile(id=entry["id"], pu_neighbors=tuple(sorted(entry["pu_neighbors"]))))

    edges = set()
    for pos, pair in enumerate(data["su_edges"]):
        if not isinstance(pair, list) or len(pair) != 2:
            raise InstanceValidationError(f"su_edges[{pos}] must be a pair [a, b]")
        a, b = pair
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (a, b)):
            raise InstanceValidationError(f"su_edges[{pos}] must contain integer SU indices")
        if a == b:
            raise InstanceValidationError(f"su_edges[{pos}] = {pair!r} is a self-loop")
        edge = (min(a, b), max(a, b))
        if edge in edges:
            raise InstanceValidationError(f"su_edges[{pos}] duplicates edge {edge!r}")
        edges.add(edge)

    instance = NetworkInstance(
        num_channels=data["num_channels"],
        pus=tuple(pus),
        sus=tuple(sus),
        su_edges=frozenset(edges),
    )
    validate_instance(instance)
    return instance


def serialize_instance(instance: NetworkInstance) -> str:
    """Render an instance back to its JSON file form."""
    data = {
        "num_channels": instance.num_channels,
        "pus": [{"id": pu.id, "idle_prob": list(pu.idle_prob)} for pu in instance.pus],
        "sus": [{"id": su.id, "pu_neighbors": list(su.pu_neighbors)} for su in instance.sus],
        "su_edges": [list(edge) for edge in sorted(instance.su_edges)],
    }
    return json.dumps(data, indent=2) + "\n"


def load_instance(path) -> NetworkInstance:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_instance(handle.read())


def availability(instance: NetworkInstance) -> AvailabilityMatrix:
    """Availability p[k, j]: probability channel j is free of all PUs blocking SU k.

    Blocking PUs act independently, so the entry is the product of their
    per-channel idle probabilities.
    """
    p = np.ones((instance.num_sus, instance.num_channels), dtype=np.float64)
    for k, su in enumerate(instance.sus):
        for pu_id in su.pu_neighbors:
            p[k] *= np.asarray(instance.pus[pu_id].idle_prob, dtype=np.float64)
    return AvailabilityMatrix(p=p)


def su_neighbors(instance: NetworkInstance, su: int) -> frozenset[int]:
    """Contention-graph neighbors of one SU."""
    if not 0 <= su < instance.num_sus:
        raise IndexError(f"SU index {su} out of range (have {instance.num_sus})")
    return adjacency(instance)[su]


@lru_cache(maxsize=128)
def adjacency(instance: NetworkInstance) -> tuple[frozenset[int], ...]:
    """Neighbor sets for every SU, indexable by SU id."""
    out: list[set[int]] = [set() for _ in range(instance.num_sus)]
    for a, b in instance.su_edges:
        out[a].add(b)
        out[b].add(a)
    return tuple(frozenset(s) for s in out)


def pu_neighbors_of_channel_sharers(
    instance: NetworkInstance, assignment: "ChannelAssignment", su: int, channel: int
) -> frozenset[int]:
    """PUs that influence contention on one of an SU's shared channels.

    Collects the PU neighbors of the SU itself plus every contention
    neighbor whose assignment also carries the channel.
    """
    if channel not in assignment.common[su]:
        raise ValueError(f"channel {channel} is not in the shared set of SU {su}")
    pus = set(instance.sus[su].pu_neighbors)
    for k in adjacency(instance)[su]:
        if channel in assignment.total(k):
            pus.update(instance.sus[k].pu_neighbors)
    return frozenset(pus)


def with_num_channels(instance: NetworkInstance, num_channels: int) -> NetworkInstance:
    """Copy of the instance resized to a new channel count.

    Idle-probability vectors are truncated, or padded by repeating their
    last entry, so sweeps over the channel count keep per-channel statistics
    comparable.
    """
    if num_channels < 1:
        raise InstanceValidationError("num_channels must be a positive integer")
    pus = []
    for pu in instance.pus:
        idle = pu.idle_prob[:num_channels]
        if len(idle) < num_channels:
            idle = idle + (pu.idle_prob[-1],) * (num_channels - len(idle))
        pus.append(PuProfile(id=pu.id, idle_prob=idle))
    return NetworkInstance(
        num_channels=num_channels, pus=tuple(pus), sus=instance.sus, su_edges=instance.su_edges
    )


def with_homogeneous_idle(instance: NetworkInstance, idle_prob: float) -> NetworkInstance:
    """Copy of the instance with every PU idle probability set to one value."""
    if not 0.0 <= idle_prob <= 1.0:
        raise InstanceValidationError(f"idle probability must lie in [0, 1], got {idle_prob!r}")
    n = instance.num_channels
    pus = tuple(PuProfile(id=pu.id, idle_prob=(idle_prob,) * n) for pu in instance.pus)
    return NetworkInstance(num_channels=n, pus=pus, sus=instance.sus, su_edges=instance.su_edges)
