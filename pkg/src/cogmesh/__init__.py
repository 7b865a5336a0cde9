"""Max-min fair channel assignment and MAC analysis for cognitive mesh networks."""

from .analytics import (
    GroupCensus,
    PuStateOutcome,
    contention_throughput_exact,
    enumerate_pu_states,
    exclusive_throughput,
    group_census,
    total_throughput,
)
from .assignment import (
    AssignmentOutcome,
    ChannelAssignment,
    assign_nonoverlapping,
    assign_overlapping,
    brute_force,
    nonoverlap_throughput,
    throughput_delta,
    validate_assignment,
)
from .errors import (
    AssignmentInvariantError,
    CogmeshError,
    EnumerationCapError,
    InstanceFormatError,
    InstanceValidationError,
    OverheadError,
    SearchSpaceError,
    WindowSearchError,
)
from .kernels import backend_name
from .mac import (
    DEFAULT_TIMING,
    MacTiming,
    WindowResult,
    collision_prob,
    contend_count_distribution,
    first_collision_prob_conditional,
    overhead,
    select_window,
)
from .model import (
    AvailabilityMatrix,
    NetworkInstance,
    PuProfile,
    SuProfile,
    adjacency,
    availability,
    load_instance,
    parse_instance,
    pu_neighbors_of_channel_sharers,
    serialize_instance,
    su_neighbors,
    validate_instance,
    with_homogeneous_idle,
    with_num_channels,
)
from .simulator import (
    CycleOutcome,
    SimConfig,
    SimReport,
    resolve_contention,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentInvariantError",
    "AssignmentOutcome",
    "AvailabilityMatrix",
    "ChannelAssignment",
    "CogmeshError",
    "CycleOutcome",
    "DEFAULT_TIMING",
    "EnumerationCapError",
    "GroupCensus",
    "InstanceFormatError",
    "InstanceValidationError",
    "MacTiming",
    "NetworkInstance",
    "OverheadError",
    "PuProfile",
    "PuStateOutcome",
    "SearchSpaceError",
    "SimConfig",
    "SimReport",
    "SuProfile",
    "WindowResult",
    "WindowSearchError",
    "adjacency",
    "assign_nonoverlapping",
    "assign_overlapping",
    "availability",
    "backend_name",
    "brute_force",
    "collision_prob",
    "contend_count_distribution",
    "contention_throughput_exact",
    "enumerate_pu_states",
    "exclusive_throughput",
    "first_collision_prob_conditional",
    "group_census",
    "load_instance",
    "nonoverlap_throughput",
    "overhead",
    "parse_instance",
    "pu_neighbors_of_channel_sharers",
    "resolve_contention",
    "run_simulation",
    "select_window",
    "serialize_instance",
    "su_neighbors",
    "throughput_delta",
    "total_throughput",
    "validate_assignment",
    "validate_instance",
    "with_homogeneous_idle",
    "with_num_channels",
]
