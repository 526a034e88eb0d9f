"""Rate regions and half-bit gap certificates for the two-pair two-way relay channel."""

from .bounds import downlink_polytope, outer_bound, uplink_polytope
from .certifier import (
    BruteForceReport,
    MonteCarloConfig,
    MonteCarloReport,
    Theorem1Report,
    brute_force_gap,
    monte_carlo,
    random_channel,
    targeted_channels,
    verify_theorem1,
)
from .downlink import (
    CaseLabel,
    DownlinkPowerAlloc,
    MessagePlan,
    alloc_for_vertex,
    classify_case,
    downlink_certificate,
    downlink_vertices,
    message_plan,
    pr4_interval,
    scheme_rates,
)
from .effective import EffectiveSystem, canonicalize
from .model import (
    CapacityTerms,
    GapCertificate,
    InternalConsistencyError,
    RateTuple,
    SystemParams,
    ValidationError,
    capacity_terms,
)
from .polytope import (
    HalfspaceSystem,
    VertexSet,
    contains,
    enumerate_vertices,
    in_downward_hull,
    maximal_vertices,
)
from .uplink import (
    UplinkPowerAlloc,
    decoding_order,
    gaussian_rate,
    lattice_rate,
    uplink_achievable,
    uplink_certificate,
    uplink_power_alloc,
    uplink_vertices,
)

__all__ = [
    "BruteForceReport",
    "CapacityTerms",
    "CaseLabel",
    "DownlinkPowerAlloc",
    "EffectiveSystem",
    "GapCertificate",
    "HalfspaceSystem",
    "InternalConsistencyError",
    "MessagePlan",
    "MonteCarloConfig",
    "MonteCarloReport",
    "RateTuple",
    "SystemParams",
    "Theorem1Report",
    "UplinkPowerAlloc",
    "ValidationError",
    "VertexSet",
    "alloc_for_vertex",
    "brute_force_gap",
    "canonicalize",
    "capacity_terms",
    "classify_case",
    "contains",
    "decoding_order",
    "downlink_certificate",
    "downlink_polytope",
    "downlink_vertices",
    "enumerate_vertices",
    "gaussian_rate",
    "in_downward_hull",
    "lattice_rate",
    "maximal_vertices",
    "message_plan",
    "monte_carlo",
    "outer_bound",
    "pr4_interval",
    "random_channel",
    "scheme_rates",
    "targeted_channels",
    "uplink_achievable",
    "uplink_certificate",
    "uplink_polytope",
    "uplink_power_alloc",
    "uplink_vertices",
    "verify_theorem1",
]

__version__ = "0.1.0"
