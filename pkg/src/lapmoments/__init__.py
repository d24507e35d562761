"""Distributed control of the Laplacian spectral moments of a network.

Node agents that see only their 2-hop neighbourhood compute the first four
spectral moments exactly, certify which of their links can be removed
without disconnecting the network, and jointly pick one link to add or
delete per epoch so that the moments approach a target.
"""
from .consensus import (
    NO_BENEFIT,
    BestActionRecord,
    TokenVector,
    aggregate_moments,
    elect_global_action,
    verify_deletions,
)
from .engine import Message, RunResult, Schedule, World, run_to_convergence
from .generators import generate
from .graph import (
    Graph,
    GraphError,
    LocalView,
    common_neighbors,
    load_graph,
    quadrangles_at,
    save_graph,
    triangles_at,
)
from .moments import (
    CentralMoments,
    MomentDelta,
    MomentVector,
    centralize,
    cme,
    delta_m123,
    delta_m4,
    local_contribution,
    moments_of,
    predicted_cme,
)
from .topology import ActionSets, ControllerState, apply_action, enumerate_actions, local_best

__version__ = "0.1.0"
