"""Game-to-real gap analysis for quadratic network games."""

from .centrality import bonacich, graph_misspec_centrality, shock_misspec_centrality
from .game import (
    AssumptionError,
    BlockStructure,
    ConjectureProfile,
    InteractionMatrix,
    JointAction,
    NetworkGame,
    SingularSystemError,
    cost,
    leontief,
    nash_equilibrium,
    realized_action,
    validate_game,
)
from .gap import (
    GapReport,
    gap_combined_closed_form,
    gap_direct,
    gap_graph_bound,
    gap_graph_closed_form,
    gap_shock_bound,
    gap_shock_closed_form,
    gaps_direct,
    relative_gap,
)

__all__ = [
    "AssumptionError",
    "BlockStructure",
    "ConjectureProfile",
    "GapReport",
    "InteractionMatrix",
    "JointAction",
    "NetworkGame",
    "SingularSystemError",
    "bonacich",
    "cost",
    "gap_combined_closed_form",
    "gap_direct",
    "gap_graph_bound",
    "gap_graph_closed_form",
    "gap_shock_bound",
    "gap_shock_closed_form",
    "gaps_direct",
    "graph_misspec_centrality",
    "leontief",
    "nash_equilibrium",
    "realized_action",
    "relative_gap",
    "shock_misspec_centrality",
    "validate_game",
]
