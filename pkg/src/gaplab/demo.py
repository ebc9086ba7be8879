"""A constructed scalar network where Bonacich centrality misranks gap impact.

Observer 0 mis-forecasts the shock at one node (+1) while everyone else shares
the all-ones forecast. Node 1 is the most Bonacich-central node other than the
observer, yet a wrong forecast at node 2 costs the observer about four times as
much. The topology was found by a seeded random search and frozen here.
"""

from __future__ import annotations

import numpy as np

from .centrality import bonacich
from .game import BlockStructure, ConjectureProfile, InteractionMatrix
from .gap import gap_shock_closed_form

W = 0.3
EDGES = [(0, 2), (0, 4), (0, 5), (1, 0), (1, 2), (1, 3), (2, 5), (4, 1), (4, 3), (5, 2), (5, 4)]
OBSERVER = 0


def demo_network() -> InteractionMatrix:
    A = np.zeros((6, 6))
    for i, j in EDGES:
        A[i, j] = W
    return InteractionMatrix(BlockStructure.scalar(6), A)


def misforecast_profile(node: int, observer: int = OBSERVER) -> ConjectureProfile:
    P = demo_network()
    shocks = [np.ones(6) for _ in range(6)]
    shocks[observer][node] += 1.0
    return ConjectureProfile.shared(P, shocks)


def bonacich_counterexample(observer: int = OBSERVER) -> dict:
    P = demo_network()
    b = [float(c.bonacich[0]) for c in bonacich(P)]
    gaps = {}
    for node in range(6):
        if node == observer:
            continue
        prof = misforecast_profile(node, observer)
        gaps[node] = gap_shock_closed_form(P, prof.shocks, observer).gap_closed_form
    others = [k for k in range(6) if k != observer]
    return {
        "label": "constructed example (not the published figure)",
        "observer": observer,
        "bonacich": b,
        "gap_by_misforecast_node": gaps,
        "most_central_node": max(others, key=lambda k: b[k]),
        "worst_node": max(gaps, key=gaps.get),
    }
