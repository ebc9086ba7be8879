"""Bonacich centrality and pairwise misspecification centralities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import InteractionMatrix, leontief_rows


@dataclass(frozen=True, eq=False)
class CentralityProfile:
    player: int
    rows: np.ndarray
    bonacich: np.ndarray

    def to_dict(self) -> dict:
        return {"player": self.player, "bonacich": [float(b) for b in self.bonacich]}


@dataclass(frozen=True, eq=False)
class PairCentrality:
    i: int
    j: int
    matrix: np.ndarray
    kind: str  # "shock" | "graph"


def _check_pair(P: InteractionMatrix, i: int, j: int):
    n = P.structure.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair ({i}, {j}) out of range for n={n}")
    if i == j:
        raise ValueError("misspecification centrality needs two distinct players")


def bonacich(P: InteractionMatrix) -> list[CentralityProfile]:
    """Per-player Leontief block rows and their row sums."""
    L = P.leontief
    out = []
    for i in range(P.structure.n):
        rows = L[P.structure.slice(i), :]
        out.append(CentralityProfile(i, rows, rows.sum(axis=1)))
    return out


def _rows(P: InteractionMatrix, i: int, use_cache: bool) -> np.ndarray:
    if use_cache or "leontief" in P.__dict__:
        return P.leontief[P.structure.slice(i), :]
    return leontief_rows(P, i)


def shock_misspec_centrality(P: InteractionMatrix, i: int, j: int, *, use_cache: bool = True) -> PairCentrality:
    """``B_ij = L_{i,-}^T P_{i,j} L_{j,-}``, an ``m x m`` matrix.

    With ``use_cache=False`` and no cached inverse, only the two needed block
    rows of ``L`` are solved for.
    """
    _check_pair(P, i, j)
    Pij = P.block(i, j)
    m = P.structure.m
    if not np.any(Pij):
        return PairCentrality(i, j, np.zeros((m, m)), "shock")
    Li = _rows(P, i, use_cache)
    Lj = _rows(P, j, use_cache)
    return PairCentrality(i, j, Li.T @ Pij @ Lj, "shock")


def graph_misspec_centrality(P_i: InteractionMatrix, P_j: InteractionMatrix, i: int, j: int) -> PairCentrality:
    """Pair operator for misaligned interaction matrices.

    ``C_ij = L^(i)_{i,-}^T (P^(i) - P^(j))_{i,j} (L^(i) P^(i) L^(j))_{j,-}``, so that
    ``sum_{j != i} eps^T C_ij eps`` is player ``i``'s gap when everyone shares
    ``eps`` and conjectures ``P^(k) = alpha_k P``.
    """
    if P_i.structure != P_j.structure:
        raise ValueError("conjectures have different block structures")
    _check_pair(P_i, i, j)
    st = P_i.structure
    m = st.m
    D = P_i.block(i, j) - P_j.block(i, j)
    if not np.any(D):
        return PairCentrality(i, j, np.zeros((m, m)), "graph")
    Li = P_i.leontief
    Lj_rows = P_j.leontief
    # (L^(i) P^(i) L^(j))_{j,-} = L^(i)_{j,-} P^(i) L^(j)
    right = Li[st.slice(j), :] @ P_i.data @ Lj_rows
    return PairCentrality(i, j, Li[st.slice(i), :].T @ D @ right, "graph")


def leontief_direction_derivative(P: InteractionMatrix, E: np.ndarray) -> np.ndarray:
    """``L E L``, the derivative of ``(I - P - tE)^{-1}`` at ``t = 0``."""
    L = P.leontief
    return L @ E @ L


def pair_direction(P: InteractionMatrix, i: int, j: int) -> np.ndarray:
    """The ``m x m`` matrix holding ``P_{i,j}`` in block ``(i, j)`` and zeros elsewhere."""
    E = np.zeros_like(P.data)
    st = P.structure
    E[st.slice(i), st.slice(j)] = P.block(i, j)
    return E
