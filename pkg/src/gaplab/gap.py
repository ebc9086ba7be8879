"""Game-to-real gap: direct simulation, closed forms and upper bounds.

The gap of player ``i`` is ``J_i(u°) - J_i(u^(i))`` where ``J_i`` is evaluated in
player ``i``'s own conjectured game (a player knows its own cost).
"""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .centrality import graph_misspec_centrality, shock_misspec_centrality
from .game import (
    ConjectureProfile,
    InteractionMatrix,
    JointAction,
    conjectured_equilibria,
    cost,
    realized_action,
)
from .quadrature import adaptive_simpson

log = logging.getLogger(__name__)

TOL_ALGEBRAIC = 1e-9
TOL_QUADRATURE = 1e-7
DEGENERATE_ALPHA = 1e-8
REL_GAP_FLOOR = 1e-12


class PreconditionError(ValueError):
    pass


class UndefinedRelativeGap(ValueError):
    pass


class DirectOnlyError(ValueError):
    """No closed form exists for this profile shape."""


def tol_equiv(gap: float, quadrature: bool = False) -> float:
    return TOL_QUADRATURE if quadrature else TOL_ALGEBRAIC * (1.0 + abs(gap))


@dataclass(frozen=True)
class GapReport:
    player: int
    predicted_cost: float
    realized_cost: float
    gap_closed_form: float | None = None
    bound: float | None = None
    per_pair_terms: tuple[tuple[int, float], ...] | None = None
    method: str = "direct"
    notes: tuple[str, ...] = field(default=())

    @property
    def gap_direct(self) -> float:
        return self.realized_cost - self.predicted_cost

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "predicted_cost": self.predicted_cost,
            "realized_cost": self.realized_cost,
            "gap_direct": self.gap_direct,
            "gap_closed_form": self.gap_closed_form,
            "bound": self.bound,
            "per_pair_terms": None
            if self.per_pair_terms is None
            else [{"j": j, "term": t} for j, t in self.per_pair_terms],
            "method": self.method,
            "notes": list(self.notes),
        }


# --------------------------------------------------------------------- direct


def gap_direct(
    profile: ConjectureProfile,
    i: int,
    equilibria: Sequence[JointAction] | None = None,
    realized: JointAction | None = None,
) -> GapReport:
    """Simulate: solve every conjecture, assemble ``u°`` and evaluate ``J_i`` twice."""
    if equilibria is None:
        equilibria = conjectured_equilibria(profile)
    if realized is None:
        realized = realized_action(profile, equilibria)
    game_i = profile.game_of(i)
    predicted = cost(game_i, i, equilibria[i])
    actual = cost(game_i, i, realized)
    return GapReport(i, predicted, actual)


def gaps_direct(profile: ConjectureProfile) -> list[GapReport]:
    eqs = conjectured_equilibria(profile)
    uo = realized_action(profile, eqs)
    return [gap_direct(profile, i, eqs, uo) for i in range(profile.n)]


def relative_gap(report: GapReport, floor: float = REL_GAP_FLOOR) -> float:
    """``(realized - predicted) / |predicted|``."""
    if abs(report.predicted_cost) < floor:
        raise UndefinedRelativeGap(
            f"predicted cost of player {report.player} is {report.predicted_cost:.3g}; relative gap undefined"
        )
    return report.gap_direct / abs(report.predicted_cost)


# ------------------------------------------------------------- shock-only case


def _as_shocks(P: InteractionMatrix, shocks) -> list[np.ndarray]:
    shocks = [np.asarray(e, dtype=float) for e in shocks]
    if len(shocks) != P.structure.n:
        raise ValueError(f"need {P.structure.n} shocks, got {len(shocks)}")
    for j, e in enumerate(shocks):
        if e.shape != (P.structure.m,):
            raise ValueError(f"shock of player {j} has shape {e.shape}, expected ({P.structure.m},)")
    return shocks


def _shock_terms(P: InteractionMatrix, shocks: list[np.ndarray], i: int) -> list[tuple[int, float]]:
    ei = shocks[i]
    terms = []
    for j in range(P.structure.n):
        if j == i:
            continue
        B = shock_misspec_centrality(P, i, j).matrix
        terms.append((j, float(ei @ B @ (ei - shocks[j]))))
    return terms


def gap_shock_closed_form(P: InteractionMatrix, shocks, i: int, *, with_direct: bool = True) -> GapReport:
    """Gap from heterogeneous shock forecasts over a shared network.

    ``sum_{j != i} eps_i^T B_ij (eps_i - eps_j)``, one term per ``j`` (zeros kept).
    """
    shocks = _as_shocks(P, shocks)
    terms = _shock_terms(P, shocks, i)
    closed = float(sum(t for _, t in terms))
    if with_direct:
        d = gap_direct(ConjectureProfile.shared(P, shocks), i)
        pred, real = d.predicted_cost, d.realized_cost
    else:
        pred = real = float("nan")
    return GapReport(i, pred, real, gap_closed_form=closed, per_pair_terms=tuple(terms), method="shock")


def max_pairwise_distance(vectors) -> tuple[float, tuple[int, int]]:
    best, pair = 0.0, (0, 0)
    for a, b in itertools.combinations(range(len(vectors)), 2):
        d = float(np.linalg.norm(np.asarray(vectors[a]) - np.asarray(vectors[b])))
        if d > best:
            best, pair = d, (a, b)
    return best, pair


def _sigma_min(A: np.ndarray) -> float:
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def _within(value: float, delta: float) -> bool:
    return value <= delta * (1.0 + 1e-12) + 1e-15


def gap_shock_bound(P: InteractionMatrix, shocks, i: int, delta: float) -> float:
    """``delta ||eps_i|| sum_{j != i} ||P_ij||_2 / sigma_min(I - P)^2``."""
    shocks = _as_shocks(P, shocks)
    for a, b in itertools.combinations(range(len(shocks)), 2):
        d = float(np.linalg.norm(shocks[a] - shocks[b]))
        if not _within(d, delta):
            raise PreconditionError(
                f"shock forecasts of players {a} and {b} are {d:.6g} apart, exceeding delta={delta:.6g}"
            )
    m = P.structure.m
    smin = _sigma_min(np.eye(m) - P.data)
    block_norms = sum(
        np.linalg.norm(P.block(i, j), 2) for j in range(P.structure.n) if j != i
    )
    return float(delta * np.linalg.norm(shocks[i]) * block_norms / smin**2)


# ------------------------------------------------------------ network scaling


def _check_alphas(base_P: InteractionMatrix, alphas) -> list[float]:
    alphas = [float(a) for a in alphas]
    if len(alphas) != base_P.structure.n:
        raise ValueError(f"need {base_P.structure.n} scaling factors, got {len(alphas)}")
    for j, a in enumerate(alphas):
        if a <= 0:
            raise PreconditionError(f"alpha of player {j} must be positive, got {a}")
        if not base_P.scaled(a).is_monotone:
            raise PreconditionError(f"alpha of player {j} ({a}) makes the conjecture non-monotone")
    return alphas


def gap_graph_closed_form(base_P: InteractionMatrix, alphas, epsilon, i: int, *, with_direct: bool = True) -> GapReport:
    """Gap when player ``k`` conjectures ``alpha_k * P`` and all share ``epsilon``.

    ``sum_{j != i} eps^T C_ij eps`` with ``C`` from
    :func:`~gaplab.centrality.graph_misspec_centrality`.
    """
    alphas = _check_alphas(base_P, alphas)
    eps = np.asarray(epsilon, dtype=float)
    if eps.shape != (base_P.structure.m,):
        raise ValueError(f"epsilon has shape {eps.shape}, expected ({base_P.structure.m},)")
    mats = [base_P.scaled(a) for a in alphas]
    terms = []
    for j in range(base_P.structure.n):
        if j == i:
            continue
        C = graph_misspec_centrality(mats[i], mats[j], i, j).matrix
        terms.append((j, float(eps @ C @ eps)))
    closed = float(sum(t for _, t in terms))
    if with_direct:
        d = gap_direct(ConjectureProfile.scaled(base_P, alphas, eps), i)
        pred, real = d.predicted_cost, d.realized_cost
    else:
        pred = real = float("nan")
    return GapReport(i, pred, real, gap_closed_form=closed, per_pair_terms=tuple(terms), method="graph")


def gap_graph_bound(
    base_P: InteractionMatrix,
    alphas,
    epsilon,
    i: int,
    delta: float,
    *,
    omit_shock_norm: bool = False,
) -> float:
    """Upper bound on the scaling-mode gap when all ``|alpha_i - alpha_j| <= delta``.

    ``sum_{j != i} delta |alpha_i| ||P|| ||P_ij|| ||eps||^2 / (smin(I - a_j P) smin(I - a_i P)^2)``.
    ``omit_shock_norm=True`` drops the ``||eps||^2`` factor, which is not a valid
    bound in general.
    """
    alphas = _check_alphas(base_P, alphas)
    for a, b in itertools.combinations(range(len(alphas)), 2):
        d = abs(alphas[a] - alphas[b])
        if not _within(d, delta):
            raise PreconditionError(
                f"scaling factors of players {a} and {b} differ by {d:.6g}, exceeding delta={delta:.6g}"
            )
    eps = np.asarray(epsilon, dtype=float)
    m = base_P.structure.m
    eye = np.eye(m)
    normP = np.linalg.norm(base_P.data, 2)
    s_i = _sigma_min(eye - alphas[i] * base_P.data)
    total = 0.0
    for j in range(base_P.structure.n):
        if j == i:
            continue
        s_j = _sigma_min(eye - alphas[j] * base_P.data)
        total += delta * abs(alphas[i]) * normP * np.linalg.norm(base_P.block(i, j), 2) / (s_j * s_i**2)
    if not omit_shock_norm:
        total *= float(eps @ eps)
    return float(total)


# ------------------------------------------------------- combined misalignment


def leontief_integral(base_P: InteractionMatrix, a: float, b: float, tol: float = 1e-10, max_depth: int = 40) -> np.ndarray:
    """``int_a^b (I - xP)^{-1} dx`` by adaptive Simpson."""
    eye = np.eye(base_P.structure.m)
    return adaptive_simpson(lambda x: np.linalg.inv(eye - x * base_P.data), a, b, tol=tol, max_depth=max_depth)


def leontief_integral_naive_form(base_P: InteractionMatrix, a: float, b: float) -> np.ndarray:
    """``P^{-1} (L(a) - L(b))``; advisory only, it does not integrate ``L``."""
    eye = np.eye(base_P.structure.m)
    La = np.linalg.inv(eye - a * base_P.data)
    Lb = np.linalg.inv(eye - b * base_P.data)
    return np.linalg.solve(base_P.data, La - Lb)


def gap_combined_closed_form(
    base_P: InteractionMatrix,
    alphas,
    shocks,
    i: int,
    *,
    with_direct: bool = True,
    check_antiderivative: bool = False,
    quad_tol: float = 1e-10,
) -> GapReport:
    """Gap under simultaneous shock and network-scale misalignment.

    Each pair term is ``T1 + T2`` with ``Lbar = (1/da) int L(x) dx`` over
    ``[alpha_i, alpha_j]`` (``da = alpha_j - alpha_i``)::

        T1 = eps_i^T L_i{i,-}^T (alpha_i P_ij) Lbar_{j,-} (eps_i - eps_j)
        T2 = alpha_i (alpha_i - alpha_j) u_i^T P_ij
             [ (L_j eps_j - L_i eps_i)/da - Lbar (eps_j - eps_i)/da ]_j

    For ``|da| < 1e-8`` the divided differences are replaced by their limits
    ``Lbar -> L_i + da/2 K`` and ``[...] -> K (eps_i + eps_j)/2`` with
    ``K = L_i P L_i``; at ``da == 0`` this is exactly the shock-only formula.
    """
    alphas = _check_alphas(base_P, alphas)
    shocks = _as_shocks(base_P, shocks)
    st = base_P.structure
    mats = [base_P.scaled(a) for a in alphas]
    si = st.slice(i)
    ei = shocks[i]
    Li = mats[i].leontief
    ui = (Li @ ei)[si]
    notes: list[str] = []
    integrals: dict[tuple[float, float], np.ndarray] = {}
    terms = []
    for j in range(st.n):
        if j == i:
            continue
        sj = st.slice(j)
        ej = shocks[j]
        Pij = base_P.block(i, j)
        da = alphas[j] - alphas[i]
        if da == 0.0:
            B = shock_misspec_centrality(mats[i], i, j).matrix
            t1 = float(ei @ B @ (ei - ej))
            t2 = 0.0
        elif abs(da) < DEGENERATE_ALPHA:
            K = Li @ base_P.data @ Li
            Lbar = Li + 0.5 * da * K
            t1 = float(ei @ (Li[si, :].T @ (alphas[i] * Pij) @ Lbar[sj, :]) @ (ei - ej))
            bracket = 0.5 * (K @ (ei + ej))
            t2 = float(alphas[i] * (alphas[i] - alphas[j]) * (ui @ Pij @ bracket[sj]))
        else:
            key = (alphas[i], alphas[j])
            if key not in integrals:
                integrals[key] = leontief_integral(base_P, alphas[i], alphas[j], tol=quad_tol)
            integral = integrals[key]
            if check_antiderivative:
                notes.extend(_compare_antiderivative(base_P, alphas[i], alphas[j], integral))
            Lbar = integral / da
            Lj = mats[j].leontief
            t1 = float(ei @ (Li[si, :].T @ (alphas[i] * Pij) @ Lbar[sj, :]) @ (ei - ej))
            bracket = (Lj @ ej - Li @ ei) / da - Lbar @ (ej - ei) / da
            t2 = float(alphas[i] * (alphas[i] - alphas[j]) * (ui @ Pij @ bracket[sj]))
        terms.append((j, t1 + t2))
    closed = float(sum(t for _, t in terms))
    if with_direct:
        d = gap_direct(ConjectureProfile(tuple(mats), tuple(shocks), alphas=tuple(alphas), base_P=base_P), i)
        pred, real = d.predicted_cost, d.realized_cost
    else:
        pred = real = float("nan")
    return GapReport(
        i, pred, real, gap_closed_form=closed, per_pair_terms=tuple(terms), method="combined", notes=tuple(notes)
    )


def _compare_antiderivative(base_P, a, b, integral) -> list[str]:
    try:
        naive = leontief_integral_naive_form(base_P, a, b)
    except np.linalg.LinAlgError:
        return [f"P singular; antiderivative check skipped for [{a}, {b}]"]
    rel = float(np.linalg.norm(naive - integral) / max(np.linalg.norm(integral), 1e-300))
    if rel > 1e-6:
        msg = f"P^-1 (L(a)-L(b)) differs from quadrature of L on [{a:.6g}, {b:.6g}] (rel. err {rel:.3g})"
        log.warning(msg)
        return [msg]
    return []


# ------------------------------------------------------------------- dispatch


def analyze_profile(
    profile: ConjectureProfile,
    *,
    closed_form: bool = False,
    bound: bool = False,
    delta: float | None = None,
) -> list[GapReport]:
    """Direct gaps for every player, plus the closed form/bound matching the profile shape."""
    direct = gaps_direct(profile)
    if not (closed_form or bound):
        return direct
    shape = profile.shape
    if shape == "general":
        raise DirectOnlyError(
            "profile has heterogeneous, non-scaled interaction matrices: direct only (no closed form)"
        )
    out = []
    for i, d in enumerate(direct):
        extra: dict = {}
        if shape == "shared":
            P = profile.matrices[0]
            if closed_form:
                r = gap_shock_closed_form(P, profile.shocks, i, with_direct=False)
                extra.update(gap_closed_form=r.gap_closed_form, per_pair_terms=r.per_pair_terms, method=r.method)
            if bound:
                dl = delta if delta is not None else max_pairwise_distance(profile.shocks)[0]
                extra["bound"] = gap_shock_bound(P, profile.shocks, i, dl)
        else:
            base, alphas = profile.base_P, profile.alphas
            if profile.shared_shock:
                if closed_form:
                    r = gap_graph_closed_form(base, alphas, profile.shocks[0], i, with_direct=False)
                    extra.update(gap_closed_form=r.gap_closed_form, per_pair_terms=r.per_pair_terms, method=r.method)
                if bound:
                    dl = delta if delta is not None else max(alphas) - min(alphas)
                    extra["bound"] = gap_graph_bound(base, alphas, profile.shocks[0], i, dl)
            else:
                if closed_form:
                    r = gap_combined_closed_form(base, alphas, profile.shocks, i, with_direct=False)
                    extra.update(
                        gap_closed_form=r.gap_closed_form,
                        per_pair_terms=r.per_pair_terms,
                        method=r.method,
                        notes=r.notes,
                    )
                if bound:
                    raise DirectOnlyError("no bound is available for combined shock and network misalignment")
        out.append(GapReport(i, d.predicted_cost, d.realized_cost, **extra))
    return out


SWEEP_HEADER = ("instance_id", "player", "gap_direct", "gap_closed", "bound", "rel_gap")


def write_sweep_csv(rows: Iterable[tuple[int, GapReport]], fp) -> None:
    """One line per ``(instance_id, report)``; missing values are left empty."""
    w = csv.writer(fp, lineterminator="\r\n")
    w.writerow(SWEEP_HEADER)
    for inst, r in rows:
        try:
            rel = repr(relative_gap(r))
        except UndefinedRelativeGap:
            rel = ""
        w.writerow(
            [
                inst,
                r.player,
                repr(r.gap_direct),
                "" if r.gap_closed_form is None else repr(r.gap_closed_form),
                "" if r.bound is None else repr(r.bound),
                rel,
            ]
        )
