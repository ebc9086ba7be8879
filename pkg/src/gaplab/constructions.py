"""Three-player cycle instances with bounded misalignment and arbitrarily large gap."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .game import BlockStructure, ConjectureProfile, InteractionMatrix
from .gap import gaps_direct

GAMMA_CAP = 1.0 - 1e-12
SQRT2 = math.sqrt(2.0)


class ConstructionError(RuntimeError):
    pass


def cycle_matrix(weights) -> np.ndarray:
    """Directed 3-cycle: player 1 hears player 3, player 2 hears 1, player 3 hears 2."""
    w1, w2, w3 = weights
    return np.array([[0.0, 0.0, w1], [w2, 0.0, 0.0], [0.0, w3, 0.0]])


def shock_cycle_gap(gamma: float, beta: float) -> float:
    """Closed-form gap of every player in the shock construction."""
    return gamma * (gamma**2 + gamma + beta) * (1 - beta) * (1 - gamma**2) / (1 - gamma**3) ** 2


def shock_cycle_profile(gamma: float, beta: float) -> ConjectureProfile:
    st = BlockStructure.scalar(3)
    P = InteractionMatrix(st, cycle_matrix((gamma, gamma, gamma)))
    shocks = [np.ones(3) for _ in range(3)]
    for k in range(3):
        shocks[k][k] = beta
    return ConjectureProfile.shared(P, shocks)


def beta_interval(delta: float) -> tuple[float, float]:
    return max(1.0 - delta / SQRT2, 0.0), 1.0


def _search_gamma(beta: float, M: float) -> tuple[float, list[tuple[float, float]]]:
    trace = []

    def f(g):
        v = shock_cycle_gap(g, beta)
        trace.append((g, v))
        return v

    lo, hi = 0.0, GAMMA_CAP
    if f(hi) <= M:
        raise ConstructionError(
            f"gap at gamma={GAMMA_CAP!r} is {trace[-1][1]:.6g} <= M={M}; M is unreachable at this precision"
        )
    while hi - lo > 1e-6 * (1.0 - lo):
        mid = 0.5 * (lo + hi)
        if f(mid) > M:
            hi = mid
        else:
            lo = mid
    return hi, trace


def build_shock_cycle(
    delta: float, M: float, *, gamma: float | None = None, beta: float | None = None
) -> tuple[ConjectureProfile, dict]:
    """Shared 3-cycle ``P(gamma)`` with shock forecasts differing in one entry each.

    ``beta`` defaults to the midpoint of ``(max(1 - delta/sqrt2, 0), 1)``; gamma is
    found by bisection on the closed-form gap unless forced (diagnostic mode).
    """
    if not (delta > 0 and M > 0):
        raise ValueError("delta and M must be positive")
    lo_b, hi_b = beta_interval(delta)
    if beta is None:
        beta = 0.5 * (lo_b + hi_b)
    elif not lo_b < beta < hi_b:
        raise ValueError(f"beta must lie in ({lo_b:.17g}, 1) for delta={delta}")
    trace: list[tuple[float, float]] = []
    if gamma is None:
        gamma, trace = _search_gamma(beta, M)
    elif not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")

    profile = shock_cycle_profile(gamma, beta)
    dists = [
        float(np.linalg.norm(profile.shocks[a] - profile.shocks[b]))
        for a, b in itertools.combinations(range(3), 2)
    ]
    closed = shock_cycle_gap(gamma, beta)
    direct = [r.gap_direct for r in gaps_direct(profile)]
    rel = [abs(d - closed) / abs(closed) for d in direct]
    ordered = sorted(trace)
    trace_monotone = all(b[1] >= a[1] for a, b in zip(ordered, ordered[1:]))
    cert = {
        "construction": "shock",
        "delta": delta,
        "M": M,
        "gamma": gamma,
        "beta": beta,
        "diagnostic": not trace,
        "pairwise_distances": dists,
        "distances_ok": all(d <= delta for d in dists),
        "gap_direct": direct,
        "gap_closed_form": closed,
        "closed_form_rel_err": rel,
        "closed_form_ok": all(r <= 1e-6 for r in rel),
        "gaps_exceed_M": all(d > M for d in direct),
        "monotone_conjectures": all(Pj.is_monotone for Pj in profile.matrices),
        "trace": [[g, v] for g, v in trace],
        "trace_monotone": trace_monotone,
    }
    cert["passed"] = all(
        cert[k] for k in ("distances_ok", "closed_form_ok", "gaps_exceed_M", "monotone_conjectures", "trace_monotone")
    )
    return profile, cert


# ----------------------------------------------------------------- graph case


def graph_cycle_matrices(delta: float) -> list[InteractionMatrix]:
    """Unit 3-cycles; in player k's conjecture edge k is reduced to ``1 - delta/sqrt2``."""
    st = BlockStructure.scalar(3)
    a = 1.0 - delta / SQRT2
    out = []
    for k in range(3):
        w = [1.0, 1.0, 1.0]
        w[k] = a
        out.append(InteractionMatrix(st, cycle_matrix(w)))
    return out


SHOCK_PATTERNS = {
    "symmetric": np.array([1.0, 1.0, 1.0]),
    "alternating": np.array([1.0, -1.0, -1.0]),
}


def graph_cycle_profile(delta: float, gamma: float, pattern: str = "symmetric") -> ConjectureProfile:
    mats = graph_cycle_matrices(delta)
    eps = gamma * SHOCK_PATTERNS[pattern]
    return ConjectureProfile(tuple(mats), (eps,) * 3)


def graph_cycle_reference_gap(gamma: float, delta: float) -> float:
    """Reference closed form ``2 g^2 (sqrt2 - d) / d`` for player 2 under the ``[g, -g, -g]`` shock."""
    return 2 * gamma**2 * (SQRT2 - delta) / delta


def growth_exponent(delta: float, gammas=(10.0, 100.0, 1000.0), pattern: str = "symmetric") -> float:
    """Least-squares slope of log(min player gap) against log(gamma)."""
    g = np.array(gammas, dtype=float)
    gaps = np.array([min(r.gap_direct for r in gaps_direct(graph_cycle_profile(delta, x, pattern))) for x in g])
    return float(np.polyfit(np.log(g), np.log(gaps), 1)[0])


def build_graph_cycle(
    delta: float, M: float, *, gamma: float | None = None, pattern: str = "symmetric"
) -> tuple[ConjectureProfile, dict]:
    """Shared shock, conjectured cycles at Frobenius distance ``delta``.

    The gap is homogeneous of degree two in the shock scale ``gamma``, so gamma is
    set to ``1.1 * sqrt(M / g1)`` with ``g1`` the smallest simulated gap at unit
    scale. With ``pattern="alternating"`` only player 2 has a nonzero gap, so the
    certificate fails for players 1 and 3.
    """
    if not 0 < delta < SQRT2:
        raise ValueError(f"delta must lie in (0, sqrt(2)), got {delta}")
    if M <= 0:
        raise ValueError("M must be positive")
    if pattern not in SHOCK_PATTERNS:
        raise ValueError(f"unknown shock pattern {pattern!r}")
    mats = graph_cycle_matrices(delta)
    for k, Pk in enumerate(mats):
        if not Pk.is_monotone:
            raise ConstructionError(f"conjecture of player {k} is not monotone (lambda_max={Pk.lambda_max_sym})")

    unit = [r.gap_direct for r in gaps_direct(graph_cycle_profile(delta, 1.0, pattern))]
    if gamma is None:
        g1 = min(unit)
        if g1 > 0:
            gamma = 1.1 * math.sqrt(M / g1)
        else:
            gamma = 1.1 * math.sqrt(M * delta / (2 * (SQRT2 - delta)))

    profile = graph_cycle_profile(delta, gamma, pattern)
    direct = [r.gap_direct for r in gaps_direct(profile)]
    fro = [
        float(np.linalg.norm(mats[a].data - mats[b].data, "fro")) for a, b in itertools.combinations(range(3), 2)
    ]
    alt_profile = graph_cycle_profile(delta, gamma, "alternating")
    alt_direct = [r.gap_direct for r in gaps_direct(alt_profile)]
    alt_closed = graph_cycle_reference_gap(gamma, delta)
    cert = {
        "construction": "graph",
        "delta": delta,
        "M": M,
        "gamma": gamma,
        "pattern": pattern,
        "epsilon": [float(x) for x in profile.shocks[0]],
        "frobenius_distances": fro,
        "distances_ok": all(abs(d - delta) <= 1e-12 * max(1.0, delta) for d in fro),
        "lambda_max_sym": [Pk.lambda_max_sym for Pk in mats],
        "monotone_conjectures": all(Pk.is_monotone for Pk in mats),
        "gap_direct": direct,
        "gaps_exceed_M": all(d > M for d in direct),
        "alternating_pattern": {
            "epsilon": [float(x) for x in alt_profile.shocks[0]],
            "gap_direct": alt_direct,
            "reference_gap": alt_closed,
            "abs_mismatch": [d - alt_closed for d in alt_direct],
        },
    }
    cert["passed"] = all(cert[k] for k in ("distances_ok", "monotone_conjectures", "gaps_exceed_M"))
    return profile, cert


def replay_certificate(cert: dict) -> tuple[ConjectureProfile, list[float]]:
    """Rebuild the recorded instance and re-simulate the gaps."""
    if cert["construction"] == "shock":
        profile = shock_cycle_profile(cert["gamma"], cert["beta"])
    elif cert["construction"] == "graph":
        profile = graph_cycle_profile(cert["delta"], cert["gamma"], cert.get("pattern", "symmetric"))
    else:
        raise ValueError(f"unknown construction {cert['construction']!r}")
    return profile, [r.gap_direct for r in gaps_direct(profile)]
