"""Quadratic network games: structure, costs, equilibria and realized actions.

Player ``i`` controls a block ``u_i`` of the joint action ``u`` and pays

    J_i(u) = 0.5 * u_i @ u_i - u_i @ (P[i, :] @ u + eps_i)

The unique Nash equilibrium of a strongly monotone game is ``(I - P)^{-1} eps``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

TOL_MONO = 1e-10
COND_WARN = 1e12


class SingularSystemError(np.linalg.LinAlgError):
    """``I - P`` is numerically singular."""

    def __init__(self, msg: str, player: int | None = None):
        super().__init__(msg)
        self.player = player


class IllConditionedWarning(RuntimeWarning):
    pass


class AssumptionError(ValueError):
    """A conjectured interaction matrix is not strongly monotone."""


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BlockStructure:
    block_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if len(sizes) < 1:
            raise ValueError("need at least one player")
        if any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @classmethod
    def scalar(cls, n: int) -> "BlockStructure":
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.block_sizes)

    @property
    def m(self) -> int:
        return sum(self.block_sizes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.block_sizes)[:-1]]))

    def slice(self, i: int) -> slice:
        if not 0 <= i < self.n:
            raise IndexError(f"player index {i} out of range for n={self.n}")
        start = self.offsets[i]
        return slice(start, start + self.block_sizes[i])


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Dense ``m x m`` interaction matrix with block access and zero diagonal blocks."""

    structure: BlockStructure
    data: np.ndarray

    def __post_init__(self):
        data = _frozen(self.data)
        m = self.structure.m
        if data.shape != (m, m):
            raise ValueError(f"interaction matrix must be {m}x{m}, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("interaction matrix has non-finite entries")
        for i in range(self.structure.n):
            s = self.structure.slice(i)
            if np.any(data[s, s] != 0.0):
                raise ValueError(f"diagonal block P[{i},{i}] must be zero")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_dense(cls, structure: BlockStructure, data, zero_diagonal: bool = False):
        """Wrap ``data``; with ``zero_diagonal`` the diagonal blocks are cleared first."""
        data = np.array(data, dtype=float, copy=True)
        if zero_diagonal:
            for i in range(structure.n):
                s = structure.slice(i)
                data[s, s] = 0.0
        return cls(structure, data)

    @classmethod
    def zeros(cls, structure: BlockStructure) -> "InteractionMatrix":
        return cls(structure, np.zeros((structure.m, structure.m)))

    def block(self, i: int, j: int) -> np.ndarray:
        return self.data[self.structure.slice(i), self.structure.slice(j)]

    def row(self, i: int) -> np.ndarray:
        """The ``m_i x m`` block row ``P_{i,-}``."""
        return self.data[self.structure.slice(i), :]

    def scaled(self, alpha: float) -> "InteractionMatrix":
        return InteractionMatrix(self.structure, float(alpha) * self.data)

    def equals(self, other: "InteractionMatrix") -> bool:
        return self.structure == other.structure and np.array_equal(self.data, other.data)

    @cached_property
    def lambda_max_sym(self) -> float:
        """Largest eigenvalue of the symmetric part ``(P + P^T) / 2``."""
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.T))[-1])

    @property
    def is_monotone(self) -> bool:
        return self.lambda_max_sym < 1.0 - TOL_MONO

    @cached_property
    def _lu(self):
        return _factor(np.eye(self.structure.m) - self.data)

    @cached_property
    def leontief(self) -> np.ndarray:
        """``L = (I - P)^{-1}``, computed once per matrix."""
        return leontief(self)


@dataclass(frozen=True)
class _Factorization:
    lu: np.ndarray
    piv: np.ndarray
    rcond: float

    @property
    def cond(self) -> float:
        return np.inf if self.rcond == 0.0 else 1.0 / self.rcond


def _factor(A: np.ndarray) -> _Factorization:
    anorm = np.linalg.norm(A, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    if np.any(np.diag(lu) == 0.0) or anorm == 0.0:
        rcond = 0.0
    else:
        rcond, info = lapack.dgecon(lu, anorm, norm="1")
        rcond = float(rcond) if info == 0 else 0.0
    return _Factorization(lu, piv, rcond)


def _solve(P: InteractionMatrix, rhs: np.ndarray, player: int | None = None) -> tuple[np.ndarray, float]:
    fac = P._lu
    if fac.rcond < np.finfo(float).eps:
        raise SingularSystemError(
            f"I - P is singular (rcond={fac.rcond:.3g})"
            + ("" if player is None else f" in the conjecture of player {player}"),
            player=player,
        )
    if fac.cond > COND_WARN:
        warnings.warn(
            f"I - P is ill-conditioned (cond_1 ~ {fac.cond:.3g})", IllConditionedWarning, stacklevel=3
        )
    return sla.lu_solve((fac.lu, fac.piv), rhs, check_finite=False), fac.cond


@dataclass(frozen=True, eq=False)
class JointAction:
    structure: BlockStructure
    u: np.ndarray
    condition: float | None = None

    def __post_init__(self):
        u = _frozen(self.u)
        if u.shape != (self.structure.m,):
            raise ValueError(f"joint action must have length {self.structure.m}, got {u.shape}")
        object.__setattr__(self, "u", u)

    def block(self, i: int) -> np.ndarray:
        return self.u[self.structure.slice(i)]

    @property
    def ill_conditioned(self) -> bool:
        return self.condition is not None and self.condition > COND_WARN


@dataclass(frozen=True, eq=False)
class NetworkGame:
    """Ground-truth game ``(N, {m_i}, P, eps)``.

    Monotonicity is not enforced here; see :func:`validate_game`.
    """

    P: InteractionMatrix
    epsilon: np.ndarray

    def __post_init__(self):
        eps = _frozen(self.epsilon)
        if eps.shape != (self.P.structure.m,):
            raise ValueError(f"epsilon must have length {self.P.structure.m}, got {eps.shape}")
        object.__setattr__(self, "epsilon", eps)

    @classmethod
    def from_arrays(cls, block_sizes: Sequence[int], P, epsilon) -> "NetworkGame":
        structure = BlockStructure(tuple(block_sizes))
        return cls(InteractionMatrix(structure, P), np.asarray(epsilon, dtype=float))

    @property
    def structure(self) -> BlockStructure:
        return self.P.structure

    def shock(self, i: int) -> np.ndarray:
        return self.epsilon[self.structure.slice(i)]


@dataclass(frozen=True)
class ValidationReport:
    lambda_max_sym: float
    sigma_min: float
    condition: float
    monotone: bool
    zero_diagonal: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.zero_diagonal

    def to_dict(self) -> dict:
        return {
            "lambda_max_sym": self.lambda_max_sym,
            "sigma_min": self.sigma_min,
            "condition": self.condition,
            "monotone": self.monotone,
            "zero_diagonal": self.zero_diagonal,
            "passed": self.passed,
        }


def validate_game(game: NetworkGame | InteractionMatrix, tol_mono: float = TOL_MONO) -> ValidationReport:
    P = game.P if isinstance(game, NetworkGame) else game
    m = P.structure.m
    zero_diag = all(not np.any(P.block(i, i)) for i in range(P.structure.n))
    sigma_min = float(np.linalg.svd(np.eye(m) - P.data, compute_uv=False)[-1])
    lam = P.lambda_max_sym
    return ValidationReport(
        lambda_max_sym=lam,
        sigma_min=sigma_min,
        condition=P._lu.cond,
        monotone=bool(lam < 1.0 - tol_mono),
        zero_diagonal=zero_diag,
    )


def cost(game: NetworkGame, i: int, u: JointAction | np.ndarray) -> float:
    """``J_i(u)`` for player ``i`` under ``game``."""
    uvec = u.u if isinstance(u, JointAction) else np.asarray(u, dtype=float)
    if uvec.shape != (game.structure.m,):
        raise ValueError(f"action length {uvec.shape} does not match m={game.structure.m}")
    ui = uvec[game.structure.slice(i)]
    return float(0.5 * ui @ ui - ui @ (game.P.row(i) @ uvec + game.shock(i)))


def nash_equilibrium(P: InteractionMatrix, epsilon, *, player: int | None = None) -> JointAction:
    """Solve ``(I - P) u = eps`` by LU with partial pivoting.

    Raises :class:`SingularSystemError` for singular ``I - P`` and warns with
    :class:`IllConditionedWarning` when the one-norm condition estimate exceeds 1e12.
    """
    eps = np.asarray(epsilon, dtype=float)
    if eps.shape != (P.structure.m,):
        raise ValueError(f"epsilon must have length {P.structure.m}, got {eps.shape}")
    u, cond = _solve(P, eps, player)
    return JointAction(P.structure, u, condition=cond)


def leontief(P: InteractionMatrix) -> np.ndarray:
    m = P.structure.m
    L, _ = _solve(P, np.eye(m))
    L.setflags(write=False)
    return L


def leontief_rows(P: InteractionMatrix, i: int) -> np.ndarray:
    """Block row ``L_{i,-}`` from ``(I - P)^T X = E_i^T`` without the full inverse."""
    fac = P._lu
    if fac.rcond < np.finfo(float).eps:
        raise SingularSystemError("I - P is singular")
    s = P.structure.slice(i)
    E = np.eye(P.structure.m)[:, s]
    return sla.lu_solve((fac.lu, fac.piv), E, trans=1, check_finite=False).T


def resolvent_difference(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``(I - A)^{-1} - (I - B)^{-1}`` written as ``(I - A)^{-1} (A - B) (I - B)^{-1}``."""
    eye = np.eye(A.shape[0])
    left = np.linalg.solve(eye - A, A - B)
    return np.linalg.solve((eye - B).T, left.T).T


@dataclass(frozen=True, eq=False)
class ConjectureProfile:
    """Each player's conjectured ``(P^(j), eps^(j))``.

    In scaling mode ``P^(j) = alphas[j] * base_P``. Every conjecture must be
    strongly monotone; construction fails otherwise.
    """

    matrices: tuple[InteractionMatrix, ...]
    shocks: tuple[np.ndarray, ...]
    alphas: tuple[float, ...] | None = None
    base_P: InteractionMatrix | None = None

    def __post_init__(self):
        matrices = tuple(self.matrices)
        if not matrices:
            raise ValueError("empty profile")
        structure = matrices[0].structure
        n = structure.n
        if len(matrices) != n:
            raise ValueError(f"need {n} conjectured matrices, got {len(matrices)}")
        if len(self.shocks) != n:
            raise ValueError(f"need {n} conjectured shocks, got {len(self.shocks)}")
        for j, Pj in enumerate(matrices):
            if Pj.structure != structure:
                raise ValueError(f"conjecture of player {j} has a different block structure")
            if not Pj.is_monotone:
                raise AssumptionError(
                    f"conjecture of player {j} violates (P+P^T)/2 < I "
                    f"(lambda_max={Pj.lambda_max_sym:.12g})"
                )
        shocks = tuple(_frozen(e) for e in self.shocks)
        for j, e in enumerate(shocks):
            if e.shape != (structure.m,):
                raise ValueError(f"shock of player {j} must have length {structure.m}, got {e.shape}")
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(self, "shocks", shocks)
        if self.alphas is not None:
            if self.base_P is None:
                raise ValueError("scaling mode needs base_P")
            alphas = tuple(float(a) for a in self.alphas)
            if any(a <= 0 for a in alphas):
                raise ValueError(f"scaling factors must be positive, got {alphas}")
            for j, (a, Pj) in enumerate(zip(alphas, matrices)):
                if not np.allclose(a * self.base_P.data, Pj.data, rtol=4 * np.finfo(float).eps, atol=0):
                    raise ValueError(f"conjecture of player {j} is not alpha * base_P")
            object.__setattr__(self, "alphas", alphas)

    @classmethod
    def homogeneous(cls, game: NetworkGame) -> "ConjectureProfile":
        n = game.structure.n
        return cls((game.P,) * n, (game.epsilon,) * n)

    @classmethod
    def shared(cls, P: InteractionMatrix, shocks: Sequence) -> "ConjectureProfile":
        return cls((P,) * P.structure.n, tuple(shocks))

    @classmethod
    def scaled(cls, base_P: InteractionMatrix, alphas: Sequence[float], shocks) -> "ConjectureProfile":
        """Scaling-mode profile; ``shocks`` is one shared vector or one per player."""
        n = base_P.structure.n
        shocks = np.asarray(shocks, dtype=float)
        if shocks.ndim == 1:
            shocks = np.broadcast_to(shocks, (n, base_P.structure.m))
        mats = tuple(base_P.scaled(a) for a in alphas)
        return cls(mats, tuple(shocks), alphas=tuple(alphas), base_P=base_P)

    @property
    def structure(self) -> BlockStructure:
        return self.matrices[0].structure

    @property
    def n(self) -> int:
        return self.structure.n

    def game_of(self, j: int) -> NetworkGame:
        """The game player ``j`` conjectures; it also defines ``J_j``."""
        return NetworkGame(self.matrices[j], self.shocks[j])

    @property
    def shared_matrix(self) -> bool:
        return all(Pj.equals(self.matrices[0]) for Pj in self.matrices[1:])

    @property
    def shared_shock(self) -> bool:
        return all(np.array_equal(e, self.shocks[0]) for e in self.shocks[1:])

    @property
    def shape(self) -> str:
        """``"shared"`` (one P), ``"scaled"`` (alpha * P) or ``"general"``."""
        if self.shared_matrix:
            return "shared"
        if self.alphas is not None:
            return "scaled"
        return "general"


def conjectured_equilibria(profile: ConjectureProfile) -> list[JointAction]:
    return [
        nash_equilibrium(Pj, ej, player=j)
        for j, (Pj, ej) in enumerate(zip(profile.matrices, profile.shocks))
    ]


def realized_action(profile: ConjectureProfile, equilibria: Sequence[JointAction] | None = None) -> JointAction:
    """``u° = (u_1^(1), ..., u_n^(n))``: each player plays its own block of its own prediction."""
    if equilibria is None:
        equilibria = conjectured_equilibria(profile)
    st = profile.structure
    u = np.empty(st.m)
    for j, uj in enumerate(equilibria):
        u[st.slice(j)] = uj.block(j)
    return JointAction(st, u)
