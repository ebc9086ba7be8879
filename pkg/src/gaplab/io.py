"""JSON (de)serialization of games, conjecture profiles and gap reports.

Game: ``{"block_sizes": [int], "P": [[real]], "epsilon": [real]}``.
Profile: ``{"base": <game>, "conjectures": [{"player": int, "alpha": real}
| {"player": int, "P": [[real]], "epsilon": [real]}]}``; omitted fields and
omitted players fall back to the base game.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .game import AssumptionError, BlockStructure, ConjectureProfile, InteractionMatrix, NetworkGame


class SchemaError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(x).__name__}")
    if not math.isfinite(x):
        raise SchemaError(path, "non-finite number")
    return float(x)


def _vector(x, path: str, length: int | None = None) -> np.ndarray:
    if not isinstance(x, list):
        raise SchemaError(path, "expected a list of numbers")
    if length is not None and len(x) != length:
        raise SchemaError(path, f"expected length {length}, got {len(x)}")
    return np.array([_number(v, f"{path}[{k}]") for k, v in enumerate(x)])


def _matrix(x, path: str, m: int) -> np.ndarray:
    if not isinstance(x, list) or len(x) != m:
        raise SchemaError(path, f"expected {m} rows")
    return np.vstack([_vector(r, f"{path}[{k}]", m) for k, r in enumerate(x)])


def _interaction(structure: BlockStructure, data: np.ndarray, path: str) -> InteractionMatrix:
    try:
        return InteractionMatrix(structure, data)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def game_from_dict(d, path: str = "$") -> NetworkGame:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    for key in ("block_sizes", "P", "epsilon"):
        if key not in d:
            raise SchemaError(f"{path}.{key}", "missing")
    bs = d["block_sizes"]
    if not isinstance(bs, list) or not bs or not all(isinstance(b, int) and not isinstance(b, bool) and b >= 1 for b in bs):
        raise SchemaError(f"{path}.block_sizes", "expected a non-empty list of positive integers")
    st = BlockStructure(tuple(bs))
    P = _interaction(st, _matrix(d["P"], f"{path}.P", st.m), f"{path}.P")
    eps = _vector(d["epsilon"], f"{path}.epsilon", st.m)
    return NetworkGame(P, eps)


def _list(a: np.ndarray):
    return [float(x) for x in a] if a.ndim == 1 else [_list(r) for r in a]


def game_to_dict(game: NetworkGame) -> dict:
    return {
        "block_sizes": list(game.structure.block_sizes),
        "P": _list(game.P.data),
        "epsilon": _list(game.epsilon),
    }


def profile_from_dict(d, path: str = "$") -> ConjectureProfile:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    if "base" not in d:
        raise SchemaError(f"{path}.base", "missing")
    base = game_from_dict(d["base"], f"{path}.base")
    st = base.structure
    n = st.n
    conj = d.get("conjectures", [])
    if not isinstance(conj, list):
        raise SchemaError(f"{path}.conjectures", "expected a list")
    mats: list[InteractionMatrix] = [base.P] * n
    shocks: list[np.ndarray] = [base.epsilon] * n
    alphas: list[float] = [1.0] * n
    seen: set[int] = set()
    any_alpha = any_P = False
    for k, c in enumerate(conj):
        cp = f"{path}.conjectures[{k}]"
        if not isinstance(c, dict):
            raise SchemaError(cp, "expected an object")
        extra = set(c) - {"player", "alpha", "P", "epsilon"}
        if extra:
            raise SchemaError(cp, f"unknown keys {sorted(extra)}")
        j = c.get("player")
        if isinstance(j, bool) or not isinstance(j, int) or not 0 <= j < n:
            raise SchemaError(f"{cp}.player", f"expected an integer in [0, {n})")
        if j in seen:
            raise SchemaError(f"{cp}.player", f"duplicate conjecture for player {j}")
        seen.add(j)
        if "alpha" in c and "P" in c:
            raise SchemaError(cp, "give either alpha or P, not both")
        if "alpha" in c:
            a = _number(c["alpha"], f"{cp}.alpha")
            if a <= 0:
                raise SchemaError(f"{cp}.alpha", "must be positive")
            alphas[j] = a
            mats[j] = base.P.scaled(a)
            any_alpha = True
        if "P" in c:
            mats[j] = _interaction(st, _matrix(c["P"], f"{cp}.P", st.m), f"{cp}.P")
            any_P = True
        if "epsilon" in c:
            shocks[j] = _vector(c["epsilon"], f"{cp}.epsilon", st.m)
    try:
        if any_alpha and not any_P:
            return ConjectureProfile(tuple(mats), tuple(shocks), alphas=tuple(alphas), base_P=base.P)
        return ConjectureProfile(tuple(mats), tuple(shocks))
    except AssumptionError:
        raise
    except ValueError as exc:
        raise SchemaError(f"{path}.conjectures", str(exc)) from None


def profile_to_dict(profile: ConjectureProfile, base: NetworkGame | None = None) -> dict:
    """Serialize relative to ``base`` (default: player 0's conjecture, or the scaling base)."""
    if base is None:
        P0 = profile.base_P if profile.alphas is not None else profile.matrices[0]
        base = NetworkGame(P0, profile.shocks[0])
    conj = []
    for j in range(profile.n):
        c: dict = {"player": j}
        if profile.alphas is not None and profile.base_P.equals(base.P):
            c["alpha"] = profile.alphas[j]
        elif not profile.matrices[j].equals(base.P):
            c["P"] = _list(profile.matrices[j].data)
        if not np.array_equal(profile.shocks[j], base.epsilon):
            c["epsilon"] = _list(profile.shocks[j])
        conj.append(c)
    return {"base": game_to_dict(base), "conjectures": conj}


def load_json(path: str | Path):
    with open(path) as f:
        return json.load(f)


def dump_json(obj, fp) -> None:
    json.dump(obj, fp, indent=2, allow_nan=True)
    fp.write("\n")
