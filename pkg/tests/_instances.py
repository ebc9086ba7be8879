"""Seeded random instances shared by the test modules."""

from __future__ import annotations

import numpy as np

from gaplab.game import BlockStructure, InteractionMatrix


def random_structure(rng, n_max=6, m_max=3, n_min=2):
    n = int(rng.integers(n_min, n_max + 1))
    return BlockStructure(tuple(int(x) for x in rng.integers(1, m_max + 1, size=n)))


def random_P(rng, st, smax=None, symmetric=False):
    """Signed Gaussian blocks, zero diagonal blocks, spectral norm ``smax``."""
    m = st.m
    A = rng.normal(size=(m, m))
    if symmetric:
        A = A + A.T
    for i in range(st.n):
        s = st.slice(i)
        A[s, s] = 0.0
    if smax is None:
        smax = rng.uniform(0.1, 0.9)
    A *= smax / np.linalg.norm(A, 2)
    return InteractionMatrix(st, A)


def random_shocks(rng, st, spread=None):
    base = rng.normal(size=st.m)
    if spread is None:
        spread = rng.uniform(0.01, 1.0)
    return [base + spread * rng.normal(size=st.m) for _ in range(st.n)]


def random_alphas(rng, n, lo=0.9, hi=1.1):
    return [float(a) for a in rng.uniform(lo, hi, size=n)]


def instance_rng(seed: int, k: int):
    return np.random.default_rng([seed, k])
