"""Adaptive Simpson quadrature for array-valued integrands."""

from __future__ import annotations

from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 40,
) -> np.ndarray:
    """Integrate ``f`` over ``[a, b]`` entrywise.

    Every entry must meet the absolute tolerance; a panel is split until the
    Richardson error estimate ``|S2 - S1| / 15`` is below its share of ``tol``.
    Raises :class:`QuadratureError` if ``max_depth`` bisections do not suffice.
    ``b < a`` returns the negated integral.
    """
    fa, fb = np.asarray(f(a), dtype=float), np.asarray(f(b), dtype=float)
    if a == b:
        return np.zeros_like(fa)
    c = 0.5 * (a + b)
    fc = np.asarray(f(c), dtype=float)
    whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb)

    def recurse(a, b, fa, fb, fc, whole, tol, depth):
        c = 0.5 * (a + b)
        d, e = 0.5 * (a + c), 0.5 * (c + b)
        fd, fe = np.asarray(f(d), dtype=float), np.asarray(f(e), dtype=float)
        left = (c - a) / 6.0 * (fa + 4.0 * fd + fc)
        right = (b - c) / 6.0 * (fc + 4.0 * fe + fb)
        diff = left + right - whole
        if np.max(np.abs(diff)) <= 15.0 * tol:
            return left + right + diff / 15.0
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{a:.17g}, {b:.17g}] within depth {max_depth}"
            )
        return recurse(a, c, fa, fc, fd, left, tol / 2.0, depth + 1) + recurse(
            c, b, fc, fb, fe, right, tol / 2.0, depth + 1
        )

    return recurse(a, b, fa, fb, fc, whole, tol, 0)
