"""
Small numerical helpers shared by the encoders.

Integrands handed to these helpers are smooth inside every cell; callers
place discontinuities (fold times) on cell boundaries. Gauss-Legendre
nodes never touch a cell endpoint, so a jump sitting on a boundary does
not leak into either neighbour.
"""
from typing import Callable, Sequence
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

GAUSS_ORDER = 3

_NODES, _WEIGHTS = leggauss(GAUSS_ORDER)


def gauss_cells(f: Callable[[np.ndarray], np.ndarray], nodes: np.ndarray) -> np.ndarray:
    """Integral of f over each cell [nodes[i], nodes[i+1]]."""
    half = 0.5 * np.diff(nodes)
    mid = nodes[:-1] + half
    points = mid[None, :] + half[None, :] * _NODES[:, None]
    values = np.asarray(f(points.ravel()), dtype=float).reshape(points.shape)
    return half * (_WEIGHTS @ values)


def gauss_partial(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> float:
    """Integral of f over a sub-interval of a single cell."""
    if b <= a:
        return 0.0
    return float(gauss_cells(f, np.array([a, b]))[0])


def integrate_piecewise(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    step: float,
    breakpoints: Sequence[float] = (),
) -> float:
    """Composite Gauss-Legendre integral of f over [a, b], split at breakpoints."""
    if b <= a:
        return 0.0
    count = max(1, int(math.ceil((b - a) / step)))
    nodes = np.linspace(a, b, count + 1)
    inner = [p for p in breakpoints if a < p < b]
    if inner:
        nodes = np.unique(np.concatenate([nodes, np.asarray(inner, dtype=float)]))
    return float(np.sum(gauss_cells(f, nodes)))


def refine_crossing(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    f_lo: float,
    f_hi: float,
    tol: float,
) -> float:
    """
    Locate the sign change of func inside the bracket [lo, hi] with Brent's method.

    f_lo < 0 <= f_hi is expected; a grazing touch (f_hi == 0) returns hi.
    """
    if f_hi == 0.0:
        return hi
    if f_lo >= 0.0:
        return lo
    return float(brentq(func, lo, hi, xtol=tol))
