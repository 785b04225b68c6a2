"""
Nonuniform divided differences and the time-varying detection threshold.

A single fold between t_l and t_l+1 leaves the N-th difference of the
residue samples equal to 2 lambda_h s (mu_l[k] p + beta_l[k] (1 - p)), p
being where the fold sits inside that interval. mu and beta only depend on
the trigger times, so the threshold Psi can be built before looking at the
data.
"""
from typing import Literal, Sequence, Tuple, Union
import logging
import math

import numpy as np

from app.core.exceptions import BoundaryError, ParameterError, ShapeError
from app.schemas.asdm import TriggerTimes
from app.schemas.recovery import MuBetaTable

logger = logging.getLogger(__name__)

Times = Union[TriggerTimes, Sequence[float], np.ndarray]


def _times(triggers: Times) -> np.ndarray:
    if isinstance(triggers, TriggerTimes):
        return triggers.t
    return np.asarray(triggers, dtype=float)


def nonuniform_diff(values: Sequence[float], triggers: Times, order: int) -> np.ndarray:
    """
    D^N f[k] = (D^{N-1} f[k+1] - D^{N-1} f[k]) / (t_{k+N} - t_k), D^0 f = f.

    The result has len(values) - N entries (empty when that is not positive).
    """
    if order < 0:
        raise ParameterError(f"difference order must be non-negative, got {order}")
    t = _times(triggers)
    diff = np.asarray(values, dtype=float)
    if diff.shape != t.shape:
        raise ShapeError(f"{diff.size} values do not line up with {t.size} trigger times")
    size = len(diff)
    if order >= size:
        return np.zeros(0)
    for n in range(1, order + 1):
        length = size - n
        diff = (diff[1:] - diff[:-1]) / (t[n:n + length] - t[:length])
    return diff


def _raise_order(seq: np.ndarray, t: np.ndarray, start: int, order: int) -> np.ndarray:
    """One step of the divided-difference recursion on a window starting at `start`."""
    shifted = np.append(seq[1:], 0.0)
    k = start + np.arange(len(seq))
    return (shifted - seq) / (t[k + order + 1] - t[k])


def mu_beta(triggers: Times, pivot: int, order: int) -> MuBetaTable:
    """mu_l^N and beta_l^N on k in [l - N + 1, l]; zero everywhere else."""
    if order < 2:
        raise ParameterError(f"difference order must be at least 2, got {order}")
    t = _times(triggers)
    last = len(t) - 1
    start = pivot - order + 1
    if start < 0 or pivot + order > last:
        raise BoundaryError(
            f"pivot {pivot} with order {order} needs t_{start}..t_{pivot + order}, have t_0..t_{last}"
        )

    k = start + np.arange(order)
    mu = np.where(k == pivot - 1, 1.0, 0.0) / (t[k + 2] - t[k])
    beta = np.where(k == pivot, 1.0, 0.0) / (t[k + 2] - t[k])
    for n in range(2, order):
        mu = _raise_order(mu, t, start, n)
        beta = _raise_order(beta, t, start, n)
    return MuBetaTable(pivot=pivot, order=order, mu=mu.tolist(), beta=beta.tolist())


def phi_pair(table: MuBetaTable) -> Tuple[float, float]:
    """(phi_0, phi_1) of a pivot, the worst-case responses at both window edges."""
    l, n = table.pivot, table.order
    mu_first = abs(table.mu_at(l - n + 1))
    mu_second = abs(table.mu_at(l - n + 2))
    beta_second = abs(table.beta_at(l - n + 2))
    phi0 = mu_first * beta_second / (mu_first + beta_second + mu_second)

    mu_last = abs(table.mu_at(l - 1))
    beta_last = abs(table.beta_at(l))
    beta_before = abs(table.beta_at(l - 1))
    phi1 = mu_last * beta_last / (mu_last + beta_last + beta_before)
    return phi0, phi1


def threshold_psi(
    triggers: Times,
    order: int,
    lambda_h: float,
    boundary: Literal["infinite", "partial"] = "infinite",
) -> np.ndarray:
    """
    Psi^N[k] = lambda_h * min(phi0_{k+N-1}, phi0_{k+N-2}, phi1_{k-1}, phi1_k)
    for every k where D^N is defined.
    """
    if order < 2:
        raise ParameterError(f"difference order must be at least 2, got {order}")
    if not lambda_h > 0:
        raise ParameterError(f"lambda_h must be positive, got {lambda_h}")
    t = _times(triggers)
    last = len(t) - 1
    count = max(0, len(t) - order)
    lo, hi = order - 1, last - order
    phi0 = {}
    phi1 = {}
    for l in range(lo, hi + 1):
        phi0[l], phi1[l] = phi_pair(mu_beta(t, l, order))

    psi = np.full(count, np.inf)
    for k in range(count):
        terms = [
            phi0.get(k + order - 1),
            phi0.get(k + order - 2),
            phi1.get(k - 1),
            phi1.get(k),
        ]
        present = [v for v in terms if v is not None]
        if not present:
            continue
        if boundary == "infinite" and len(present) < len(terms):
            continue
        psi[k] = lambda_h * min(present)
    logger.debug(f"Threshold built for {count} filtered samples, {int(np.isfinite(psi).sum())} finite")
    return psi


def edge_bounds(order: int, t_min: float, t_max: float) -> Tuple[float, float]:
    """[1/(N! T_max^{N-1}), 1/(N! T_min^{N-1})], the range of the edge mu/beta magnitudes."""
    factorial = math.factorial(order)
    return 1.0 / (factorial * t_max ** (order - 1)), 1.0 / (factorial * t_min ** (order - 1))
