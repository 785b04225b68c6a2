import logging
import math

from app.core.exceptions import DivergenceError, ParameterError
from app.schemas.asdm import AsdmParams
from app.schemas.modulo import ModuloParams
from app.schemas.recovery import ConditionReport

logger = logging.getLogger(__name__)


def bound_dng(omega: float, order: int, t_min: float, t_max: float, g_sup: float) -> float:
    """Upper bound (1/(Omega N!)) ((T_max/T_min) Omega e)^N g_sup on |D^N G(t_k)|."""
    if not omega > 0 or not t_min > 0 or not t_max > 0:
        raise ParameterError("bandwidth and interval bounds must be positive")
    if order < 0:
        raise ParameterError(f"difference order must be non-negative, got {order}")
    if g_sup < 0:
        raise ParameterError(f"amplitude bound must be non-negative, got {g_sup}")
    ratio = (t_max / t_min) * omega * math.e
    return ratio ** order * g_sup / (omega * math.factorial(order))


def check_sufficient_conditions(
    asdm: AsdmParams,
    modulo: ModuloParams,
    omega: float,
    g_sup: float,
    order: int,
) -> ConditionReport:
    """
    Evaluate the sufficient conditions for recovery with an N-th order filter.

    S1: (C^2 2 delta Omega e / (b - lambda))^(N-1) g_sup < lambda_h / (C N e)
    S2: N 2 delta Omega g_sup / (b - lambda) <= h*
    and the single bound on delta that implies both. C = (b + lambda)/(b - lambda).
    """
    if not g_sup > 0:
        raise ParameterError(f"amplitude bound must be positive, got {g_sup}")
    if not omega > 0:
        raise ParameterError(f"bandwidth must be positive, got {omega}")
    if order < 2:
        raise ParameterError(f"difference order must be at least 2, got {order}")

    lam, b, delta = modulo.threshold, asdm.b, asdm.delta
    lambda_h, h_star = modulo.lambda_h, modulo.h_star
    if not b > lam:
        raise ParameterError(f"feedback b={b} must exceed the threshold lambda={lam}")

    gap = b - lam
    C = (b + lam) / gap
    t_min = 2.0 * delta / (b + lam)
    t_max = 2.0 * delta / gap

    s1_lhs = (C * C * 2.0 * delta * omega * math.e / gap) ** (order - 1) * g_sup
    s1_rhs = lambda_h / (C * order * math.e)
    s2_lhs = order * 2.0 * delta * omega * g_sup / gap
    s2_rhs = h_star

    if h_star > 0:
        kappa = min(1.0, lambda_h / (math.e ** 2 * h_star * C ** (2.0 + 1.0 / (order - 1))))
    else:
        kappa = 0.0
    delta_bound = gap * h_star * kappa / (2.0 * order * omega * g_sup)

    report = ConditionReport(
        order=order,
        g_sup=g_sup,
        C=C,
        t_min=t_min,
        t_max=t_max,
        s1_lhs=s1_lhs,
        s1_rhs=s1_rhs,
        s1_pass=s1_lhs < s1_rhs,
        s2_lhs=s2_lhs,
        s2_rhs=s2_rhs,
        s2_pass=s2_lhs <= s2_rhs,
        kappa=kappa,
        delta=delta,
        delta_bound=delta_bound,
        delta_pass=delta < delta_bound,
    )
    logger.info(
        f"Recovery conditions N={order}: S1 {'pass' if report.s1_pass else 'fail'}, "
        f"S2 {'pass' if report.s2_pass else 'fail'}, delta bound {delta_bound:.4g}"
    )
    return report


def final_error_bound(
    lambda_h: float,
    delta: float,
    folds: int,
    omega: float,
    b: float,
    threshold: float,
    iterations: int,
    g_norm: float,
) -> float:
    """
    L2 bound on g - g_n after n iterations with R detected folds:
    4 lambda_h 2 delta R sqrt(Omega pi) / (pi (b - lambda) - 2 delta Omega)
    + (2 delta Omega / (pi (b - lambda)))^(n+1) ||g||.
    """
    denominator = math.pi * (b - threshold) - 2.0 * delta * omega
    if not denominator > 0:
        raise DivergenceError(
            f"2 delta Omega = {2.0 * delta * omega:.6g} is not below pi (b - lambda) = {math.pi * (b - threshold):.6g}"
        )
    rate = 2.0 * delta * omega / (math.pi * (b - threshold))
    residue_term = 4.0 * lambda_h * 2.0 * delta * folds * math.sqrt(omega * math.pi) / denominator
    return residue_term + rate ** (iterations + 1) * g_norm
