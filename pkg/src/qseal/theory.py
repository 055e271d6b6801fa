"""Closed-form min-max fidelity bounds for the most stringent seal.

These scalar functions serve as oracles for the simulated metrics in
:mod:`qseal.attack`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .attack import ab_coefficients, nu


@dataclass(frozen=True)
class BoundSet:
    minmax_avg_fidelity: float
    minmax_cond_fidelity_bound: float
    is_cond_bound_tight: bool


def _check_unit(x: float, name: str):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name}={x} outside [0, 1]")


def lemma_f(x: float, nu_: float, n: int) -> float:
    """sqrt(nu x + (1-nu)/N) - sqrt((1-nu)/N) - (sqrt(nu + (1-nu)/N) - sqrt((1-nu)/N)) x.

    Non-negative on [0, 1], vanishing only at the endpoints when nu > 0.
    """
    _check_unit(x, "x")
    _check_unit(nu_, "nu")
    if n < 2:
        raise ValueError("N must be at least 2")
    base = (1.0 - nu_) / n
    return math.sqrt(nu_ * x + base) - math.sqrt(base) - (math.sqrt(nu_ + base) - math.sqrt(base)) * x


def disturbance_weight(p_max: float, n: int) -> float:
    """1 - p_max^2 - (1 - p_max)^2/(N-1), the fidelity deficit per unit b^2."""
    return 1.0 - p_max ** 2 - (1.0 - p_max) ** 2 / (n - 1)


def minmax_avg_fidelity(p: float, p_max: float, n: int) -> float:
    _, b = ab_coefficients(nu(p, p_max, n), n)
    return 1.0 - b * b * disturbance_weight(p_max, n)


def minmax_cond_fidelity_bound(p: float, p_max: float, n: int) -> float:
    """Lower bound (a + b p_max)^2 / p on the min-max conditional fidelity."""
    if p <= 0:
        raise ValueError("p must be positive")
    a, b = ab_coefficients(nu(p, p_max, n), n)
    return (a + b * p_max) ** 2 / p


def avg_fidelity_at_pmax(p_max: float, n: int) -> float:
    # Same expression as minmax_avg_fidelity at nu = 1, written out.
    return p_max ** 2 + (1.0 - p_max) ** 2 / (n - 1)


def h_function(x: float, p_max: float, n: int) -> float:
    """[a(nu(x)) + b(nu(x)) p_max]^2 / x for x in [1/N, p_max]."""
    return minmax_cond_fidelity_bound(x, p_max, n)


def is_cond_bound_tight(p: float, p_max: float, n: int, atol: float = 1e-12) -> bool:
    return n <= 5 or abs(p - 1.0 / n) <= atol or abs(p - p_max) <= atol


def bounds(p: float, p_max: float, n: int) -> BoundSet:
    return BoundSet(
        minmax_avg_fidelity=minmax_avg_fidelity(p, p_max, n),
        minmax_cond_fidelity_bound=minmax_cond_fidelity_bound(p, p_max, n),
        is_cond_bound_tight=is_cond_bound_tight(p, p_max, n),
    )


def insecurity_point(p_max: float, n: int):
    """Success probability with nu = 1/2 and both fidelity bounds there."""
    if n < 2 or not (1.0 / n < p_max <= 1.0):
        raise ValueError(f"need 1/N < p_max <= 1, got p_max={p_max}, N={n}")
    p = (p_max * n + 1.0) / (2.0 * n)
    return p, bounds(p, p_max, n)


def asymptotic_fidelity(p: float, p_max: float) -> float:
    """Large-N limit 1 - p (1 - p_max^2)/p_max of the min-max average fidelity."""
    if not (0.0 < p <= p_max <= 1.0):
        raise ValueError(f"need 0 < p <= p_max <= 1, got p={p}, p_max={p_max}")
    return 1.0 - p * (1.0 - p_max ** 2) / p_max
