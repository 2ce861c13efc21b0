"""Tanh-sinh quadrature on the two half-lines z = t +/- u.

Every integral the package needs has the form

    sum over sides of  amp_side * int_0^U u^(gamma+power) e^(-u^2 -/+ t u) f(t +/- u) du

where the u^gamma endpoint singularity sits at u = 0. The double-exponential
map u = U / (1 + e^(-pi sinh(tau))) clusters nodes at both ends, so the
singularity needs no special casing. Integrands are vector valued: one sweep
over the nodes fills every component, which keeps the ladder and
orthogonality checks to a single pass per evaluation point.
"""

import math
from functools import lru_cache
from typing import Callable, List, Sequence

import mpmath as mp

from .errors import QuadratureNonConvergence
from .models import NumericPolicy, WeightParams, to_mpf
from .weight import half_line_factor

FIRST_LEVEL = 3
GUARD_BITS = 32
SIDES = (1, -1)

Integrand = Callable[..., Sequence]


def tail_cutoff(params: WeightParams, power: int, degree: int, bits: int) -> float:
    """Upper limit U beyond which the integrand is negligible at `bits`.

    Steps U until u^(gamma+power) (|t|+u)^degree e^(-u^2+|t|u) times the
    largest amplitude falls below 2^-(bits+16) and is still decreasing.
    """
    t = abs(float(params.t))
    a = float(params.gamma) + power
    scale = math.log1p(abs(float(params.A)) + abs(float(params.right_amplitude)))
    target = -(bits + 16) * math.log(2)

    def log_size(u):
        return degree * math.log(t + u) + a * math.log(u) - u * u + t * u + scale

    def slope(u):
        return degree / (t + u) + a / u - 2 * u + t

    u = max(1.0, t)
    while log_size(u) >= target or slope(u) >= 0:
        u += 0.25
    return u


def _tau_max(a: float, U: float, bits: int) -> float:
    # the transformed integrand decays like u^a * U e^(-pi sinh tau) near u = 0
    budget = (bits + GUARD_BITS) * math.log(2) + abs(a * math.log(U)) + 10
    return math.asinh(budget / (a * math.pi))


@lru_cache(maxsize=512)
def _level_nodes(params: WeightParams, side: int, power: int, U: float, level: int, bits: int):
    """Nodes first used at `level`, as (u, weight * jacobian * h) pairs."""
    a = float(params.gamma) + power + 1
    tau_max = _tau_max(a, U, bits)
    J = int(math.ceil(tau_max * 2**level))
    if level == FIRST_LEVEL:
        indices = range(-J, J + 1)
    else:
        indices = range(-J + (1 - J % 2), J + 1, 2)

    nodes = []
    with mp.workprec(bits):
        h = mp.ldexp(1, -level)
        span = mp.mpf(U)
        half_pi = mp.pi / 2
        for j in indices:
            tau = j * h
            x = half_pi * mp.sinh(tau)
            u = span / (1 + mp.exp(-2 * x))
            if u == 0 or u == span:
                continue
            jac = span * half_pi * mp.cosh(tau) / (2 * mp.cosh(x) ** 2)
            factor = half_line_factor(u, params, side, power)
            if factor == 0:
                continue
            nodes.append((u, factor * jac * h))
    return tuple(nodes)


def integrate_halflines(
    f: Integrand,
    params: WeightParams,
    policy: NumericPolicy,
    *,
    power: int = 0,
    degree: int = 0,
    tol=None,
    what: str = "integral",
) -> List:
    """Integrate the vector integrand f(y, u, side) against the weight.

    `power` multiplies the weight by u^power = |y-t|^power (use -1 for the
    1/(y-t) kernels, with `side` supplying the sign). `degree` bounds the
    polynomial growth of f for the tail cutoff. Refinement halves the
    tanh-sinh step until every component changes by at most tol times its
    absolute integral; tol defaults to quad_tol/64.
    """
    if float(params.gamma) + power <= -1:
        raise ValueError(f"u^(gamma{power:+d}) is not integrable at u = 0")

    bits = policy.precision_bits + GUARD_BITS
    U = tail_cutoff(params, power, degree, bits)

    with mp.workprec(bits):
        t = to_mpf(params.t)
        target = to_mpf(policy.quad_tol) / 64 if tol is None else mp.mpf(tol)
        totals = None
        magnitudes = None
        previous = None
        worst = mp.inf

        for level in range(FIRST_LEVEL, policy.max_quad_level + 1):
            level_sum = None
            level_abs = None
            for side in SIDES:
                for u, wq in _level_nodes(params, side, power, U, level, bits):
                    values = f(t + side * u, u, side)
                    if level_sum is None:
                        level_sum = [mp.mpf(0)] * len(values)
                        level_abs = [mp.mpf(0)] * len(values)
                    for i, v in enumerate(values):
                        term = wq * v
                        level_sum[i] += term
                        level_abs[i] += abs(term)

            if level_sum is None:
                raise QuadratureNonConvergence(what, mp.inf, target)

            if totals is None:
                totals, magnitudes = level_sum, level_abs
                continue

            previous = totals
            totals = [s / 2 + v for s, v in zip(totals, level_sum)]
            magnitudes = [s / 2 + v for s, v in zip(magnitudes, level_abs)]

            worst = mp.mpf(0)
            for new, old, scale in zip(totals, previous, magnitudes):
                change = abs(new - old)
                if change == 0:
                    continue
                ratio = change / scale if scale else mp.inf
                worst = max(worst, ratio)
            if worst <= target:
                return totals

    raise QuadratureNonConvergence(what, worst, target)


def clear_node_cache() -> None:
    _level_nodes.cache_clear()
