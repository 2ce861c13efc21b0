"""Moments mu_k = int z^k w(z) dz by two independent backends."""

import json
import math
from dataclasses import replace
from pathlib import Path
from typing import List, NamedTuple, Tuple

import mpmath as mp

from .errors import BackendDisagreement, InvalidParameters, PrecisionLoss, QuadratureNonConvergence
from .models import Backend, MomentTable, NumericPolicy, WeightParams, to_mpf
from .quadrature import GUARD_BITS, integrate_halflines, tail_cutoff


class BaseIntegrals(NamedTuple):
    """I_k^(+/-) = int_0^oo u^(gamma+k) e^(-u^2 -/+ t u) du for k = 0, 1."""

    I0_minus: mp.mpf
    I1_minus: mp.mpf
    I0_plus: mp.mpf
    I1_plus: mp.mpf


def _quad_degree(bits: int) -> int:
    return int(4 + max(0.0, math.log2(bits / 30.0))) + 2


def _base_integrals(params: WeightParams, policy: NumericPolicy):
    """Base integrals plus their absolute error estimates, at guard precision."""
    bits = policy.precision_bits + GUARD_BITS
    U = tail_cutoff(params, 1, 0, bits)
    quad_tol = to_mpf(policy.quad_tol)
    values = {}
    errors = {}
    with mp.workprec(bits):
        t = to_mpf(params.t)
        gamma = to_mpf(params.gamma)
        floor = mp.ldexp(1, -bits)
        for side, label in ((-1, "minus"), (1, "plus")):
            for k in (0, 1):

                def integrand(u, k=k, side=side):
                    return mp.power(u, gamma + k) * mp.exp(-u * u - side * t * u)

                value, err = mp.quad(
                    integrand, [0, 1, U], error=True, maxdegree=_quad_degree(bits)
                )
                if err > quad_tol * abs(value):
                    raise QuadratureNonConvergence(
                        f"I{k}_{label}", err / abs(value), quad_tol
                    )
                values[(label, k)] = value
                errors[(label, k)] = max(err, floor * abs(value))

    base = BaseIntegrals(
        values[("minus", 0)], values[("minus", 1)], values[("plus", 0)], values[("plus", 1)]
    )
    return base, errors


def base_integrals(params: WeightParams, policy: NumericPolicy) -> BaseIntegrals:
    """(I0-, I1-, I0+, I1+) by tanh-sinh quadrature at working precision."""
    base, _ = _base_integrals(params, policy)
    return base


def _upward(i0, i1, err0, err1, gamma, t, side: int, count: int):
    """I_{k+2} = ((gamma+k+1) I_k - side*t I_{k+1}) / 2 with a running error bound."""
    values = [i0, i1]
    bounds = [err0, err1]
    ulp = mp.ldexp(1, -mp.mp.prec)
    abs_t = abs(t)
    for k in range(count - 2):
        a = (gamma + k + 1) * values[k]
        b = side * t * values[k + 1]
        values.append((a - b) / 2)
        bounds.append(
            ((gamma + k + 1) * bounds[k] + abs_t * bounds[k + 1]) / 2
            + ulp * (abs(a) + abs(b))
        )
    return values[:count], bounds[:count]


def moments_recurrence(N: int, params: WeightParams, policy: NumericPolicy) -> MomentTable:
    """mu_0..mu_2N from the base integrals, the upward recurrence and binomial assembly."""
    if N < 0:
        raise InvalidParameters(f"N must be >= 0, got {N}")
    count = 2 * N + 1
    p = policy.precision_bits
    base, errors = _base_integrals(params, policy)

    with mp.workprec(p + GUARD_BITS):
        t = to_mpf(params.t)
        gamma = to_mpf(params.gamma)
        right = to_mpf(params.right_amplitude)
        left = to_mpf(params.left_amplitude)
        ulp = mp.ldexp(1, -mp.mp.prec)

        plus, plus_err = _upward(
            base.I0_plus, base.I1_plus, errors[("plus", 0)], errors[("plus", 1)],
            gamma, t, 1, max(count, 2),
        )
        minus, minus_err = _upward(
            base.I0_minus, base.I1_minus, errors[("minus", 0)], errors[("minus", 1)],
            gamma, t, -1, max(count, 2),
        )

        t_powers = [mp.mpf(1)]
        for _ in range(count):
            t_powers.append(t_powers[-1] * t)

        moments = []
        bounds = []
        for k in range(count):
            terms = []
            bound = mp.mpf(0)
            for j in range(k + 1):
                c = math.comb(k, j) * t_powers[k - j]
                right_term = right * c * plus[j]
                left_term = left * c * minus[j] * (-1 if j % 2 else 1)
                terms.append(right_term)
                terms.append(left_term)
                bound += abs(right * c) * plus_err[j] + abs(left * c) * minus_err[j]
            mu = mp.fsum(terms)
            bound += ulp * mp.fsum(abs(x) for x in terms)
            moments.append(mu)
            bounds.append(bound)

        limit = mp.ldexp(1, -(p // 2))
        for k, (mu, bound) in enumerate(zip(moments, bounds)):
            if k % 2 and k + 1 < count:
                scale = mp.sqrt(abs(moments[k - 1] * moments[k + 1]))
            else:
                scale = abs(mu)
            if scale == 0:
                continue
            rel = bound / scale
            if rel > limit:
                lost = float(mp.log(rel, 2)) + p
                raise PrecisionLoss(f"moment assembly at k={k}", lost, p)

    return _finish(moments, params, policy, Backend.RECURRENCE)


def moments_quadrature(N: int, params: WeightParams, policy: NumericPolicy) -> MomentTable:
    """mu_0..mu_2N by direct quadrature of z^k w(z) on both half-lines."""
    if N < 0:
        raise InvalidParameters(f"N must be >= 0, got {N}")
    count = 2 * N + 1

    def powers(y, u, side):
        out = [mp.mpf(1)]
        for _ in range(count - 1):
            out.append(out[-1] * y)
        return out

    moments = integrate_halflines(
        powers, params, policy, degree=count - 1, what=f"moments up to k={count - 1}"
    )
    return _finish(moments, params, policy, Backend.QUADRATURE)


def _finish(moments, params, policy, backend) -> MomentTable:
    with policy.workprec():
        rounded = tuple(+mu for mu in moments)
    if not all(mp.isfinite(mu) for mu in rounded):
        raise PrecisionLoss("moments: non-finite entry", policy.precision_bits, policy.precision_bits)
    if rounded[0] <= 0:
        raise PrecisionLoss("moments: mu_0 is not positive", policy.precision_bits, policy.precision_bits)
    return MomentTable(params=params, policy=policy, moments=rounded, backend=backend)


def disagreement(first: MomentTable, second: MomentTable) -> Tuple[mp.mpf, int]:
    """max_k |a_k - b_k| / (1 + |b_k|) and the index where it occurs."""
    bits = max(first.policy.precision_bits, second.policy.precision_bits)
    worst, where = mp.mpf(0), 0
    with mp.workprec(bits):
        for k, (a, b) in enumerate(zip(first.moments, second.moments)):
            d = abs(a - b) / (1 + abs(b))
            if d > worst:
                worst, where = d, k
    return worst, where


def cross_check(N: int, params: WeightParams, policy: NumericPolicy, escalate: bool = True) -> MomentTable:
    """Run both backends; tag the recurrence table CrossChecked when they agree.

    On disagreement the precision is escalated once and both are rerun,
    unless escalate is False and the caller handles escalation itself.
    """
    attempts = [policy]
    if escalate and policy.precision_bits * policy.escalation_factor <= policy.max_precision_bits:
        attempts.append(policy.escalated())

    worst, where, limit = None, 0, None
    for attempt in attempts:
        recurrence = moments_recurrence(N, params, attempt)
        quadrature = moments_quadrature(N, params, attempt)
        worst, where = disagreement(recurrence, quadrature)
        with attempt.workprec():
            limit = 32 * to_mpf(attempt.quad_tol)
        if worst < limit:
            return replace(recurrence, backend=Backend.CROSS_CHECKED)

    raise BackendDisagreement(float(worst), float(limit), where)


def save_moment_table(table: MomentTable, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(table.to_dict(), f, indent=2)
