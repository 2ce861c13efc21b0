"""Ladder coefficients A_n(z), B_n(z) and the checks built on them.

For this weight (v0'(z) - v0'(y))/(z - y) = 2, and splitting the singular
kernel by partial fractions gives

    A_n(z) = 2 + (R_n + gamma K_n(z)) / (z - t)
    B_n(z) = (r_n + gamma L_n(z)) / (z - t)

with the Cauchy transforms K_n = (1/h_n) int P_n^2 w/(z-y) and
L_n = (1/h_{n-1}) int P_n P_{n-1} w/(z-y). The R_n, r_n pieces come from
their singular integrals when gamma > 0; otherwise the integrals diverge and
the values 2 alpha_n - t, 2 beta_n - n are substituted and flagged.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import mpmath as mp

from .errors import InvalidParameters, NotIntegrable
from .models import (
    AuxQuantities,
    IdentityId,
    LadderSample,
    NumericPolicy,
    OdeMethod,
    RecurrenceData,
    ResidualReport,
    WeightParams,
    to_mpf,
)
from .orthopoly import aux_by_quadrature_all, eval_monic_all, eval_monic_derivatives
from .pipeline import HankelPipeline
from .quadrature import integrate_halflines
from .weight import v0_prime

LARGE_Z_RADII = (10**3, 10**4)
LADDER_TOL_FACTOR = 100
ODE_TOL_FACTOR = 10**3


@dataclass(frozen=True)
class LadderTerms:
    """A_k, B_k and their z-derivatives for k = 0..n_hi at one z."""

    z: complex
    A: Tuple
    B: Tuple
    dA: Tuple
    dB: Tuple
    substituted: bool


def _z_label(z) -> str:
    z = complex(z)
    return f"z={z.real:g}{z.imag:+g}j"


def _check_point(z, params: WeightParams):
    z = mp.mpc(z)
    if mp.im(z) == 0:
        raise InvalidParameters("ladder evaluation needs Im z != 0")
    if z == to_mpf(params.t):
        raise InvalidParameters("ladder evaluation needs z != t")
    return z


def ladder_terms(
    z,
    n_hi: int,
    rec: RecurrenceData,
    params: WeightParams,
    policy: NumericPolicy,
    R: Optional[Sequence] = None,
    r: Optional[Sequence] = None,
) -> LadderTerms:
    """One quadrature sweep over the Cauchy kernels for every k <= n_hi.

    R and r default to their singular integrals (gamma > 0) or to the
    recurrence values (gamma <= 0, flagged as substituted).
    """
    if not 0 <= n_hi <= rec.n_max:
        raise InvalidParameters(f"n_hi={n_hi} outside 0..{rec.n_max}")
    substituted = False
    if R is None or r is None:
        if params.gamma > 0:
            R, r = aux_by_quadrature_all(n_hi, rec, params, policy)
        else:
            with mp.workprec(rec.precision_bits):
                t = to_mpf(params.t)
                R = [2 * a - t for a in rec.alpha]
                r = [mp.mpf(0)] + [2 * rec.beta[k] - k for k in range(1, rec.n_max + 1)]
            substituted = True

    with policy.workprec():
        z = _check_point(z, params)
    count = n_hi + 1

    def integrand(y, u, side):
        P = eval_monic_all(y, n_hi, rec)
        kernel = 1 / (z - y)
        dkernel = -kernel * kernel
        squares = [p * p for p in P]
        cross = [P[k] * P[k - 1] for k in range(1, count)]
        return (
            [s * kernel for s in squares]
            + [c * kernel for c in cross]
            + [s * dkernel for s in squares]
            + [c * dkernel for c in cross]
        )

    values = integrate_halflines(
        integrand, params, policy, degree=2 * n_hi, what=f"Cauchy transforms at {_z_label(z)}"
    )

    with policy.workprec():
        gamma = to_mpf(params.gamma)
        zt = z - to_mpf(params.t)
        h = rec.h
        m = count - 1
        K = [values[k] / h[k] for k in range(count)]
        L = [mp.mpf(0)] + [values[count + k - 1] / h[k - 1] for k in range(1, count)]
        dK = [values[count + m + k] / h[k] for k in range(count)]
        dL = [mp.mpf(0)] + [values[2 * count + m + k - 1] / h[k - 1] for k in range(1, count)]

        A, B, dA, dB = [], [], [], []
        for k in range(count):
            a_num = R[k] + gamma * K[k]
            b_num = r[k] + gamma * L[k]
            A.append(2 + a_num / zt)
            B.append(b_num / zt)
            dA.append(gamma * dK[k] / zt - a_num / zt**2)
            dB.append(gamma * dL[k] / zt - b_num / zt**2)
        # B_0 vanishes identically: there is no P_{-1} term
        B[0] = mp.mpc(0)
        dB[0] = mp.mpc(0)

    return LadderTerms(z=complex(z), A=tuple(A), B=tuple(B), dA=tuple(dA), dB=tuple(dB), substituted=substituted)


def eval_AB(
    z, n: int, rec: RecurrenceData, params: WeightParams, policy: NumericPolicy
) -> LadderSample:
    """A_n(z), B_n(z) with A_{n-1}(z) and B_{n+1}(z); needs n <= n_max - 1."""
    if not 0 <= n <= rec.n_max - 1:
        raise InvalidParameters(f"n={n} outside 0..{rec.n_max - 1}")
    terms = ladder_terms(z, n + 1, rec, params, policy)
    return _sample(terms, n)


def _sample(terms: LadderTerms, n: int) -> LadderSample:
    return LadderSample(
        z=mp.mpc(terms.z),
        n=n,
        An=terms.A[n],
        Bn=terms.B[n],
        An_prev=terms.A[n - 1] if n > 0 else mp.mpc(0),
        Bn_next=terms.B[n + 1],
        substituted=terms.substituted,
    )


def _cached_terms(pipeline: HankelPipeline, z, t=None) -> LadderTerms:
    snap = pipeline.snapshot(t)

    def compute():
        if snap.params.gamma > 0:
            R, r = pipeline.aux_quadrature(snap.t)
        else:
            R = r = None
        return ladder_terms(z, pipeline.n_max, snap.rec, snap.params, snap.policy, R, r)

    return pipeline.memo(("ladder", snap.t, complex(z)), compute)


def _notes(terms: LadderTerms, extra: str = "") -> str:
    parts = [_z_label(terms.z)]
    if terms.substituted:
        parts.append("R_n, r_n substituted from alpha_n, beta_n")
    if extra:
        parts.append(extra)
    return "; ".join(parts)


def _require_inner(n: int, pipeline: HankelPipeline) -> None:
    if not 0 <= n <= pipeline.n_max - 1:
        raise InvalidParameters(f"ladder checks need 0 <= n <= {pipeline.n_max - 1}, got {n}")


def check_lowering(z, n: int, pipeline: HankelPipeline, t=None) -> ResidualReport:
    """P_n' = beta_n A_n P_{n-1} - B_n P_n at z."""
    _require_inner(n, pipeline)
    snap = pipeline.snapshot(t)
    terms = _cached_terms(pipeline, z, t)
    with snap.policy.workprec():
        zc = mp.mpc(terms.z)
        P = eval_monic_all(zc, n, snap.rec)
        _, dP, _ = eval_monic_derivatives(zc, n, snap.rec)
        previous = P[n - 1] if n > 0 else 0
        residual = dP - snap.rec.beta[n] * terms.A[n] * previous + terms.B[n] * P[n]
        residual = abs(residual) / (1 + abs(dP))
        tolerance = LADDER_TOL_FACTOR * to_mpf(pipeline.policy.quad_tol)
    return ResidualReport.judge(
        IdentityId.LADDER_LOWERING, n, snap.t, residual, tolerance, _notes(terms)
    )


def _v0_weighted(pipeline: HankelPipeline, t=None) -> List:
    """(1/h) int P_k^2 v0' w and (1/h_{k-1}) int P_k P_{k-1} v0' w, k <= n_max."""
    snap = pipeline.snapshot(t)
    n_hi = pipeline.n_max

    def compute():
        rec = snap.rec

        def integrand(y, u, side):
            P = eval_monic_all(y, n_hi, rec)
            slope = v0_prime(y, snap.params)
            return [slope * p * p for p in P] + [
                slope * P[k] * P[k - 1] for k in range(1, n_hi + 1)
            ]

        values = integrate_halflines(
            integrand, snap.params, snap.policy, degree=2 * n_hi + 1, what="v0'-weighted norms"
        )
        with snap.policy.workprec():
            squares = [values[k] / rec.h[k] for k in range(n_hi + 1)]
            cross = [mp.mpf(0)] + [values[n_hi + k] / rec.h[k - 1] for k in range(1, n_hi + 1)]
        return squares, cross

    return pipeline.memo(("v0_weighted", snap.t), compute)


def check_corollary(n: int, pipeline: HankelPipeline, t=None) -> List[ResidualReport]:
    """gamma int P_n^2 w/(y-t) = int P_n^2 v0' w and its P_n P_{n-1} companion.

    Both sides are integrated independently. Raises NotIntegrable for
    gamma <= 0, where the left sides diverge.
    """
    snap = pipeline.snapshot(t)
    if snap.params.gamma <= 0:
        raise NotIntegrable(
            f"corollary identities need gamma > 0, got gamma = {snap.params.gamma}"
        )
    if not 0 <= n <= pipeline.n_max:
        raise InvalidParameters(f"n={n} outside 0..{pipeline.n_max}")
    R_quad, r_quad = pipeline.aux_quadrature(snap.t)
    squares, cross = _v0_weighted(pipeline, snap.t)

    reports = []
    with snap.policy.workprec():
        tolerance = LADDER_TOL_FACTOR * to_mpf(pipeline.policy.quad_tol)
        residual = abs(R_quad[n] - squares[n]) / (1 + abs(squares[n]))
        reports.append(
            ResidualReport.judge(IdentityId.LADDER_NORM_IDENTITY, n, snap.t, residual, tolerance)
        )
        if n >= 1:
            rhs = cross[n] - n
            residual = abs(r_quad[n] - rhs) / (1 + abs(rhs))
            reports.append(
                ResidualReport.judge(IdentityId.LADDER_CROSS_IDENTITY, n, snap.t, residual, tolerance)
            )
    return reports


def check_compatibility(z, n: int, pipeline: HankelPipeline, t=None) -> List[ResidualReport]:
    """The sum, difference and quadratic compatibility conditions at z.

    The quadratic form sums A_k over k < n from the same sweep that
    produced A_n, so it costs no extra quadrature.
    """
    _require_inner(n, pipeline)
    snap = pipeline.snapshot(t)
    terms = _cached_terms(pipeline, z, t)
    rec = snap.rec
    with snap.policy.workprec():
        zc = mp.mpc(terms.z)
        A, B = terms.A, terms.B
        alpha, beta = rec.alpha[n], rec.beta[n]
        slope = v0_prime(zc, snap.params)
        A_prev = A[n - 1] if n > 0 else 0

        s1 = B[n] + B[n + 1] - (zc - alpha) * A[n] + slope
        s1_scale = 1 + abs((zc - alpha) * A[n]) + abs(slope)

        s2 = 1 + (zc - alpha) * (B[n + 1] - B[n]) - rec.beta[n + 1] * A[n + 1] + beta * A_prev
        s2_scale = 1 + abs((zc - alpha) * (B[n + 1] - B[n])) + abs(rec.beta[n + 1] * A[n + 1])

        partial = mp.fsum(A[:n]) if n else mp.mpc(0)
        s3 = B[n] ** 2 + slope * B[n] + partial - beta * A[n] * A_prev
        s3_scale = 1 + abs(B[n]) ** 2 + abs(slope * B[n]) + abs(partial) + abs(beta * A[n] * A_prev)

        tolerance = LADDER_TOL_FACTOR * to_mpf(pipeline.policy.quad_tol)

    notes = _notes(terms)
    return [
        ResidualReport.judge(IdentityId.COMPAT_SUM, n, snap.t, abs(s1) / s1_scale, tolerance, notes),
        ResidualReport.judge(IdentityId.COMPAT_DIFFERENCE, n, snap.t, abs(s2) / s2_scale, tolerance, notes),
        ResidualReport.judge(IdentityId.COMPAT_QUADRATIC, n, snap.t, abs(s3) / s3_scale, tolerance, notes),
    ]


def _circle_derivatives(z, n: int, pipeline: HankelPipeline, t=None):
    """A_n'(z), B_n'(z) by Cauchy's integral over a circle of radius |Im z|/2."""
    snap = pipeline.snapshot(t)
    if snap.params.gamma > 0:
        R, r = pipeline.aux_quadrature(snap.t)
    else:
        R = r = None

    def coefficient(which):
        def f(zeta):
            terms = ladder_terms(zeta, n, snap.rec, snap.params, snap.policy, R, r)
            return terms.A[n] if which == "A" else terms.B[n]

        return f

    with snap.policy.workprec():
        zc = mp.mpc(z)
        radius = abs(mp.im(zc)) / 2
        dA = mp.diff(coefficient("A"), zc, method="quad", radius=radius)
        dB = mp.diff(coefficient("B"), zc, method="quad", radius=radius) if n else mp.mpc(0)
    return dA, dB


def check_ode(
    z, n: int, pipeline: HankelPipeline, t=None, method: OdeMethod = OdeMethod.KERNEL
) -> ResidualReport:
    """P_n'' + Q_n P_n' + T_n P_n = 0 with Q_n, T_n built from A_n, B_n.

    OdeMethod.KERNEL differentiates the Cauchy kernels under the integral
    sign; OdeMethod.CIRCLE uses Cauchy's integral formula on a small circle.
    """
    _require_inner(n, pipeline)
    try:
        method = OdeMethod(method)
    except ValueError:
        raise InvalidParameters(f"unknown derivative method {method!r}") from None
    snap = pipeline.snapshot(t)
    terms = _cached_terms(pipeline, z, t)
    if method is OdeMethod.CIRCLE:
        dA, dB = _circle_derivatives(z, n, pipeline, t)
    else:
        dA, dB = terms.dA[n], terms.dB[n]

    with snap.policy.workprec():
        zc = mp.mpc(terms.z)
        A, B = terms.A[n], terms.B[n]
        A_prev = terms.A[n - 1] if n > 0 else 0
        beta = snap.rec.beta[n]
        slope = v0_prime(zc, snap.params)

        Q = -slope - dA / A
        T = dB - B * dA / A + beta * A * A_prev - B * B - B * slope

        P, dP, d2P = eval_monic_derivatives(zc, n, snap.rec)
        residual = d2P + Q * dP + T * P
        scale = 1 + abs(d2P) + abs(Q * dP) + abs(T * P)
        tolerance = ODE_TOL_FACTOR * to_mpf(pipeline.policy.quad_tol)

    return ResidualReport.judge(
        IdentityId.LADDER_ODE, n, snap.t, abs(residual) / scale, tolerance,
        _notes(terms, f"{method.value} derivatives"),
    )


def large_z_series(z, n: int, rec: RecurrenceData, aux: AuxQuantities, params: WeightParams):
    """Three-term large-z expansions of A_n(z) and B_n(z)."""
    t = to_mpf(params.t)
    gamma = to_mpf(params.gamma)
    R, r = aux.R[n], aux.r[n]
    alpha, beta = rec.alpha[n], rec.beta[n]
    A = 2 + R / z + (gamma + t * R) / z**2 + (gamma * alpha + gamma * t + t * t * R) / z**3
    B = r / z + t * r / z**2 + (gamma * beta + t * t * r) / z**3
    return A, B


def check_large_z(
    n: int, pipeline: HankelPipeline, t=None, radii: Sequence = LARGE_Z_RADII
) -> List[ResidualReport]:
    """Remainders of the large-z expansions at two radii on the imaginary axis.

    The remainder is O(|z|^-4), so |z|^4 times the error at the outer radius
    may not exceed twice its value at the inner radius, up to quadrature
    noise scaled by the same |z|^4.
    """
    _require_inner(n, pipeline)
    snap = pipeline.snapshot(t)
    inner, outer = radii
    points = [complex(0, inner), complex(0, outer)]
    samples = [_cached_terms(pipeline, z, t) for z in points]

    reports = []
    with snap.policy.workprec():
        noise = LADDER_TOL_FACTOR * to_mpf(pipeline.policy.quad_tol)
        scaled = {"A": [], "B": []}
        for radius, terms in zip((inner, outer), samples):
            zc = mp.mpc(terms.z)
            A_series, B_series = large_z_series(zc, n, snap.rec, snap.aux, snap.params)
            weight = mp.mpf(radius) ** 4
            scaled["A"].append(abs(terms.A[n] - A_series) * weight)
            scaled["B"].append(abs(terms.B[n] - B_series) * weight)

        outer_weight = mp.mpf(outer) ** 4
        notes = f"|z|={inner:g},{outer:g}"
        for key, identity in (("A", IdentityId.LARGE_Z_A), ("B", IdentityId.LARGE_Z_B)):
            first, second = scaled[key]
            tolerance = 2 * first + noise * outer_weight
            reports.append(ResidualReport.judge(identity, n, snap.t, second, tolerance, notes))
    return reports
