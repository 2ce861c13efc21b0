"""Recurrence coefficients, Hankel determinants and auxiliary quantities."""

import json
from pathlib import Path
from typing import List, Sequence, Tuple

import mpmath as mp

from .errors import InvalidParameters, NotIntegrable, PrecisionExhausted
from .models import (
    AuxQuantities,
    Backend,
    IdentityId,
    MomentTable,
    NumericPolicy,
    RecurrenceData,
    ResidualReport,
    WeightParams,
    to_mpf,
)
from .quadrature import integrate_halflines

DETERMINANT_ORACLE_MAX = 8


def chebyshev_norms(moments: Sequence, count: int) -> Tuple[List, List]:
    """Chebyshev's algorithm on ordinary moments: h_0..h_{count-1}, alpha_0..alpha_{count-2}.

    sigma[k][l] = int P_k(y) y^l w(y) dy is built row by row; h_k = sigma[k][k].
    """
    if len(moments) < 2 * count - 1:
        raise InvalidParameters(f"need {2 * count - 1} moments, have {len(moments)}")
    width = len(moments)
    previous = [mp.mpf(0)] * width
    current = list(moments)
    h = [current[0]]
    alpha = []
    beta_prev = mp.mpf(0)
    for k in range(count - 1):
        a_k = current[k + 1] / current[k] - (previous[k] / previous[k - 1] if k else 0)
        alpha.append(a_k)
        nxt = [mp.mpf(0)] * width
        for l in range(k + 1, width - k - 1):
            nxt[l] = current[l + 1] - a_k * current[l] - beta_prev * previous[l]
        beta_prev = nxt[k + 1] / current[k]
        previous, current = current, nxt
        h.append(current[k + 1])
    return h, alpha


def recurrence_from_moments(
    table: MomentTable, n_max: int, require_cross_checked: bool = True
) -> RecurrenceData:
    """Factor the (n_max+2)-square Hankel moment matrix and read off the recurrence.

    Only tables confirmed by both moment backends are accepted unless
    require_cross_checked is False.

    With H = L L^T, h_k = L_kk^2 and L_{k+1,k}/L_kk = -p(k+1), so alpha_k is a
    difference of consecutive sub-diagonal ratios and beta_k = h_k/h_{k-1}.
    Chebyshev's algorithm on the same moments cross-checks every h_k.
    """
    size = n_max + 2
    if n_max < 0 or len(table.moments) < 2 * size - 1:
        raise InvalidParameters(
            f"n_max={n_max} needs {2 * size - 1} moments, table has {len(table.moments)}"
        )
    if require_cross_checked and table.backend is not Backend.CROSS_CHECKED:
        raise InvalidParameters(
            f"moment table from the {table.backend.value} backend has not been cross-checked"
        )
    policy = table.policy
    p = policy.precision_bits

    with policy.workprec():
        mu = table.moments
        H = mp.matrix(size, size)
        for i in range(size):
            for j in range(size):
                H[i, j] = mu[i + j]
        try:
            L = mp.cholesky(H, tol=mp.ldexp(mu[0], -p))
        except (ValueError, ZeroDivisionError) as exc:
            raise PrecisionExhausted(
                f"Hankel moment matrix of order {size} is not positive definite at {p} bits"
            ) from exc

        h = [L[k, k] ** 2 for k in range(size)]
        ratio = [L[k + 1, k] / L[k, k] for k in range(size - 1)]

        limit = p / 2
        for k in range(size):
            lost = float(mp.log(H[k, k] / h[k], 2))
            if lost > limit:
                raise PrecisionExhausted(
                    f"pivot h_{k} lost {lost:.1f} of {p} bits in the factorization"
                )

        cheb_h, _ = chebyshev_norms(mu, size)
        tolerance = mp.ldexp(1, -(p // 2))
        for k in range(size):
            if abs(cheb_h[k] - h[k]) > tolerance * h[k]:
                raise PrecisionExhausted(
                    f"h_{k}: factorization and Chebyshev algorithm disagree at {p} bits"
                )

        alpha = [ratio[0]] + [ratio[k] - ratio[k - 1] for k in range(1, n_max + 1)]
        beta = [mp.mpf(0)] + [h[k] / h[k - 1] for k in range(1, size)]
        sub_leading = [mp.mpf(0)]
        for k in range(size - 1):
            sub_leading.append(sub_leading[-1] - alpha[k])
        D = [mp.mpf(1)]
        for k in range(size - 1):
            D.append(D[-1] * h[k])

    return RecurrenceData(
        params=table.params,
        precision_bits=p,
        n_max=n_max,
        h=tuple(h),
        alpha=tuple(alpha),
        beta=tuple(beta),
        p=tuple(sub_leading),
        D=tuple(D),
    )


def eval_monic(z, n: int, rec: RecurrenceData):
    """P_n(z) by the forward three-term recurrence."""
    if not 0 <= n <= rec.n_max + 1:
        raise InvalidParameters(f"degree {n} outside 0..{rec.n_max + 1}")
    prev, cur = 0, mp.mpf(1)
    for k in range(n):
        prev, cur = cur, (z - rec.alpha[k]) * cur - rec.beta[k] * prev
    return cur


def eval_monic_all(z, n: int, rec: RecurrenceData) -> List:
    """[P_0(z), ..., P_n(z)]."""
    values = [mp.mpf(1)]
    prev = 0
    for k in range(n):
        values.append((z - rec.alpha[k]) * values[-1] - rec.beta[k] * prev)
        prev = values[-2]
    return values


def eval_monic_derivatives(z, n: int, rec: RecurrenceData):
    """(P_n, P_n', P_n'') from the differentiated recurrence."""
    if not 0 <= n <= rec.n_max + 1:
        raise InvalidParameters(f"degree {n} outside 0..{rec.n_max + 1}")
    p0, p1 = 0, mp.mpf(1)
    d0, d1 = 0, 0
    s0, s1 = 0, 0
    for k in range(n):
        shift = z - rec.alpha[k]
        b = rec.beta[k]
        p0, p1, d0, d1, s0, s1 = (
            p1,
            shift * p1 - b * p0,
            d1,
            p1 + shift * d1 - b * d0,
            s1,
            2 * d1 + shift * s1 - b * s0,
        )
    return p1, d1, s1


def aux_from_recurrence(rec: RecurrenceData, t) -> AuxQuantities:
    """R_n = 2 alpha_n - t, r_n = 2 beta_n - n, sigma_n = p(n) + n t, sigma-hat_n = -sum R_j."""
    with mp.workprec(rec.precision_bits):
        tm = to_mpf(t)
        R = [2 * a - tm for a in rec.alpha]
        r = [mp.mpf(0)] + [2 * rec.beta[n] - n for n in range(1, rec.n_max + 1)]
        sigma = [rec.p[n] + n * tm for n in range(rec.n_max + 1)]
        sigma_hat = [mp.mpf(0)]
        for n in range(rec.n_max):
            sigma_hat.append(sigma_hat[-1] - R[n])
    return AuxQuantities(
        t=rec.params.t,
        R=tuple(R),
        r=tuple(r),
        sigma=tuple(sigma),
        sigma_hat=tuple(sigma_hat),
    )


def _require_positive_gamma(params: WeightParams, what: str) -> None:
    if params.gamma <= 0:
        raise NotIntegrable(
            f"{what}: |y-t|^(gamma-1) is not integrable at y = t for gamma = {params.gamma}"
        )


def aux_by_quadrature_all(n_hi: int, rec: RecurrenceData, params: WeightParams, policy: NumericPolicy):
    """R_k, r_k for k = 0..n_hi from their defining singular integrals.

    R_k = (gamma/h_k) int P_k^2 w/(y-t), r_k = (gamma/h_{k-1}) int P_k P_{k-1} w/(y-t).
    """
    _require_positive_gamma(params, "aux_by_quadrature")
    if n_hi > rec.n_max + 1:
        raise InvalidParameters(f"degree {n_hi} outside 0..{rec.n_max + 1}")

    def integrand(y, u, side):
        P = eval_monic_all(y, n_hi, rec)
        out = [side * P[k] * P[k] for k in range(n_hi + 1)]
        out += [side * P[k] * P[k - 1] for k in range(1, n_hi + 1)]
        return out

    values = integrate_halflines(
        integrand, params, policy, power=-1, degree=2 * n_hi, what="R_n, r_n integrals"
    )
    with policy.workprec():
        gamma = to_mpf(params.gamma)
        R = [gamma * values[k] / rec.h[k] for k in range(n_hi + 1)]
        r = [mp.mpf(0)] + [
            gamma * values[n_hi + k] / rec.h[k - 1] for k in range(1, n_hi + 1)
        ]
    return R, r


def aux_by_quadrature(n: int, rec: RecurrenceData, params: WeightParams, policy: NumericPolicy):
    """(R_n, r_n) by direct quadrature; refuses gamma <= 0."""
    R, r = aux_by_quadrature_all(n, rec, params, policy)
    return R[n], r[n]


def hankel_determinant_oracle(table: MomentTable, n: int):
    """det(mu_{i+j})_{i,j<n} by LU elimination; small n only."""
    if not 1 <= n <= DETERMINANT_ORACLE_MAX:
        raise InvalidParameters(f"determinant oracle is limited to 1 <= n <= {DETERMINANT_ORACLE_MAX}")
    if len(table.moments) < 2 * n - 1:
        raise InvalidParameters(f"table too short for a {n}x{n} determinant")
    with table.policy.workprec():
        H = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                H[i, j] = table.moments[i + j]
        return mp.det(H)


def check_orthogonality(
    rec: RecurrenceData,
    params: WeightParams,
    policy: NumericPolicy,
    n_hi: int = 6,
    table: MomentTable = None,
) -> List[ResidualReport]:
    """Orthogonality, norms and (given the table) determinants as residual reports."""
    n_hi = min(n_hi, rec.n_max)

    def integrand(y, u, side):
        P = eval_monic_all(y, n_hi, rec)
        return [P[i] * P[j] for i in range(n_hi + 1) for j in range(i, n_hi + 1)]

    values = integrate_halflines(
        integrand, params, policy, degree=2 * n_hi, what="orthogonality integrals"
    )
    reports = []
    with policy.workprec():
        tolerance = 100 * to_mpf(policy.quad_tol)
        idx = 0
        for i in range(n_hi + 1):
            for j in range(i, n_hi + 1):
                value = values[idx]
                idx += 1
                if i == j:
                    residual = abs(value - rec.h[i]) / rec.h[i]
                    reports.append(
                        ResidualReport.judge(IdentityId.NORM, i, params.t, residual, tolerance)
                    )
                else:
                    residual = abs(value) / mp.sqrt(rec.h[i] * rec.h[j])
                    reports.append(
                        ResidualReport.judge(
                            IdentityId.ORTHOGONALITY, j, params.t, residual, tolerance,
                            notes=f"m={i}",
                        )
                    )

        if table is not None:
            relative = policy.relative_tol()
            for n in range(1, min(DETERMINANT_ORACLE_MAX, rec.n_max + 1) + 1):
                oracle = hankel_determinant_oracle(table, n)
                product = mp.fprod(rec.h[:n])
                residual = max(abs(rec.D[n] - oracle), abs(product - oracle)) / abs(oracle)
                reports.append(
                    ResidualReport.judge(
                        IdentityId.DETERMINANT, n, params.t, residual, relative,
                        notes="pivots vs product vs LU determinant",
                    )
                )
    return reports


def check_aux_quadrature(
    n_hi: int, rec: RecurrenceData, aux: AuxQuantities, params: WeightParams, policy: NumericPolicy
) -> List[ResidualReport]:
    """R_n, r_n from the singular integrals against 2 alpha_n - t and 2 beta_n - n."""
    if params.gamma <= 0:
        reason = f"gamma = {float(params.gamma):g} <= 0, integrals diverge"
        return [
            ResidualReport.skip(IdentityId.AUX_R_QUAD, n, params.t, reason)
            for n in range(n_hi + 1)
        ] + [
            ResidualReport.skip(IdentityId.AUX_r_QUAD, n, params.t, reason)
            for n in range(1, n_hi + 1)
        ]

    R_quad, r_quad = aux_by_quadrature_all(n_hi, rec, params, policy)
    reports = []
    with policy.workprec():
        tolerance = 10 * to_mpf(policy.quad_tol)
        for n in range(n_hi + 1):
            residual = abs(R_quad[n] - aux.R[n]) / (1 + abs(aux.R[n]))
            reports.append(ResidualReport.judge(IdentityId.AUX_R_QUAD, n, params.t, residual, tolerance))
        for n in range(1, n_hi + 1):
            residual = abs(r_quad[n] - aux.r[n]) / (1 + abs(aux.r[n]))
            reports.append(ResidualReport.judge(IdentityId.AUX_r_QUAD, n, params.t, residual, tolerance))
    return reports


def save_recurrence(rec: RecurrenceData, aux: AuxQuantities, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = rec.to_dict()
    data["aux"] = aux.to_dict(rec.precision_bits)
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
