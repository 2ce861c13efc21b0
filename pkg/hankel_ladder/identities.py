"""Scalar identity families verified as residuals.

Algebraic relations read one snapshot and are judged against the roundoff
bound 2^-p/2. Relations with t-derivatives difference the whole pipeline at
shifted t and are judged against the finite-difference bounds. Checks that
divide by R_n or by the discrete sigma denominator report a skip instead of
failing when that quantity is below r_floor.
"""

from fractions import Fraction
from typing import Callable, List

import mpmath as mp

from .errors import DegenerateSkip, InvalidParameters
from .finite_diff import derivative, first_derivative_tol, second_derivative_tol
from .models import (
    AuxQuantities,
    FDScheme,
    IdentityId,
    RecurrenceData,
    ResidualReport,
    to_mpf,
)
from .pipeline import HankelPipeline


def _relative(lhs, rhs):
    return abs(lhs - rhs) / (1 + abs(rhs))


def _guarded(identity_id: IdentityId, n: int, t, compute: Callable[[], ResidualReport]) -> ResidualReport:
    try:
        return compute()
    except DegenerateSkip as exc:
        return ResidualReport.skip(identity_id, n, t, str(exc))


def _require_nonzero(value, floor, what: str) -> None:
    if abs(value) <= floor:
        raise DegenerateSkip(f"|{what}| = {mp.nstr(abs(value), 3)} below r_floor")


def _require_range(n: int, lo: int, hi: int, what: str) -> None:
    if not lo <= n <= hi:
        raise InvalidParameters(f"{what} needs {lo} <= n <= {hi}, got {n}")


def check_string_equations(n: int, t, aux: AuxQuantities, rec: RecurrenceData) -> List[ResidualReport]:
    """The difference relations between alpha_n, beta_n, R_n and r_n."""
    _require_range(n, 1, rec.n_max - 1, "string equations")
    p = rec.precision_bits
    with mp.workprec(p):
        tm = to_mpf(t)
        gamma = to_mpf(rec.params.gamma)
        tolerance = mp.ldexp(1, -(p // 2))
        R, r = aux.R, aux.r
        alpha, beta = rec.alpha[n], rec.beta

        checks = [
            (IdentityId.STRING_R_SUM, r[n + 1] + r[n], gamma + (tm - alpha) * R[n]),
            (
                IdentityId.STRING_R_SUM_ELIMINATED,
                r[n + 1] + r[n],
                gamma + (tm - R[n]) * R[n] / 2,
            ),
            (IdentityId.STRING_BETA_STEP, 1 - r[n] + r[n + 1], 2 * beta[n + 1] - 2 * beta[n]),
            (
                IdentityId.STRING_R_STEP,
                (tm - alpha) * (r[n + 1] - r[n]),
                beta[n + 1] * R[n + 1] - beta[n] * R[n - 1],
            ),
            (
                IdentityId.STRING_R_PARTIAL_SUM,
                mp.fsum(R[:n]),
                2 * beta[n] * (R[n - 1] + R[n]) - tm * r[n],
            ),
            (IdentityId.STRING_QUADRATIC, r[n] ** 2 - gamma * r[n], beta[n] * R[n - 1] * R[n]),
        ]
        return [
            ResidualReport.judge(identity, n, t, _relative(lhs, rhs), tolerance)
            for identity, lhs, rhs in checks
        ]


def _series(pipeline: HankelPipeline, n: int):
    """Scalar functions of t read from memoized snapshots."""

    def read(extract):
        return lambda t: pipeline.value(t, extract)

    return {
        "log_h": read(lambda s: mp.log(s.rec.h[n])),
        "log_D": read(lambda s: mp.fsum(mp.log(h) for h in s.rec.h[:n])),
        "alpha": read(lambda s: s.rec.alpha[n]),
        "beta": read(lambda s: s.rec.beta[n]),
        "p": read(lambda s: s.rec.p[n]),
        "R": read(lambda s: s.aux.R[n]),
        "r": read(lambda s: s.aux.r[n]),
        "sigma": read(lambda s: s.aux.sigma[n]),
    }


def check_t_derivatives(n: int, t, pipeline: HankelPipeline, fd: FDScheme) -> List[ResidualReport]:
    """d/dt of ln h_n, beta_n, alpha_n and p(n, t) against their closed forms."""
    _require_range(n, 1, pipeline.n_max - 1, "t-derivative identities")
    t = Fraction(t)
    fd.validate_for(pipeline.policy)
    snap = pipeline.snapshot(t)
    f = _series(pipeline, n)

    with snap.policy.workprec():
        tm = to_mpf(t)
        gamma = to_mpf(snap.params.gamma)
        R, r = snap.aux.R, snap.aux.r
        beta = snap.rec.beta[n]
        tolerance = first_derivative_tol(fd, pipeline.policy)

        d_log_h = derivative(f["log_h"], t, fd)
        d_beta = derivative(f["beta"], t, fd)
        d_alpha = derivative(f["alpha"], t, fd)
        d_R = derivative(f["R"], t, fd)
        d_p = derivative(f["p"], t, fd)

        checks = [
            (IdentityId.TDERIV_LOG_H, d_log_h, (tm - R[n]) / 2),
            (IdentityId.TDERIV_BETA, d_beta, beta / 2 * (R[n - 1] - R[n])),
            (IdentityId.TDERIV_ALPHA, d_alpha, (r[n] - r[n + 1] + 1) / 2),
            (
                IdentityId.TDERIV_ALPHA_CLOSED,
                d_alpha,
                r[n] - (tm - R[n]) * R[n] / 4 + (1 - gamma) / 2,
            ),
            (IdentityId.TDERIV_ALPHA_R, 2 * d_alpha, 1 + d_R),
            (IdentityId.TDERIV_P, d_p, r[n] - beta),
            (IdentityId.TDERIV_P_HALF, d_p, r[n] / 2 - mp.mpf(n) / 2),
        ]
        return [
            ResidualReport.judge(identity, n, t, _relative(lhs, rhs), tolerance, fd.order.value)
            for identity, lhs, rhs in checks
        ]


def check_riccati(n: int, t, pipeline: HankelPipeline, fd: FDScheme) -> List[ResidualReport]:
    """The coupled first-order system for r_n and R_n."""
    _require_range(n, 1, pipeline.n_max, "Riccati equations")
    t = Fraction(t)
    fd.validate_for(pipeline.policy)
    snap = pipeline.snapshot(t)
    f = _series(pipeline, n)

    with snap.policy.workprec():
        tm = to_mpf(t)
        gamma = to_mpf(snap.params.gamma)
        R, r = snap.aux.R[n], snap.aux.r[n]
        tolerance = first_derivative_tol(fd, pipeline.policy)

        def small_r():
            _require_nonzero(R, pipeline.policy.r_floor(), "R_n")
            d_r = derivative(f["r"], t, fd)
            rhs = (r * r - gamma * r) / R - (r + n) * R / 2
            return ResidualReport.judge(
                IdentityId.RICCATI_R_SMALL, n, t, _relative(d_r, rhs), tolerance, fd.order.value
            )

        d_R = derivative(f["R"], t, fd)
        rhs = 2 * r - (tm - R) * R / 2 - gamma
        large = ResidualReport.judge(
            IdentityId.RICCATI_R_LARGE, n, t, _relative(d_R, rhs), tolerance, fd.order.value
        )
        return [_guarded(IdentityId.RICCATI_R_SMALL, n, t, small_r), large]


def painleve_terms(R, dR, d2R, n: int, t, gamma) -> List:
    """Terms of R'' = R'^2/(2R) + 3R^3/8 - tR^2/2 + (t^2-8n-4-4gamma)R/8 - gamma^2/(2R)."""
    return [
        d2R,
        -dR * dR / (2 * R),
        -mp.mpf(3) / 8 * R**3,
        t / 2 * R**2,
        -(t * t - 8 * n - 4 - 4 * gamma) / 8 * R,
        gamma * gamma / (2 * R),
    ]


def normal_form_terms(y, dy, d2y, x, theta1, theta2) -> List:
    """Terms of y'' = y'^2/(2y) + 3y^3/2 + 4xy^2 + 2(x^2-theta1)y + theta2/y."""
    return [
        d2y,
        -dy * dy / (2 * y),
        -mp.mpf(3) / 2 * y**3,
        -4 * x * y**2,
        -2 * (x * x - theta1) * y,
        -theta2 / y,
    ]


def _balance(terms):
    return abs(mp.fsum(terms)) / (1 + mp.fsum(abs(term) for term in terms))


def check_painleve4(n: int, t, pipeline: HankelPipeline, fd: FDScheme) -> List[ResidualReport]:
    """R_n against Painleve IV in t, and y(x) = R_n(-2x) against the normal form.

    The normal form has theta1 = 2n + 1 + gamma and theta2 = -2 gamma^2.
    """
    _require_range(n, 1, pipeline.n_max, "Painleve IV")
    t = Fraction(t)
    fd.validate_for(pipeline.policy)
    snap = pipeline.snapshot(t)
    f = _series(pipeline, n)

    with snap.policy.workprec():
        tm = to_mpf(t)
        gamma = to_mpf(snap.params.gamma)
        R = snap.aux.R[n]
        floor = pipeline.policy.r_floor()
        tolerance = second_derivative_tol(fd, pipeline.policy)
        notes = fd.order.value

        def in_t():
            _require_nonzero(R, floor, "R_n")
            dR = derivative(f["R"], t, fd)
            d2R = derivative(f["R"], t, fd, order=2)
            return ResidualReport.judge(
                IdentityId.PAINLEVE_IV, n, t, _balance(painleve_terms(R, dR, d2R, n, tm, gamma)),
                tolerance, notes,
            )

        def in_x():
            _require_nonzero(R, floor, "R_n")
            dR = derivative(f["R"], t, fd)
            d2R = derivative(f["R"], t, fd, order=2)
            x = -tm / 2
            theta1 = 2 * n + 1 + gamma
            theta2 = -2 * gamma * gamma
            terms = normal_form_terms(R, -2 * dR, 4 * d2R, x, theta1, theta2)
            return ResidualReport.judge(
                IdentityId.PAINLEVE_NORMAL_FORM, n, t, _balance(terms), tolerance,
                f"{notes}; y(x)=R_n(-2x)",
            )

        return [
            _guarded(IdentityId.PAINLEVE_IV, n, t, in_t),
            _guarded(IdentityId.PAINLEVE_NORMAL_FORM, n, t, in_x),
        ]


def sigma_from_R(R, dR, n: int, t, gamma):
    """sigma_n written through R_n and R_n' alone."""
    return (
        -dR * dR / (4 * R)
        + R**3 / 16
        - t * R**2 / 8
        + (t * t / 16 - mp.mpf(n) / 2 - gamma / 4) * R
        + (2 * n + gamma) * t / 4
        + gamma * gamma / (4 * R)
    )


def sigma_from_rR(r, R, n: int, t, gamma):
    return n * t / 2 - (r * r - gamma * r) / R - (n + r) * R / 2 + t * r / 2


def sigma_form_terms(sigma, d_sigma, d2_sigma, n: int, t, gamma) -> List:
    """Terms of sigma''^2 = (t sigma' - sigma)^2/4 - 4(sigma' - n/2) sigma' (sigma' - (n+gamma)/2)."""
    return [
        d2_sigma**2,
        -((t * d_sigma - sigma) ** 2) / 4,
        4 * (d_sigma - mp.mpf(n) / 2) * d_sigma * (d_sigma - (n + gamma) / 2),
    ]


def check_sigma_continuous(n: int, t, pipeline: HankelPipeline, fd: FDScheme) -> List[ResidualReport]:
    """sigma_n = d/dt ln D_n, its slope, its second-order sigma-form and representations."""
    _require_range(n, 1, pipeline.n_max, "sigma identities")
    t = Fraction(t)
    fd.validate_for(pipeline.policy)
    snap = pipeline.snapshot(t)
    f = _series(pipeline, n)
    notes = fd.order.value

    with snap.policy.workprec():
        tm = to_mpf(t)
        gamma = to_mpf(snap.params.gamma)
        R, r = snap.aux.R[n], snap.aux.r[n]
        sigma, sigma_hat = snap.aux.sigma[n], snap.aux.sigma_hat[n]
        floor = pipeline.policy.r_floor()
        first = first_derivative_tol(fd, pipeline.policy)
        second = second_derivative_tol(fd, pipeline.policy)
        roundoff = snap.policy.roundoff_tol()

        d_log_D = derivative(f["log_D"], t, fd)
        d_sigma = derivative(f["sigma"], t, fd)
        d2_sigma = derivative(f["sigma"], t, fd, order=2)
        d_r = derivative(f["r"], t, fd)

        reports = [
            ResidualReport.judge(IdentityId.SIGMA_LOG_DET, n, t, _relative(d_log_D, sigma), first, notes),
            ResidualReport.judge(
                IdentityId.SIGMA_SLOPE, n, t, _relative(d_sigma, r / 2 + mp.mpf(n) / 2), first, notes
            ),
            ResidualReport.judge(
                IdentityId.SIGMA_FORM, n, t,
                _balance(sigma_form_terms(sigma, d_sigma, d2_sigma, n, tm, gamma)), second, notes,
            ),
        ]

        lhs = 8 * r * (r + n) * (r - gamma)
        rhs = (tm * r - 2 * sigma + n * tm) ** 2 - 4 * d_r * d_r
        reports.append(
            ResidualReport.judge(
                IdentityId.SIGMA_PRODUCT, n, t, abs(lhs - rhs) / (1 + abs(lhs) + abs(rhs)), first, notes
            )
        )

        def R_repr():
            _require_nonzero(R, floor, "R_n")
            dR = derivative(f["R"], t, fd)
            return ResidualReport.judge(
                IdentityId.SIGMA_R_REPR, n, t, _relative(sigma, sigma_from_R(R, dR, n, tm, gamma)),
                first, notes,
            )

        def rR_repr():
            _require_nonzero(R, floor, "R_n")
            return ResidualReport.judge(
                IdentityId.SIGMA_RR_REPR, n, t, _relative(sigma, sigma_from_rR(r, R, n, tm, gamma)),
                roundoff,
            )

        reports.append(_guarded(IdentityId.SIGMA_R_REPR, n, t, R_repr))
        reports.append(_guarded(IdentityId.SIGMA_RR_REPR, n, t, rR_repr))
        reports.append(
            ResidualReport.judge(
                IdentityId.SIGMA_HAT_LINK, n, t, _relative(sigma_hat, 2 * sigma - n * tm), roundoff
            )
        )
        return reports


def discrete_sigma_parts(n: int, t, sigma_hat):
    """(N, denominator, product) for the three-term relation in sigma-hat."""
    below, here, above = sigma_hat[n - 1], sigma_hat[n], sigma_hat[n + 1]
    N = n * (below - above) + here
    denominator = t - below + above
    product = (below - here) * (here - above)
    return N, denominator, product


def check_sigma_discrete(n: int, t, aux: AuxQuantities, rec: RecurrenceData) -> List[ResidualReport]:
    """2N^2 - 2 gamma N D = (s_{n-1}-s_n)(s_n-s_{n+1})(s_n + n t) D, and r_n = N/D.

    Here s is sigma-hat, N = n(s_{n-1} - s_{n+1}) + s_n and
    D = t - s_{n-1} + s_{n+1}.
    """
    _require_range(n, 1, rec.n_max - 1, "discrete sigma-form")
    p = rec.precision_bits
    with mp.workprec(p):
        tm = to_mpf(t)
        gamma = to_mpf(rec.params.gamma)
        tolerance = mp.ldexp(1, -(p // 2))
        floor = mp.ldexp(1, -(p // 4))
        N, denominator, product = discrete_sigma_parts(n, tm, aux.sigma_hat)

        def form():
            _require_nonzero(denominator, floor, "t - sigma_hat_{n-1} + sigma_hat_{n+1}")
            residual = 2 * N * N - 2 * gamma * N * denominator - product * (aux.sigma_hat[n] + n * tm) * denominator
            scale = (1 + abs(tm) + abs(aux.sigma_hat[n])) ** 4
            return ResidualReport.judge(
                IdentityId.DSIGMA_FORM, n, t, abs(residual) / scale, tolerance,
                "normalized by (1+|t|+|sigma_hat_n|)^4",
            )

        def recovery():
            _require_nonzero(denominator, floor, "t - sigma_hat_{n-1} + sigma_hat_{n+1}")
            residual = max(
                _relative(N / denominator, aux.r[n]),
                _relative(aux.sigma_hat[n] - aux.sigma_hat[n + 1], aux.R[n]),
            )
            return ResidualReport.judge(
                IdentityId.DSIGMA_R_RECOVERY, n, t, residual, tolerance, "r_n = N/D, R_n = step of sigma_hat"
            )

        return [
            _guarded(IdentityId.DSIGMA_FORM, n, t, form),
            _guarded(IdentityId.DSIGMA_R_RECOVERY, n, t, recovery),
        ]
