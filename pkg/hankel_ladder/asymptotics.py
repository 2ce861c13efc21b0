"""Large-n expansions of R_n, sigma_n and ln D_n, and the quartic balance.

The expansions depend on the branch s = sign(B). Each check compares the
computed quantity at every n of an ascending n_list with its truncated
expansion and then judges how the truncation error shrinks between
consecutive n: for a remainder of order n^-k the ratio at doubling is
2^-k, and the window allows a factor of about two either way.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath as mp

from .errors import InvalidParameters
from .models import IdentityId, NumericPolicy, ResidualReport, WeightParams, decimal_string, to_mpf
from .pipeline import HankelPipeline

# decay-ratio windows at n -> 2n
R_WINDOW = (Fraction(8, 100), Fraction(40, 100))
HANKEL_WINDOW = (Fraction(1, 2), Fraction(9, 10))
QUARTIC_MIN_N = 16
# R_n below this fraction of its leading term d_0 sqrt(n) is off the expansion's branch
BRANCH_FRACTION_MIN = Fraction(1, 2)

PipelineFactory = Callable[[WeightParams, NumericPolicy, int], HankelPipeline]


@dataclass(frozen=True)
class ExpansionPoint:
    """One row of the asymptotics table.

    branch_fraction is R_n / (d_0 sqrt n): close to 1 on the branch the
    expansion describes, close to 0 when R_n stays bounded.
    """

    n: int
    value: object
    expansion: object
    abs_err: object
    ratio: Optional[object] = None
    branch_fraction: Optional[object] = None

    @property
    def on_branch(self) -> bool:
        return self.branch_fraction is not None and self.branch_fraction >= to_mpf(BRANCH_FRACTION_MIN)

    def to_row(self, precision_bits: int) -> Dict[str, str]:
        return {
            "n": str(self.n),
            "R_n": decimal_string(self.value, precision_bits),
            "expansion": decimal_string(self.expansion, precision_bits),
            "abs_err": decimal_string(self.abs_err, precision_bits),
            "ratio": "" if self.ratio is None else decimal_string(self.ratio, precision_bits),
            "branch_fraction": "" if self.branch_fraction is None else mp.nstr(self.branch_fraction, 6),
        }


def _branch(params: WeightParams) -> int:
    if params.B == 0:
        raise InvalidParameters("large-n expansions need B != 0 (the sign of B picks the branch)")
    return params.jump_sign


def asymptotic_coefficients(params: WeightParams, t=None) -> List:
    """d_0..d_5 of R_n ~ sum_j d_j n^((1-j)/2) at t (default params.t)."""
    s = _branch(params)
    t = to_mpf(params.t if t is None else t)
    gamma = to_mpf(params.gamma)
    root6 = mp.sqrt(6)
    return [
        s * 2 * root6 / 3,
        2 * t / 3,
        s * root6 * (t**2 + 12 * gamma + 12) / 72,
        mp.mpf(0),
        s * root6 * (288 * gamma**2 - 24 * t**2 * gamma - 288 * gamma - t**4 - 24 * t**2 - 240) / 6912,
        (2 - 9 * gamma**2) * t / 72,
    ]


def expansion_R(n: int, params: WeightParams, t=None):
    coefficients = asymptotic_coefficients(params, t)
    root_n = mp.sqrt(n)
    return mp.fsum(d * root_n ** (1 - j) for j, d in enumerate(coefficients))


def expansion_sigma(n: int, params: WeightParams, t=None):
    """Large-n form of sigma_n = d/dt ln D_n."""
    s = _branch(params)
    t = to_mpf(params.t if t is None else t)
    gamma = to_mpf(params.gamma)
    root6 = mp.sqrt(6)
    n = mp.mpf(n)
    return (
        -s * 2 * root6 / 9 * n**1.5
        + n * t / 6
        - s * root6 * (t**2 + 12 * gamma) * mp.sqrt(n) / 72
        + t**3 / 216
        + t * gamma / 12
    )


def expansion_log_hankel(n: int, x, params: WeightParams):
    """Large-n form of ln(D_n(x)/D_n(0)), the integral of sigma_n from 0 to x."""
    s = _branch(params)
    x = to_mpf(x)
    gamma = to_mpf(params.gamma)
    root6 = mp.sqrt(6)
    n = mp.mpf(n)
    return (
        -s * 2 * root6 / 9 * x * n**1.5
        + x**2 * n / 12
        - s * root6 * (x**3 + 36 * gamma * x) * mp.sqrt(n) / 216
        + x**4 / 864
        + x**2 * gamma / 24
    )


def quartic_residual(R, n: int, t, gamma):
    """The derivative-free balance of Painleve IV, normalized by n^2."""
    value = (
        mp.mpf(3) / 8 * R**4
        - t / 2 * R**3
        + (t * t - 8 * n - 4 - 4 * gamma) / 8 * R**2
        - gamma * gamma / 2
    )
    return abs(value) / mp.mpf(n) ** 2


def quartic_roots(n: int, t) -> Tuple:
    """Nonzero balance roots (2t +/- sqrt(t^2+24n+12))/3 of the gamma = 0 quartic."""
    t = to_mpf(t)
    root = mp.sqrt(t * t + 24 * n + 12)
    return (2 * t + root) / 3, (2 * t - root) / 3


def balance_root(n: int, params: WeightParams):
    """The real root of the quartic balance with the sign of B.

    Closed form when gamma = 0. Otherwise the quartic has one positive and
    one negative real root for n >= QUARTIC_MIN_N, the other pair being
    complex.
    """
    s = _branch(params)
    t = to_mpf(params.t)
    if params.gamma == 0:
        plus, minus = quartic_roots(n, t)
        return plus if s > 0 else minus
    gamma = to_mpf(params.gamma)
    coefficients = [mp.mpf(3) / 8, -t / 2, (t * t - 8 * n - 4 - 4 * gamma) / 8, 0, -gamma * gamma / 2]
    roots = mp.polyroots(coefficients, maxsteps=200, extraprec=mp.mp.prec)
    imaginary_floor = mp.ldexp(1, -(mp.mp.prec // 2))
    real = [mp.re(r) for r in roots if abs(mp.im(r)) <= imaginary_floor * (1 + abs(r))]
    branch = [r for r in real if r * s > 0]
    if not branch:
        raise InvalidParameters(f"quartic balance has no real root with the sign of B at n={n}")
    return max(branch, key=abs)


def default_pipeline(params: WeightParams, policy: NumericPolicy, n: int, quiet: bool = False) -> HankelPipeline:
    return HankelPipeline(params, policy.for_degree(n), n, quiet=quiet)


def _window(base: Tuple[Fraction, Fraction], n_lo: int, n_hi: int):
    """Window for the step n_lo -> n_hi, scaled from the doubling window."""
    doublings = mp.log(mp.mpf(n_hi) / n_lo, 2)
    lo, hi = (to_mpf(b) ** doublings for b in base)
    return lo, hi


def judge_decay(
    identity_id: IdentityId,
    n_list: Sequence[int],
    errors: Sequence,
    t,
    base: Tuple[Fraction, Fraction],
) -> List[ResidualReport]:
    """Log-distance of each error ratio from the centre of its window.

    The residual |ln ratio - ln centre| is below ln(hi/centre) exactly when
    the ratio lies inside [lo, hi].
    """
    reports = []
    for (n_lo, e_lo), (n_hi, e_hi) in zip(zip(n_list, errors), zip(n_list[1:], errors[1:])):
        lo, hi = _window(base, n_lo, n_hi)
        centre = mp.sqrt(lo * hi)
        tolerance = mp.log(hi / centre)
        notes = f"ratio window [{mp.nstr(lo, 3)}, {mp.nstr(hi, 3)}] from n={n_lo}"
        if e_lo == 0:
            reports.append(ResidualReport.judge(identity_id, n_hi, t, mp.inf, tolerance, notes + "; zero error at n_lo"))
            continue
        ratio = e_hi / e_lo
        residual = mp.inf if ratio == 0 else abs(mp.log(ratio) - mp.log(centre))
        reports.append(
            ResidualReport.judge(identity_id, n_hi, t, residual, tolerance, f"{notes}; ratio={mp.nstr(ratio, 4)}")
        )
    return reports


def _check_n_list(n_list: Sequence[int]) -> None:
    if not n_list or list(n_list) != sorted(set(n_list)) or n_list[0] < 1:
        raise InvalidParameters(f"n_list must be ascending positive integers, got {list(n_list)}")


def check_asymptotics_R(
    n_list: Sequence[int],
    t,
    params: WeightParams,
    policy: NumericPolicy,
    make_pipeline: PipelineFactory = default_pipeline,
) -> Tuple[List[ResidualReport], List[ExpansionPoint]]:
    """Truncation errors of R_n against the six-coefficient expansion.

    Reports at degrees where R_n is off the branch of the expansion say so
    in their notes.
    """
    _check_n_list(n_list)
    params = params.with_t(t)
    _branch(params)
    points, errors = [], []
    bits = policy.precision_bits
    for n in n_list:
        pipeline = make_pipeline(params, policy, n)
        snap = pipeline.snapshot()
        with snap.policy.workprec():
            value = snap.aux.R[n]
            approx = expansion_R(n, params)
            err = abs(value - approx)
            ratio = err / errors[-1] if errors and errors[-1] != 0 else None
            leading = asymptotic_coefficients(params)[0] * mp.sqrt(n)
            fraction = value / leading
        bits = max(bits, snap.policy.precision_bits)
        errors.append(err)
        points.append(ExpansionPoint(n, value, approx, err, ratio, fraction))
    with mp.workprec(bits):
        reports = judge_decay(IdentityId.ASYMPTOTIC_R, n_list, errors, params.t, R_WINDOW)
    off = {p.n: p.branch_fraction for p in points if not p.on_branch}
    reports = [
        replace(r, notes=f"{r.notes}; off the sqrt(n) branch, R_n/(d0 sqrt n)={mp.nstr(off[r.n], 3)}")
        if r.n in off
        else r
        for r in reports
    ]
    return reports, points


def check_hankel_expansion(
    n_list: Sequence[int],
    s,
    params: WeightParams,
    policy: NumericPolicy,
    make_pipeline: PipelineFactory = default_pipeline,
) -> List[ResidualReport]:
    """ln(D_n(s)/D_n(0)) and sigma_n(s) against their large-n expansions.

    ln D_n is summed from ln h_k. Both remainders are O(n^-1/2).
    """
    _check_n_list(n_list)
    s = Fraction(s)
    if s <= 0:
        raise InvalidParameters(f"s must be > 0, got {s}")
    _branch(params)
    log_errors, sigma_errors = [], []
    bits = policy.precision_bits
    for n in n_list:
        at_zero = make_pipeline(params.with_t(0), policy, n).snapshot()
        at_s = make_pipeline(params.with_t(s), policy, n).snapshot()
        work = max(at_zero.policy.precision_bits, at_s.policy.precision_bits)
        bits = max(bits, work)
        with mp.workprec(work):
            log_ratio = mp.fsum(mp.log(h) for h in at_s.rec.h[:n]) - mp.fsum(
                mp.log(h) for h in at_zero.rec.h[:n]
            )
            log_errors.append(abs(log_ratio - expansion_log_hankel(n, s, params)))
            sigma_errors.append(abs(at_s.aux.sigma[n] - expansion_sigma(n, params, s)))
    with mp.workprec(bits):
        return judge_decay(IdentityId.HANKEL_EXPANSION, n_list, log_errors, s, HANKEL_WINDOW) + judge_decay(
            IdentityId.ASYMPTOTIC_SIGMA, n_list, sigma_errors, s, HANKEL_WINDOW
        )


def branch_distance(R, root):
    """|R - root| / |root|: how far R_n sits from the balance root."""
    return abs(R - root) / abs(root)


def check_quartic_balance(
    n_list: Sequence[int],
    params: WeightParams,
    policy: NumericPolicy,
    make_pipeline: PipelineFactory = default_pipeline,
) -> List[ResidualReport]:
    """R_n must approach the real quartic root on the branch of sign(B).

    The relative distance from that root must decrease between consecutive
    n, and the last must undercut the first by at least a factor of two.
    A bounded R_n keeps the distance near 1 and fails.
    """
    _check_n_list(n_list)
    if n_list[0] < QUARTIC_MIN_N:
        raise InvalidParameters(f"quartic balance needs n >= {QUARTIC_MIN_N}, got {n_list[0]}")
    _branch(params)
    distances, roots, residuals = [], [], []
    bits = policy.precision_bits
    for n in n_list:
        snap = make_pipeline(params, policy, n).snapshot()
        bits = max(bits, snap.policy.precision_bits)
        with snap.policy.workprec():
            root = balance_root(n, params)
            distances.append(branch_distance(snap.aux.R[n], root))
            roots.append(root)
            residuals.append(quartic_residual(snap.aux.R[n], n, to_mpf(params.t), to_mpf(params.gamma)))

    reports = []
    with mp.workprec(bits):
        for k in range(1, len(n_list)):
            notes = f"below n={n_list[k - 1]}; root {mp.nstr(roots[k], 8)}; residual/n^2 {mp.nstr(residuals[k], 3)}"
            reports.append(
                ResidualReport.judge(
                    IdentityId.QUARTIC_BALANCE, n_list[k], params.t, distances[k], distances[k - 1], notes
                )
            )
        if len(n_list) > 1:
            notes = f"half of n={n_list[0]}; root {mp.nstr(roots[-1], 8)}; residual/n^2 {mp.nstr(residuals[-1], 3)}"
            reports.append(
                ResidualReport.judge(
                    IdentityId.QUARTIC_BALANCE, n_list[-1], params.t, distances[-1], distances[0] / 2, notes
                )
            )
    return reports
