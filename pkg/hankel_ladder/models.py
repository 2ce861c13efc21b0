"""Data models for Hankel Ladder."""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath as mp

from .errors import InvalidParameters


Number = Any  # int, float, str or Fraction on input; mpf inside the numerics


def to_fraction(value: Number, name: str = "value") -> Fraction:
    """Exact rational from the decimal text the caller wrote."""
    if isinstance(value, bool):
        raise InvalidParameters(f"{name}: expected a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # repr gives the shortest text that round-trips, so 0.7 stays 7/10
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise InvalidParameters(f"{name}: cannot parse {value!r}") from exc
    raise InvalidParameters(f"{name}: unsupported type {type(value).__name__}")


def to_mpf(value: Number):
    """Convert at the current working precision."""
    if isinstance(value, Fraction):
        return mp.mpf(value.numerator) / value.denominator
    return mp.mpf(value)


def decimal_string(value, precision_bits: int) -> str:
    """Fixed decimal text with precision_bits/3 significant digits."""
    digits = max(precision_bits // 3, 15)
    with mp.workprec(precision_bits + 16):
        if isinstance(value, Fraction):
            value = to_mpf(value)
        if isinstance(value, mp.mpc):
            return mp.nstr(value, digits)
        return mp.nstr(mp.mpf(value), digits)


def short_decimal(value: Fraction) -> str:
    """Compact text for parameters and grid points, e.g. '0.5' or '-1.0'."""
    with mp.workprec(128):
        return mp.nstr(to_mpf(value), 30)


class Backend(Enum):
    QUADRATURE = "quadrature"
    RECURRENCE = "recurrence"
    CROSS_CHECKED = "cross_checked"


class FDOrder(Enum):
    CENTRAL2 = "central2"
    RICHARDSON4 = "richardson4"


class OdeMethod(Enum):
    KERNEL = "kernel"
    CIRCLE = "circle"


class Suite(Enum):
    STRING = "string"
    TDERIV = "tderiv"
    RICCATI = "riccati"
    PAINLEVE = "painleve"
    SIGMA = "sigma"
    DSIGMA = "dsigma"
    AUX = "aux"
    ORTHO = "ortho"
    LADDER = "ladder"

    @classmethod
    def parse(cls, text: str) -> Tuple["Suite", ...]:
        names = [part.strip().lower() for part in text.split(",") if part.strip()]
        if "all" in names:
            return tuple(cls)
        try:
            return tuple(dict.fromkeys(cls(name) for name in names))
        except ValueError as exc:
            valid = ", ".join([s.value for s in cls] + ["all"])
            raise InvalidParameters(f"--suites: {exc}; choose from {valid}") from exc


class Command(Enum):
    MOMENTS = "moments"
    COEFFS = "coeffs"
    VERIFY = "verify"
    SWEEP = "sweep"
    ASYMPTOTICS = "asymptotics"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


class IdentityId(Enum):
    """Labels of every residual check, used as the identity_id column."""

    # algebraic relations between alpha, beta, R and r
    STRING_R_SUM = "string_r_sum"
    STRING_R_SUM_ELIMINATED = "string_r_sum_eliminated"
    STRING_BETA_STEP = "string_beta_step"
    STRING_R_STEP = "string_r_step"
    STRING_R_PARTIAL_SUM = "string_R_partial_sum"
    STRING_QUADRATIC = "string_quadratic"
    # t-derivatives
    TDERIV_LOG_H = "tderiv_log_h"
    TDERIV_BETA = "tderiv_beta"
    TDERIV_ALPHA = "tderiv_alpha"
    TDERIV_ALPHA_CLOSED = "tderiv_alpha_closed"
    TDERIV_ALPHA_R = "tderiv_alpha_R"
    TDERIV_P = "tderiv_p"
    TDERIV_P_HALF = "tderiv_p_half"
    RICCATI_R_SMALL = "riccati_r"
    RICCATI_R_LARGE = "riccati_R"
    PAINLEVE_IV = "painleve_iv"
    PAINLEVE_NORMAL_FORM = "painleve_normal_form"
    SIGMA_LOG_DET = "sigma_log_det"
    SIGMA_SLOPE = "sigma_slope"
    SIGMA_FORM = "sigma_form"
    SIGMA_PRODUCT = "sigma_product"
    SIGMA_R_REPR = "sigma_R_repr"
    SIGMA_RR_REPR = "sigma_rR_repr"
    SIGMA_HAT_LINK = "sigma_hat_link"
    DSIGMA_FORM = "dsigma_form"
    DSIGMA_R_RECOVERY = "dsigma_r_recovery"
    # quadrature oracles
    AUX_R_QUAD = "aux_R_quad"
    AUX_r_QUAD = "aux_r_quad"
    ORTHOGONALITY = "orthogonality"
    NORM = "norm"
    DETERMINANT = "determinant"
    # ladder operators
    LADDER_LOWERING = "ladder_lowering"
    LADDER_NORM_IDENTITY = "ladder_norm_identity"
    LADDER_CROSS_IDENTITY = "ladder_cross_identity"
    COMPAT_SUM = "compat_sum"
    COMPAT_DIFFERENCE = "compat_difference"
    COMPAT_QUADRATIC = "compat_quadratic"
    LADDER_ODE = "ladder_ode"
    LARGE_Z_A = "large_z_A"
    LARGE_Z_B = "large_z_B"
    # large n
    ASYMPTOTIC_R = "asymptotic_R"
    ASYMPTOTIC_SIGMA = "asymptotic_sigma"
    HANKEL_EXPANSION = "hankel_expansion"
    QUARTIC_BALANCE = "quartic_balance"


@dataclass(frozen=True)
class WeightParams:
    """Parameters (A, B, gamma, t) of e^{-z^2+tz} |z-t|^gamma (A + B theta(z-t))."""

    A: Fraction
    B: Fraction
    gamma: Fraction
    t: Fraction

    def __post_init__(self):
        for name in ("A", "B", "gamma", "t"):
            object.__setattr__(self, name, to_fraction(getattr(self, name), name))
        if self.A < 0:
            raise InvalidParameters(f"A must be >= 0, got {self.A}")
        if self.A + self.B < 0:
            raise InvalidParameters(f"A + B must be >= 0, got {self.A + self.B}")
        if self.gamma <= -1:
            raise InvalidParameters(f"gamma must be > -1, got {self.gamma}")
        if self.A == 0 and self.A + self.B == 0:
            raise InvalidParameters("A = 0 and A + B = 0: the weight vanishes")

    def with_t(self, t: Number) -> "WeightParams":
        return replace(self, t=to_fraction(t, "t"))

    @property
    def right_amplitude(self) -> Fraction:
        """Jump factor on (t, oo)."""
        return self.A + self.B

    @property
    def left_amplitude(self) -> Fraction:
        """Jump factor on (-oo, t]."""
        return self.A

    @property
    def jump_sign(self) -> int:
        return (self.B > 0) - (self.B < 0)

    def to_dict(self) -> Dict[str, str]:
        return {
            "A": short_decimal(self.A),
            "B": short_decimal(self.B),
            "gamma": short_decimal(self.gamma),
            "t": short_decimal(self.t),
        }

    def __str__(self):
        d = self.to_dict()
        return f"A={d['A']} B={d['B']} gamma={d['gamma']} t={d['t']}"


@dataclass(frozen=True)
class NumericPolicy:
    """Working precision and numerical targets shared by every stage."""

    precision_bits: int = 512
    quad_tol: Fraction = Fraction(1, 10**40)
    fd_step: Fraction = Fraction(1, 10**8)
    escalation_factor: int = 2
    max_precision_bits: int = 8192
    max_quad_level: int = 10

    def __post_init__(self):
        object.__setattr__(self, "quad_tol", to_fraction(self.quad_tol, "quad_tol"))
        object.__setattr__(self, "fd_step", to_fraction(self.fd_step, "fd_step"))
        if int(self.precision_bits) != self.precision_bits or self.precision_bits < 64:
            raise InvalidParameters(
                f"precision_bits must be an integer >= 64, got {self.precision_bits}"
            )
        if self.escalation_factor < 2:
            raise InvalidParameters(
                f"escalation_factor must be >= 2, got {self.escalation_factor}"
            )
        if self.quad_tol >= 1:
            raise InvalidParameters(f"quad_tol must be < 1, got {self.quad_tol}")
        if self.quad_tol < Fraction(1, 2 ** (self.precision_bits - 16)):
            raise InvalidParameters(
                f"quad_tol {float(self.quad_tol):.1e} is not representable with "
                f"slack at {self.precision_bits} bits"
            )
        if self.fd_step <= 0:
            raise InvalidParameters(f"fd_step must be > 0, got {self.fd_step}")
        if self.max_precision_bits < self.precision_bits:
            raise InvalidParameters("max_precision_bits is below precision_bits")
        if self.max_quad_level < 4:
            raise InvalidParameters("max_quad_level must be >= 4")

    def workprec(self):
        return mp.workprec(self.precision_bits)

    def escalated(self) -> "NumericPolicy":
        return replace(
            self, precision_bits=self.precision_bits * self.escalation_factor
        )

    def for_degree(self, n: int) -> "NumericPolicy":
        """Precision ladder for large n: 512 bits to n=32, 2048 to n=64."""
        if n <= 32:
            floor = 512
        elif n <= 64:
            floor = 2048
        else:
            floor = 4096
        bits = max(self.precision_bits, floor)
        return replace(
            self,
            precision_bits=bits,
            max_precision_bits=max(self.max_precision_bits, bits),
        )

    # tolerance conventions; call inside workprec

    def roundoff_tol(self):
        """Pure-algebra bound 2^{-p/2}."""
        return mp.ldexp(1, -(self.precision_bits // 2))

    def relative_tol(self):
        return 100 * max(to_mpf(self.quad_tol), self.roundoff_tol())

    def quad_tol_mpf(self):
        return to_mpf(self.quad_tol)

    def r_floor(self):
        """|R_n| below this makes division-by-R identities degenerate."""
        return mp.ldexp(1, -(self.precision_bits // 4))

    def derivative_floor(self):
        return mp.ldexp(1, -(self.precision_bits // 3))


@dataclass(frozen=True)
class FDScheme:
    """Finite-difference stencil for t-derivatives."""

    step: Fraction = Fraction(1, 10**8)
    order: FDOrder = FDOrder.CENTRAL2

    def __post_init__(self):
        object.__setattr__(self, "step", to_fraction(self.step, "step"))
        if not isinstance(self.order, FDOrder):
            object.__setattr__(self, "order", FDOrder(self.order))

    def validate_for(self, policy: NumericPolicy) -> None:
        lower = Fraction(1, 2 ** (policy.precision_bits // 3))
        if not (lower < self.step < Fraction(1, 10**4)):
            raise InvalidParameters(
                f"fd step {float(self.step):.1e} outside "
                f"(2^-{policy.precision_bits // 3}, 1e-4)"
            )

    @property
    def accuracy_order(self) -> int:
        return 2 if self.order is FDOrder.CENTRAL2 else 4


@dataclass(frozen=True)
class MomentTable:
    """mu_0 .. mu_{2N} at fixed parameters."""

    params: WeightParams
    policy: NumericPolicy
    moments: Tuple[Any, ...]
    backend: Backend

    @property
    def N(self) -> int:
        return (len(self.moments) - 1) // 2

    def to_dict(self) -> Dict[str, Any]:
        bits = self.policy.precision_bits
        data = dict(self.params.to_dict())
        data.update(
            precision_bits=bits,
            backend=self.backend.value,
            moments=[decimal_string(mu, bits) for mu in self.moments],
        )
        return data


@dataclass(frozen=True)
class RecurrenceData:
    """Recurrence data indexed by n.

    beta[0] is 0 (the beta_0 P_{-1} := 0 convention), p runs to n_max + 1
    with p[0] = 0, and D[n] is the n x n Hankel determinant with D[0] = 1.
    """

    params: WeightParams
    precision_bits: int
    n_max: int
    h: Tuple[Any, ...]
    alpha: Tuple[Any, ...]
    beta: Tuple[Any, ...]
    p: Tuple[Any, ...]
    D: Tuple[Any, ...]

    def to_dict(self) -> Dict[str, Any]:
        bits = self.precision_bits
        fmt = lambda xs: [decimal_string(x, bits) for x in xs]
        data = dict(self.params.to_dict())
        data.update(
            precision_bits=bits,
            n_max=self.n_max,
            h=fmt(self.h),
            alpha=fmt(self.alpha),
            beta=fmt(self.beta),
            p=fmt(self.p),
            D=fmt(self.D),
        )
        return data


@dataclass(frozen=True)
class AuxQuantities:
    """R_n, r_n, sigma_n and sigma-hat_n, all indexed 0..n_max.

    r[0], sigma[0] and sigma_hat[0] are 0 (empty sums / P_{-1} = 0).
    """

    t: Fraction
    R: Tuple[Any, ...]
    r: Tuple[Any, ...]
    sigma: Tuple[Any, ...]
    sigma_hat: Tuple[Any, ...]

    def to_dict(self, precision_bits: int) -> Dict[str, Any]:
        fmt = lambda xs: [decimal_string(x, precision_bits) for x in xs]
        return {
            "t": short_decimal(self.t),
            "R": fmt(self.R),
            "r": fmt(self.r),
            "sigma": fmt(self.sigma),
            "sigma_hat": fmt(self.sigma_hat),
        }


@dataclass(frozen=True)
class LadderSample:
    """A_n, B_n at one complex point, with the neighbours used by the checks."""

    z: Any
    n: int
    An: Any
    Bn: Any
    An_prev: Any
    Bn_next: Any
    substituted: bool = False

    def __post_init__(self):
        if mp.im(self.z) == 0:
            raise InvalidParameters("ladder evaluation needs Im z != 0")


@dataclass(frozen=True)
class ResidualReport:
    identity_id: IdentityId
    n: int
    t: Fraction
    residual: Any
    tolerance: Any
    passed: bool
    notes: str = ""
    skipped: bool = False

    @classmethod
    def judge(cls, identity_id, n, t, residual, tolerance, notes=""):
        residual = abs(residual)
        return cls(
            identity_id=identity_id,
            n=n,
            t=to_fraction(t, "t"),
            residual=residual,
            tolerance=tolerance,
            passed=bool(residual <= tolerance),
            notes=notes,
        )

    @classmethod
    def skip(cls, identity_id, n, t, reason: str):
        zero = mp.mpf(0)
        return cls(
            identity_id=identity_id,
            n=n,
            t=to_fraction(t, "t"),
            residual=zero,
            tolerance=zero,
            passed=True,
            notes=f"skipped: {reason}",
            skipped=True,
        )

    def sort_key(self):
        return (self.identity_id.value, self.n, self.t, self.notes)

    def to_row(self, precision_bits: int) -> Dict[str, str]:
        return {
            "identity_id": self.identity_id.value,
            "n": str(self.n),
            "t": short_decimal(self.t),
            "residual": decimal_string(self.residual, precision_bits),
            "tolerance": decimal_string(self.tolerance, precision_bits),
            "pass": "true" if self.passed else "false",
            "notes": self.notes,
        }

    def __str__(self):
        mark = "✅" if self.passed else "❌"
        if self.skipped:
            mark = "⏭️"
        return (
            f"{mark} {self.identity_id.value} n={self.n} t={short_decimal(self.t)} "
            f"residual={mp.nstr(self.residual, 3)} tol={mp.nstr(self.tolerance, 3)}"
        )


REPORT_COLUMNS = ["identity_id", "n", "t", "residual", "tolerance", "pass", "notes"]


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs."""

    command: Command
    params: WeightParams
    policy: NumericPolicy = field(default_factory=NumericPolicy)
    n_max: int = 8
    t_grid: Tuple[Fraction, ...] = ()
    suites: Tuple[Suite, ...] = ()
    output: OutputFormat = OutputFormat.CSV
    out_path: Optional[Path] = None
    fd_order: FDOrder = FDOrder.CENTRAL2
    ode_method: OdeMethod = OdeMethod.KERNEL
    z_points: Tuple[complex, ...] = (complex(1, 1), complex(0, 2), complex(-3, 0.5))
    s: Fraction = Fraction(1, 2)
    n_list: Tuple[int, ...] = (16, 32, 64)
    workers: Optional[int] = None
    quiet: bool = False

    def __post_init__(self):
        if not self.t_grid:
            object.__setattr__(self, "t_grid", (self.params.t,))
        object.__setattr__(
            self, "t_grid", tuple(to_fraction(t, "t") for t in self.t_grid)
        )
        object.__setattr__(self, "s", to_fraction(self.s, "s"))
        if self.n_max < 1:
            raise InvalidParameters(f"--nmax must be >= 1, got {self.n_max}")
        if self.command is Command.VERIFY and not self.suites:
            raise InvalidParameters("verify needs at least one suite")
        if self.command is Command.ASYMPTOTICS:
            if sorted(self.n_list) != list(self.n_list) or not self.n_list:
                raise InvalidParameters("--n-list must be ascending and nonempty")
            if self.s <= 0:
                raise InvalidParameters(f"--s must be > 0, got {self.s}")
        if self.workers is not None and self.workers < 1:
            raise InvalidParameters(f"--workers must be >= 1, got {self.workers}")

    @property
    def fd(self) -> FDScheme:
        return FDScheme(step=self.policy.fd_step, order=self.fd_order)


def sorted_reports(reports: Sequence[ResidualReport]) -> List[ResidualReport]:
    return sorted(reports, key=ResidualReport.sort_key)
