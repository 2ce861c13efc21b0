"""Exception hierarchy for Hankel Ladder."""

from typing import Sequence


class HankelLadderError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameters(HankelLadderError, ValueError):
    """Weight, policy or run parameters violate their invariants."""


class SingularPoint(HankelLadderError, ValueError):
    """The weight is evaluated at z = t while gamma < 0."""


class NotIntegrable(HankelLadderError, ValueError):
    """A singular integral diverges for the requested gamma."""


class QuadratureNonConvergence(HankelLadderError):
    """An integral did not reach its target within the refinement budget."""

    def __init__(self, what: str, achieved, target):
        self.what = what
        self.achieved = achieved
        self.target = target
        super().__init__(
            f"{what}: quadrature stalled at error {_short(achieved)} "
            f"(target {_short(target)})"
        )


class PrecisionLoss(HankelLadderError):
    """Cancellation consumed more than half of the working precision."""

    def __init__(self, stage: str, bits_lost: float, precision_bits: int):
        self.stage = stage
        self.bits_lost = bits_lost
        self.precision_bits = precision_bits
        super().__init__(
            f"{stage}: lost {bits_lost:.1f} of {precision_bits} bits"
        )


class PrecisionExhausted(HankelLadderError):
    """Escalation reached its cap without producing a trustworthy result."""

    def __init__(self, message: str, history: Sequence[str] = ()):
        self.history = tuple(history)
        detail = "; ".join(self.history)
        super().__init__(f"{message} [{detail}]" if detail else message)


class BackendDisagreement(HankelLadderError):
    """The two moment backends disagree even after escalation."""

    def __init__(self, worst: float, limit: float, k: int):
        self.worst = worst
        self.limit = limit
        self.k = k
        super().__init__(
            f"moment backends disagree at k={k}: {worst:.3e} > {limit:.3e}"
        )


class DegenerateSkip(HankelLadderError):
    """A check divides by a quantity that vanishes on a degenerate locus."""


def _short(x) -> str:
    try:
        return f"{float(x):.3e}"
    except (TypeError, ValueError, OverflowError):
        return str(x)
