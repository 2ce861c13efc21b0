"""Finite differences in t over the full pipeline.

Shifted arguments are exact rationals, t + k*h, so every stencil point maps
to one memoized snapshot and the stencils of different identities share
their evaluations.
"""

from fractions import Fraction
from typing import Callable

from .models import FDOrder, FDScheme, NumericPolicy, to_mpf

# truncation constants for the tolerance conventions below
FIRST_DERIVATIVE_C = 10**4
SECOND_DERIVATIVE_C = 10**8


def _central_first(f: Callable[[Fraction], object], t: Fraction, h: Fraction):
    return (f(t + h) - f(t - h)) / (2 * to_mpf(h))


def _central_second(f: Callable[[Fraction], object], t: Fraction, h: Fraction):
    return (f(t + h) - 2 * f(t) + f(t - h)) / to_mpf(h) ** 2


def _richardson(coarse, fine, order: int):
    # one Neville step: eliminate the h^order term between steps 2h and h
    fac = 2**order
    return (fine * fac - coarse) / (fac - 1)


def derivative(f: Callable[[Fraction], object], t, fd: FDScheme, order: int = 1):
    """d^order f/dt^order at t (order 1 or 2) with the scheme's stencil.

    Central2 uses the 3-point stencils; Richardson4 combines them at h and
    2h, which is the 5-point stencil of order h^4.
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    t = Fraction(t)
    h = fd.step
    base = _central_first if order == 1 else _central_second
    fine = base(f, t, h)
    if fd.order is FDOrder.CENTRAL2:
        return fine
    coarse = base(f, t, 2 * h)
    return _richardson(coarse, fine, 2)


def first_derivative_tol(fd: FDScheme, policy: NumericPolicy):
    """max(C h^k, 2^-p/3) for identities with one derivative."""
    return max(
        FIRST_DERIVATIVE_C * to_mpf(fd.step) ** fd.accuracy_order,
        policy.derivative_floor(),
    )


def second_derivative_tol(fd: FDScheme, policy: NumericPolicy):
    return max(
        SECOND_DERIVATIVE_C * to_mpf(fd.step) ** fd.accuracy_order,
        policy.derivative_floor(),
    )
