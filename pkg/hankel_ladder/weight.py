"""The deformed Hermite weight with one jump and its potential."""

import mpmath as mp

from .errors import SingularPoint
from .models import WeightParams, to_mpf


def weight_eval(z, params: WeightParams):
    """e^{-z^2+tz} |z-t|^gamma (A + B theta(z-t)) at real z.

    theta(0) = 0, so the left amplitude A applies at the jump itself.
    """
    z = to_mpf(z)
    t = to_mpf(params.t)
    gamma = to_mpf(params.gamma)
    d = z - t

    if d == 0:
        if params.gamma < 0:
            raise SingularPoint(f"weight is singular at z = t = {params.t} for gamma < 0")
        if params.gamma > 0:
            return mp.mpf(0)

    amplitude = params.right_amplitude if d > 0 else params.left_amplitude
    if amplitude == 0:
        return mp.mpf(0)
    power = mp.mpf(1) if params.gamma == 0 else mp.power(abs(d), gamma)
    return to_mpf(amplitude) * mp.exp(-z * z + t * z) * power


def potential_v0(z, params: WeightParams):
    """v0(z) = -ln e^{-z^2+tz} = z^2 - tz."""
    t = to_mpf(params.t)
    return z * z - t * z


def v0_prime(z, params: WeightParams):
    return 2 * z - to_mpf(params.t)


def half_line_factor(u, params: WeightParams, side: int, power: int = 0):
    """Weight along z = t + side*u, u > 0, times u^power.

    On the right (side=+1) the Gaussian factor reduces to e^{-u^2-tu} and
    on the left to e^{-u^2+tu}.
    """
    t = to_mpf(params.t)
    amplitude = params.right_amplitude if side > 0 else params.left_amplitude
    if amplitude == 0:
        return mp.mpf(0)
    exponent = to_mpf(params.gamma) + power
    return to_mpf(amplitude) * mp.power(u, exponent) * mp.exp(-u * u - side * t * u)
