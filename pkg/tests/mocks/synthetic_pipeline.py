"""Synthetic pipelines for testing large-n decision logic without real computation."""

from types import SimpleNamespace
from typing import Callable, Optional

import mpmath as mp

from hankel_ladder.models import NumericPolicy, WeightParams


class SyntheticPipeline:
    """Stands in for HankelPipeline; snapshot() returns prescribed sequences.

    `R_of(n, params)` gives the whole R list for degree n; `h_of(n, params)`
    the norms; `sigma_of(n, params)` sigma_n. Missing functions give zeros.
    """

    def __init__(
        self,
        params: WeightParams,
        policy: NumericPolicy,
        n: int,
        R_of: Optional[Callable] = None,
        h_of: Optional[Callable] = None,
        sigma_of: Optional[Callable] = None,
    ):
        self.params = params
        self.policy = policy
        self.n = n
        self.R_of = R_of
        self.h_of = h_of
        self.sigma_of = sigma_of
        self.snapshot_calls = 0

    def snapshot(self, t=None):
        self.snapshot_calls += 1
        n = self.n
        with self.policy.workprec():
            zeros = [mp.mpf(0)] * (n + 1)
            R = self.R_of(n, self.params) if self.R_of else zeros
            h = self.h_of(n, self.params) if self.h_of else [mp.mpf(1)] * (n + 2)
            sigma = zeros[:]
            if self.sigma_of:
                sigma[n] = self.sigma_of(n, self.params)
        return SimpleNamespace(
            params=self.params,
            policy=self.policy,
            rec=SimpleNamespace(h=h),
            aux=SimpleNamespace(R=R, sigma=sigma),
        )


def synthetic_factory(**sequences):
    """A make_pipeline replacement that records every pipeline it builds."""
    built = []

    def factory(params, policy, n):
        pipeline = SyntheticPipeline(params, policy, n, **sequences)
        built.append(pipeline)
        return pipeline

    factory.built = built
    return factory
