"""Cross-checked moments -> recurrence -> auxiliary quantities, with precision escalation."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Optional, Tuple

import mpmath as mp

from .errors import BackendDisagreement, PrecisionExhausted, PrecisionLoss, QuadratureNonConvergence
from .models import (
    AuxQuantities,
    MomentTable,
    NumericPolicy,
    RecurrenceData,
    WeightParams,
    to_fraction,
)
from .moments import cross_check
from .orthopoly import aux_by_quadrature_all, aux_from_recurrence, recurrence_from_moments
from .reports import status

RECOVERABLE = (PrecisionLoss, PrecisionExhausted, QuadratureNonConvergence, BackendDisagreement)


@dataclass(frozen=True)
class Snapshot:
    """Everything computed at one t. `policy` is the precision actually used."""

    params: WeightParams
    policy: NumericPolicy
    table: MomentTable
    rec: RecurrenceData
    aux: AuxQuantities
    history: Tuple[str, ...] = ()

    @property
    def t(self) -> Fraction:
        return self.params.t


def compute_snapshot(
    params: WeightParams, policy: NumericPolicy, n_max: int, quiet: bool = False
) -> Snapshot:
    """Run the pipeline, multiplying the precision on every recoverable failure.

    Raises PrecisionExhausted with the full history once the next step would
    exceed policy.max_precision_bits.
    """
    history: List[str] = []
    attempt = policy
    while True:
        try:
            table = cross_check(n_max + 1, params, attempt, escalate=False)
            rec = recurrence_from_moments(table, n_max)
            aux = aux_from_recurrence(rec, params.t)
            return Snapshot(params, attempt, table, rec, aux, tuple(history))
        except RECOVERABLE as exc:
            history.append(f"{attempt.precision_bits} bits: {exc}")
            bits = attempt.precision_bits * attempt.escalation_factor
            if bits > attempt.max_precision_bits:
                raise PrecisionExhausted(
                    f"no trustworthy result for n_max={n_max} at {params}", history
                ) from exc
            status(
                f"⚠️  {type(exc).__name__} at {attempt.precision_bits} bits, "
                f"escalating to {bits} bits ({params})",
                quiet,
            )
            attempt = attempt.escalated()


class HankelPipeline:
    """Snapshots for one (params, policy, n_max) memoized by t.

    Finite differences revisit the same shifted t values across identity
    families, and ladder checks reuse the Cauchy-kernel sweeps at each z, so
    both are cached here for the lifetime of the pipeline.
    """

    def __init__(
        self,
        params: WeightParams,
        policy: NumericPolicy,
        n_max: int,
        quiet: bool = False,
    ):
        self.params = params
        self.policy = policy
        self.n_max = n_max
        self.quiet = quiet
        self._snapshots: Dict[Fraction, Snapshot] = {}
        self._memo: Dict[Hashable, Any] = {}

    def __repr__(self):
        return f"HankelPipeline({self.params}, {self.policy.precision_bits} bits, n_max={self.n_max})"

    def params_at(self, t=None) -> WeightParams:
        return self.params if t is None else self.params.with_t(t)

    def snapshot(self, t=None) -> Snapshot:
        t = self.params.t if t is None else to_fraction(t, "t")
        if t not in self._snapshots:
            self._snapshots[t] = compute_snapshot(
                self.params_at(t), self.policy, self.n_max, self.quiet
            )
        return self._snapshots[t]

    def value(self, t: Fraction, extract: Callable[[Snapshot], Any]):
        """extract(snapshot) at t, evaluated at the snapshot's precision."""
        snap = self.snapshot(t)
        with snap.policy.workprec():
            return extract(snap)

    def memo(self, key: Hashable, factory: Callable[[], Any]):
        if key not in self._memo:
            self._memo[key] = factory()
        return self._memo[key]

    def aux_quadrature(self, t=None) -> Tuple[List, List]:
        """R_k, r_k for k <= n_max from the singular integrals (gamma > 0 only)."""
        t = self.params.t if t is None else to_fraction(t, "t")

        def compute():
            snap = self.snapshot(t)
            return aux_by_quadrature_all(self.n_max, snap.rec, snap.params, snap.policy)

        return self.memo(("aux_quadrature", t), compute)

    def clear(self) -> None:
        self._snapshots.clear()
        self._memo.clear()
