"""Verification jobs, the worker pool and the deterministic merge."""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, partial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath as mp
import psutil

from .errors import (
    BackendDisagreement,
    DegenerateSkip,
    NotIntegrable,
    PrecisionExhausted,
    PrecisionLoss,
    QuadratureNonConvergence,
)
from .identities import (
    check_painleve4,
    check_riccati,
    check_sigma_continuous,
    check_sigma_discrete,
    check_string_equations,
    check_t_derivatives,
)
from .ladder import check_compatibility, check_corollary, check_large_z, check_lowering, check_ode
from .models import (
    FDScheme,
    IdentityId,
    NumericPolicy,
    OdeMethod,
    ResidualReport,
    Suite,
    WeightParams,
    sorted_reports,
)
from .orthopoly import check_aux_quadrature, check_orthogonality
from .pipeline import HankelPipeline
from .reports import coefficient_rows, status

THREADS_ENV = "HANKEL_LADDER_THREADS"
ORTHO_MAX_DEGREE = 6

NUMERICAL_FAILURES = (
    PrecisionExhausted,
    PrecisionLoss,
    QuadratureNonConvergence,
    BackendDisagreement,
)

# identity reported when a whole job fails before producing its reports
PRIMARY_IDENTITY = {
    Suite.STRING: IdentityId.STRING_R_SUM,
    Suite.TDERIV: IdentityId.TDERIV_LOG_H,
    Suite.RICCATI: IdentityId.RICCATI_R_LARGE,
    Suite.PAINLEVE: IdentityId.PAINLEVE_IV,
    Suite.SIGMA: IdentityId.SIGMA_FORM,
    Suite.DSIGMA: IdentityId.DSIGMA_FORM,
    Suite.AUX: IdentityId.AUX_R_QUAD,
    Suite.ORTHO: IdentityId.ORTHOGONALITY,
    Suite.LADDER: IdentityId.LADDER_LOWERING,
}


@dataclass(frozen=True)
class SuiteContext:
    """What every job needs besides its own (suite, n, t, z)."""

    params: WeightParams
    policy: NumericPolicy
    n_max: int
    fd: FDScheme = field(default_factory=FDScheme)
    z_points: Tuple[complex, ...] = (complex(1, 1), complex(0, 2), complex(-3, 0.5))
    ode_method: OdeMethod = OdeMethod.KERNEL
    quiet: bool = True


@dataclass(frozen=True)
class Job:
    suite: Suite
    n: int
    t: Fraction
    z: Optional[complex] = None

    def __str__(self):
        where = f" z={self.z}" if self.z is not None else ""
        return f"{self.suite.value} n={self.n} t={float(self.t):g}{where}"


def worker_count(requested: Optional[int] = None, quiet: bool = False) -> int:
    """Requested count, else physical cores; HANKEL_LADDER_THREADS caps either."""
    count = requested or psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            status(f"⚠️  ignoring {THREADS_ENV}={cap!r}: not an integer", quiet)
    return max(1, count)


@lru_cache(maxsize=8)
def _pipeline(params: WeightParams, policy: NumericPolicy, n_max: int, quiet: bool) -> HankelPipeline:
    # one pipeline per worker process; snapshots and ladder sweeps are reused
    return HankelPipeline(params, policy, n_max, quiet=quiet)


def pipeline_for(context: SuiteContext) -> HankelPipeline:
    return _pipeline(context.params, context.policy, context.n_max, context.quiet)


def build_jobs(context: SuiteContext, suites: Sequence[Suite], t_grid: Iterable) -> List[Job]:
    n_max = context.n_max
    inner = range(1, n_max)
    full = range(1, n_max + 1)
    jobs = []
    for t in t_grid:
        t = Fraction(t)
        for suite in suites:
            if suite in (Suite.STRING, Suite.DSIGMA, Suite.TDERIV):
                jobs.extend(Job(suite, n, t) for n in inner)
            elif suite in (Suite.RICCATI, Suite.PAINLEVE, Suite.SIGMA):
                jobs.extend(Job(suite, n, t) for n in full)
            elif suite in (Suite.AUX, Suite.ORTHO):
                jobs.append(Job(suite, n_max, t))
            elif suite is Suite.LADDER:
                for n in range(n_max):
                    jobs.append(Job(suite, n, t))
                    jobs.extend(Job(suite, n, t, z) for z in context.z_points)
    return jobs


def _ladder_reports(context: SuiteContext, job: Job, pipeline: HankelPipeline) -> List[ResidualReport]:
    if job.z is None:
        reports = check_large_z(job.n, pipeline, job.t)
        try:
            reports += check_corollary(job.n, pipeline, job.t)
        except NotIntegrable as exc:
            reports.append(ResidualReport.skip(IdentityId.LADDER_NORM_IDENTITY, job.n, job.t, str(exc)))
            if job.n >= 1:
                reports.append(ResidualReport.skip(IdentityId.LADDER_CROSS_IDENTITY, job.n, job.t, str(exc)))
        return reports
    return (
        [check_lowering(job.z, job.n, pipeline, job.t)]
        + check_compatibility(job.z, job.n, pipeline, job.t)
        + [check_ode(job.z, job.n, pipeline, job.t, method=context.ode_method)]
    )


def _dispatch(context: SuiteContext, job: Job, pipeline: HankelPipeline) -> List[ResidualReport]:
    suite, n, t, fd = job.suite, job.n, job.t, context.fd
    if suite is Suite.STRING:
        snap = pipeline.snapshot(t)
        return check_string_equations(n, t, snap.aux, snap.rec)
    if suite is Suite.DSIGMA:
        snap = pipeline.snapshot(t)
        return check_sigma_discrete(n, t, snap.aux, snap.rec)
    if suite is Suite.TDERIV:
        return check_t_derivatives(n, t, pipeline, fd)
    if suite is Suite.RICCATI:
        return check_riccati(n, t, pipeline, fd)
    if suite is Suite.PAINLEVE:
        return check_painleve4(n, t, pipeline, fd)
    if suite is Suite.SIGMA:
        return check_sigma_continuous(n, t, pipeline, fd)
    if suite is Suite.AUX:
        snap = pipeline.snapshot(t)
        return check_aux_quadrature(n, snap.rec, snap.aux, snap.params, snap.policy)
    if suite is Suite.ORTHO:
        snap = pipeline.snapshot(t)
        return check_orthogonality(
            snap.rec, snap.params, snap.policy, n_hi=min(ORTHO_MAX_DEGREE, n), table=snap.table
        )
    return _ladder_reports(context, job, pipeline)


def run_job(context: SuiteContext, job: Job) -> List[ResidualReport]:
    """Reports for one job; numerical failures become one failed report."""
    pipeline = pipeline_for(context)
    try:
        return _dispatch(context, job, pipeline)
    except DegenerateSkip as exc:
        return [ResidualReport.skip(PRIMARY_IDENTITY[job.suite], job.n, job.t, str(exc))]
    except NUMERICAL_FAILURES as exc:
        identity = PRIMARY_IDENTITY[job.suite]
        with mp.workprec(context.policy.precision_bits):
            return [
                ResidualReport(
                    identity_id=identity,
                    n=job.n,
                    t=job.t,
                    residual=mp.inf,
                    tolerance=mp.mpf(0),
                    passed=False,
                    notes=f"error: {type(exc).__name__}: {exc}",
                )
            ]


def _map(function: Callable, items: Sequence, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(function, items))


def run_suites(
    context: SuiteContext,
    suites: Sequence[Suite],
    t_grid: Iterable,
    workers: Optional[int] = None,
    on_progress: Optional[Callable[[str], None]] = None,
) -> List[ResidualReport]:
    """Run every job of the grid and merge the reports in sort_key order."""
    jobs = build_jobs(context, suites, t_grid)
    count = worker_count(workers, context.quiet)
    if on_progress:
        on_progress(f"🔍 {len(jobs)} jobs on {count} worker{'s' if count != 1 else ''}")
    results = _map(partial(run_job, context), jobs, count)
    reports = [report for batch in results for report in batch]
    return sorted_reports(reports)


def _sweep_rows(context: SuiteContext, t: Fraction) -> List[Dict[str, str]]:
    snap = pipeline_for(context).snapshot(t)
    return coefficient_rows(snap.rec, snap.aux, with_t=True)


def run_sweep(context: SuiteContext, t_grid: Sequence, workers: Optional[int] = None) -> List[Dict[str, str]]:
    """Coefficient rows over the t grid, in grid order."""
    grid = [Fraction(t) for t in t_grid]
    results = _map(partial(_sweep_rows, context), grid, worker_count(workers, context.quiet))
    return [row for rows in results for row in rows]
