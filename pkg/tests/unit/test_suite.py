"""Unit tests for job construction, dispatch and merging."""

import pytest
from dataclasses import replace
from fractions import Fraction

from hankel_ladder.errors import DegenerateSkip, QuadratureNonConvergence
from hankel_ladder.models import IdentityId, OdeMethod, Suite
from hankel_ladder.suite import (
    THREADS_ENV,
    Job,
    SuiteContext,
    build_jobs,
    run_job,
    run_suites,
    run_sweep,
    worker_count,
)


@pytest.fixture
def context(policy, hermite_params, fd):
    return SuiteContext(params=hermite_params, policy=policy, n_max=4, fd=fd, z_points=(complex(1, 1),))


@pytest.fixture
def jump_context(policy, jump_params, fd):
    return SuiteContext(params=jump_params, policy=policy, n_max=4, fd=fd, z_points=(complex(0, 2),))


@pytest.mark.unit
class TestBuildJobs:
    def test_index_ranges(self, context):
        t = [Fraction(7, 10)]
        assert [j.n for j in build_jobs(context, [Suite.STRING], t)] == [1, 2, 3]
        assert [j.n for j in build_jobs(context, [Suite.RICCATI], t)] == [1, 2, 3, 4]
        assert [j.n for j in build_jobs(context, [Suite.ORTHO], t)] == [4]

    def test_ladder_jobs(self, context):
        jobs = build_jobs(context, [Suite.LADDER], [0])
        # per n: one job for large z and the corollary, one per complex point
        assert len(jobs) == 4 * 2
        assert sum(1 for j in jobs if j.z is None) == 4

    def test_grid_multiplies(self, context):
        jobs = build_jobs(context, [Suite.STRING, Suite.DSIGMA], [0, Fraction(1, 2)])
        assert len(jobs) == 2 * 2 * 3
        assert {j.t for j in jobs} == {0, Fraction(1, 2)}

    def test_job_label(self):
        assert str(Job(Suite.LADDER, 2, Fraction(1, 2), complex(0, 2))) == "ladder n=2 t=0.5 z=2j"


@pytest.mark.unit
class TestWorkerCount:
    def test_requested(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert worker_count(3) == 3

    def test_env_caps(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "2")
        assert worker_count(8) == 2

    def test_bad_env_ignored(self, monkeypatch, capsys):
        monkeypatch.setenv(THREADS_ENV, "many")
        assert worker_count(5) == 5
        assert "⚠️  ignoring HANKEL_LADDER_THREADS='many'" in capsys.readouterr().err

    def test_bad_env_warning_respects_quiet(self, monkeypatch, capsys):
        monkeypatch.setenv(THREADS_ENV, "many")
        assert worker_count(5, quiet=True) == 5
        assert capsys.readouterr().err == ""

    def test_defaults_to_cpu_count(self, monkeypatch, mocker):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        mocker.patch("hankel_ladder.suite.psutil.cpu_count", return_value=6)
        assert worker_count() == 6


@pytest.mark.unit
class TestRunJob:
    def test_string_job(self, context):
        reports = run_job(context, Job(Suite.STRING, 2, Fraction(7, 10)))
        assert len(reports) == 6
        assert all(r.passed for r in reports)

    def test_ladder_job_on_gaussian_skips_corollary(self, context):
        reports = run_job(context, Job(Suite.LADDER, 1, Fraction(7, 10)))
        ids = [r.identity_id for r in reports]
        assert ids[:2] == [IdentityId.LARGE_Z_A, IdentityId.LARGE_Z_B]
        skipped = [r for r in reports if r.skipped]
        assert {r.identity_id for r in skipped} == {
            IdentityId.LADDER_NORM_IDENTITY,
            IdentityId.LADDER_CROSS_IDENTITY,
        }

    @pytest.mark.mock
    def test_numerical_failure_becomes_failed_report(self, context, mocker):
        mocker.patch(
            "hankel_ladder.suite._dispatch",
            side_effect=QuadratureNonConvergence("orthogonality integrals", 1e-20, 1e-30),
        )
        (report,) = run_job(context, Job(Suite.ORTHO, 4, Fraction(7, 10)))
        assert report.identity_id is IdentityId.ORTHOGONALITY
        assert not report.passed
        assert report.notes.startswith("error: QuadratureNonConvergence")

    @pytest.mark.mock
    def test_ode_method_reaches_ladder_jobs(self, context, mocker):
        mocker.patch("hankel_ladder.suite.check_lowering", return_value="lowering")
        mocker.patch("hankel_ladder.suite.check_compatibility", return_value=["compat"])
        ode = mocker.patch("hankel_ladder.suite.check_ode", return_value="ode")
        circle = replace(context, ode_method=OdeMethod.CIRCLE)

        reports = run_job(circle, Job(Suite.LADDER, 1, Fraction(7, 10), complex(1, 1)))

        assert reports == ["lowering", "compat", "ode"]
        assert ode.call_args.kwargs["method"] is OdeMethod.CIRCLE

    @pytest.mark.mock
    def test_degenerate_job_is_skipped(self, context, mocker):
        mocker.patch("hankel_ladder.suite._dispatch", side_effect=DegenerateSkip("R_n vanishes"))
        (report,) = run_job(context, Job(Suite.PAINLEVE, 1, Fraction(7, 10)))
        assert report.skipped and report.passed


@pytest.mark.unit
class TestRunSuites:
    def test_inline_run_is_sorted(self, jump_context):
        messages = []
        reports = run_suites(jump_context, [Suite.STRING, Suite.DSIGMA], [Fraction(1, 2)], workers=1, on_progress=messages.append)
        assert reports == sorted(reports, key=lambda r: r.sort_key())
        assert all(r.passed for r in reports)
        assert messages and "jobs on 1 worker" in messages[0]

    def test_sweep_rows_follow_grid(self, context):
        rows = run_sweep(context, [Fraction(1, 2), 0], workers=1)
        assert len(rows) == 2 * 5
        assert rows[0]["t"] == "0.5"
        assert rows[-1]["t"] == "0.0"
        assert rows[-1]["n"] == "4"
