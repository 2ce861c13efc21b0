"""Integration tests for full workflow."""

import csv
import json
import pytest
from fractions import Fraction

from hankel_ladder.cli import EXIT_OK, run
from hankel_ladder.models import (
    Command,
    NumericPolicy,
    OutputFormat,
    RunConfig,
    Suite,
    WeightParams,
)


@pytest.mark.integration
class TestFullWorkflow:
    @pytest.fixture
    def reference_params(self):
        """The reference case: singular factor and jump together."""
        return WeightParams(A=1, B=1, gamma=Fraction(3, 2), t=Fraction(1, 2))

    @pytest.fixture
    def fast_policy(self):
        return NumericPolicy(precision_bits=192, quad_tol=Fraction(1, 10**30))

    def test_coefficients_workflow(self, tmp_path, reference_params, fast_policy):
        """Moments, then coefficients, written as JSON."""
        # 1. Moments from both backends
        moments_path = tmp_path / "moments.json"
        config = RunConfig(
            command=Command.MOMENTS,
            params=reference_params,
            policy=fast_policy,
            n_max=4,
            output=OutputFormat.JSON,
            out_path=moments_path,
            quiet=True,
        )
        assert run(config) == EXIT_OK
        moments = json.loads(moments_path.read_text())
        assert len(moments) == 9

        # 2. Coefficients at the same parameters
        coeffs_path = tmp_path / "coeffs.csv"
        config = RunConfig(
            command=Command.COEFFS,
            params=reference_params,
            policy=fast_policy,
            n_max=4,
            out_path=coeffs_path,
            quiet=True,
        )
        assert run(config) == EXIT_OK
        with open(coeffs_path) as f:
            rows = list(csv.DictReader(f))
        assert [row["n"] for row in rows] == ["0", "1", "2", "3", "4"]
        assert float(rows[0]["D_n"]) == 1.0
        # h_0 is the total mass mu_0
        assert float(rows[0]["h_n"]) == pytest.approx(float(moments[0]["mu_k"]), rel=1e-12)

    def test_verify_all_suites(self, tmp_path, reference_params, fast_policy):
        """Every suite on one grid point, merged into one table."""
        out = tmp_path / "verify.csv"
        config = RunConfig(
            command=Command.VERIFY,
            params=reference_params,
            policy=fast_policy,
            n_max=4,
            suites=tuple(Suite),
            out_path=out,
            z_points=(complex(1, 1), complex(0, 2)),
            workers=1,
            quiet=True,
        )
        code = run(config)

        with open(out) as f:
            rows = list(csv.DictReader(f))
        failures = [row for row in rows if row["pass"] != "true"]
        assert code == EXIT_OK, failures
        identities = {row["identity_id"] for row in rows}
        for expected in ("string_quadratic", "riccati_R", "painleve_iv", "sigma_form", "dsigma_form",
                         "aux_R_quad", "orthogonality", "ladder_lowering", "compat_quadratic", "large_z_A"):
            assert expected in identities
        assert rows == sorted(rows, key=lambda r: (r["identity_id"], int(r["n"]), r["t"], r["notes"]))

    def test_sweep_workflow(self, tmp_path, fast_policy):
        """A t grid through the worker pool."""
        out = tmp_path / "sweep.csv"
        params = WeightParams(A=1, B=0, gamma=2, t=0)
        config = RunConfig(
            command=Command.SWEEP,
            params=params,
            policy=fast_policy,
            n_max=3,
            t_grid=(Fraction(-1), Fraction(0), Fraction(1)),
            out_path=out,
            workers=2,
            quiet=True,
        )
        assert run(config) == EXIT_OK
        with open(out) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 3 * 4
        assert [row["t"] for row in rows[::4]] == ["-1.0", "0.0", "1.0"]
        # generalized Hermite at t = 0: beta_1 = (1 + gamma)/2
        assert float(rows[5]["beta_n"]) == pytest.approx(1.5)

    def test_parallel_matches_inline(self, tmp_path, reference_params, fast_policy):
        """The merge does not depend on the worker count."""
        tables = []
        for workers in (1, 2):
            out = tmp_path / f"verify_{workers}.csv"
            config = RunConfig(
                command=Command.VERIFY,
                params=reference_params,
                policy=fast_policy,
                n_max=3,
                suites=(Suite.STRING, Suite.DSIGMA, Suite.RICCATI),
                t_grid=(Fraction(1, 2), Fraction(1)),
                out_path=out,
                workers=workers,
                quiet=True,
            )
            assert run(config) == EXIT_OK
            tables.append(out.read_text())
        assert tables[0] == tables[1]
