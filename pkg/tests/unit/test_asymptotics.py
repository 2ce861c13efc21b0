"""Unit tests for the large-n expansions and their decay judgement."""

import pytest
from fractions import Fraction

import mpmath as mp

from hankel_ladder.asymptotics import (
    HANKEL_WINDOW,
    R_WINDOW,
    asymptotic_coefficients,
    balance_root,
    branch_distance,
    check_asymptotics_R,
    check_hankel_expansion,
    check_quartic_balance,
    default_pipeline,
    expansion_log_hankel,
    expansion_R,
    expansion_sigma,
    judge_decay,
    quartic_residual,
    quartic_roots,
)
from hankel_ladder.errors import InvalidParameters
from hankel_ladder.models import IdentityId, WeightParams, to_mpf
from tests.mocks.synthetic_pipeline import synthetic_factory

N_LIST = (16, 32, 64)


@pytest.fixture
def upper():
    return WeightParams(A=1, B=1, gamma=Fraction(3, 2), t=Fraction(1, 2))


@pytest.fixture
def lower():
    return WeightParams(A=1, B=Fraction(-1, 2), gamma=Fraction(3, 2), t=Fraction(1, 2))


@pytest.fixture
def flat():
    return WeightParams(A=1, B=1, gamma=0, t=Fraction(1, 2))


@pytest.mark.unit
class TestCoefficients:
    def test_leading_coefficient(self, upper, lower):
        with mp.workprec(128):
            d_up = asymptotic_coefficients(upper)
            d_down = asymptotic_coefficients(lower)
            assert mp.almosteq(d_up[0], mp.mpf("1.6329931618554520654648560"), rel_eps=mp.mpf(10) ** -20)
            assert mp.almosteq(d_down[0], -d_up[0])

    def test_branch_independent_terms(self, upper, lower):
        with mp.workprec(128):
            d_up = asymptotic_coefficients(upper)
            d_down = asymptotic_coefficients(lower)
            assert d_up[1] == d_down[1] == mp.mpf(1) / 3
            assert d_up[3] == d_down[3] == 0
            assert mp.almosteq(d_up[5], d_down[5])
            assert mp.almosteq(d_up[2], -d_down[2])
            assert mp.almosteq(d_up[4], -d_down[4])

    def test_needs_a_jump(self):
        with pytest.raises(InvalidParameters):
            asymptotic_coefficients(WeightParams(A=1, B=0, gamma=1, t=0))

    def test_expansion_is_dominated_by_sqrt_n(self, upper):
        with mp.workprec(128):
            value = expansion_R(10**6, upper)
            assert abs(value / (mp.mpf(1000) * asymptotic_coefficients(upper)[0]) - 1) < mp.mpf(10) ** -3

    def test_log_hankel_vanishes_at_zero(self, upper):
        with mp.workprec(128):
            assert expansion_log_hankel(32, 0, upper) == 0

    def test_sigma_is_slope_of_log_hankel(self, upper):
        # the log-determinant expansion integrates the sigma expansion in t
        with mp.workprec(128):
            x = mp.mpf("0.3")
            slope = mp.diff(lambda u: expansion_log_hankel(32, u, upper), x)
            assert mp.almosteq(slope, expansion_sigma(32, upper, x), rel_eps=mp.mpf(10) ** -20)


@pytest.mark.unit
class TestQuartic:
    def test_roots_balance_the_quartic(self):
        with mp.workprec(128):
            for root in quartic_roots(20, mp.mpf("0.5")):
                assert quartic_residual(root, 20, mp.mpf("0.5"), 0) < mp.mpf(10) ** -30

    def test_branch_root(self, flat):
        with mp.workprec(128):
            plus, minus = quartic_roots(20, flat.t)
            assert balance_root(20, flat) == plus
            assert plus > 0 > minus

    def test_root_tracks_leading_coefficient(self, flat):
        with mp.workprec(128):
            n = 10**6
            assert abs(balance_root(n, flat) / (asymptotic_coefficients(flat)[0] * mp.sqrt(n)) - 1) < mp.mpf(10) ** -3

    def test_root_with_singular_factor(self, upper, lower):
        with mp.workprec(128):
            t, gamma = to_mpf(upper.t), to_mpf(upper.gamma)
            up, down = balance_root(32, upper), balance_root(32, lower)
            assert up > 0 > down
            for root in (up, down):
                assert quartic_residual(root, 32, t, gamma) < mp.mpf(10) ** -30
            leading = asymptotic_coefficients(upper)[0] * mp.sqrt(32)
            assert abs(up / leading - 1) < mp.mpf("0.1")

    def test_branch_distance(self):
        with mp.workprec(64):
            assert branch_distance(mp.mpf(0), mp.mpf(13)) == 1
            assert branch_distance(mp.mpf(12), mp.mpf(-12)) == 2


@pytest.mark.unit
class TestJudgeDecay:
    def test_expected_rate_passes(self):
        with mp.workprec(128):
            errors = [mp.mpf(n) ** -2.5 for n in N_LIST]
            reports = judge_decay(IdentityId.ASYMPTOTIC_R, N_LIST, errors, 0, R_WINDOW)
        assert [r.n for r in reports] == [32, 64]
        assert all(r.passed for r in reports)

    def test_slow_rate_fails(self):
        with mp.workprec(128):
            errors = [1 / mp.mpf(n) for n in N_LIST]
            reports = judge_decay(IdentityId.ASYMPTOTIC_R, N_LIST, errors, 0, R_WINDOW)
        assert not any(r.passed for r in reports)

    def test_window_scales_with_step(self):
        with mp.workprec(128):
            # n^-1/2 across a quadrupling: ratio 1/2, window [0.25, 0.81]
            errors = [mp.mpf(n) ** -0.5 for n in (16, 64)]
            (report,) = judge_decay(IdentityId.HANKEL_EXPANSION, (16, 64), errors, 0, HANKEL_WINDOW)
        assert report.passed

    def test_zero_error_fails(self):
        with mp.workprec(128):
            reports = judge_decay(IdentityId.ASYMPTOTIC_R, (16, 32), [mp.mpf(0), mp.mpf(1)], 0, R_WINDOW)
        assert not reports[0].passed
        assert "zero error" in reports[0].notes


@pytest.mark.unit
@pytest.mark.mock
class TestChecksWithSyntheticPipelines:
    def test_asymptotics_R(self, policy, upper):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = expansion_R(n, params) + mp.mpf(n) ** -2.5
            return R

        factory = synthetic_factory(R_of=R_of)
        reports, points = check_asymptotics_R(N_LIST, upper.t, upper, policy, make_pipeline=factory)
        assert len(factory.built) == 3
        assert all(r.passed for r in reports)
        assert [p.n for p in points] == list(N_LIST)
        assert points[0].ratio is None
        assert list(points[1].to_row(192)) == ["n", "R_n", "expansion", "abs_err", "ratio", "branch_fraction"]
        assert all(p.on_branch for p in points)
        assert not any("off the sqrt(n) branch" in r.notes for r in reports)

    def test_asymptotics_R_flags_bounded_data(self, policy, upper):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = mp.mpf("0.05")
            return R

        reports, points = check_asymptotics_R(
            N_LIST, upper.t, upper, policy, make_pipeline=synthetic_factory(R_of=R_of)
        )
        assert not any(r.passed for r in reports)
        assert not any(p.on_branch for p in points)
        assert all(abs(p.branch_fraction) < mp.mpf("0.01") for p in points)
        assert all("off the sqrt(n) branch" in r.notes for r in reports)
        assert points[0].to_row(192)["branch_fraction"] != ""

    def test_asymptotics_R_detects_wrong_rate(self, policy, upper):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = expansion_R(n, params) + 1 / mp.mpf(n)
            return R

        reports, _ = check_asymptotics_R(
            N_LIST, upper.t, upper, policy, make_pipeline=synthetic_factory(R_of=R_of)
        )
        assert not any(r.passed for r in reports)

    def test_hankel_expansion(self, policy, upper):
        def h_of(n, params):
            h = [mp.mpf(1)] * (n + 2)
            if params.t != 0:
                h[0] = mp.exp(expansion_log_hankel(n, params.t, params) + mp.mpf(n) ** -0.5)
            return h

        def sigma_of(n, params):
            return expansion_sigma(n, params) + mp.mpf(n) ** -0.5

        factory = synthetic_factory(h_of=h_of, sigma_of=sigma_of)
        reports = check_hankel_expansion(N_LIST, Fraction(1, 2), upper, policy, make_pipeline=factory)
        assert len(factory.built) == 6
        ids = [r.identity_id for r in reports]
        assert ids.count(IdentityId.HANKEL_EXPANSION) == 2
        assert ids.count(IdentityId.ASYMPTOTIC_SIGMA) == 2
        assert all(r.passed for r in reports)

    def test_hankel_expansion_rejects_nonpositive_s(self, policy, upper):
        with pytest.raises(InvalidParameters):
            check_hankel_expansion(N_LIST, 0, upper, policy, make_pipeline=synthetic_factory())

    def test_quartic_balance(self, policy, flat):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = balance_root(n, params) + 1 / mp.mpf(n)
            return R

        reports = check_quartic_balance(N_LIST, flat, policy, make_pipeline=synthetic_factory(R_of=R_of))
        assert len(reports) == 3
        assert all(r.passed for r in reports)
        assert "root" in reports[-1].notes
        assert "half of n=16" in reports[-1].notes
        assert all("residual/n^2" in r.notes for r in reports)

    def test_quartic_balance_with_singular_factor(self, policy, upper):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = balance_root(n, params) * (1 + 1 / mp.mpf(n))
            return R

        reports = check_quartic_balance(N_LIST, upper, policy, make_pipeline=synthetic_factory(R_of=R_of))
        assert all(r.passed for r in reports)

    def test_quartic_balance_rejects_bounded_R(self, policy, flat):
        # R_n = 0 keeps the distance from the root at exactly 1
        reports = check_quartic_balance(N_LIST, flat, policy, make_pipeline=synthetic_factory())
        assert all(r.residual == 1 for r in reports)
        assert not reports[-1].passed

    def test_quartic_balance_wrong_branch(self, policy, flat):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = -balance_root(n, params)
            return R

        reports = check_quartic_balance(N_LIST, flat, policy, make_pipeline=synthetic_factory(R_of=R_of))
        assert not reports[-1].passed

    def test_quartic_balance_growing_residual(self, policy, flat):
        def R_of(n, params):
            R = [mp.mpf(0)] * (n + 1)
            R[n] = balance_root(n, params) + n
            return R

        reports = check_quartic_balance(N_LIST, flat, policy, make_pipeline=synthetic_factory(R_of=R_of))
        assert not all(r.passed for r in reports)

    def test_quartic_needs_large_n(self, policy, flat):
        with pytest.raises(InvalidParameters):
            check_quartic_balance((8, 16), flat, policy, make_pipeline=synthetic_factory())

    def test_n_list_must_ascend(self, policy, upper):
        with pytest.raises(InvalidParameters):
            check_asymptotics_R((32, 16), upper.t, upper, policy, make_pipeline=synthetic_factory())


@pytest.mark.unit
def test_default_pipeline_uses_degree_precision(policy, upper):
    pipeline = default_pipeline(upper, policy, 40)
    assert pipeline.n_max == 40
    assert pipeline.policy.precision_bits == 2048
    assert policy.precision_bits == 192
