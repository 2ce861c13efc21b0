"""Pytest configuration and shared fixtures."""

import pytest
import sys
from fractions import Fraction
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from hankel_ladder.models import FDScheme, NumericPolicy, WeightParams
from hankel_ladder.pipeline import HankelPipeline

# reduced precision keeps the unit suite fast; acceptance runs use 512 bits
TEST_BITS = 192
TEST_QUAD_TOL = Fraction(1, 10**30)


@pytest.fixture(scope="session")
def policy():
    return NumericPolicy(precision_bits=TEST_BITS, quad_tol=TEST_QUAD_TOL)


@pytest.fixture(scope="session")
def fd():
    return FDScheme(step=Fraction(1, 10**8))


@pytest.fixture(scope="session")
def hermite_params():
    """Shifted Gaussian: gamma = 0, no jump."""
    return WeightParams(A=1, B=0, gamma=0, t=Fraction(7, 10))


@pytest.fixture(scope="session")
def jump_params():
    """The reference case with both the singularity and the jump."""
    return WeightParams(A=1, B=1, gamma=Fraction(3, 2), t=Fraction(1, 2))


@pytest.fixture(scope="session")
def negative_jump_params():
    return WeightParams(A=1, B=Fraction(-1, 2), gamma=Fraction(1, 2), t=-1)


@pytest.fixture(scope="session")
def pipeline_cache():
    return {}


@pytest.fixture(scope="session")
def make_pipeline(policy, pipeline_cache):
    """Session-wide pipelines so finite-difference snapshots are shared between tests."""

    def factory(params, n_max=8, test_policy=None):
        use = test_policy or policy
        key = (params, use, n_max)
        if key not in pipeline_cache:
            pipeline_cache[key] = HankelPipeline(params, use, n_max, quiet=True)
        return pipeline_cache[key]

    return factory


@pytest.fixture
def hermite_pipeline(make_pipeline, hermite_params):
    return make_pipeline(hermite_params)


@pytest.fixture
def jump_pipeline(make_pipeline, jump_params):
    return make_pipeline(jump_params)
