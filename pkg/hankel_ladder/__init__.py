"""Hankel Ladder - orthogonal polynomials and Painleve identities for a deformed Hermite weight."""

__version__ = "0.1.0"

from .errors import (
    BackendDisagreement,
    DegenerateSkip,
    HankelLadderError,
    InvalidParameters,
    NotIntegrable,
    PrecisionExhausted,
    PrecisionLoss,
    QuadratureNonConvergence,
    SingularPoint,
)
from .models import (
    AuxQuantities,
    Backend,
    FDOrder,
    FDScheme,
    IdentityId,
    LadderSample,
    MomentTable,
    NumericPolicy,
    OdeMethod,
    RecurrenceData,
    ResidualReport,
    RunConfig,
    Suite,
    WeightParams,
)
from .weight import potential_v0, v0_prime, weight_eval
from .moments import base_integrals, cross_check, moments_quadrature, moments_recurrence
from .orthopoly import (
    aux_by_quadrature,
    aux_from_recurrence,
    eval_monic,
    eval_monic_derivatives,
    hankel_determinant_oracle,
    recurrence_from_moments,
)
from .pipeline import HankelPipeline, Snapshot, compute_snapshot
from .ladder import eval_AB
