"""Oriented lines, Laplace sections and the twistor transforms built on them."""

from .errors import (
    ConsistencyError,
    ContourError,
    DegenerateError,
    EvaluationError,
    InputError,
    MinitwistorError,
    PreconditionError,
)
from .lines import (
    EuclideanPoint,
    OrientedLine,
    common_point_of_three,
    correspondence_project,
    incidence,
    laplace_section_eval,
    line_through_points,
    reverse_orientation,
    section_zeros,
    sections_intersect,
)
from .numerics import AlternatingForm, FDConfig, RationalMatrix, hodge_star
from .sphere import (
    conformal_killing_residual,
    eigen_residual,
    harmonic_multiplicity,
    harmonic_multiplicity_oracle,
    spherical_gradient,
    spherical_laplacian,
)
from .g2 import (
    G2AlgebraElement,
    TangentPair,
    associative_form,
    coassociative_form,
    cross7,
    g2_algebra_basis,
    g2_algebra_dimension,
    isotropy_dimension,
    jdombrowski,
    jtilde,
    pseudoholo_residual,
)
from .study import DualAngle, DualMatrix, DualScalar, DualVector, dual_angle
from .transforms import (
    ContourSpec,
    FieldSpec,
    TwistorFunctionSpec,
    john_transform,
    whittaker_eval,
    xray_transform,
)

__version__ = "0.1.0"
