"""Explicit kernels and solution operators for (-Delta)^s on the half-space {x1 > 0}."""

from ._backend import NAME as BACKEND
from .errors import (
    CenterPointError,
    CoincidentPointError,
    ConvergenceError,
    ExtrapolationError,
    HsfracError,
    IndexRangeError,
    IntegerOrderError,
    NotInL1sError,
    ParameterError,
    ProximityError,
)
from .fields import Bump, ScalarField, bump_field, lorentzian, power_field
from .fraclap import frac_laplacian_at
from .kernels import (
    KernelId,
    boundary_kernel,
    green_ball,
    green_halfspace,
    martin_kernel,
    poisson_nonlocal,
    reflected_P,
)
from .params import Params, constants
from .quadrature import DEFAULT_CONFIG, QuadConfig, integrate_1d, integrate_nd, richardson
from .solvers import (
    BumpSum,
    SolutionField,
    envelope_ratio,
    solve_boundary,
    solve_full,
    solve_green,
    solve_poisson,
)
from .transforms import Inversion, kelvin_apply, trace_D

__version__ = "0.1.0"
