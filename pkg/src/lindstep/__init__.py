"""Structure-preserving time steppers for Lindblad master equations on
Galerkin-truncated bosonic Hilbert spaces, with comparator schemes, an
adaptive reference solver, stability analysis, and a benchmark CLI."""

__version__ = "0.1.0"

from . import analysis, cli, errors, fock, lindblad, matcore, reference, schemes
from .analysis import (
    ErrorCurve,
    OpCount,
    cfl_threshold,
    coefficient_c,
    error_curve,
    estimate_order,
    opcount,
)
from .lindblad import LindbladModel, apply_lindbladian, build_model, exact_channel
from .reference import AdaptiveConfig, solve_reference
from .schemes import (
    KrausChannel,
    KrausFamily,
    OpCounter,
    Scheme,
    Stepper,
    apply_kraus,
    apply_lucao,
    build_lucao,
    build_qc1,
    build_qc2,
    integrate,
    make_stepper,
    step_euler,
    step_rk4,
)
from .trajectory import Trajectory
