"""Exception types shared across the library."""


class LindstepError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitian(LindstepError):
    """Matrix fails the Hermiticity tolerance of a Hermitian-only routine."""


class ConvergenceFailure(LindstepError):
    """An iterative factorization or integration failed to converge."""


class NotPositiveDefinite(LindstepError):
    """Matrix has an eigenvalue at or below the required floor."""


class Singular(LindstepError):
    """Linear solve hit a pivot below the singularity threshold."""


class Overflow(LindstepError):
    """Intermediate values left the representable floating-point range."""


class LeakageTooLarge(LindstepError):
    """Truncated state lost too much mass for the requested dimension."""


class DimMismatch(LindstepError):
    """Operands have incompatible dimensions."""


class NonHermitianHamiltonian(LindstepError):
    """Hamiltonian fails its Hermiticity tolerance."""


class DimTooLarge(LindstepError):
    """Dimension exceeds the cap of a small-dimension-only routine."""


class DegenerateTrace(LindstepError):
    """Pre-normalization trace underflowed; time step is far too large."""


class StepUnderflow(LindstepError):
    """Adaptive integrator pushed the step size below its minimum."""


class MaxStepsExceeded(LindstepError):
    """Adaptive integrator exceeded its step budget."""


class GridMismatch(LindstepError):
    """Reference trajectory lacks a required sample time."""


class InsufficientPoints(LindstepError):
    """Not enough usable points for a least-squares order estimate."""


class BadConfig(LindstepError):
    """Benchmark configuration is invalid."""
