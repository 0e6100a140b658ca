"""Exception and warning types raised across the package."""


class SpinPhononError(Exception):
    """Base class for all package errors."""


class SchemaError(SpinPhononError, ValueError):
    """A dataset file is missing a field or has a malformed one."""

    def __init__(self, message, field=None, path=None):
        self.field = field
        self.path = path
        super().__init__(message)


class PhysicalValidityError(SpinPhononError, ValueError):
    """Input violates a physical constraint (e.g. non-positive frequency)."""


class ConsistencyError(SpinPhononError, ValueError):
    """Array dimensions of related inputs disagree."""


class UnsupportedOperationError(SpinPhononError):
    """The requested operation needs data the object does not carry."""


class EmptyProjectionError(SpinPhononError):
    """The coupling matrix has no nonzero singular direction."""


class EmbeddingInstabilityError(SpinPhononError):
    """A projected Hessian block has a non-positive eigenvalue."""

    def __init__(self, message, eigenvalue=None):
        self.eigenvalue = eigenvalue
        super().__init__(message)


class SpectralRangeError(SpinPhononError, ValueError):
    """A spectral density was requested outside its sampled frequency window."""

    def __init__(self, message, frequency=None):
        self.frequency = frequency
        super().__init__(message)


class DegenerateSpectrumError(SpinPhononError):
    """The spin Hamiltonian has no Zeeman splitting."""


class NumericalError(SpinPhononError):
    """An integration result violated trace or Hermiticity invariants."""


class StiffnessError(NumericalError):
    """The adaptive integrator could not take a step."""


class ConvergenceError(SpinPhononError):
    """Oscillator truncation is too small for the requested temperature."""

    def __init__(self, message, suggested_levels=None):
        self.suggested_levels = suggested_levels
        super().__init__(message)


class MultiExponentialWarning(UserWarning):
    """A relaxation trace is not single-exponential.

    Both candidate rates are attached so callers can decide which to keep.
    """

    def __init__(self, message, eigen_rate=None, fit_rate=None):
        self.eigen_rate = eigen_rate
        self.fit_rate = fit_rate
        super().__init__(message)
