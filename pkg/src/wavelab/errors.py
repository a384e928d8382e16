"""Exception types shared across the package."""


class WavelabError(Exception):
    """Base class for all package-specific errors."""


class InputError(WavelabError):
    """Malformed or inconsistent input data."""


class SpecMismatchError(InputError):
    """Operands built over different branch systems."""


class CapacityError(WavelabError):
    """A requested depth would exceed the configured cell cap."""


class ConvergenceError(WavelabError):
    """An iterative solve stopped before reaching its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class UnsupportedConstructionError(WavelabError):
    """A builder was asked for a construction its hypotheses exclude."""


class ModuleBasisError(WavelabError):
    """Generators fail to span a module basis."""


class PreconditionError(WavelabError):
    """A documented mathematical precondition is violated."""


class VerificationError(WavelabError):
    """A postcondition check failed on supposedly valid inputs."""
