"""Exception hierarchy shared by the library and the CLI."""


class ObsDesignError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class ConfigurationError(ObsDesignError, ValueError):
    exit_code = 2


class DomainError(ObsDesignError, ValueError):
    """Argument outside the tabulated validity range of a special function."""

    exit_code = 2


class NumericalError(ObsDesignError, RuntimeError):
    exit_code = 3


class DegenerateDesignError(NumericalError):
    """The level-set design is undefined (the energy density vanishes)."""


class CertificationError(ObsDesignError, RuntimeError):
    exit_code = 4

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending
