"""Exception hierarchy shared across the package."""


class SkyrlabError(Exception):
    """Base class for all skyrlab errors."""


class ContractError(SkyrlabError):
    """A documented precondition was violated by the caller."""


class DegenerateInputError(SkyrlabError):
    """The requested quantity is undefined for this input.

    Raised e.g. when a winding angle is requested through a site whose
    spin expectation vanishes, or when a qubit is requested at a
    degenerate parameter point.
    """


class ConvergenceError(SkyrlabError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class IntegratorError(SkyrlabError):
    """Time stepping lost accuracy (norm drift or series truncation)."""


class ResourceError(SkyrlabError):
    """The request exceeds what this machine-scale code will attempt."""
