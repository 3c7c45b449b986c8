"""Exception hierarchy. The CLI maps each family to an exit code."""


class OrdlabError(Exception):
    exit_code = 1


class DomainError(OrdlabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PreconditionError(OrdlabError, ValueError):
    pass


class RangeError(OrdlabError, ValueError):
    pass


class GridError(OrdlabError, ValueError):
    """Requested subgrid is not compatible with the path grid."""


class DegeneratePathError(OrdlabError, ValueError):
    def __init__(self, m, message=None):
        self.m = m
        super().__init__(message or f"quadratic variation vanishes at m={m}")


class CapacityError(OrdlabError):
    pass


class MethodError(OrdlabError):
    """A simulation method cannot be applied to the given parameters."""


class ResolutionError(OrdlabError):
    exit_code = 3
