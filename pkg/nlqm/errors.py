class ModelError(Exception):
    """Base class for everything the library raises on bad input or failed numerics."""


### Parameters ###
class InvalidInputError(ModelError, ValueError):
    pass


class InvalidNormError(InvalidInputError):
    pass


class RegimeError(ModelError):
    pass


class UnsupportedReparameterizationError(RegimeError):
    pass


### Elliptic functions ###
class EllipticDomainError(ModelError, ValueError):
    pass


class EllipticConsistencyError(ModelError, ArithmeticError):
    pass


### Reduced dynamics ###
class NegativeDeltaError(ModelError, ValueError):
    pass


class OffManifoldError(ModelError, ValueError):
    pass


class OffShellError(ModelError, ValueError):
    pass


class DivergenceError(ModelError, ArithmeticError):
    pass


class EnergyBelowBarrierError(ModelError, ValueError):
    pass


class NoInteriorMinimumError(ModelError, ValueError):
    pass


class AmbiguousRegionError(ModelError, ValueError):
    pass


### State vectors ###
class DegenerateFrequencyError(ModelError):
    pass


class InconsistencyError(ModelError, AssertionError):
    pass


class BasisTooSmallError(ModelError, ValueError):
    pass


class PathDomainError(ModelError, ValueError):
    pass


class AccuracyError(ModelError, ArithmeticError):
    pass


class NoSolutionFoundError(ModelError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


### Density matrix / trajectories ###
class InsufficientDataError(ModelError, ValueError):
    pass


class NonHermitianError(ModelError, ValueError):
    pass


class DegenerateOrbitWarning(UserWarning):
    pass


### Command line ###
class ConfigError(ModelError, ValueError):
    pass
