"""Exception hierarchy shared by the library and the command-line front end."""


class EAClustError(Exception):
    """Base class for all errors raised by eaclust."""

    exit_code = 1


class DataError(EAClustError):
    """Malformed, missing or invalid input data."""

    exit_code = 3


class InvalidArgumentError(EAClustError, ValueError):
    exit_code = 2


class NumericalError(EAClustError):
    """Base for failures of the likelihood machinery."""

    exit_code = 4


class FactorizationError(NumericalError):
    """A covariance matrix could not be Cholesky-factorized."""

    def __init__(self, component, message=None):
        self.component = component
        super().__init__(message or f"covariance of component {component} is not positive definite")


class InfeasibleLabelingError(NumericalError):
    """A hard labeling cannot yield positive-definite covariance estimates."""

    def __init__(self, component, reason):
        self.component = component
        self.reason = reason
        super().__init__(f"infeasible labeling: component {component} {reason}")


class DegeneracyError(NumericalError):
    """EM collapsed a component; carries the last valid iterate."""

    def __init__(self, message, last_params=None, iteration=None):
        self.last_params = last_params
        self.iteration = iteration
        super().__init__(message)


class NoDistinctPairError(EAClustError):
    """Every observation carries the same label, so no crossover swap exists."""
