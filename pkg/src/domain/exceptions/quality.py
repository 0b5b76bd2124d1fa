class DegenerateDistributionError(ValueError):
    """Samples are too few or have no spread to fit a distribution."""

    def __init__(self, fit: str, reason: str):
        super().__init__(f"Cannot fit {fit}: {reason}")
        self.fit = fit
        self.reason = reason


class PristineCorpusTooSmallError(ValueError):
    """The pristine corpus does not have enough images."""

    def __init__(self, size: int, minimum: int):
        super().__init__(f"Pristine corpus needs at least {minimum} images, got {size}")
        self.size = size
        self.minimum = minimum


class SingularCovarianceError(RuntimeError):
    """The feature covariance is not positive definite even after regularization."""

    def __init__(self, regularization: float, original_error: Exception):
        super().__init__(
            f"Feature covariance is singular with regularization {regularization}: {original_error}"
        )
        self.regularization = regularization
        self.original_error = original_error
