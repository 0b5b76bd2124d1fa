class EmptyDatasetError(ValueError):
    """Training or evaluation was given no samples."""

    def __init__(self, what: str):
        super().__init__(f"{what} is empty")
        self.what = what


class InvalidLevelCountError(ValueError):
    """The number of defocus levels is out of range."""

    def __init__(self, levels: int, minimum: int):
        super().__init__(f"Number of defocus levels must be >= {minimum}, got {levels}")
        self.levels = levels
        self.minimum = minimum


class CropSizeError(ValueError):
    """A crop handed to the classifier has the wrong size."""

    def __init__(self, expected: int, received: tuple):
        super().__init__(f"Expected a {expected}x{expected} crop, got shape {received}")
        self.expected = expected
        self.received = received


class DatasetBuildError(RuntimeError):
    """A dataset could not be assembled from its sources."""

    def __init__(self, reason: str, original_error: Exception):
        super().__init__(f"Failed to build dataset ({reason}): {original_error}")
        self.reason = reason
        self.original_error = original_error
