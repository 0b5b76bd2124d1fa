class ConfigValidationError(ValueError):
    """A configuration file or flag set failed validation."""

    def __init__(self, source: str, keys: list[str], details: str):
        key_list = ", ".join(keys) if keys else "<root>"
        super().__init__(f"Invalid configuration in {source} (keys: {key_list}): {details}")
        self.source = source
        self.keys = keys
        self.details = details


class ConfigFileError(RuntimeError):
    """A configuration file could not be read or parsed."""

    def __init__(self, path: str, original_error: Exception):
        super().__init__(f"Failed to read configuration '{path}': {original_error}")
        self.path = path
        self.original_error = original_error


class EmptyPipelineError(RuntimeError):
    """Every frame was rejected by the classifier."""

    def __init__(self, n_frames: int):
        super().__init__(f"All {n_frames} frames were classified out of focus")
        self.n_frames = n_frames


class ReportWriteError(RuntimeError):
    """The report could not be written."""

    def __init__(self, path: str, original_error: Exception):
        super().__init__(f"Failed to write report '{path}': {original_error}")
        self.path = path
        self.original_error = original_error
