class LayerShapeError(ValueError):
    """The tensor reaching a layer does not have the shape the layer expects."""

    def __init__(self, layer_index: int, kind: str, expected: str, received: tuple):
        super().__init__(
            f"Shape mismatch at layer {layer_index} ({kind}): expected {expected}, got {received}"
        )
        self.layer_index = layer_index
        self.kind = kind
        self.expected = expected
        self.received = received


class BackwardBeforeForwardError(RuntimeError):
    """backward was called on a network without a forward cache."""

    def __init__(self, layer_index: int):
        super().__init__(f"backward called before forward (layer {layer_index} has no cache)")
        self.layer_index = layer_index


class InvalidLossInputError(ValueError):
    """Loss arguments violate the loss preconditions."""

    def __init__(self, loss: str, reason: str):
        super().__init__(f"Invalid input to {loss}: {reason}")
        self.loss = loss
        self.reason = reason


class ModelFileError(ValueError):
    """Base class for unreadable model files."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{reason}: {path}")
        self.path = path
        self.reason = reason


class NotAModelFileError(ModelFileError):
    """The file does not start with the model magic."""

    def __init__(self, path: str):
        super().__init__(path, "not a microstack model")


class UnsupportedModelVersionError(ModelFileError):
    """The manifest declares a format version this build cannot read."""

    def __init__(self, path: str, version: int):
        super().__init__(path, f"model format version {version} unsupported")
        self.version = version


class BlobLengthMismatchError(ModelFileError):
    """The weight blob does not match the shapes in the manifest."""

    def __init__(self, path: str, expected: int, received: int):
        super().__init__(
            path, f"blob length mismatch (expected {expected} bytes, got {received})"
        )
        self.expected = expected
        self.received = received


class MissingModelError(FileNotFoundError):
    """A model path given to a command does not exist."""

    def __init__(self, path: str):
        super().__init__(f"Model file not found: {path}")
        self.path = path
