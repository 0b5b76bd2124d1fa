class EmptyStackError(ValueError):
    """The stack directory holds no frame files."""

    def __init__(self, directory: str, pattern: str):
        super().__init__(f"No frames matching '{pattern}' found in: {directory}")
        self.directory = directory
        self.pattern = pattern


class MixedShapesError(ValueError):
    """Frames of one stack do not share a shape."""

    def __init__(self, filename: str, expected: tuple, received: tuple):
        super().__init__(
            f"mixed shapes: '{filename}' has shape {received}, expected {expected}"
        )
        self.filename = filename
        self.expected = expected
        self.received = received


class FrameLoadError(RuntimeError):
    """A frame file could not be read or decoded."""

    def __init__(self, filename: str, original_error: Exception):
        super().__init__(f"Failed to read frame '{filename}': {original_error}")
        self.filename = filename
        self.original_error = original_error


class ImageWriteError(RuntimeError):
    """An image could not be written to disk."""

    def __init__(self, filename: str, original_error: Exception):
        super().__init__(f"Failed to write image '{filename}': {original_error}")
        self.filename = filename
        self.original_error = original_error


class InvalidImageError(ValueError):
    """The array does not describe a valid image."""

    def __init__(self, reason: str):
        super().__init__(f"Invalid image: {reason}")
        self.reason = reason


class KernelTooLargeError(ValueError):
    """The kernel does not fit inside the image."""

    def __init__(self, kernel_size: int, image_shape: tuple):
        super().__init__(
            f"Kernel of size {kernel_size} does not fit image of shape {image_shape}"
        )
        self.kernel_size = kernel_size
        self.image_shape = image_shape


class InvalidKernelParameterError(ValueError):
    """A blur kernel parameter is out of range."""

    def __init__(self, name: str, value: float, constraint: str):
        super().__init__(f"Kernel parameter '{name}' must be {constraint}, got {value}")
        self.name = name
        self.value = value


class InvalidResizeError(ValueError):
    """Requested output size is empty."""

    def __init__(self, new_h: int, new_w: int):
        super().__init__(f"Target dimensions must be >= 1, got {new_h}x{new_w}")
        self.new_h = new_h
        self.new_w = new_w


class CropSamplingError(RuntimeError):
    """Rejection sampling ran out of attempts before collecting all crops."""

    def __init__(self, accepted: int, requested: int, attempts: int, min_fg_fraction: float):
        super().__init__(
            f"Crop attempt budget exhausted: accepted {accepted}/{requested} crops "
            f"after {attempts} attempts (min_fg_fraction={min_fg_fraction}); "
            "image too dark for the requested foreground fraction"
        )
        self.accepted = accepted
        self.requested = requested
        self.attempts = attempts
        self.min_fg_fraction = min_fg_fraction


class InvalidCropRequestError(ValueError):
    """Crop parameters are inconsistent with the image."""

    def __init__(self, reason: str):
        super().__init__(f"Invalid crop request: {reason}")
        self.reason = reason


class ImageTooSmallError(ValueError):
    """The image is smaller than an operator's support."""

    def __init__(self, operation: str, shape: tuple, minimum: int):
        super().__init__(
            f"{operation} needs images of at least {minimum} pixels per side, got {shape}"
        )
        self.operation = operation
        self.shape = shape
        self.minimum = minimum


class ShapeMismatchError(ValueError):
    """Two images or maps that must align have different shapes."""

    def __init__(self, what: str, left: tuple, right: tuple):
        super().__init__(f"Shape mismatch for {what}: {left} vs {right}")
        self.what = what
        self.left = left
        self.right = right


class OverlappingMasksError(ValueError):
    """Fusion masks must be pairwise disjoint."""

    def __init__(self, overlap_pixels: int):
        super().__init__(f"Masks overlap on {overlap_pixels} pixels")
        self.overlap_pixels = overlap_pixels


class EmptyMaskUnionError(ValueError):
    """The union of all masks selects no pixel."""

    def __init__(self):
        super().__init__("The union of the masks is empty")


class InvalidWaveletLevelsError(ValueError):
    """Wavelet decomposition needs at least one level."""

    def __init__(self, levels: int):
        super().__init__(f"Wavelet levels must be >= 1, got {levels}")
        self.levels = levels


class StackTooShortError(ValueError):
    """The stack has too few frames for the requested operation."""

    def __init__(self, n_frames: int, required: int, operation: str):
        super().__init__(
            f"{operation} needs {required} frames but the stack has {n_frames}"
        )
        self.n_frames = n_frames
        self.required = required
        self.operation = operation
