from src.infrastructure.config.config import (
    TOOL_VERSION,
    LOG_LEVEL,
    DEFAULT_SEED,
    DEFAULT_THREADS,
    MASK_THRESHOLD,
    FRAME_PATTERN,
    FRAME_EXTENSIONS,
    DEBLUR_TILE,
    DEBLUR_TILE_OVERLAP,
    MODEL_MAGIC,
    MODEL_FORMAT_VERSION,
    CROP_SIZE,
    CROP_MIN_FG_FRACTION,
    CROP_ATTEMPT_FACTOR,
)
from src.infrastructure.config.log_setup import setup_logging
from src.infrastructure.config.config_files import load_config, read_toml, validate_config

__all__ = [
    "TOOL_VERSION",
    "LOG_LEVEL",
    "DEFAULT_SEED",
    "DEFAULT_THREADS",
    "MASK_THRESHOLD",
    "FRAME_PATTERN",
    "FRAME_EXTENSIONS",
    "DEBLUR_TILE",
    "DEBLUR_TILE_OVERLAP",
    "MODEL_MAGIC",
    "MODEL_FORMAT_VERSION",
    "CROP_SIZE",
    "CROP_MIN_FG_FRACTION",
    "CROP_ATTEMPT_FACTOR",
    "setup_logging",
    "load_config",
    "read_toml",
    "validate_config",
]
