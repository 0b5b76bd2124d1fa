from dotenv import load_dotenv
import os

load_dotenv()

TOOL_VERSION: str = "0.4.0"

LOG_LEVEL: str = os.getenv("MICROSTACK_LOG_LEVEL", "INFO").upper()

DEFAULT_SEED: int = int(os.getenv("MICROSTACK_SEED", "0"))
DEFAULT_THREADS: int = int(os.getenv("MICROSTACK_THREADS", "1"))
if DEFAULT_THREADS < 1:
    raise ValueError("MICROSTACK_THREADS must be >= 1")

# luma threshold separating specimen from the black surround
MASK_THRESHOLD: float = float(os.getenv("MICROSTACK_MASK_THRESHOLD", "0.05"))
if not 0.0 <= MASK_THRESHOLD <= 1.0:
    raise ValueError("MICROSTACK_MASK_THRESHOLD must lie in [0, 1]")

FRAME_PATTERN: str = os.getenv("MICROSTACK_FRAME_PATTERN", "frame_%05d")
FRAME_EXTENSIONS: tuple[str, ...] = (".png", ".pgm", ".ppm")

DEBLUR_TILE: int = int(os.getenv("MICROSTACK_TILE", "256"))
DEBLUR_TILE_OVERLAP: int = int(os.getenv("MICROSTACK_TILE_OVERLAP", "16"))

MODEL_MAGIC: bytes = b"MSTKMDL1"
MODEL_FORMAT_VERSION: int = 1

CROP_SIZE: int = 84
CROP_MIN_FG_FRACTION: float = 0.5
CROP_ATTEMPT_FACTOR: int = 100
