"""Frame files on disk: stacks are directories of `frame_%05d.<ext>` images."""

import logging
import re
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from src.domain.exceptions import (
    EmptyStackError,
    FrameLoadError,
    ImageWriteError,
    MixedShapesError,
)
from src.domain.models import BinaryMask, FocusIndexMap, Image, ZStack
from src.infrastructure.config import FRAME_EXTENSIONS, FRAME_PATTERN

logger = logging.getLogger(__name__)


def pattern_to_regex(pattern: str) -> re.Pattern:
    """Turn a printf-style index pattern such as `frame_%05d` into a filename regex."""
    match = re.search(r"%0?\d*d", pattern)
    if not match:
        raise ValueError(f"Frame pattern needs one integer field, got '{pattern}'")
    prefix = re.escape(pattern[: match.start()])
    suffix = re.escape(pattern[match.end():])
    extensions = "|".join(re.escape(ext) for ext in FRAME_EXTENSIONS)
    return re.compile(rf"^{prefix}(\d+){suffix}({extensions})$", re.IGNORECASE)


def read_image(path: str | Path) -> Image:
    path = Path(path)
    try:
        with PILImage.open(path) as pil_img:
            pil_img.load()
            if pil_img.mode in ("I;16", "I;16B", "I;16L", "I"):
                data = np.asarray(pil_img, dtype=np.float64) / 65535.0
            else:
                if pil_img.mode not in ("L", "RGB"):
                    pil_img = pil_img.convert("RGB")
                data = np.asarray(pil_img, dtype=np.float64) / 255.0
    except Exception as e:
        raise FrameLoadError(path.name, e) from e

    if data.ndim == 2:
        data = data[:, :, None]
    return np.clip(data, 0.0, 1.0)


def list_frames(directory: str | Path, pattern: str = FRAME_PATTERN) -> list[tuple[int, Path]]:
    regex = pattern_to_regex(pattern)
    indexed = []
    for entry in Path(directory).iterdir():
        match = regex.match(entry.name)
        if match and entry.is_file():
            indexed.append((int(match.group(1)), entry))
    return sorted(indexed, key=lambda item: item[0])


def load_stack(
    directory: str | Path, pattern: str = FRAME_PATTERN, z_step: float | None = None
) -> ZStack:
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameLoadError(str(directory), NotADirectoryError("stack path is not a directory"))

    indexed = list_frames(directory, pattern)
    if not indexed:
        raise EmptyStackError(str(directory), pattern)

    frames: list[Image] = []
    names: list[str] = []
    for _, path in indexed:
        frame = read_image(path)
        if frames and frame.shape != frames[0].shape:
            raise MixedShapesError(path.name, frames[0].shape, frame.shape)
        frames.append(frame)
        names.append(path.name)

    logger.info(f"Loaded {len(frames)} frames of shape {frames[0].shape} from {directory}")
    return ZStack(frames=frames, z_step=z_step, names=names)


def list_images(directory: str | Path) -> list[Path]:
    """All readable image files of a directory, sorted by name."""
    return sorted(
        p for p in Path(directory).iterdir()
        if p.is_file() and p.suffix.lower() in FRAME_EXTENSIONS
    )


def save_image(img: Image, path: str | Path) -> Path:
    path = Path(path)
    data = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        PILImage.fromarray(np.round(data * 255.0).astype(np.uint8)).save(path)
    except Exception as e:
        raise ImageWriteError(str(path), e) from e
    return path


def save_stack(stack: ZStack, directory: str | Path, pattern: str = FRAME_PATTERN) -> list[Path]:
    directory = Path(directory)
    return [
        save_image(frame, directory / f"{pattern % idx}.png")
        for idx, frame in enumerate(stack.frames)
    ]


def save_mask(mask: BinaryMask, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        PILImage.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path)
    except Exception as e:
        raise ImageWriteError(str(path), e) from e
    return path


def save_index_map(focus_map: FocusIndexMap, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        PILImage.fromarray(focus_map.index.astype(np.uint16)).save(path)
    except Exception as e:
        raise ImageWriteError(str(path), e) from e
    return path
