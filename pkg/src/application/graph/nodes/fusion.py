import logging
import time

from src.application.graph.state import PipelineState
from src.application.graph.helpers import FOCUS_INDEX_FILENAME, FUSED_FILENAME, elapsed, output_path
from src.application.services.fusion import fuse
from src.infrastructure.extensions.loaders import save_image, save_index_map

logger = logging.getLogger(__name__)


def fuse_frames(state: PipelineState):
    start = time.perf_counter()
    config = state["config"]
    working = state["working"]

    if len(working) == 1:
        logger.warning("fuse: a single frame survived; it is passed through unchanged")
        fused, focus_map = working.frames[0].copy(), None
    else:
        fused, focus_map = fuse(
            working,
            method=config.fusion_method,
            feather=config.feather,
            wavelet_levels=config.wavelet_levels,
            threads=config.threads,
        )

    path = save_image(fused, output_path(config, FUSED_FILENAME))
    if focus_map is not None:
        save_index_map(focus_map, output_path(config, FOCUS_INDEX_FILENAME))
    logger.info(f"fuse: {config.fusion_method} fusion of {len(working)} frames written to {path}")
    return {
        "fused": fused,
        "focus_map": focus_map,
        "fusion_output": str(path),
        "timings": {"fuse": elapsed(start)},
    }
