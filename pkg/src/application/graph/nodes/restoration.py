import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.domain.models import Image, RestorationMetrics, ZStack
from src.application.graph.state import PipelineState
from src.application.graph.helpers import FUSED_FILENAME, elapsed, matches_reference, output_path
from src.application.services.deblur import deblur_image
from src.application.services.quality import psnr, ssim
from src.application.tinynn import Network
from src.infrastructure.extensions.loaders import save_image

logger = logging.getLogger(__name__)


def _against_reference(before: list[Image], after: list[Image], reference: Image | None) -> RestorationMetrics | None:
    if not all(matches_reference(img, reference) for img in before):
        return None
    return RestorationMetrics(
        psnr_before=float(np.mean([psnr(img, reference) for img in before])),
        psnr_after=float(np.mean([psnr(img, reference) for img in after])),
        ssim_before=float(np.mean([ssim(img, reference) for img in before])),
        ssim_after=float(np.mean([ssim(img, reference) for img in after])),
    )


def deblur_frames_cls(deblurrer: Network, reference: Image | None = None):
    def deblur_frames(state: PipelineState):
        start = time.perf_counter()
        config = state["config"]
        working = state["working"]

        def run(frame: Image) -> Image:
            return deblur_image(deblurrer, frame, tile=config.tile, overlap=config.overlap)

        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            restored = list(pool.map(run, working.frames))

        logger.info(f"deblur: restored {len(restored)} frames")
        return {
            "working": ZStack(frames=restored, z_step=working.z_step, names=working.names),
            "deblur": _against_reference(working.frames, restored, reference),
            "timings": {"deblur": elapsed(start)},
        }

    return deblur_frames


def deblur_fused_cls(deblurrer: Network, reference: Image | None = None):
    def deblur_fused(state: PipelineState):
        start = time.perf_counter()
        config = state["config"]
        fused = state["fused"]
        restored = deblur_image(deblurrer, fused, tile=config.tile, overlap=config.overlap, threads=config.threads)
        path = save_image(restored, output_path(config, FUSED_FILENAME))
        logger.info("deblur: restored the fused image")
        return {
            "fused": restored,
            "fusion_output": str(path),
            "deblur": _against_reference([fused], [restored], reference),
            "timings": {"deblur": elapsed(start)},
        }

    return deblur_fused
