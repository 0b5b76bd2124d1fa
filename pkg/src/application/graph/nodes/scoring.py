import logging
import time

from src.domain.models import Image, PristineModel, QualityScores
from src.application.graph.state import PipelineState
from src.application.graph.helpers import elapsed, matches_reference
from src.application.services.focusmeasure import best_focused_index, tenengrad
from src.application.services.quality import brisque_score, psnr, ssim

logger = logging.getLogger(__name__)


def score_output_cls(pristine: PristineModel | None = None, reference: Image | None = None):
    def score_output(state: PipelineState):
        start = time.perf_counter()
        image = state.get("fused")
        if image is None:
            # fusion skipped: score the sharpest surviving frame
            working = state["working"]
            image = working.frames[best_focused_index(working)]

        scores = QualityScores(tenengrad=tenengrad(image).value)
        if pristine is not None:
            scores.brisque = brisque_score(image, pristine)
        if matches_reference(image, reference):
            scores.psnr = psnr(image, reference)
            scores.ssim = ssim(image, reference)
        logger.info(f"score: tenengrad {scores.tenengrad:.6f}")
        return {"quality": scores, "timings": {"score": elapsed(start)}}

    return score_output
