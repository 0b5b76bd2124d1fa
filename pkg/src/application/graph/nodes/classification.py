import logging
import time
from concurrent.futures import ThreadPoolExecutor

from src.domain.models import FocusDecision
from src.application.graph.state import PipelineState
from src.application.graph.helpers import elapsed
from src.application.services.defocusnet import classify_frame
from src.application.tinynn import Network

logger = logging.getLogger(__name__)


def classify_frames_cls(classifier: Network):
    def classify_frames(state: PipelineState):
        start = time.perf_counter()
        config = state["config"]
        stack = state["stack"]

        def run(index: int):
            # per-frame seed keeps decisions independent of scheduling
            return classify_frame(
                classifier,
                stack.frames[index],
                n_crops=config.n_crops,
                seed=config.seed + index,
                level_threshold=config.level_threshold,
                index=index,
                mask_threshold=config.mask_threshold,
            )

        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(run, range(len(stack))))

        survivors = [r.index for r in records if r.decision == FocusDecision.IN_FOCUS]
        logger.info(f"classify: kept {len(survivors)} of {len(records)} frames")
        update = {
            "frames": records,
            "survivors": survivors,
            "timings": {"classify": elapsed(start)},
        }
        if survivors:
            update["working"] = stack.select(survivors)
        return update

    return classify_frames


def reject_all(state: PipelineState):
    logger.warning("classify: every frame was rejected as out of focus; nothing left to fuse")
    return {"exit_code": 3, "survivors": []}
