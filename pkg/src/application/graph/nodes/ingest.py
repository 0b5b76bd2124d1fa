import logging
import time

from src.application.graph.state import PipelineState
from src.application.graph.helpers import elapsed
from src.application.services.imgcore import load_stack

logger = logging.getLogger(__name__)


def load_frames(state: PipelineState):
    start = time.perf_counter()
    config = state["config"]
    stack = load_stack(str(config.stack))
    logger.info(f"ingest: {len(stack)} frames of shape {stack.shape} from {config.stack}")
    return {
        "stack": stack,
        "working": stack,
        "survivors": list(range(len(stack))),
        "timings": {"ingest": elapsed(start)},
    }
