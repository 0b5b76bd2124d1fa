from src.infrastructure.extensions.loaders.frame_loader import (
    pattern_to_regex,
    read_image,
    list_frames,
    list_images,
    load_stack,
    save_image,
    save_stack,
    save_mask,
    save_index_map,
)

__all__ = [
    "pattern_to_regex",
    "read_image",
    "list_frames",
    "list_images",
    "load_stack",
    "save_image",
    "save_stack",
    "save_mask",
    "save_index_map",
]
