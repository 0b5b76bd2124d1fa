from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Augmentation:
    hflip: bool = False
    vflip: bool = False
    rotations: int = 0  # quarter turns, counter-clockwise

    def apply(self, img: np.ndarray) -> np.ndarray:
        out = img
        if self.hflip:
            out = out[:, ::-1]
        if self.vflip:
            out = out[::-1]
        if self.rotations:
            out = np.rot90(out, k=self.rotations, axes=(0, 1))
        return np.ascontiguousarray(out)


def draw_augmentation(rng: np.random.Generator) -> Augmentation:
    hflip = bool(rng.random() < 0.5)
    vflip = bool(rng.random() < 0.5)
    rotations = int(rng.integers(4))
    return Augmentation(hflip=hflip, vflip=vflip, rotations=rotations)


def augment(img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random flips plus a random quarter-turn, drawn from `rng`."""
    return draw_augmentation(rng).apply(img)
