import numpy as np
import pytest

from src.application.services.synthetic import defocus_stack, specimen_image
from src.application.services.defocusnet import build_classifier
from src.application.services.deblur import build_srcnn
from src.infrastructure.extensions.loaders import save_stack


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def specimen():
    """96x96 RGB specimen frame."""
    return specimen_image(96, seed=0)


@pytest.fixture
def noise_image(rng):
    return rng.random((64, 64, 1))


@pytest.fixture
def blur_ladder(specimen):
    """Five frames of increasing defocus, frame 0 sharp."""
    return defocus_stack(specimen, 5, step=0.8)


@pytest.fixture
def stack_dir(tmp_path, blur_ladder):
    directory = tmp_path / "stack"
    save_stack(blur_ladder, directory)
    return directory


@pytest.fixture
def tiny_classifier():
    return build_classifier(n_levels=2, crop_size=16, seed=0)


@pytest.fixture
def identity_srcnn():
    return build_srcnn(identity=True)
