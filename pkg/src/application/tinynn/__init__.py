from src.application.tinynn.tensor import Tensor
from src.application.tinynn.layers import (
    Conv2d,
    Dense,
    Flatten,
    Layer,
    MaxPool2,
    NearestUpsample2,
    ReLU,
    build_layer,
)
from src.application.tinynn.network import Network
from src.application.tinynn.losses import (
    loss_bce,
    loss_cross_entropy,
    loss_masked_l1,
    loss_mse,
    loss_rps,
    loss_rps_from_logits,
    softmax,
)
from src.application.tinynn.optim import Adam, AdamState, adam_step
from src.application.tinynn.augment import Augmentation, augment, draw_augmentation
from src.application.tinynn.serialization import load_model, read_manifest, save_model
from src.application.tinynn.gradcheck import gradient_check, numerical_gradient, relative_error

__all__ = [
    # Engine
    "Tensor",
    "Layer",
    "Conv2d",
    "ReLU",
    "MaxPool2",
    "Dense",
    "Flatten",
    "NearestUpsample2",
    "build_layer",
    "Network",
    # Losses
    "softmax",
    "loss_cross_entropy",
    "loss_rps",
    "loss_rps_from_logits",
    "loss_mse",
    "loss_bce",
    "loss_masked_l1",
    # Optimization
    "Adam",
    "AdamState",
    "adam_step",
    # Augmentation
    "Augmentation",
    "augment",
    "draw_augmentation",
    # Model files
    "save_model",
    "load_model",
    "read_manifest",
    # Verification
    "gradient_check",
    "numerical_gradient",
    "relative_error",
]
