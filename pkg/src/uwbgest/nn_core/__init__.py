"""Minimal dense/convolutional network engine with hand-derived gradients.

Layout:

- :mod:`layers`: functional forward/backward ops plus stateful layer classes
- :mod:`loss`: softmax cross-entropy head
- :mod:`optim`: Adam
- :mod:`graph`: declarative LayerSpec, shape inference, sequential ModelGraph
- :mod:`gradcheck`: central finite-difference verification
- :mod:`checkpoint`: binary model serialization
"""

from .layers import (
    conv2d,
    conv2d_grad,
    depthwise_separable,
    depthwise_separable_grad,
    dense,
    dense_grad,
    global_avg_pool,
    global_avg_pool_grad,
    maxpool2d,
    maxpool2d_grad,
    relu,
    relu_grad,
)
from .loss import softmax_cross_entropy
from .optim import AdamState, adam_step, init_adam
from .graph import LayerSpec, ModelGraph
from .gradcheck import GradCheckReport, grad_check
from .checkpoint import load_model, save_model

__all__ = [
    "conv2d", "conv2d_grad", "depthwise_separable", "depthwise_separable_grad",
    "dense", "dense_grad", "global_avg_pool", "global_avg_pool_grad",
    "maxpool2d", "maxpool2d_grad", "relu", "relu_grad",
    "softmax_cross_entropy", "AdamState", "adam_step", "init_adam",
    "LayerSpec", "ModelGraph", "GradCheckReport", "grad_check",
    "load_model", "save_model",
]
