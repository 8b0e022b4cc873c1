from .model import (
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    MaxPool,
    Model,
    ModelParams,
    Relu,
    SoftmaxCrossEntropy,
    init_params,
    reference_model,
)

__all__ = [
    "Conv2d",
    "Dense",
    "Dropout",
    "Flatten",
    "MaxPool",
    "Model",
    "ModelParams",
    "Relu",
    "SoftmaxCrossEntropy",
    "init_params",
    "reference_model",
]
