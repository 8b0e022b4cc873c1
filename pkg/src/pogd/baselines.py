"""Baseline gradient-descent optimizers: SGD, momentum, AdaGrad, and Adam.

All step functions are pure: they validate their inputs, never mutate the
caller's arrays, and return fresh state plus the updated parameter vector.
Parameters and state are flat float64 vectors.

Update rules:

    SGD:       theta <- theta - eta * g
    Momentum:  v <- p * v + eta * g;            theta <- theta - v
    AdaGrad:   G <- G + g*g;                    theta <- theta - eta * g / (sqrt(G) + eps)
    Adam:      m <- b1*m + (1-b1)*g
               v <- b2*v + (1-b2)*g*g
               theta <- theta - eta * m^ / (sqrt(v^) + eps)

where Adam's (m^, v^) are the raw moments by default; with
``bias_correction=True`` they are divided by (1 - b^t), the standard form.
Batch gradient descent is ``sgd_step`` applied to a full-batch gradient.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonFiniteError

Array = np.ndarray


def check_step_inputs(theta: Array, grad: Array, *state_arrays: Array) -> tuple[Array, Array]:
    """Validate one optimizer step's inputs; returns (theta, grad) as float64."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if theta.shape != grad.shape:
        raise DimensionError(f"theta shape {theta.shape} != grad shape {grad.shape}")
    for arr in state_arrays:
        if arr.shape != theta.shape:
            raise DimensionError(
                f"state shape {arr.shape} != parameter shape {theta.shape}"
            )
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError("gradient contains NaN or Inf")
    return theta, grad


# --- hyperparameters ---


@dataclass(frozen=True)
class SgdHyper:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class MomentumHyper:
    eta: float
    p: float = 0.9  # momentum coefficient

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"momentum p must be in [0, 1), got {self.p}")


@dataclass(frozen=True)
class AdagradHyper:
    eta: float
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class AdamHyper:
    eta: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    bias_correction: bool = False

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


# --- state ---


@dataclass
class MomentumState:
    v: Array  # previous velocity


@dataclass
class AdagradState:
    accum: Array  # running sum of squared gradients, elementwise


@dataclass
class AdamState:
    m: Array  # first moment estimate
    v: Array  # second moment estimate
    t: int = 0


def momentum_init(dim: int) -> MomentumState:
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    return MomentumState(v=np.zeros(dim))


def adagrad_init(dim: int) -> AdagradState:
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    return AdagradState(accum=np.zeros(dim))


def adam_init(dim: int) -> AdamState:
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    return AdamState(m=np.zeros(dim), v=np.zeros(dim), t=0)


# --- steps ---


def sgd_step(theta: Array, grad: Array, hyper: SgdHyper) -> Array:
    theta, grad = check_step_inputs(theta, grad)
    return theta - hyper.eta * grad


def momentum_step(
    state: MomentumState, theta: Array, grad: Array, hyper: MomentumHyper
) -> tuple[MomentumState, Array]:
    theta, grad = check_step_inputs(theta, grad, state.v)
    v = hyper.p * state.v + hyper.eta * grad
    return MomentumState(v=v), theta - v


def adagrad_step(
    state: AdagradState, theta: Array, grad: Array, hyper: AdagradHyper
) -> tuple[AdagradState, Array]:
    theta, grad = check_step_inputs(theta, grad, state.accum)
    accum = state.accum + grad * grad
    new_theta = theta - hyper.eta * grad / (np.sqrt(accum) + hyper.epsilon)
    return AdagradState(accum=accum), new_theta


def adam_step(
    state: AdamState, theta: Array, grad: Array, hyper: AdamHyper
) -> tuple[AdamState, Array]:
    theta, grad = check_step_inputs(theta, grad, state.m, state.v)
    t = state.t + 1
    m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grad
    v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grad * grad
    if hyper.bias_correction:
        m_hat = m / (1.0 - hyper.beta1**t)
        v_hat = v / (1.0 - hyper.beta2**t)
    else:
        m_hat, v_hat = m, v
    new_theta = theta - hyper.eta * m_hat / (np.sqrt(v_hat) + hyper.epsilon)
    return AdamState(m=m, v=v, t=t), new_theta
