"""Particle-optimized gradient descent (POGD).

POGD biases each gradient step with a swarm-style velocity term built from
two gradient-derived "best positions" instead of a population:

    accum  <- accum + g*g                       (squared-gradient accumulator)
    gbest  <- g / (sqrt(accum) + eps)           (normalized gradient, the
                                                 stand-in for a swarm best)
    v      <- omega * mem
              + c1 * r1 * (gbest_prev - g)
              + c2 * r2 * (pbest_prev - g)
    mem    <- -v                                (sign-flipped velocity memory)
    pbest  <- g                                 (previous gradient, the
                                                 stand-in for a particle best)
    theta  <- theta - eta * (g + v)

Note that the velocity uses the *previous* step's gbest/pbest while the
state stores this step's, and that the memory term flips sign every step
so the velocity cannot run away in one direction. r1 and r2 are uniform
draws on [0, 1]: one scalar each per step by default, or one per element
in ``per_element`` mode. r1 is always drawn before r2.

An alternative final update, ``pogd_step_algvariant``, divides the memory
by sqrt(|v|) + eps instead of adding v to the gradient. It exists only for
comparison experiments and is never the default.

Step functions are pure: caller arrays are never mutated, and a new state
is returned each step.
"""

from dataclasses import dataclass

import numpy as np

from .baselines import check_step_inputs
from .errors import DimensionError

Array = np.ndarray

PER_STEP = "per_step"
PER_ELEMENT = "per_element"
RAND_MODES = (PER_STEP, PER_ELEMENT)


@dataclass(frozen=True)
class PogdHyper:
    """POGD coefficients.

    eta      learning rate, > 0
    omega    inertia on the velocity memory, in [0, 1]
    c1       trust in the normalized-gradient (global-best) pull, >= 0
    c2       trust in the previous-gradient (particle-best) pull, >= 0
    epsilon  denominator guard, > 0
    rand_mode  'per_step' (two scalar draws shared by all elements) or
               'per_element' (one draw per element for each of r1, r2)
    """

    eta: float = 0.01
    omega: float = 0.9
    c1: float = 2.0
    c2: float = 1.0
    epsilon: float = 1e-8
    rand_mode: str = PER_STEP

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must be in [0, 1], got {self.omega}")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError(f"c1 and c2 must be >= 0, got {self.c1}, {self.c2}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.rand_mode not in RAND_MODES:
            raise ValueError(
                f"rand_mode must be one of {RAND_MODES}, got {self.rand_mode!r}"
            )


@dataclass
class PogdState:
    """Per-parameter optimizer memory; all arrays share one dimension."""

    accum: Array  # squared-gradient accumulator, nonnegative, nondecreasing
    velocity: Array  # v of the most recent step
    memory: Array  # -velocity, carried into the next step
    gbest: Array  # this step's normalized gradient
    pbest: Array  # this step's raw gradient
    step: int = 0

    @property
    def dim(self) -> int:
        return self.accum.shape[0]


def pogd_init(dim: int) -> PogdState:
    """Fresh all-zero state for a parameter vector of length ``dim``."""
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    return PogdState(
        accum=np.zeros(dim),
        velocity=np.zeros(dim),
        memory=np.zeros(dim),
        gbest=np.zeros(dim),
        pbest=np.zeros(dim),
        step=0,
    )


def _draw_pair(rng, mode: str, dim: int):
    """Draw (r1, r2) in the fixed order r1-then-r2."""
    if mode == PER_STEP:
        return float(rng.random()), float(rng.random())
    return rng.random(dim), rng.random(dim)


def _advance(state: PogdState, theta: Array, grad: Array, hyper: PogdHyper, rng):
    """Shared state update; returns the new state (theta update differs per variant)."""
    theta, grad = check_step_inputs(
        theta, grad, state.accum, state.velocity, state.memory, state.gbest, state.pbest
    )
    accum = state.accum + grad * grad
    gbest = grad / (np.sqrt(accum) + hyper.epsilon)
    r1, r2 = _draw_pair(rng, hyper.rand_mode, grad.shape[0])
    velocity = (
        hyper.omega * state.memory
        + hyper.c1 * r1 * (state.gbest - grad)
        + hyper.c2 * r2 * (state.pbest - grad)
    )
    new_state = PogdState(
        accum=accum,
        velocity=velocity,
        memory=-velocity,
        gbest=gbest,
        pbest=grad.copy(),
        step=state.step + 1,
    )
    return new_state, theta, grad


def pogd_step(
    state: PogdState, theta: Array, grad: Array, hyper: PogdHyper, rng
) -> tuple[PogdState, Array]:
    """One POGD step: theta <- theta - eta * (g + v)."""
    new_state, theta, grad = _advance(state, theta, grad, hyper, rng)
    return new_state, theta - hyper.eta * (grad + new_state.velocity)


def pogd_step_algvariant(
    state: PogdState, theta: Array, grad: Array, hyper: PogdHyper, rng
) -> tuple[PogdState, Array]:
    """Variant final update: theta <- theta - eta * mem / (sqrt(|v|) + eps).

    The velocity is a signed vector, so the root is taken on its magnitude;
    this keeps the denominator positive (total for every input) and the
    update's sign equal to the memory's. Comparison use only.
    """
    new_state, theta, grad = _advance(state, theta, grad, hyper, rng)
    denom = np.sqrt(np.abs(new_state.velocity)) + hyper.epsilon
    return new_state, theta - hyper.eta * new_state.memory / denom
