"""Particle-optimized gradient descent, baseline optimizers, a reference
particle swarm, a minimal CNN stack, and a reproducible benchmark harness."""

from .baselines import (
    AdagradHyper,
    AdagradState,
    AdamHyper,
    AdamState,
    MomentumHyper,
    MomentumState,
    SgdHyper,
    adagrad_init,
    adagrad_step,
    adam_init,
    adam_step,
    momentum_init,
    momentum_step,
    sgd_step,
)
from .core import (
    PER_ELEMENT,
    PER_STEP,
    PogdHyper,
    PogdState,
    pogd_init,
    pogd_step,
    pogd_step_algvariant,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionError,
    NonFiniteError,
    RunAborted,
)
from .pso import Particle, PsoHyper, Swarm, pso_init, pso_step
from .rng import substream
from .testfns import TestFunction, double_well, get_function, rastrigin, rosenbrock, sphere

__version__ = "0.1.0"
