"""Analytic benchmark objectives with exact gradients.

Used for fast optimizer unit tests, swarm-search validation, and the
local-minimum-escape study. Every function carries its domain box and its
known global minimum so tests can anchor against closed-form answers.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError

Array = np.ndarray

# Stationary points of the 1-D double well f(x) = x^4 - 3x^2 + x,
# i.e. the roots of 4x^3 - 6x + 1, Newton-polished to float64 precision.
DOUBLE_WELL_DEEP_X = -1.3008395659415772
DOUBLE_WELL_DEEP_F = -3.51390503893479
DOUBLE_WELL_SHALLOW_X = 1.1309011226299859
DOUBLE_WELL_SHALLOW_F = -1.0702301817761541
DOUBLE_WELL_BARRIER_X = 0.16993844331159128


@dataclass(frozen=True, eq=False)
class TestFunction:
    """An objective with an exact gradient and a known minimum."""

    name: str
    dim: int
    domain: Array  # (dim, 2) rows of [lo, hi]
    known_min_x: Array
    known_min_f: float
    value_fn: Callable[[Array], float] = field(repr=False)
    gradient_fn: Callable[[Array], Array] = field(repr=False)

    def _check(self, x: Array) -> Array:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionError(
                f"{self.name} expects shape ({self.dim},), got {x.shape}"
            )
        return x

    def value(self, x: Array) -> float:
        return float(self.value_fn(self._check(x)))

    def gradient(self, x: Array) -> Array:
        return self.gradient_fn(self._check(x))


def _box(dim: int, lo: float, hi: float) -> Array:
    return np.tile(np.array([lo, hi], dtype=np.float64), (dim, 1))


def sphere(dim: int) -> TestFunction:
    """f(x) = sum x_i^2, minimum 0 at the origin."""
    return TestFunction(
        name="sphere",
        dim=dim,
        domain=_box(dim, -5.12, 5.12),
        known_min_x=np.zeros(dim),
        known_min_f=0.0,
        value_fn=lambda x: np.sum(x * x),
        gradient_fn=lambda x: 2.0 * x,
    )


def rosenbrock(dim: int) -> TestFunction:
    """f(x) = sum 100(x_{i+1} - x_i^2)^2 + (1 - x_i)^2, minimum 0 at (1,...,1)."""
    if dim < 2:
        raise DimensionError("rosenbrock needs dim >= 2")

    def value(x: Array) -> float:
        return np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2)

    def gradient(x: Array) -> Array:
        g = np.zeros_like(x)
        g[:-1] = -400.0 * x[:-1] * (x[1:] - x[:-1] ** 2) - 2.0 * (1.0 - x[:-1])
        g[1:] += 200.0 * (x[1:] - x[:-1] ** 2)
        return g

    return TestFunction(
        name="rosenbrock",
        dim=dim,
        domain=_box(dim, -2.048, 2.048),
        known_min_x=np.ones(dim),
        known_min_f=0.0,
        value_fn=value,
        gradient_fn=gradient,
    )


def rastrigin(dim: int) -> TestFunction:
    """f(x) = 10d + sum x_i^2 - 10 cos(2 pi x_i), minimum 0 at the origin."""
    two_pi = 2.0 * np.pi

    return TestFunction(
        name="rastrigin",
        dim=dim,
        domain=_box(dim, -5.12, 5.12),
        known_min_x=np.zeros(dim),
        known_min_f=0.0,
        value_fn=lambda x: 10.0 * x.size + np.sum(x * x - 10.0 * np.cos(two_pi * x)),
        gradient_fn=lambda x: 2.0 * x + 20.0 * np.pi * np.sin(two_pi * x),
    )


def double_well() -> TestFunction:
    """1-D f(x) = x^4 - 3x^2 + x: two minima of unequal depth.

    The deep basin sits at x ~ -1.3008 (f ~ -3.5139), the shallow one at
    x ~ +1.1309 (f ~ -1.0702), separated by a barrier near x ~ 0.1699.
    Plain gradient descent started at x0 = +1.0 with a small step lands in
    the shallow basin, which makes this the escape-test fixture.
    """
    return TestFunction(
        name="double-well",
        dim=1,
        domain=_box(1, -3.0, 3.0),
        known_min_x=np.array([DOUBLE_WELL_DEEP_X]),
        known_min_f=DOUBLE_WELL_DEEP_F,
        value_fn=lambda x: x[0] ** 4 - 3.0 * x[0] ** 2 + x[0],
        gradient_fn=lambda x: np.array([4.0 * x[0] ** 3 - 6.0 * x[0] + 1.0]),
    )


_FACTORIES: dict[str, Callable[..., TestFunction]] = {
    "sphere": sphere,
    "rosenbrock": rosenbrock,
    "rastrigin": rastrigin,
    "double-well": lambda dim=1: double_well(),
}

FUNCTION_NAMES = tuple(sorted(_FACTORIES))


def get_function(name: str, dim: int) -> TestFunction:
    """Look up a benchmark function by name."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; know {FUNCTION_NAMES}")
    fn = factory(dim)
    if fn.dim != dim:
        raise DimensionError(f"{name} is {fn.dim}-D, requested dim {dim}")
    return fn


def nearest_minimum(x: float) -> str:
    """Label a 1-D double-well iterate by its closest minimum: 'deep' or 'shallow'."""
    if abs(x - DOUBLE_WELL_DEEP_X) <= abs(x - DOUBLE_WELL_SHALLOW_X):
        return "deep"
    return "shallow"
