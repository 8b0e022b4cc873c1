"""Reference particle swarm optimizer over gradient-free objectives.

Classic synchronous PSO with an inertia weight:

    v <- w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)
    x <- clamp(x + v, bounds)

r1 and r2 are scalar draws per particle per step (r1 before r2, particles
visited in index order), positions are clamped to the search box, and the
personal/swarm bests are updated by fitness comparison after all particles
have moved. Steps return a new swarm; the input swarm is left untouched.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteError

Array = np.ndarray
Objective = Callable[[Array], float]


@dataclass(frozen=True)
class PsoHyper:
    w: float = 0.7  # inertia; no value is canonical, 0.7 balances the trade-off
    c1: float = 2.0  # trust in the particle's own best
    c2: float = 2.0  # trust in the swarm best

    def __post_init__(self):
        if self.w < 0:
            raise ValueError(f"inertia w must be >= 0, got {self.w}")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError(f"c1 and c2 must be >= 0, got {self.c1}, {self.c2}")


@dataclass
class Particle:
    x: Array
    v: Array
    pbest_x: Array
    pbest_f: float


@dataclass
class Swarm:
    particles: list[Particle]
    gbest_x: Array
    gbest_f: float
    hyper: PsoHyper
    bounds: Array  # (dim, 2) rows of [lo, hi]


def _check_bounds(bounds, dim: int) -> Array:
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.shape == (2,):
        bounds = np.tile(bounds, (dim, 1))
    if bounds.shape != (dim, 2):
        raise ValueError(f"bounds must have shape ({dim}, 2), got {bounds.shape}")
    if not np.all(np.isfinite(bounds)):
        raise ValueError("bounds must be finite")
    if not np.all(bounds[:, 0] < bounds[:, 1]):
        raise ValueError("each bound must satisfy lo < hi")
    return bounds


def _evaluate(objective: Objective, x: Array) -> float:
    f = float(objective(x))
    if not np.isfinite(f):
        raise NonFiniteError(f"objective returned non-finite value {f} at {x}")
    return f


def pso_init(
    objective: Objective,
    dim: int,
    n_particles: int,
    bounds,
    rng: np.random.Generator,
    hyper: PsoHyper | None = None,
) -> Swarm:
    """Uniform random positions in the box, zero velocities, bests seeded."""
    if n_particles < 1:
        raise ValueError(f"n_particles must be >= 1, got {n_particles}")
    bounds = _check_bounds(bounds, dim)
    hyper = hyper or PsoHyper()

    particles = []
    for _ in range(n_particles):
        x = rng.uniform(bounds[:, 0], bounds[:, 1])
        f = _evaluate(objective, x)
        particles.append(Particle(x=x, v=np.zeros(dim), pbest_x=x.copy(), pbest_f=f))

    best = min(particles, key=lambda p: p.pbest_f)
    return Swarm(
        particles=particles,
        gbest_x=best.pbest_x.copy(),
        gbest_f=best.pbest_f,
        hyper=hyper,
        bounds=bounds,
    )


def pso_step(swarm: Swarm, objective: Objective, rng: np.random.Generator) -> Swarm:
    """Advance every particle once and refresh the personal and swarm bests."""
    h = swarm.hyper
    lo, hi = swarm.bounds[:, 0], swarm.bounds[:, 1]

    moved = []
    for p in swarm.particles:
        r1 = float(rng.random())
        r2 = float(rng.random())
        v = h.w * p.v + h.c1 * r1 * (p.pbest_x - p.x) + h.c2 * r2 * (swarm.gbest_x - p.x)
        x = np.clip(p.x + v, lo, hi)
        f = _evaluate(objective, x)
        if f < p.pbest_f:
            moved.append(Particle(x=x, v=v, pbest_x=x.copy(), pbest_f=f))
        else:
            moved.append(Particle(x=x, v=v, pbest_x=p.pbest_x.copy(), pbest_f=p.pbest_f))

    best = min(moved, key=lambda p: p.pbest_f)
    gbest_x, gbest_f = swarm.gbest_x.copy(), swarm.gbest_f
    if best.pbest_f < gbest_f:
        gbest_x, gbest_f = best.pbest_x.copy(), best.pbest_f
    return Swarm(
        particles=moved, gbest_x=gbest_x, gbest_f=gbest_f, hyper=h, bounds=swarm.bounds
    )
