import numpy as np
import pytest

from pogd.errors import NonFiniteError
from pogd.pso import Particle, PsoHyper, Swarm, pso_init, pso_step
from pogd.testfns import sphere


def sphere_f(x):
    return float(np.sum(x * x))


class TestInit:
    def test_single_particle_is_its_own_best(self):
        rng = np.random.default_rng(0)
        swarm = pso_init(sphere_f, 3, 1, [(-1.0, 1.0)] * 3, rng)
        p = swarm.particles[0]
        assert np.array_equal(swarm.gbest_x, p.x)
        assert swarm.gbest_f == p.pbest_f == sphere_f(p.x)
        assert np.array_equal(p.v, np.zeros(3))

    def test_sphere_best_nonnegative(self):
        rng = np.random.default_rng(1)
        swarm = pso_init(sphere_f, 5, 20, (-5.12, 5.12), rng)
        assert swarm.gbest_f >= 0.0
        assert swarm.gbest_f == min(p.pbest_f for p in swarm.particles)

    def test_positions_inside_bounds(self):
        rng = np.random.default_rng(2)
        bounds = np.array([[-2.0, -1.0], [3.0, 4.0]])
        swarm = pso_init(sphere_f, 2, 50, bounds, rng)
        for p in swarm.particles:
            assert np.all(p.x >= bounds[:, 0]) and np.all(p.x <= bounds[:, 1])

    def test_degenerate_inputs_rejected(self):
        rng = np.random.default_rng(3)
        with pytest.raises(ValueError):
            pso_init(sphere_f, 2, 0, (-1, 1), rng)
        with pytest.raises(ValueError):
            pso_init(sphere_f, 2, 3, (1.0, 1.0), rng)  # lo == hi
        with pytest.raises(ValueError):
            pso_init(sphere_f, 2, 3, (-np.inf, 1.0), rng)

    def test_hyper_validation(self):
        with pytest.raises(ValueError):
            PsoHyper(w=-0.1)


class TestStep:
    def _converged_swarm(self):
        x = np.array([0.5, -0.5])
        particle = Particle(x=x.copy(), v=np.zeros(2), pbest_x=x.copy(), pbest_f=sphere_f(x))
        return Swarm(
            particles=[particle], gbest_x=x.copy(), gbest_f=sphere_f(x),
            hyper=PsoHyper(), bounds=np.array([[-1.0, 1.0], [-1.0, 1.0]]),
        )

    def test_particle_at_both_bests_stays_put(self):
        swarm = self._converged_swarm()
        out = pso_step(swarm, sphere_f, np.random.default_rng(0))
        p = out.particles[0]
        assert np.array_equal(p.v, np.zeros(2))
        assert np.array_equal(p.x, swarm.particles[0].x)

    def test_all_zero_coefficients_freeze_swarm(self):
        rng = np.random.default_rng(4)
        swarm = pso_init(sphere_f, 3, 8, (-2.0, 2.0), rng,
                         PsoHyper(w=0.0, c1=0.0, c2=0.0))
        frozen = [p.x.copy() for p in swarm.particles]
        for _ in range(5):
            swarm = pso_step(swarm, sphere_f, rng)
        for p, x0 in zip(swarm.particles, frozen):
            assert np.array_equal(p.x, x0)

    def test_monotone_bests_and_bounds(self):
        rng = np.random.default_rng(5)
        bounds = (-5.12, 5.12)
        swarm = pso_init(sphere_f, 4, 12, bounds, rng)
        prev_gbest = swarm.gbest_f
        prev_pbests = [p.pbest_f for p in swarm.particles]
        for _ in range(200):
            swarm = pso_step(swarm, sphere_f, rng)
            assert swarm.gbest_f <= prev_gbest
            for p, prev in zip(swarm.particles, prev_pbests):
                assert p.pbest_f <= prev
            for p in swarm.particles:
                assert np.all(p.x >= -5.12) and np.all(p.x <= 5.12)
            prev_gbest = swarm.gbest_f
            prev_pbests = [p.pbest_f for p in swarm.particles]

    def test_clamping_against_outward_objective(self):
        rng = np.random.default_rng(6)

        def runaway(x):  # minimized by pushing outward forever
            return -float(np.sum(x * x))

        swarm = pso_init(runaway, 3, 10, (-1.0, 1.0), rng)
        for _ in range(50):
            swarm = pso_step(swarm, runaway, rng)
            for p in swarm.particles:
                assert np.all(p.x >= -1.0) and np.all(p.x <= 1.0)

    def test_determinism(self):
        def run():
            rng = np.random.default_rng(77)
            swarm = pso_init(sphere_f, 4, 10, (-5.0, 5.0), rng)
            for _ in range(30):
                swarm = pso_step(swarm, sphere_f, rng)
            return swarm.gbest_f, swarm.gbest_x

        f1, x1 = run()
        f2, x2 = run()
        assert f1 == f2
        assert x1.tobytes() == x2.tobytes()

    def test_input_swarm_untouched(self):
        rng = np.random.default_rng(8)
        swarm = pso_init(sphere_f, 2, 5, (-1.0, 1.0), rng)
        snapshot = [(p.x.copy(), p.v.copy(), p.pbest_f) for p in swarm.particles]
        pso_step(swarm, sphere_f, rng)
        for p, (x, v, f) in zip(swarm.particles, snapshot):
            assert np.array_equal(p.x, x)
            assert np.array_equal(p.v, v)
            assert p.pbest_f == f

    def test_nonfinite_objective_rejected(self):
        rng = np.random.default_rng(9)

        def bad(x):
            return float("nan")

        with pytest.raises(NonFiniteError):
            pso_init(bad, 2, 3, (-1.0, 1.0), rng)

    def test_sphere_convergence_smoke(self):
        # short-run sanity; the long calibrated run lives in the acceptance suite
        rng = np.random.default_rng(123)
        fn = sphere(10)
        swarm = pso_init(fn.value, 10, 30, fn.domain, rng)
        start = swarm.gbest_f
        for _ in range(200):
            swarm = pso_step(swarm, fn.value, rng)
        assert swarm.gbest_f < start * 1e-2
