import numpy as np
import pytest

from hinfrecon import (
    DesignProblem,
    DiscreteStateSpace,
    FirFilter,
    GeneralizedPlant,
    SignalGrid,
    build_generalized_plant,
    c2d_zoh,
    close_loop,
    cseries,
    delay_line,
    frequency_response,
    lift,
    simulate,
)
from conftest import rand_stable_continuous, rand_stable_discrete


def first_order(a=-1.0, b=1.0, c=1.0, d=0.0):
    from hinfrecon import ContinuousStateSpace
    return ContinuousStateSpace([[a]], [[b]], [[c]], [[d]])


def unit_gain():
    from hinfrecon import ContinuousStateSpace
    return ContinuousStateSpace.gain(1.0)


def simple_problem(N=2, delay_steps=0, h=1.0):
    return DesignProblem(F=first_order(), H1=unit_gain(), H2=unit_gain(),
                         h=h, N=N, delay_steps=delay_steps)


def fast_interconnection_error(problem, fir, w_fast):
    """Oracle: sampler, FIR, hold and delay applied directly on grids."""
    delta = problem.h / problem.N
    N = problem.N
    Fd = c2d_zoh(problem.F, delta)
    chain = c2d_zoh(cseries(problem.F, problem.H1), delta)
    H2d = c2d_zoh(problem.H2, delta)
    w = SignalGrid(delta, w_fast)
    x = simulate(Fd, w).scalar()
    s = simulate(chain, w).scalar()
    c1 = s[::N]
    c2 = np.zeros_like(c1)
    for k in range(c1.size):
        for n, a in enumerate(fir.taps):
            if k - n >= 0:
                c2[k] += a * c1[k - n]
    u = np.repeat(c2, N)[: x.size]
    y = simulate(H2d, SignalGrid(delta, u)).scalar()
    ref = np.zeros_like(x)
    d = problem.delay_steps
    if d == 0:
        ref = x
    else:
        ref[d:] = x[:-d]
    return ref - y


class TestLift:
    def test_identity_for_n1(self, rng):
        sys = rand_stable_discrete(rng, 3)
        assert lift(sys, 1) is sys

    def test_scalar_delay_by_two(self):
        sys = DiscreteStateSpace([[0.0]], [[1.0]], [[1.0]], [[0.0]], 1.0)
        L = lift(sys, 2)
        assert np.allclose(L.A, [[0.0]])
        assert np.allclose(L.B, [[0.0, 1.0]])
        assert np.allclose(L.C, [[1.0], [0.0]])
        assert np.allclose(L.D, [[0.0, 0.0], [1.0, 0.0]])
        assert L.step == 2.0

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_blocked_simulation_equivalence(self, rng, N):
        sys = rand_stable_discrete(rng, 3, m=2, p=2, step=0.25)
        L = lift(sys, N)
        steps = 50
        u = rng.standard_normal((steps * N, 2))
        fast = simulate(sys, SignalGrid(0.25, u)).values
        blocked_in = u.reshape(steps, N * 2)
        slow = simulate(L, SignalGrid(0.25 * N, blocked_in)).values
        assert np.allclose(slow, fast.reshape(steps, N * 2), atol=1e-10)

    def test_rejects_bad_n(self, rng):
        with pytest.raises(ValueError):
            lift(rand_stable_discrete(rng, 2), 0)


class TestDelayLine:
    def test_zero_delay_is_identity(self):
        d = delay_line(0, 2, 1.0)
        assert d.order == 0
        assert np.array_equal(d.D, np.eye(2))

    def test_one_step_impulse(self):
        d = delay_line(1, 1, 1.0)
        u = np.zeros(4)
        u[0] = 1.0
        out = simulate(d, SignalGrid(1.0, u)).scalar()
        assert np.array_equal(out, [0.0, 1.0, 0.0, 0.0])

    def test_three_step_shift_exact(self, rng):
        d = delay_line(3, 1, 1.0)
        u = rng.standard_normal(20)
        out = simulate(d, SignalGrid(1.0, u)).scalar()
        assert np.array_equal(out[3:], u[:-3])
        assert np.array_equal(out[:3], np.zeros(3))


class TestGeneralizedPlant:
    def test_dimension_contract(self):
        plant = build_generalized_plant(simple_problem(N=2))
        assert (plant.G1.in_dim, plant.G1.out_dim) == (2, 2)
        assert (plant.G2.in_dim, plant.G2.out_dim) == (1, 2)
        assert (plant.G3.in_dim, plant.G3.out_dim) == (2, 1)
        assert plant.step == 1.0

    def test_zero_input_zero_error(self, rng):
        problem = simple_problem(N=2)
        plant = build_generalized_plant(problem)
        fir = FirFilter(rng.standard_normal(3), problem.h)
        loop = close_loop(plant, fir)
        out = simulate(loop, SignalGrid(problem.h, np.zeros((50, 2))))
        assert np.allclose(out.values, 0.0, atol=1e-15)

    def test_closed_loop_matches_fast_interconnection(self, rng):
        problem = simple_problem(N=2, delay_steps=0)
        plant = build_generalized_plant(problem)
        fir = FirFilter(rng.standard_normal(3), problem.h)
        loop = close_loop(plant, fir)
        steps = 200
        w = rng.standard_normal(steps * problem.N)
        e_fast = fast_interconnection_error(problem, fir, w)
        blocked = simulate(
            loop, SignalGrid(problem.h, w.reshape(steps, problem.N))
        ).values
        assert np.max(np.abs(blocked.ravel() - e_fast)) < 1e-9

    def test_unstable_model_rejected(self):
        from hinfrecon import ContinuousStateSpace
        bad = ContinuousStateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]])
        with pytest.raises(ValueError):
            DesignProblem(F=bad, H1=unit_gain(), H2=unit_gain(), h=1.0, N=2)

    def test_non_strictly_proper_model_rejected(self):
        bad = first_order(d=0.5)
        with pytest.raises(ValueError):
            DesignProblem(F=bad, H1=unit_gain(), H2=unit_gain(), h=1.0, N=2)


class TestCloseLoop:
    def test_zero_taps_returns_g1_response(self, rng):
        plant = build_generalized_plant(simple_problem(N=3))
        loop = close_loop(plant, FirFilter(np.zeros(4), 1.0))
        for theta in np.linspace(0.0, np.pi, 9):
            assert np.allclose(
                frequency_response(loop, theta),
                frequency_response(plant.G1, theta), atol=1e-12)

    def test_static_affine_cancellation(self):
        g = lambda v: DiscreteStateSpace.gain(v, 1.0)
        plant = GeneralizedPlant(G1=g(1.0), G2=g(1.0), G3=g(1.0))
        loop = close_loop(plant, FirFilter([-1.0], 1.0))
        for theta in (0.0, 1.0, np.pi):
            assert np.allclose(frequency_response(loop, theta), 0.0,
                               atol=1e-15)

    def test_response_is_affine_composition(self, rng):
        N = 2
        plant = GeneralizedPlant(
            G1=rand_stable_discrete(rng, 3, m=N, p=N),
            G2=rand_stable_discrete(rng, 2, m=1, p=N),
            G3=rand_stable_discrete(rng, 2, m=N, p=1),
        )
        fir = FirFilter(rng.standard_normal(4), 1.0)
        loop = close_loop(plant, fir)
        for theta in np.linspace(0.0, np.pi, 64):
            want = (frequency_response(plant.G1, theta)
                    + frequency_response(plant.G2, theta)
                    * fir.response(theta)
                    @ frequency_response(plant.G3, theta))
            assert np.allclose(frequency_response(loop, theta), want,
                               atol=1e-9)

    def test_affine_midpoint_in_taps(self, rng):
        plant = build_generalized_plant(simple_problem(N=2))
        a = rng.standard_normal(3)
        b = rng.standard_normal(3)
        mid = close_loop(plant, FirFilter((a + b) / 2.0, 1.0))
        fa = close_loop(plant, FirFilter(a, 1.0))
        fb = close_loop(plant, FirFilter(b, 1.0))
        for theta in np.linspace(0.0, np.pi, 16):
            want = 0.5 * (frequency_response(fa, theta)
                          + frequency_response(fb, theta))
            assert np.allclose(frequency_response(mid, theta), want,
                               atol=1e-10)

    def test_period_mismatch(self, rng):
        plant = build_generalized_plant(simple_problem(N=2))
        with pytest.raises(ValueError):
            close_loop(plant, FirFilter([1.0], 0.5))


class TestDelayPath:
    @pytest.mark.parametrize("m", [1, 3, 8])
    def test_delayed_interconnection(self, rng, m):
        problem = DesignProblem(
            F=rand_stable_continuous(rng, 2, strictly_proper=True),
            H1=rand_stable_continuous(rng, 1),
            H2=rand_stable_continuous(rng, 1),
            h=0.5, N=4, delay_steps=m,
        )
        plant = build_generalized_plant(problem)
        fir = FirFilter(rng.standard_normal(4), problem.h)
        loop = close_loop(plant, fir)
        steps = 100
        w = rng.standard_normal(steps * problem.N)
        e_fast = fast_interconnection_error(problem, fir, w)
        blocked = simulate(
            loop, SignalGrid(problem.h, w.reshape(steps, problem.N))
        ).values
        assert np.max(np.abs(blocked.ravel() - e_fast)) < 1e-9
