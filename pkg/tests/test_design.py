import numpy as np
import pytest

from hinfrecon import (
    ContinuousStateSpace,
    DesignProblem,
    DiscreteStateSpace,
    FirFilter,
    GeneralizedPlant,
    UncertaintySpec,
    build_generalized_plant,
    cseries,
    design_fir,
    evaluate_J,
    frequency_response,
    robustness_check,
)
from hinfrecon.statespace import frequency_response_many
from conftest import rand_stable_discrete


def toy_problem(N=4, delay_steps=0, h=1.0):
    F = ContinuousStateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
    one = ContinuousStateSpace.gain(1.0)
    return DesignProblem(F=F, H1=one, H2=one, h=h, N=N,
                         delay_steps=delay_steps)


def random_plant(rng, N=2):
    return GeneralizedPlant(
        G1=rand_stable_discrete(rng, 3, m=N, p=N, rho_max=0.7),
        G2=rand_stable_discrete(rng, 2, m=1, p=N, rho_max=0.7),
        G3=rand_stable_discrete(rng, 2, m=N, p=1, rho_max=0.7),
    )


def brute_force_two_taps(plant, lo=-2.0, hi=2.0, step=0.01, grid=512):
    """Exhaustive tap-grid search of max_theta sigma_max, 2 taps.

    Uses the affine frequency structure E(theta) = T1 + k(theta) P and a
    closed-form largest singular value for 2x2 blocks, vectorized over the
    tap grid.
    """
    thetas = np.linspace(0.0, np.pi, grid)
    T1 = frequency_response_many(plant.G1, thetas)
    P = (frequency_response_many(plant.G2, thetas)
         @ frequency_response_many(plant.G3, thetas))
    a0 = np.arange(lo, hi + step / 2, step)
    a1 = np.arange(lo, hi + step / 2, step)
    A0, A1 = np.meshgrid(a0, a1, indexing="ij")
    best = np.zeros(A0.shape)
    for i, th in enumerate(thetas):
        k = A0 + A1 * np.exp(-1j * th)
        # E entries are affine in k; sigma_max^2 of a 2x2 matrix M solves
        # s^4 - tr(M*M) s^2 + |det M|^2 = 0
        frob = np.zeros(A0.shape)
        for r in range(2):
            for c in range(2):
                e = T1[i, r, c] + k * P[i, r, c]
                frob += np.abs(e) ** 2
        det = ((T1[i, 0, 0] + k * P[i, 0, 0]) * (T1[i, 1, 1] + k * P[i, 1, 1])
               - (T1[i, 0, 1] + k * P[i, 0, 1]) * (T1[i, 1, 0] + k * P[i, 1, 0]))
        disc = np.sqrt(np.maximum(frob ** 2 - 4.0 * np.abs(det) ** 2, 0.0))
        smax = np.sqrt(0.5 * (frob + disc))
        np.maximum(best, smax, out=best)
    j = np.unravel_index(np.argmin(best), best.shape)
    return float(best[j]), np.array([a0[j[0]], a1[j[1]]])


class TestDesignFir:
    def test_scalar_static_exact_cancellation(self):
        g = lambda v: DiscreteStateSpace.gain(v, 1.0)
        plant = GeneralizedPlant(G1=g(1.0), G2=g(1.0), G3=g(1.0))
        report = design_fir(plant, 1, tol=1e-6)
        assert report.converged
        assert np.isclose(report.filter.taps[0], -1.0, atol=1e-8)
        assert report.achieved_norm <= 1e-10

    def test_degenerate_g2_returns_zero_filter(self, rng):
        N = 2
        plant = GeneralizedPlant(
            G1=rand_stable_discrete(rng, 2, m=N, p=N),
            G2=DiscreteStateSpace.gain(np.zeros((N, 1)), 1.0),
            G3=rand_stable_discrete(rng, 2, m=N, p=1),
        )
        report = design_fir(plant, 3)
        assert np.array_equal(report.filter.taps, np.zeros(3))
        from hinfrecon import hinf_norm
        assert np.isclose(report.achieved_norm, hinf_norm(plant.G1).value,
                          rtol=1e-6)

    def test_matches_brute_force_grid(self, rng):
        for _ in range(2):
            plant = random_plant(rng)
            report = design_fir(plant, 2, tol=1e-4)
            brute, _ = brute_force_two_taps(plant)
            assert report.achieved_norm <= brute + 1e-2
            assert brute <= report.achieved_norm + 1e-2

    def test_certificate_invariants(self, rng):
        plant = random_plant(rng)
        report = design_fir(plant, 3, tol=1e-4)
        assert report.lower_bound <= report.achieved_norm * (1.0 + 1e-4)
        if report.converged:
            gap = report.achieved_norm - report.lower_bound
            assert gap <= 1e-4 * report.achieved_norm + 1e-12

    def test_monotone_in_tap_count(self, rng):
        plant = random_plant(rng)
        v2 = design_fir(plant, 2, tol=1e-4).achieved_norm
        v3 = design_fir(plant, 3, tol=1e-4).achieved_norm
        assert v3 <= v2 * (1.0 + 1e-4) + 1e-10

    def test_delay_budget_does_not_hurt(self):
        tol = 1e-3
        no_delay = toy_problem(N=2, delay_steps=0)
        delayed = toy_problem(N=2, delay_steps=2)
        v0 = design_fir(build_generalized_plant(no_delay), 4,
                        tol=tol).achieved_norm
        v1 = design_fir(build_generalized_plant(delayed), 4,
                        tol=tol).achieved_norm
        assert v1 <= v0 * (1.0 + tol) + 1e-9

    def test_deterministic(self, rng):
        plant = random_plant(rng)
        r1 = design_fir(plant, 3, tol=1e-4)
        r2 = design_fir(plant, 3, tol=1e-4)
        assert np.array_equal(r1.filter.taps, r2.filter.taps)
        assert r1.achieved_norm == r2.achieved_norm

    def test_rejects_bad_tap_count(self, rng):
        with pytest.raises(ValueError):
            design_fir(random_plant(rng), 0)


class TestEvaluateJ:
    def test_zero_taps_equal_g1_norm(self):
        from hinfrecon import build_generalized_plant, hinf_norm
        problem = toy_problem(N=2)
        plant = build_generalized_plant(problem)
        res = evaluate_J(problem, FirFilter(np.zeros(3), problem.h))
        assert np.isclose(res.value, hinf_norm(plant.G1).value, rtol=1e-6)

    def test_convex_along_tap_segments(self, rng):
        problem = toy_problem(N=2)
        for _ in range(5):
            a = rng.standard_normal(3)
            b = rng.standard_normal(3)
            ja = evaluate_J(problem, FirFilter(a, 1.0)).value
            jb = evaluate_J(problem, FirFilter(b, 1.0)).value
            jm = evaluate_J(problem, FirFilter((a + b) / 2, 1.0)).value
            assert jm <= 0.5 * (ja + jb) + 1e-8

    def test_recertification_deterministic(self):
        problem = toy_problem(N=8, delay_steps=8)
        report = design_fir(__import__("hinfrecon").build_generalized_plant(problem),
                            8, tol=1e-3)
        v1 = evaluate_J(problem, report.filter).value
        v2 = evaluate_J(problem, report.filter).value
        assert abs(v1 - v2) <= 1e-8

    def test_period_mismatch(self):
        problem = toy_problem()
        with pytest.raises(ValueError):
            evaluate_J(problem, FirFilter([1.0], 0.7))


class TestRobustness:
    def test_static_scaling_equality(self):
        problem = toy_problem(N=4, delay_steps=4)
        fir = FirFilter([0.3, 0.2, 0.1], problem.h)
        nominal = evaluate_J(problem, fir).value
        delta = 0.17
        scaled_F = ContinuousStateSpace(
            problem.F.A, problem.F.B, (1 + delta) * problem.F.C, problem.F.D)
        scaled = DesignProblem(F=scaled_F, H1=problem.H1, H2=problem.H2,
                               h=problem.h, N=problem.N,
                               delay_steps=problem.delay_steps)
        perturbed = evaluate_J(scaled, fir).value
        assert np.isclose(perturbed, (1 + delta) * nominal, rtol=1e-8)

    def test_monte_carlo_bound(self):
        problem = toy_problem(N=4, delay_steps=4)
        fir = FirFilter([0.5, 0.3], problem.h)
        spec = UncertaintySpec(gamma=1.2, samples=10)
        report = robustness_check(problem, fir, spec, seed=7)
        assert report.bound_holds
        assert report.worst_perturbed <= report.bound * (1.0 + 1e-6)
        assert report.worst_ratio <= 1.2 * (1.0 + 1e-6)

    def test_perturbation_norm_is_exact(self, rng):
        from hinfrecon.design import _first_order_factor
        for gamma in (1.0, 1.2, 2.0):
            factor = _first_order_factor(rng, gamma)
            # |(jw + alpha + g)/(jw + alpha)| peaks at w=0 or tends to 1
            w = np.linspace(0.0, 200.0, 20001)
            resp = ((1j * w - factor.A[0, 0] + factor.C[0, 0])
                    / (1j * w - factor.A[0, 0]))
            assert np.isclose(np.max(np.abs(resp)), gamma, rtol=1e-6)
            assert factor.A[0, 0] < 0

    def test_gamma_below_one_rejected(self):
        problem = toy_problem()
        with pytest.raises(ValueError):
            robustness_check(problem, FirFilter([1.0], problem.h),
                             UncertaintySpec(gamma=0.5, samples=1))
