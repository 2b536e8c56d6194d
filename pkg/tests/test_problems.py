"""Tests for the benchmark problems, flow maps, and Lipschitz constants."""

import math

import numpy as np
import pytest
from scipy.linalg import expm as scipy_expm

from sparareal.problems import (
    Mesh,
    ProblemError,
    estimate_lipschitz,
    linear_problem_from_diag,
    lipschitz_constants,
    make_linear_problem,
    make_scalar_problem,
    matrix_exponential,
    serial_fine_solve,
)

SQRT2 = math.sqrt(2.0)


class TestMesh:
    def test_dt_and_nodes(self):
        mesh = Mesh(0.0, 5.0, 20)
        assert mesh.dt == 0.25
        assert mesh.nodes.shape == (21,)
        assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 5.0

    def test_rejects_empty_interval(self):
        with pytest.raises(ProblemError):
            Mesh(1.0, 1.0, 10)

    def test_rejects_nonpositive_slices(self):
        with pytest.raises(ProblemError):
            Mesh(0.0, 1.0, 0)


class TestMatrixExponential:
    def test_zero_matrix_gives_identity(self):
        assert np.array_equal(matrix_exponential(np.zeros((3, 3)), 0.7), np.eye(3))

    def test_scalar_diagonal(self):
        out = matrix_exponential(np.diag([-1.0]), 0.1)
        assert out[0, 0] == pytest.approx(0.9048374180359595, abs=1e-14)

    def test_nilpotent_two_by_two(self):
        Q = np.array([[0.0, 1.0], [0.0, 0.0]])
        out = matrix_exponential(Q, 1.0)
        assert np.allclose(out, [[1.0, 1.0], [0.0, 1.0]], atol=1e-14)

    def test_matches_scipy_on_dense_matrix(self):
        rng = np.random.default_rng(3)
        Q = rng.normal(size=(5, 5))
        for dt in (0.05, 0.5, 2.0):
            assert np.allclose(matrix_exponential(Q, dt), scipy_expm(Q * dt),
                               rtol=1e-12, atol=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(ProblemError):
            matrix_exponential(np.zeros((2, 3)), 1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ProblemError):
            matrix_exponential(np.array([[np.nan]]), 1.0)


class TestLinearProblem:
    def test_single_mode_coarse_contraction(self):
        # Q = [-1], dt = 0.1: Euler multiplier 0.9, so B = 0.81 * 1.2 = 0.972
        problem = linear_problem_from_diag(np.array([-1.0]), np.array([1.0]),
                                           t0=0.0, T=2.0, N=20)
        L_G, L_F = lipschitz_constants(problem)
        assert L_G == pytest.approx(0.9, abs=1e-14)
        assert L_G ** 2 * (1.0 + 2.0 * problem.mesh.dt) == pytest.approx(0.972, abs=1e-12)

    def test_zero_field_is_identity(self):
        problem = linear_problem_from_diag(np.zeros(4), np.arange(4.0))
        u = np.array([1.0, -2.0, 3.0, -4.0])
        assert np.array_equal(problem.exact_flow(u, 0.25), u)
        assert np.array_equal(problem.coarse_flow(u, 0.25), u)
        L_G, L_F = lipschitz_constants(problem)
        assert L_G == 1.0 and L_F == 1.0
        traj = serial_fine_solve(problem)
        assert np.array_equal(traj, np.tile(problem.u0, (21, 1)))

    def test_contractive_mode_always_lands_below_one(self):
        for seed in range(100):
            problem = make_linear_problem(8, "contractive", seed)
            L_G, _ = lipschitz_constants(problem)
            assert L_G ** 2 * (1.0 + 2.0 * problem.mesh.dt) < 1.0

    def test_expansive_mode_lands_at_or_above_one(self):
        for seed in range(20):
            problem = make_linear_problem(8, "expansive", seed)
            L_G, _ = lipschitz_constants(problem)
            assert L_G ** 2 * (1.0 + 2.0 * problem.mesh.dt) >= 1.0

    def test_seeded_construction_is_reproducible(self):
        a = make_linear_problem(10, "contractive", 42)
        b = make_linear_problem(10, "contractive", 42)
        assert np.array_equal(a.qdiag, b.qdiag)
        assert np.array_equal(a.u0, b.u0)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ProblemError):
            make_linear_problem(4, "sideways", 0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ProblemError):
            linear_problem_from_diag(np.zeros(3), np.zeros(2))


class TestScalarProblem:
    def test_coarse_flow_euler_step(self):
        problem = make_scalar_problem()
        out = problem.coarse_flow(np.array([5.0]), 0.1)
        assert out[0] == pytest.approx(5.0 + 0.1 * math.sqrt(27.0), abs=1e-12)
        assert out[0] == pytest.approx(5.5196152, abs=1e-6)

    def test_exact_flow_closed_form(self):
        problem = make_scalar_problem()
        out = problem.exact_flow(np.array([5.0]), 0.1)
        expected = SQRT2 * math.sinh(0.1 + math.asinh(5.0 / SQRT2))
        assert out[0] == pytest.approx(expected, abs=1e-13)
        assert out[0] == pytest.approx(5.5462, abs=1e-3)

    def test_exact_flow_semigroup_property(self):
        problem = make_scalar_problem()
        u = np.array([2.5])
        two_steps = problem.exact_flow(problem.exact_flow(u, 0.07), 0.07)
        one_step = problem.exact_flow(u, 0.14)
        assert np.allclose(two_steps, one_step, atol=1e-12)

    def test_serial_fine_endpoint(self):
        problem = make_scalar_problem()
        traj = serial_fine_solve(problem)
        expected = SQRT2 * math.sinh(2.0 + math.asinh(5.0 / SQRT2))
        assert traj[20, 0] == pytest.approx(expected, rel=1e-12)

    def test_mesh_layout(self):
        problem = make_scalar_problem()
        assert problem.mesh.t0 == -1.0 and problem.mesh.T == 1.0
        assert problem.mesh.N == 20 and problem.mesh.dt == pytest.approx(0.1)

    def test_lipschitz_closed_forms(self):
        problem = make_scalar_problem()
        L_G, L_F = lipschitz_constants(problem)
        assert L_G == pytest.approx(1.1, abs=1e-14)
        assert L_F == pytest.approx(math.exp(0.1), abs=1e-14)


class TestLipschitzEstimation:
    def test_linear_closed_forms(self):
        problem = linear_problem_from_diag(np.array([-1.0]), np.array([1.0]),
                                           t0=0.0, T=2.0, N=20)
        L_G, L_F = lipschitz_constants(problem)
        assert L_G == pytest.approx(0.9, abs=1e-14)
        assert L_F == pytest.approx(math.exp(-0.1), abs=1e-14)

    def test_empirical_estimate_brackets_closed_form(self):
        problem = make_scalar_problem()
        L_G, L_F = lipschitz_constants(problem)
        est_G, est_F = estimate_lipschitz(problem, samples=2000, seed=0)
        # estimates carry a 10% safety factor, so they sit near/above truth
        assert 0.9 * L_G <= est_G <= 1.15 * L_G
        assert 0.9 * L_F <= est_F <= 1.15 * L_F
