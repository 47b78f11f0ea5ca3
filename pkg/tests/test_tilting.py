"""Tilting map, exponential scale, closed-form inverse, fixed-point solver."""

import math

import numpy as np
import pytest

from popa_algebra import (CanonicalSolution, ComplexReImSolution,
                          DegenerateExpSolution, DegenerateForm, Direction,
                          IdempotentSolution, LogBranchViolation,
                          NoConvergence, NotInvertible, NotOmegaHomogeneous,
                          PartitionSolution, PartitionSpec, adjustor,
                          complex_plane, gamma, hadamard, lambda_scale,
                          radiality_check, ratio_limit_check, tilt_T,
                          tilt_inverse, tilt_path, tilt_solve_fixed_point,
                          unboundedness_direction)
from popa_algebra.tilting import contraction_radius, guarantee_radius

E = math.e
A1, A2, A3 = hadamard(1), hadamard(2), hadamard(3)


def one_exp_2d(g=1.0):
    return DegenerateExpSolution(DegenerateForm.ONE_EXP, axis=0, gamma_exp=g)


def exp_3d():
    return DegenerateExpSolution(DegenerateForm.ONE_EXP, weights=[1.0, 1.0, 0.0],
                                 exp_index=2, algebra=A3)


def codependent(s1=1.0, s2=2.0):
    return PartitionSolution(PartitionSpec(((0, 1),), np.array([s1, s2])))


# ---------------------------------------------------------------------------
# the tilting map
# ---------------------------------------------------------------------------

def test_tilt_exponential_2d():
    got = tilt_T(one_exp_2d(1.0), A2.element([1.0, 1.0]))
    assert np.allclose(got.coords, [1.0, E - 1.0])


def test_tilt_exponential_3d():
    got = tilt_T(exp_3d(), A3.element([1.0, 1.0, 1.0]))
    assert np.allclose(got.coords, [1.0, 1.0, (E ** 2 - 1.0) / 2.0])


def test_tilt_is_identity_with_zero_derivative():
    sol = PartitionSolution(PartitionSpec(((0,), (1,)), np.array([0.0, 0.0])))
    u = A2.element([0.7, -0.3])
    assert (tilt_T(sol, u) - u).norm() < 1e-15


def test_tilt_zero_maps_to_zero():
    for sol in (codependent(), one_exp_2d()):
        assert tilt_T(sol, sol.algebra.zero()).norm() == 0.0


def test_tilt_multiplier_invertible_on_samples():
    rng = np.random.default_rng(4)
    sol = codependent()
    for _ in range(100):
        u = A2.element(rng.uniform(-0.4, 0.4, 2))
        assert gamma(sol, u).mu().is_invertible()


# ---------------------------------------------------------------------------
# lambda scaling
# ---------------------------------------------------------------------------

def test_lambda_at_one_is_unit():
    rng = np.random.default_rng(1)
    for sol in (codependent(), one_exp_2d(), exp_3d()):
        u = sol.algebra.element(rng.uniform(-1, 1, sol.algebra.dim))
        assert (lambda_scale(sol, u, 1.0) - sol.algebra.unit()).norm() < 1e-12
        assert lambda_scale(sol, u, 0.0).norm() < 1e-15


def test_lambda_exponential_instance():
    got = lambda_scale(one_exp_2d(1.0), A2.element([1.0, 0.0]), 2.0)
    assert np.allclose(got.coords, [2.0, (E ** 2 - 1.0) / (E - 1.0)])


def test_lambda_with_zero_derivative_is_scalar_t():
    sol = one_exp_2d(1.0)
    got = lambda_scale(sol, A2.element([0.0, 5.0]), 3.7)
    assert np.allclose(got.coords, [3.7, 3.7])


def test_lambda_goldie_identity():
    rng = np.random.default_rng(2)
    sol = codependent()
    for _ in range(25):
        u = A2.element(rng.uniform(-1, 1, 2))
        s, t = rng.uniform(0, 2, 2)
        lhs = lambda_scale(sol, u, s + t)
        rhs = lambda_scale(sol, u, s) + (s * gamma(sol, u)).exp() * lambda_scale(sol, u, t)
        assert (lhs - rhs).norm() < 1e-10


def test_tilt_homogeneity_along_rays():
    rng = np.random.default_rng(3)
    for sol in (codependent(), one_exp_2d(1.3), exp_3d()):
        for _ in range(20):
            u = sol.algebra.element(rng.uniform(-0.8, 0.8, sol.algebra.dim))
            for t in (0.0, 0.3, 1.0, 2.5):
                lhs = tilt_T(sol, t * u)
                rhs = lambda_scale(sol, u, t) * tilt_T(sol, u)
                # T(tu) uses gamma(tu) = t*gamma(u): same curve as the path form
                assert (lhs - rhs).norm() < 1e-10
                assert (tilt_path(sol, u, t) - lhs).norm() < 1e-10


# ---------------------------------------------------------------------------
# radiality of the adjustor
# ---------------------------------------------------------------------------

def test_radiality_exponential_hand_values():
    # adjustor along the tilt of (1, 0): N(t(1,0)) = (0, e^t - 1) equals
    # ((e^t - 1)/(e - 1)) * (0, e - 1)
    sol = one_exp_2d(1.0)
    u = A2.element([1.0, 0.0])
    for t in (0.0, 0.5, 1.0, 2.0, 3.0):
        path = tilt_path(sol, u, t)   # the ray (t, 0): kernel coord linear
        assert np.allclose(path.coords, [t, 0.0])
        assert np.allclose(adjustor(sol, path).coords, [0.0, math.expm1(t)])
    assert radiality_check(sol, u, [0.0, 0.5, 1.0, 2.0, 3.0]) < 1e-10


def test_radiality_trivial_cases():
    sol = one_exp_2d(1.0)
    assert radiality_check(sol, A2.element([1.0, 0.0]), [1.0]) == 0.0
    can = CanonicalSolution(A2.element([1.0, 0.5]))
    assert radiality_check(can, A2.element([0.3, 0.4]), [0.0, 0.5, 1.0, 2.0]) < 1e-12


def test_radiality_partition_random():
    rng = np.random.default_rng(5)
    grid = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0]
    for _ in range(10):
        sol = codependent(*rng.uniform(-1.5, 1.5, 2))
        u = A2.element(rng.uniform(-0.8, 0.8, 2))
        assert radiality_check(sol, u, grid) < 1e-9


# ---------------------------------------------------------------------------
# closed-form inverse
# ---------------------------------------------------------------------------

def test_tilt_inverse_roundtrip():
    rng = np.random.default_rng(6)
    sols = [codependent(), CanonicalSolution(A2.element([0.8, -0.6])),
            IdempotentSolution([A2.element([1, 0])], [1.0, 0.0], A2),
            ComplexReImSolution(0.3, 0.7),
            CanonicalSolution(complex_plane().element([0.5, 0.4]))]
    for sol in sols:
        for _ in range(20):
            u = sol.algebra.element(rng.uniform(-0.4, 0.4, sol.algebra.dim))
            g = gamma(sol, u)
            if g.norm() > 0.9:
                u = (0.8 / g.norm()) * u
            v = tilt_T(sol, u)
            back = tilt_inverse(sol, v)
            assert (back - u).norm() < 1e-10
            assert (tilt_T(sol, back) - v).norm() < 1e-10
            # derivative consistency: gamma(u) = log(unit + gamma(v))
            log1g = (sol.algebra.unit() + gamma(sol, v)).log()
            assert (gamma(sol, back) - log1g).norm() < 1e-10


def test_tilt_inverse_kernel_direction_is_identity():
    sol = codependent(1.0, 1.0)
    v = A2.element([0.5, -0.5])  # gamma(v) = 0
    assert (tilt_inverse(sol, v) - v).norm() < 1e-14


def test_tilt_inverse_branch_violation():
    sol = CanonicalSolution(A1.element([1.0]))
    with pytest.raises(LogBranchViolation):
        tilt_inverse(sol, A1.element([-1.0]))   # 1 + gamma(v) = 0


def test_tilt_inverse_requires_power_compatible_derivative():
    with pytest.raises(NotOmegaHomogeneous):
        tilt_inverse(one_exp_2d(1.0), A2.element([0.1, 0.1]))


# ---------------------------------------------------------------------------
# fixed-point solver
# ---------------------------------------------------------------------------

def test_solver_trivial_when_derivative_vanishes():
    sol = PartitionSolution(PartitionSpec(((0,), (1,)), np.array([0.0, 0.0])))
    v = A2.element([0.3, 0.4])
    res = tilt_solve_fixed_point(sol, v)
    assert res.iterations == 0
    assert res.guaranteed
    assert (res.u - v).norm() == 0.0


def test_solver_agrees_with_closed_form():
    sol = codependent(0.3, 0.4)
    eta = guarantee_radius(sol)
    assert 0 < eta < 1
    rng = np.random.default_rng(7)
    for _ in range(20):
        v = sol.algebra.element(rng.uniform(-1, 1, 2))
        v = (0.9 * eta / max(v.norm(), 1e-12)) * v
        res = tilt_solve_fixed_point(sol, v)
        assert res.guaranteed
        assert res.final_residual < 1e-12
        assert res.iterations <= 60
        assert (res.u - tilt_inverse(sol, v)).norm() < 1e-10
        if res.contraction_ratios:
            assert max(res.contraction_ratios) <= 0.5 + 1e-9


def test_solver_flags_outside_guarantee():
    sol = codependent(1.0, 1.0)
    v = 10.0 * A2.unit()
    assert guarantee_radius(sol) <= 1.0
    with pytest.raises(NoConvergence):
        tilt_solve_fixed_point(sol, v, max_iter=120)


def test_solver_unguaranteed_but_converging():
    sol = codependent(1.0, 2.0)
    v = A2.element([0.05, 0.05])
    res = tilt_solve_fixed_point(sol, v)
    assert not res.guaranteed            # norm(v) above the tiny eta here
    assert res.final_residual < 1e-12


def test_contraction_radius_formulas():
    sol = codependent(0.3, 0.4)
    gn = sol.gamma_norm()
    assert gn == 0.7
    delta = contraction_radius(sol)
    assert abs(delta - min(1.0, 1.0 / (3.0 * gn * math.exp(gn)))) < 1e-15
    eta = guarantee_radius(sol)
    assert abs(eta - min(1.0, delta / 2, delta / (2 * gn * math.exp(gn)))) < 1e-15


# ---------------------------------------------------------------------------
# one-sided unboundedness
# ---------------------------------------------------------------------------

def test_unboundedness_exponential_form():
    sol = one_exp_2d(1.0)
    verdict = unboundedness_direction(sol, A2.element([1.0, 0.0]))
    assert verdict.direction is Direction.PLUS_UNBOUNDED
    # bounded-direction limit -u/g on the active coordinate, 0 on the kernel
    assert np.allclose(verdict.limit_point.coords, [0.0, 0.0])
    far = tilt_path(sol, A2.element([1.0, 0.0]), -30.0)
    assert abs(far.coords[1] - verdict.limit_point.coords[1]) < 1e-9


def test_unboundedness_scalar_canonical():
    sol = CanonicalSolution(A1.element([1.0]))
    verdict = unboundedness_direction(sol, A1.element([1.0]))
    assert verdict.direction is Direction.PLUS_UNBOUNDED
    assert np.allclose(verdict.limit_point.coords, [-1.0])
    # (e^{-s} - 1)/1 -> -1
    assert abs(tilt_path(sol, A1.element([1.0]), -40.0).coords[0] + 1.0) < 1e-12


def test_unboundedness_negative_derivative():
    sol = CanonicalSolution(A1.element([-0.5]))
    verdict = unboundedness_direction(sol, A1.element([1.0]))
    assert verdict.direction is Direction.MINUS_UNBOUNDED
    assert np.allclose(verdict.limit_point.coords, [2.0])  # -u/g = -1/-0.5


def test_unboundedness_unit_norm_cases():
    sol = codependent(1.0, 1.0)
    verdict = unboundedness_direction(sol, A2.element([0.5, -0.5]))  # gamma = 0
    assert verdict.direction is Direction.UNIT_NORM
    rot = CanonicalSolution(complex_plane().element([0.0, 1.0]))
    u = complex_plane().element([1.0, 0.0])   # gamma(u) = i: |e^{si}| = 1
    assert unboundedness_direction(rot, u).direction is Direction.UNIT_NORM


# ---------------------------------------------------------------------------
# finite-index ratio convergence
# ---------------------------------------------------------------------------

def test_ratio_limit_zero_element():
    res = ratio_limit_check(A1.zero(), 2.0, 10000)
    assert np.allclose(res.limit.coords, [2.0])
    assert all(e == 0.0 for e in res.errors)   # round(tn)/n = t exactly here


def test_ratio_limit_scalar():
    res = ratio_limit_check(A1.element([1.0]), 2.0, 10000)
    assert abs(res.limit.coords[0] - (E + 1.0)) < 1e-14   # (e^2-1)/(e-1) = e+1
    assert res.ns == (10, 100, 1000, 10000)
    assert all(a >= b for a, b in zip(res.errors, res.errors[1:]))
    assert res.errors[-1] < 5e-4


def test_ratio_limit_mixed_coordinates():
    res = ratio_limit_check(A2.element([1.0, 0.0]), 2.0, 10000)
    assert np.allclose(res.limit.coords, [(E ** 2 - 1) / (E - 1), 2.0])
    assert all(a >= b for a, b in zip(res.errors, res.errors[1:]))


def test_ratio_limit_singular_intermediate():
    # (1 + z/n) = -1 at z = -2n with even n: power n gives 1, e^z != 1
    with pytest.raises(NotInvertible):
        ratio_limit_check(A1.element([-20.0]), 2.0, ns=[10])


# ---------------------------------------------------------------------------
# kernel characterization via the derivative
# ---------------------------------------------------------------------------

def test_kernel_of_derivative_is_homogeneous_for_adjustor():
    rng = np.random.default_rng(8)
    from popa_algebra.structure import SigmaMatrix, kernel_subspace
    from conftest import random_partition_spec
    for _ in range(10):
        spec = random_partition_spec(rng, int(rng.integers(2, 6)))
        sol = PartitionSolution(spec)
        for v in kernel_subspace(SigmaMatrix(spec.sigma_matrix())):
            nv = adjustor(sol, v)
            for t in np.linspace(-2, 2, 9):
                assert (sol.eval(t * v) - sol.algebra.unit()).norm() < 1e-9
                assert (adjustor(sol, t * v) - t * nv).norm() < 1e-9
