"""Transcendental roots, kernel/group/section triples, idempotent builder."""

import cmath
import math

import numpy as np
import pytest

from popa_algebra import (CanonicalSolution, InvalidTriple, NotInRange,
                          NotOrthogonalIdempotents, PartitionSolution,
                          PartitionSpec, WjTriple, complex_plane,
                          count_roots_negative_strip, eval_solution, hadamard,
                          idempotent_solution, st_roots, verify_gs, wj_build_S,
                          wj_extract, wj_verify, xi_root)
from popa_algebra.special import _y_curve, st_residual

A1, A2 = hadamard(1), hadamard(2)
TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# roots of e^w = 1 + w
# ---------------------------------------------------------------------------

def _newton_roots_oracle(n_wanted):
    """Independent root finder: plain complex Newton from a coarse grid."""
    found = []
    for re0 in np.arange(0.25, 5.0, 0.25):
        for im0 in np.arange(0.5, TWO_PI * (n_wanted + 2), 0.5):
            w = complex(re0, im0)
            for _ in range(80):
                f = cmath.exp(w) - 1.0 - w
                fp = cmath.exp(w) - 1.0
                if abs(fp) < 1e-14:
                    break
                step = f / fp
                w -= step
                if abs(step) < 1e-14:
                    break
            if abs(cmath.exp(w) - 1.0 - w) < 1e-11 and w.real > 0 and w.imag > 0.5:
                if not any(abs(w - z) < 1e-6 for z in found):
                    found.append(w)
    return sorted(found, key=lambda z: z.imag)[:n_wanted]


def test_roots_satisfy_defining_equation():
    for r in st_roots(10):
        assert r.residual < 1e-12
        assert st_residual(r.x, r.y) < 1e-12
        assert r.x > 0
        assert r.branch_index >= 1


def test_roots_ordered_and_unbounded_in_y():
    roots = st_roots(10)
    ys = [r.y for r in roots]
    assert all(a < b for a, b in zip(ys, ys[1:]))
    gaps = [b - a for a, b in zip(ys, ys[1:])]
    # consecutive windows: spacing approaches one full period from below
    assert all(abs(g - TWO_PI) < 2.0 for g in gaps)
    assert abs(gaps[-1] - TWO_PI) < 0.2


def test_roots_against_independent_newton_scan():
    lib = st_roots(4)
    ora = _newton_roots_oracle(4)
    assert len(ora) == 4
    for r, z in zip(lib, ora):
        assert abs(complex(r.x, r.y) - z) < 1e-9


def test_no_roots_with_negative_real_part():
    assert count_roots_negative_strip() == 0


def test_damping_ratio_increases_to_one():
    # e^{-x} y(x) climbs strictly from 0 toward 1
    xs = np.linspace(0.0, 12.0, 400)
    vals = [math.exp(-x) * _y_curve(x) for x in xs]
    assert vals[0] == 0.0
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1.0
    assert vals[-1] > 0.999


def test_xi_root_value():
    xi = xi_root()
    assert 1.27846 <= xi <= 1.27847
    assert abs(math.exp(-xi) - (xi - 1.0)) < 1e-13
    # the curve's squared ordinate vanishes at -xi
    assert abs(math.exp(-2 * xi) - (1.0 - xi) ** 2) < 1e-13


# ---------------------------------------------------------------------------
# kernel/group/section triples
# ---------------------------------------------------------------------------

def _scalar_triple(section):
    lams = (A1.element([0.5]), A1.element([2.0]), A1.element([3.0]))
    return WjTriple((), lams, section)


def test_wj_verify_affine_section():
    triple = _scalar_triple(lambda lam: A1.element([lam.coords[0] - 1.0]))
    assert wj_verify(triple)


def test_wj_verify_rejects_quadratic_section():
    # the crossed-homomorphism equation fails at the pair (2, 2):
    # W(4) = 15 but W(2) + 2 W(2) = 9
    triple = _scalar_triple(lambda lam: A1.element([lam.coords[0] ** 2 - 1.0]))
    w4 = 4.0 ** 2 - 1.0
    assert w4 == 15.0 and (2.0 ** 2 - 1.0) * 3.0 == 9.0
    assert not wj_verify(triple)
    with pytest.raises(InvalidTriple):
        wj_build_S(triple)


def test_wj_oracle_reconstructs_affine_map():
    triple = _scalar_triple(lambda lam: A1.element([lam.coords[0] - 1.0]))
    oracle = wj_build_S(triple)
    for lam in oracle.covered_values():
        x = triple.section(lam)
        assert abs(oracle.eval(x).coords[0] - (1.0 + x.coords[0])) < 1e-12
    assert oracle.eval(A1.element([10.0])).norm() == 0.0  # uncovered
    assert oracle.gs_residual_on_covered(seed=3) < 1e-10


def test_wj_extract_canonical():
    sol = CanonicalSolution(A1.element([1.0]))
    lams = [A1.element([0.5]), A1.element([2.0]), A1.element([4.0])]
    triple = wj_extract(sol, lams)
    assert wj_verify(triple)
    assert np.allclose(triple.section(A1.element([2.0])).coords, [1.0])
    assert len(triple.kernel_basis) == 0


def test_wj_extract_codependent():
    sol = PartitionSolution(PartitionSpec(((0, 1),), np.array([1.0, 1.0])))
    lam = A2.element([1.4, 1.4])
    triple = wj_extract(sol, [lam, A2.element([0.8, 0.8])])
    assert wj_verify(triple)
    assert np.allclose(triple.section(lam).coords, [0.2, 0.2])
    assert len(triple.kernel_basis) == 1
    with pytest.raises(NotInRange):
        wj_extract(sol, [A2.element([2.0, 3.0])])  # off the diagonal range


def test_wj_roundtrip_matches_solution_mod_kernel():
    rng = np.random.default_rng(9)
    sol = PartitionSolution(PartitionSpec(((0, 1),), np.array([1.0, 1.0])))
    lams = [sol.eval(A2.element(rng.uniform(-0.3, 0.3, 2))) for _ in range(4)]
    triple = wj_extract(sol, lams)
    oracle = wj_build_S(triple)
    k = triple.kernel_matrix()
    for lam in oracle.covered_values():
        base = triple.section(lam)
        for _ in range(5):
            shift = A2.element(k.T @ rng.uniform(-0.5, 0.5, k.shape[0]))
            x = base + shift
            assert (oracle.eval(x) - eval_solution(sol, x)).norm() < 1e-10


# ---------------------------------------------------------------------------
# idempotent builder
# ---------------------------------------------------------------------------

def test_idempotent_spanning_basis_reproduces_affine_family():
    e1, e2 = A2.element([1, 0]), A2.element([0, 1])
    sol = idempotent_solution(A2, [e1, e2], [1.0, 1.0])
    x = A2.element([0.3, -0.7])
    assert np.allclose(sol.eval(x).coords, (A2.unit() + x).coords)
    assert verify_gs(sol, 2000, seed=2).max_gs_residual < 1e-12


def test_idempotent_partial_system():
    sol = idempotent_solution(A2, [A2.element([1, 0])], [1.0, 0.0])
    got = sol.eval(A2.element([0.4, 5.0]))
    assert np.allclose(got.coords, [1.4, 1.0])
    assert verify_gs(sol, 2000, seed=2).max_gs_residual < 1e-12


def test_idempotent_general_functional_matches_affine_form():
    # spanning rank-one idempotents with the coefficient functional of rho
    rng = np.random.default_rng(11)
    rho = rng.uniform(-2, 2, 3)
    A3 = hadamard(3)
    idems = [A3.element(np.eye(3)[i]) for i in range(3)]
    sol = idempotent_solution(A3, idems, rho)
    can = CanonicalSolution(A3.element(rho))
    for _ in range(20):
        x = A3.element(rng.uniform(-1, 1, 3))
        assert (sol.eval(x) - can.eval(x)).norm() < 1e-12


def test_idempotent_rejects_bad_inputs():
    with pytest.raises(NotOrthogonalIdempotents):
        idempotent_solution(A2, [A2.element([1, 1]), A2.element([1, 0])],
                            [1.0, 0.0])
    with pytest.raises(NotOrthogonalIdempotents):
        idempotent_solution(A2, [A2.element([2, 0])], [1.0, 0.0])


def test_idempotent_on_complex_plane():
    C = complex_plane()
    sol = idempotent_solution(C, [C.unit()], [1.0, 0.0])
    z = C.element([0.3, 0.4])
    # nu(z) = sigma(z) * 1 with sigma = Re: the real-linear family a=1, b=0
    assert np.allclose(sol.eval(z).coords, [1.3, 0.0])
    assert verify_gs(sol, 2000, seed=2).max_gs_residual < 1e-12
