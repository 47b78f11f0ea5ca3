"""Exponential tilting: the curvilinear direction along which the adjustor
scales, its closed-form inverse, and a guaranteed fixed-point solver.

The tilt of u is T(u) = u (e^{g} - 1)/g with g the derivative of the
solution map at 0 applied to u; spectral points where the relevant ratio
degenerates take their limiting value (t at points where e^z = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .algebra import (Element, exp_ratio_scalar, growth_scalar, h_scalar,
                      log1p_over_scalar)
from .errors import (LogBranchViolation, NoConvergence, NotInvertible,
                     NotOmegaHomogeneous, PopaAlgebraError)
from .solutions import GsSolution, adjustor, gamma

RESIDUAL_TOL = 1e-12
MAX_ITER_DEFAULT = 200

#: spectral points below this are treated as lying in the kernel
KERNEL_EPS = 1e-12


def tilt_T(sol: GsSolution, u: Element) -> Element:
    """u times the tilting multiplier (e^g - 1)/g; the identity where g = 0."""
    return u * gamma(sol, u).mu()


def lambda_scale(sol: GsSolution, u: Element, t: float) -> Element:
    """Exponential scaling factor (e^{tg} - 1)/(e^g - 1), value t where e^g = 1."""
    return gamma(sol, u).apply_scalar(lambda z: exp_ratio_scalar(z, t))


def tilt_path(sol: GsSolution, u: Element, t: float) -> Element:
    """The tilt at parameter t: u (e^{tg} - 1)/g, linear (t u) on the kernel."""
    return u * gamma(sol, u).apply_scalar(lambda z: growth_scalar(z, t))


def radiality_check(sol: GsSolution, u: Element, t_grid: Sequence[float]) -> float:
    """Max defect of N(tilt at t) = lambda(t) * N(tilt at 1) over the grid."""
    if any(t < 0 for t in t_grid):
        raise ValueError("t_grid must be non-negative")
    n_t1 = adjustor(sol, tilt_T(sol, u))
    worst = 0.0
    for t in t_grid:
        lhs = adjustor(sol, tilt_path(sol, u, float(t)))
        rhs = lambda_scale(sol, u, float(t)) * n_t1
        worst = max(worst, (lhs - rhs).norm())
    return worst


def _check_log_branch(one_plus_g: Element):
    for z in one_plus_g.spectrum().points:
        if z.imag == 0.0 and z.real <= 0.0:
            raise LogBranchViolation("spectrum of unit + gamma(v) meets (-inf, 0]")


def tilt_inverse(sol: GsSolution, v: Element) -> Element:
    """Closed-form solution u of T(u) = v: u = v log(unit + g(v))/g(v).

    Valid for families whose derivative satisfies the power-raising
    property (the linear families); the spectrum of unit + g(v) must avoid
    the closed negative real axis.
    """
    if not sol.omega_homogeneous():
        raise NotOmegaHomogeneous(
            f"closed-form inverse not validated for variant {sol.variant}")
    gv = gamma(sol, v)
    _check_log_branch(sol.algebra.unit() + gv)
    u = v * gv.apply_scalar(log1p_over_scalar)
    # the derivative of the preimage must be the principal log of unit + g(v)
    gu = gamma(sol, u)
    log1g = gv.apply_scalar(lambda z: z * log1p_over_scalar(z))
    if (gu - log1g).norm() > 1e-9 * max(1.0, gv.norm()):
        raise PopaAlgebraError("tilt inverse consistency check failed")
    return u


@dataclass(frozen=True)
class TiltResult:
    """Outcome of the fixed-point tilt solver."""

    u: Element
    iterations: int
    final_residual: float
    guaranteed: bool
    contraction_ratios: tuple = ()

    def to_json(self) -> dict:
        return {"u": self.u.to_json(), "iterations": self.iterations,
                "final_residual": self.final_residual, "guaranteed": self.guaranteed}


def contraction_radius(sol: GsSolution) -> float:
    """Ball radius within which the solver's update map is a 1/2-contraction."""
    gnorm = sol.gamma_norm()
    if gnorm == 0.0:
        return math.inf
    return min(1.0, 1.0 / (3.0 * gnorm * math.exp(gnorm)))


def guarantee_radius(sol: GsSolution) -> float:
    """Ball radius of guaranteed solvability for the fixed-point iteration."""
    gnorm = sol.gamma_norm()
    if gnorm == 0.0:
        return math.inf
    delta = contraction_radius(sol)
    return min(1.0, delta / 2.0, delta / (2.0 * gnorm * math.exp(gnorm)))


def tilt_solve_fixed_point(sol: GsSolution, v: Element,
                           max_iter: int = MAX_ITER_DEFAULT,
                           tol: float = RESIDUAL_TOL) -> TiltResult:
    """Solve T(u) = v by u <- v - u H(u), H = (e^g - 1 - g)/g.

    Convergence is guaranteed (contraction factor <= 1/2) for norm(v)
    inside the guarantee radius; outside it the solver still attempts and
    reports guaranteed=False.  Raises NoConvergence when the residual
    grows over five consecutive steps or the iteration cap is reached.
    """
    guaranteed = v.norm() < guarantee_radius(sol)
    u = v
    residual = (v - tilt_T(sol, u)).norm()
    if residual < tol:
        return TiltResult(u, 0, residual, guaranteed)
    prev_step = None
    ratios = []
    growth_streak = 0
    prev_residual = residual
    for it in range(1, max_iter + 1):
        hu = gamma(sol, u).apply_scalar(h_scalar)
        u_next = v - u * hu
        step = (u_next - u).norm()
        if prev_step is not None and prev_step > 0.0:
            ratios.append(step / prev_step)
        prev_step = step
        u = u_next
        residual = (v - tilt_T(sol, u)).norm()
        if residual < tol:
            return TiltResult(u, it, residual, guaranteed, tuple(ratios))
        growth_streak = growth_streak + 1 if residual > prev_residual else 0
        prev_residual = residual
        if growth_streak >= 5:
            raise NoConvergence(f"residual grew for 5 consecutive steps (now {residual:.3e})")
    raise NoConvergence(f"no convergence after {max_iter} iterations "
                        f"(residual {residual:.3e})")


class Direction(str, Enum):
    PLUS_UNBOUNDED = "PlusUnbounded"
    MINUS_UNBOUNDED = "MinusUnbounded"
    UNIT_NORM = "UnitNorm"


@dataclass(frozen=True)
class UnboundednessVerdict:
    direction: Direction
    limit_point: Optional[Element]

    def to_json(self) -> dict:
        return {"direction": self.direction.value,
                "limit_point": None if self.limit_point is None
                else self.limit_point.to_json()}


def unboundedness_direction(sol: GsSolution, u: Element, s_max: float = 40.0,
                            tol: float = 1e-9) -> UnboundednessVerdict:
    """Which of the two rays s -> T(+-su) is unbounded.

    Growth is measured only on the spectral coordinates where the
    derivative is nonzero; kernel coordinates grow linearly in both
    directions and carry no information.  In the bounded direction the
    tilt approaches -u/g(u) coordinatewise (reported with zeros on the
    kernel coordinates); verdicts with mixed growth report no limit.
    """
    gu = gamma(sol, u)
    points = gu.spectrum().points
    active = [z for z in points if abs(z) > KERNEL_EPS]
    if not active or all(abs(z.real) < tol for z in active):
        # empty or purely rotational spectrum: norm(e^{g}) = 1, no growth
        return UnboundednessVerdict(Direction.UNIT_NORM, None)

    res = [z.real for z in active]
    plus_grows = max(res) > 0.0
    minus_grows = min(res) < 0.0
    if plus_grows and minus_grows:
        # mixed spectrum: both rays unbounded; report the faster one
        direction = (Direction.PLUS_UNBOUNDED if max(res) >= -min(res)
                     else Direction.MINUS_UNBOUNDED)
        return UnboundednessVerdict(direction, None)
    direction = Direction.PLUS_UNBOUNDED if plus_grows else Direction.MINUS_UNBOUNDED

    # sampled confirmation on the active coordinates, plus the bounded limit
    sign = 1.0 if plus_grows else -1.0
    limit = _bounded_limit(sol, u, gu)
    s_probe = min(s_max, 40.0)
    t_far = _tilt_ray(sol, u, sign * s_probe)
    t_near = _tilt_ray(sol, u, sign * s_probe / 2.0)
    if _active_norm(t_far, gu) < _active_norm(t_near, gu):
        raise PopaAlgebraError("sampled growth contradicts the spectral verdict")
    return UnboundednessVerdict(direction, limit)


def _tilt_ray(sol: GsSolution, u: Element, s: float) -> Element:
    # T(su), valid for either sign of s
    return u * gamma(sol, u).apply_scalar(lambda z: growth_scalar(z, s))


def _active_norm(x: Element, gu: Element) -> float:
    if x.algebra.componentwise:
        mask = np.abs(gu.coords) > KERNEL_EPS
        return float(np.max(np.abs(x.coords[mask]))) if mask.any() else 0.0
    return x.norm()


def _bounded_limit(sol: GsSolution, u: Element, gu: Element) -> Optional[Element]:
    if gu.algebra.componentwise:
        coords = np.where(np.abs(gu.coords) > KERNEL_EPS,
                          -u.coords / np.where(np.abs(gu.coords) > KERNEL_EPS,
                                               gu.coords, 1.0),
                          0.0)
        return gu.algebra.element(coords)
    z = gu.as_complex()
    if abs(z) <= KERNEL_EPS:
        return None
    w = -u.as_complex() / z
    return gu.algebra.element([w.real, w.imag])


@dataclass(frozen=True)
class RatioLimitResult:
    """Finite-index approximation errors of the exponential-ratio limit."""

    ns: tuple
    errors: tuple
    limit: Element

    def to_json(self) -> dict:
        return {"ns": list(self.ns), "errors": list(self.errors),
                "limit": self.limit.to_json()}


def _finite_ratio_scalar(z, n: int, m: int):
    if abs(z) < KERNEL_EPS:
        return float(m) / float(n)
    if isinstance(z, complex):
        b = 1.0 + z / n
        den = b ** n - 1.0
        if abs(den) < 1e-12:
            raise NotInvertible(f"(1 + a/n)^n - 1 singular at n={n}")
        return (b ** m - 1.0) / den
    b = 1.0 + z / n
    if b > 0.0:
        lg = math.log1p(z / n)
        den = math.expm1(n * lg)
        if abs(den) < 1e-12:
            raise NotInvertible(f"(1 + a/n)^n - 1 singular at n={n}")
        return math.expm1(m * lg) / den
    den = b ** n - 1.0
    if abs(den) < 1e-12:
        raise NotInvertible(f"(1 + a/n)^n - 1 singular at n={n}")
    return (b ** m - 1.0) / den


def ratio_limit_check(a: Element, t: float, n_max: int = 10000,
                      ns: Optional[Sequence[int]] = None) -> RatioLimitResult:
    """Errors of ((1 + a/n)^{round(tn)} - 1)/((1 + a/n)^n - 1) against its limit.

    The limit is (e^{ta} - 1)/(e^a - 1) spectrally, with the value t at
    spectral points where e^z = 1.  Indices default to powers of ten up to
    n_max.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if ns is None:
        ns = []
        n = 10
        while n <= n_max:
            ns.append(n)
            n *= 10
        if not ns:
            ns = [n_max]
    limit = a.apply_scalar(lambda z: exp_ratio_scalar(z, t))
    errors = []
    for n in ns:
        m = int(round(t * n))
        approx = a.apply_scalar(lambda z: _finite_ratio_scalar(z, n, m))
        errors.append((approx - limit).norm())
    return RatioLimitResult(tuple(int(n) for n in ns), tuple(errors), limit)
