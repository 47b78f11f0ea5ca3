"""Special constructions: the transcendental standardized-tilt roots on the
complex plane, the kernel/group/section characterization of all solutions,
and the orthogonal-idempotent builder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .algebra import AlgebraDescriptor, Element
from .errors import InvalidTriple, NotInRange
from .solutions import GsSolution, IdempotentSolution
from .structure import null_space_basis

TWO_PI = 2.0 * math.pi

#: scan step in the real coordinate when bracketing roots
ST_SCAN_STEP = 1e-3
ST_NEWTON_TOL = 1e-14
ST_NEWTON_MAX = 50


# ---------------------------------------------------------------------------
# roots of e^w = 1 + w in the right half plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StSolution:
    """One root w = x + iy of e^w = 1 + w with x > 0."""

    x: float
    y: float
    branch_index: int
    residual: float

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "branch": self.branch_index,
                "residual": self.residual}


def _y_curve(x: float) -> float:
    """Positive root of y^2 = e^{2x} - (1+x)^2 (the modulus constraint)."""
    val = math.expm1(2.0 * x) - x * (2.0 + x)  # e^{2x} - (1+x)^2, stable
    return math.sqrt(val) if val > 0.0 else 0.0


def _st_gap(x: float) -> float:
    """sin y(x) - e^{-x} y(x); roots with cos y(x) > 0 satisfy the system."""
    y = _y_curve(x)
    return math.sin(y) - math.exp(-x) * y


def _st_newton(x0: float, y0: float):
    x, y = x0, y0
    for _ in range(ST_NEWTON_MAX):
        ex = math.exp(x)
        f1 = ex * math.cos(y) - 1.0 - x
        f2 = ex * math.sin(y) - y
        if math.hypot(f1, f2) < ST_NEWTON_TOL:
            break
        j11 = ex * math.cos(y) - 1.0
        j12 = -ex * math.sin(y)
        j21 = ex * math.sin(y)
        j22 = ex * math.cos(y) - 1.0
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            break
        x -= (f1 * j22 - f2 * j12) / det
        y -= (j11 * f2 - j21 * f1) / det
    return x, y


def st_residual(x: float, y: float) -> float:
    """|e^w - 1 - w| at w = x + iy."""
    ex = math.exp(x)
    return math.hypot(ex * math.cos(y) - 1.0 - x, ex * math.sin(y) - y)


def st_roots(n_roots: int) -> List[StSolution]:
    """First roots of e^w = 1 + w with positive real part, ordered by y.

    Along the curve y(x) forced by |e^w| = |1 + w| the system reduces to a
    scalar equation in x; sign changes on a fine grid are polished by a
    two-dimensional Newton step.
    """
    if n_roots < 1:
        raise ValueError("n_roots must be >= 1")
    x_hi = math.log(TWO_PI * (n_roots + 2)) + 1.0
    roots: List[StSolution] = []
    x_prev = ST_SCAN_STEP
    f_prev = _st_gap(x_prev)
    x = x_prev + ST_SCAN_STEP
    while x <= x_hi and len(roots) < n_roots + 2:
        f = _st_gap(x)
        if f_prev == 0.0 or (f_prev < 0.0) != (f < 0.0):
            xr, yr = _st_newton(0.5 * (x_prev + x), _y_curve(0.5 * (x_prev + x)))
            if xr > 0.0 and math.cos(yr) > 0.0:
                res = st_residual(xr, yr)
                if res < 1e-10 and not any(abs(r.y - yr) < 1.0 for r in roots):
                    roots.append(StSolution(xr, yr, int(yr // TWO_PI), res))
        x_prev, f_prev = x, f
        x += ST_SCAN_STEP
    roots.sort(key=lambda r: r.y)
    return roots[:n_roots]


def count_roots_negative_strip(step: float = ST_SCAN_STEP) -> int:
    """Brackets of the reduced system for Re w in (-xi, 0): always zero."""
    xi = xi_root()
    count = 0
    x = -xi + step
    f_prev = _st_gap_negative(x)
    x += step
    while x < -step:
        f = _st_gap_negative(x)
        if f_prev is not None and f is not None and (f_prev < 0.0) != (f < 0.0):
            count += 1
        f_prev = f
        x += step
    return count


def _st_gap_negative(x: float) -> Optional[float]:
    val = math.expm1(2.0 * x) - x * (2.0 + x)
    if val < 0.0:
        return None
    y = math.sqrt(val)
    if math.cos(y) <= 0.0:
        return None
    return math.sin(y) - math.exp(-x) * y


def xi_root() -> float:
    """The unique root > 1 of e^{-x} = x - 1 (edge of the curve's domain)."""
    f = lambda x: math.exp(-x) - x + 1.0
    lo, hi = 1.0, 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(8):
        x -= f(x) / (-math.exp(-x) - 1.0)
    return x


# ---------------------------------------------------------------------------
# kernel/group/section triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WjTriple:
    """Kernel subspace sample, invertible-value samples, and a section map.

    ``kernel_basis`` spans the kernel at desk scale; ``lambda_samples`` are
    invertible target values; ``section`` maps a target value to one of its
    preimages (well-defined modulo the kernel).
    """

    kernel_basis: tuple
    lambda_samples: tuple
    section: Callable[[Element], Element]

    @property
    def algebra(self) -> AlgebraDescriptor:
        return self.lambda_samples[0].algebra

    def kernel_matrix(self) -> np.ndarray:
        """Orthonormal rows spanning the kernel subspace."""
        if not self.kernel_basis:
            return np.zeros((0, self.algebra.dim))
        raw = np.array([e.coords for e in self.kernel_basis])
        q, _ = np.linalg.qr(raw.T)
        return q.T[: np.linalg.matrix_rank(raw)]

    def complement_part(self, x: Element) -> np.ndarray:
        """Coordinates of x projected off the kernel subspace."""
        k = self.kernel_matrix()
        c = x.coords
        if k.shape[0]:
            c = c - k.T @ (k @ c)
        return c


def wj_verify(t: WjTriple, tol: float = 1e-9) -> bool:
    """Check the three triple conditions on all sample pairs.

    (i) the samples map the kernel into itself, (ii) the section lands in
    the kernel exactly at the unit, (iii) the section is a crossed
    homomorphism modulo the kernel.
    """
    unit = t.algebra.unit()
    k = t.kernel_matrix()

    def off_kernel(x: Element) -> float:
        c = x.coords
        if k.shape[0]:
            c = c - k.T @ (k @ c)
        return float(np.max(np.abs(c))) if c.size else 0.0

    for lam in t.lambda_samples:
        if not lam.is_invertible():
            return False
        for v in t.kernel_basis:
            if off_kernel(lam * v) > tol * max(1.0, (lam * v).norm()):
                return False

    def cond_two(lam: Element) -> bool:
        is_unit = (lam - unit).norm() <= tol
        w = t.section(lam)
        in_kernel = off_kernel(w) <= tol * max(1.0, w.norm())
        return is_unit == in_kernel

    pairs = [(l1, l2) for l1 in t.lambda_samples for l2 in t.lambda_samples]
    for lam in t.lambda_samples:
        if not cond_two(lam):
            return False
    for l1, l2 in pairs:
        if not cond_two(l1 * l2):
            return False
        diff = t.section(l1 * l2) - t.section(l1) - l1 * t.section(l2)
        if off_kernel(diff) > tol * max(1.0, t.section(l1 * l2).norm()):
            return False
    return True


class WjSolutionOracle:
    """The solution map reconstructed from a verified triple.

    Evaluates to the matching target value on points congruent to a
    section image modulo the kernel, and to zero elsewhere.
    """

    def __init__(self, triple: WjTriple, tol: float = 1e-9):
        if not wj_verify(triple, tol):
            raise InvalidTriple("triple fails its defining conditions")
        self.triple = triple
        self.tol = tol
        lams = list(triple.lambda_samples)
        lams += [l1 * l2 for l1 in triple.lambda_samples
                 for l2 in triple.lambda_samples]
        self._table = []
        for lam in lams:
            if any((lam - known).norm() <= tol for known, _ in self._table):
                continue
            self._table.append((lam, triple.complement_part(triple.section(lam))))

    def covered_values(self) -> List[Element]:
        return [lam for lam, _ in self._table]

    def eval(self, x: Element) -> Element:
        cx = self.triple.complement_part(x)
        scale = max(1.0, float(np.max(np.abs(cx))) if cx.size else 0.0)
        for lam, rep in self._table:
            if float(np.max(np.abs(cx - rep))) <= self.tol * scale:
                return lam
        return x.algebra.zero()

    def gs_residual_on_covered(self, seed: int = 0, n_pairs: int = 200) -> float:
        """Composition-law residual over sampled pairs of covered points.

        Pairs are drawn from the generating samples so that their products
        stay inside the covered table.
        """
        rng = np.random.default_rng(seed)
        k = self.triple.kernel_matrix()
        worst = 0.0
        lams = list(self.triple.lambda_samples)
        reps = [self.triple.section(lam) for lam in lams]
        for _ in range(n_pairs):
            i = int(rng.integers(len(lams)))
            j = int(rng.integers(len(lams)))
            l1, l2 = lams[i], lams[j]
            x1 = reps[i] + self._kernel_noise(rng, k)
            x2 = reps[j] + self._kernel_noise(rng, k)
            s1, s2 = self.eval(x1), self.eval(x2)
            z = x1 + s1 * x2
            worst = max(worst, (self.eval(z) - s1 * s2).norm())
        return worst

    def _kernel_noise(self, rng, k) -> Element:
        alg = self.triple.algebra
        if not k.shape[0]:
            return alg.zero()
        return alg.element(k.T @ rng.uniform(-0.5, 0.5, size=k.shape[0]))


def wj_build_S(t: WjTriple, tol: float = 1e-9) -> WjSolutionOracle:
    return WjSolutionOracle(t, tol)


def wj_extract(sol: GsSolution, lambda_samples: Sequence[Element],
               tol: float = 1e-9) -> WjTriple:
    """Extract a triple from a linear-family solution.

    The kernel is the null space of the derivative matrix; the section
    solves the linear system for a preimage (least squares), raising
    NotInRange when a sample has none.
    """
    M = sol.gamma_matrix()
    alg = sol.algebra
    unit = alg.unit()
    basis = [alg.element(v) for v in null_space_basis(M)]
    pinv = np.linalg.pinv(M)

    def section(lam: Element) -> Element:
        target = (lam - unit).coords
        w = pinv @ target
        if float(np.max(np.abs(M @ w - target))) > tol * max(1.0, lam.norm()):
            raise NotInRange("value has no preimage under the solution map")
        return alg.element(w)

    for lam in lambda_samples:
        section(lam)  # fail fast on unreachable samples
    return WjTriple(tuple(basis), tuple(lambda_samples), section)


# ---------------------------------------------------------------------------
# idempotent builder
# ---------------------------------------------------------------------------

def idempotent_solution(algebra: AlgebraDescriptor, idempotents: Sequence[Element],
                        sigma: Sequence[float]) -> IdempotentSolution:
    """Solution unit + sum_i sigma(e_i x) e_i from orthogonal idempotents.

    Raises NotOrthogonalIdempotents unless e_i e_j = delta_ij e_i holds to
    the package tolerance.  With spanning rank-one idempotents this
    reproduces the affine family.
    """
    return IdempotentSolution(idempotents, sigma, algebra)
