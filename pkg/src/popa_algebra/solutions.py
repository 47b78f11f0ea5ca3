"""Continuous solution families of the composition law S(x + S(x)y) = S(x)S(y).

Each family knows how to evaluate itself, expose the derivative at the
origin, and serialize to JSON.  The induced group operation, the adjustor
(deviation from the affine form), and sampled verification of the defining
identities live here as free functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .algebra import (AlgebraDescriptor, AlgebraKind, Element, hadamard)
from .errors import (ConstraintViolated, DimensionMismatch, DomainExhausted,
                     NotDifferentiable, NotInGroup, NotInvertible,
                     NotOrthogonalIdempotents, UnitNotInGroup)

#: sampled points whose image has a spectral point below this are rejected
GROUP_REJECT_EPS = 1e-9

#: orthogonality tolerance for idempotent systems
IDEMPOTENT_TOL = 1e-12


class DegenerateForm(str, Enum):
    ONE_EXP = "One_Exp"
    AFFINE_POWER = "Affine_Power"
    PURE_POWER = "Pure_Power"


@dataclass(frozen=True)
class PartitionSpec:
    """A partition of the coordinate set plus generator coefficients.

    ``parts`` holds 0-based index tuples (1-based in JSON); ``rho`` is the
    full-length coefficient vector, entry j only acting inside j's part.
    """

    parts: tuple
    rho: np.ndarray

    def __post_init__(self):
        parts = tuple(tuple(sorted(int(i) for i in p)) for p in self.parts)
        parts = tuple(sorted(parts, key=lambda p: p[0]))
        rho = np.array(self.rho, dtype=float, copy=True)
        rho.flags.writeable = False
        d = rho.shape[0]
        seen = [i for p in parts for i in p]
        if sorted(seen) != list(range(d)):
            raise ConstraintViolated("parts must partition the index set exactly")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def part_ids(self) -> np.ndarray:
        ids = np.empty(self.dim, dtype=int)
        for k, p in enumerate(self.parts):
            for i in p:
                ids[i] = k
        return ids

    def sigma_matrix(self) -> np.ndarray:
        ids = self.part_ids()
        same = ids[:, None] == ids[None, :]
        return np.where(same, self.rho[None, :], 0.0)

    def to_json(self) -> dict:
        return {"parts": [[i + 1 for i in p] for p in self.parts],
                "rho": list(map(float, self.rho))}

    @classmethod
    def from_json(cls, data: dict) -> "PartitionSpec":
        return cls(tuple(tuple(i - 1 for i in p) for p in data["parts"]),
                   np.asarray(data["rho"], dtype=float))


# ---------------------------------------------------------------------------
# solution families
# ---------------------------------------------------------------------------

class GsSolution:
    """Base class: a represented continuous solution on a fixed algebra."""

    algebra: AlgebraDescriptor
    variant: str

    # each family fills in: _kernel_args() -> (fam, mult, M, w, axis, r, g)

    def eval(self, x: Element) -> Element:
        raise NotImplementedError

    def __call__(self, x: Element) -> Element:
        return self.eval(x)

    def gamma_matrix(self) -> np.ndarray:
        """Real coordinate matrix of the derivative of the map at 0."""
        raise NotImplementedError

    def gamma(self, u: Element) -> Element:
        self._check_point(u)
        return Element(self.gamma_matrix() @ u.coords, self.algebra)

    def gamma_norm(self) -> float:
        """Operator norm of the derivative at 0 under the algebra norm."""
        M = self.gamma_matrix()
        if self.algebra.componentwise:
            return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0
        return float(np.linalg.svd(M, compute_uv=False)[0])

    def omega_homogeneous(self) -> bool:
        """Whether the closed-form tilt inverse is validated for this family."""
        return False

    def _check_point(self, x: Element):
        if x.algebra != self.algebra:
            raise DimensionMismatch("point does not belong to the solution's algebra")

    def _kernel_args(self):
        raise NotImplementedError

    def params_json(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        out = {"variant": self.variant, "algebra": self.algebra.to_json()}
        out.update(self.params_json())
        return out

    def __repr__(self):
        return f"{type(self).__name__}({self.params_json()})"


def _zeros_args(dim):
    return np.zeros((dim, dim)), np.zeros(dim)


class CanonicalSolution(GsSolution):
    """The affine family S(x) = unit + rho * x (algebra product)."""

    variant = "Canonical"

    def __init__(self, rho: Element):
        self.rho = rho
        self.algebra = rho.algebra

    def eval(self, x: Element) -> Element:
        self._check_point(x)
        return self.algebra.unit() + self.rho * x

    def gamma_matrix(self) -> np.ndarray:
        if self.algebra.componentwise:
            return np.diag(self.rho.coords)
        a, b = self.rho.coords
        return np.array([[a, -b], [b, a]])

    def omega_homogeneous(self) -> bool:
        return True

    def _kernel_args(self):
        mult = 0 if self.algebra.componentwise else 1
        return 0, mult, self.gamma_matrix(), np.zeros(self.algebra.dim), 0, 0.0, 1.0

    def params_json(self) -> dict:
        return {"rho": list(map(float, self.rho.coords))}


class PartitionSolution(GsSolution):
    """Row-coupled linear family on a componentwise algebra."""

    variant = "Partition"

    def __init__(self, spec: PartitionSpec, algebra: Optional[AlgebraDescriptor] = None):
        self.spec = spec
        self.algebra = algebra if algebra is not None else hadamard(spec.dim)
        if not self.algebra.componentwise:
            raise DimensionMismatch("partition solutions need a componentwise algebra")
        if self.algebra.dim != spec.dim:
            raise DimensionMismatch("partition dimension does not match the algebra")
        self._sigma = self.spec.sigma_matrix()

    def eval(self, x: Element) -> Element:
        self._check_point(x)
        return Element(1.0 + self._sigma @ x.coords, self.algebra)

    def gamma_matrix(self) -> np.ndarray:
        return self._sigma.copy()

    def omega_homogeneous(self) -> bool:
        return True

    def _kernel_args(self):
        return 0, 0, self._sigma, np.zeros(self.algebra.dim), 0, 0.0, 1.0

    def params_json(self) -> dict:
        return self.spec.to_json()


class DegenerateExpSolution(GsSolution):
    """Univariate-driven families on a componentwise algebra.

    ``ONE_EXP``: every component is 1 except component ``exp_index``, which
    is exp(weights . x); the weight vector must vanish at ``exp_index``.
    Any dimension >= 2.

    ``AFFINE_POWER`` / ``PURE_POWER``: the two-dimensional forms driven by
    coordinate ``axis``: (1 + rho*x_a, (1 + rho*x_a)^g) and (x_a, x_a^g).
    The power forms are only defined where the base is positive; the pure
    power form is kept for completeness of the represented catalogue but
    does not satisfy the composition law away from its fixed points (see
    ``verify_gs``), and has no derivative at the origin.
    """

    variant = "DegenerateExp"

    def __init__(self, form: DegenerateForm, axis: int = 0, rho: float = 0.0,
                 gamma_exp: float = 1.0, weights=None,
                 exp_index: Optional[int] = None,
                 algebra: Optional[AlgebraDescriptor] = None):
        form = DegenerateForm(form)
        if algebra is None:
            dim = len(weights) if weights is not None else 2
            algebra = hadamard(dim)
        if not algebra.componentwise:
            raise DimensionMismatch("degenerate solutions need a componentwise algebra")
        self.form = form
        self.axis = int(axis)
        self.rho_coeff = float(rho)
        self.gamma_exp = float(gamma_exp)
        self.algebra = algebra
        d = algebra.dim
        if form is DegenerateForm.ONE_EXP:
            if weights is None:
                if d != 2:
                    raise DimensionMismatch("weights required when dim != 2")
                weights = np.zeros(2)
                weights[self.axis] = self.gamma_exp
                exp_index = 1 - self.axis
            elif exp_index is None:
                if d != 2:
                    raise DimensionMismatch("exp_index required when dim != 2")
                exp_index = 1 - self.axis
            w = np.asarray(weights, dtype=float)
            if w.shape != (d,):
                raise DimensionMismatch("weights length must equal dim")
            if abs(w[exp_index]) != 0.0:
                raise ConstraintViolated("weights must vanish at the exponential component")
            self.weights = w
            self.exp_index = int(exp_index)
        else:
            if d != 2:
                raise DimensionMismatch("power forms are two-dimensional")
            if self.axis not in (0, 1):
                raise DimensionMismatch("axis must be 0 or 1")
            self.weights = np.zeros(d)
            self.exp_index = 1 - self.axis

    def eval(self, x: Element) -> Element:
        self._check_point(x)
        c = x.coords
        if self.form is DegenerateForm.ONE_EXP:
            out = np.ones(self.algebra.dim)
            out[self.exp_index] = math.exp(float(self.weights @ c))
            return Element(out, self.algebra)
        if self.form is DegenerateForm.AFFINE_POWER:
            base = 1.0 + self.rho_coeff * c[self.axis]
        else:
            base = c[self.axis]
        if base <= 0.0:
            raise NotInGroup("power form undefined: base is not positive")
        out = np.empty(2)
        out[self.axis] = base
        out[1 - self.axis] = base ** self.gamma_exp
        return Element(out, self.algebra)

    def gamma_matrix(self) -> np.ndarray:
        d = self.algebra.dim
        M = np.zeros((d, d))
        if self.form is DegenerateForm.ONE_EXP:
            M[self.exp_index, :] = self.weights
            return M
        if self.form is DegenerateForm.AFFINE_POWER:
            M[self.axis, self.axis] = self.rho_coeff
            M[1 - self.axis, self.axis] = self.gamma_exp * self.rho_coeff
            return M
        raise NotDifferentiable("the pure power form has no derivative at 0")

    def _kernel_args(self):
        if self.form is DegenerateForm.ONE_EXP:
            return 1, 0, np.zeros((self.algebra.dim,) * 2), self.weights, self.exp_index, 0.0, 1.0
        fam = 2 if self.form is DegenerateForm.AFFINE_POWER else 3
        return fam, 0, np.zeros((2, 2)), np.zeros(2), self.axis, self.rho_coeff, self.gamma_exp

    def params_json(self) -> dict:
        out = {"form": self.form.value, "axis": self.axis,
               "rho": self.rho_coeff, "gamma_exp": self.gamma_exp}
        if self.form is DegenerateForm.ONE_EXP:
            out["weights"] = list(map(float, self.weights))
            out["exp_index"] = self.exp_index
        return out


class ComplexReImSolution(GsSolution):
    """Real-linear family on the complex plane: S(z) = 1 + a Re z + b Im z."""

    variant = "ComplexReIm"

    def __init__(self, a: float, b: float):
        self.a = float(a)
        self.b = float(b)
        self.algebra = AlgebraDescriptor(AlgebraKind.COMPLEX_AS_R2, 2)

    def eval(self, x: Element) -> Element:
        self._check_point(x)
        return Element([1.0 + self.a * x.coords[0] + self.b * x.coords[1], 0.0],
                       self.algebra)

    def gamma_matrix(self) -> np.ndarray:
        # real-linear but not complex-linear: image is the real axis
        return np.array([[self.a, self.b], [0.0, 0.0]])

    def omega_homogeneous(self) -> bool:
        # the derivative takes real values, so power-raising holds
        return True

    def _kernel_args(self):
        return 0, 1, self.gamma_matrix(), np.zeros(2), 0, 0.0, 1.0

    def params_json(self) -> dict:
        return {"a": self.a, "b": self.b}


class IdempotentSolution(GsSolution):
    """Linear family built from orthogonal idempotents and a functional.

    nu(x) = sum_i sigma(e_i x) e_i and the map is unit + nu(x); on a
    componentwise algebra the idempotents are disjoint 0/1 indicator
    vectors, so this coincides with a partition family.
    """

    variant = "IdempotentBuilt"

    def __init__(self, idempotents: Sequence[Element], sigma: Sequence[float],
                 algebra: Optional[AlgebraDescriptor] = None):
        if not idempotents and algebra is None:
            raise DimensionMismatch("need an algebra when no idempotents are given")
        self.algebra = algebra if algebra is not None else idempotents[0].algebra
        self.idempotents = tuple(idempotents)
        self.sigma = np.array(sigma, dtype=float)
        if self.sigma.shape != (self.algebra.dim,):
            raise DimensionMismatch("sigma coefficients must match the dimension")
        for e in self.idempotents:
            if e.algebra != self.algebra:
                raise DimensionMismatch("idempotents must share the algebra")
        _check_orthogonal_idempotents(self.idempotents)
        self._nu = self._nu_matrix()

    def _nu_matrix(self) -> np.ndarray:
        d = self.algebra.dim
        M = np.zeros((d, d))
        for j in range(d):
            basis = self.algebra.element(np.eye(d)[j])
            acc = self.algebra.zero()
            for e in self.idempotents:
                acc = acc + float(self.sigma @ (e * basis).coords) * e
            M[:, j] = acc.coords
        return M

    def eval(self, x: Element) -> Element:
        self._check_point(x)
        return Element(self.algebra.unit().coords + self._nu @ x.coords, self.algebra)

    def gamma_matrix(self) -> np.ndarray:
        return self._nu.copy()

    def omega_homogeneous(self) -> bool:
        return True

    def _kernel_args(self):
        mult = 0 if self.algebra.componentwise else 1
        return 0, mult, self._nu, np.zeros(self.algebra.dim), 0, 0.0, 1.0

    def params_json(self) -> dict:
        return {"idempotents": [list(map(float, e.coords)) for e in self.idempotents],
                "sigma": list(map(float, self.sigma))}


class LinearCandidate(GsSolution):
    """Arbitrary unit-plus-linear candidate map x -> unit + M x.

    Not necessarily a solution: used to measure how badly a coefficient
    matrix that fails the row-coupling constraint violates the law.
    """

    variant = "LinearCandidate"

    def __init__(self, matrix, algebra: Optional[AlgebraDescriptor] = None):
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch("matrix must be square")
        self.matrix = M
        self.algebra = algebra if algebra is not None else hadamard(M.shape[0])
        if self.algebra.dim != M.shape[0]:
            raise DimensionMismatch("matrix size does not match the algebra")

    def eval(self, x: Element) -> Element:
        self._check_point(x)
        return Element(self.algebra.unit().coords + self.matrix @ x.coords,
                       self.algebra)

    def gamma_matrix(self) -> np.ndarray:
        return self.matrix.copy()

    def _kernel_args(self):
        mult = 0 if self.algebra.componentwise else 1
        return 0, mult, self.matrix, np.zeros(self.algebra.dim), 0, 0.0, 1.0

    def params_json(self) -> dict:
        return {"matrix": [list(map(float, row)) for row in self.matrix]}


def _check_orthogonal_idempotents(elements: Sequence[Element], tol: float = IDEMPOTENT_TOL):
    for i, e in enumerate(elements):
        if (e * e - e).norm() > tol:
            raise NotOrthogonalIdempotents(f"element {i} is not idempotent")
        for j in range(i + 1, len(elements)):
            if (e * elements[j]).norm() > tol:
                raise NotOrthogonalIdempotents(f"elements {i} and {j} are not orthogonal")


def solution_from_json(data: dict) -> GsSolution:
    algebra = AlgebraDescriptor.from_json(data["algebra"])
    variant = data["variant"]
    if variant == "Canonical":
        return CanonicalSolution(algebra.element(data["rho"]))
    if variant == "Partition":
        spec = PartitionSpec.from_json(data)
        return PartitionSolution(spec, algebra)
    if variant == "DegenerateExp":
        return DegenerateExpSolution(
            DegenerateForm(data["form"]), axis=data.get("axis", 0),
            rho=data.get("rho", 0.0), gamma_exp=data.get("gamma_exp", 1.0),
            weights=data.get("weights"), exp_index=data.get("exp_index"),
            algebra=algebra)
    if variant == "ComplexReIm":
        return ComplexReImSolution(data["a"], data["b"])
    if variant == "IdempotentBuilt":
        idems = [algebra.element(c) for c in data["idempotents"]]
        return IdempotentSolution(idems, data["sigma"], algebra)
    if variant == "LinearCandidate":
        return LinearCandidate(np.asarray(data["matrix"], dtype=float), algebra)
    raise DimensionMismatch(f"unknown solution variant {variant!r}")


# ---------------------------------------------------------------------------
# the induced group operation and the adjustor
# ---------------------------------------------------------------------------

def eval_solution(sol: GsSolution, x: Element) -> Element:
    return sol.eval(x)


def circle_op(sol: GsSolution, x: Element, y: Element) -> Element:
    """Group operation induced by the solution: x + S(x) y."""
    return x + sol.eval(x) * y


def circle_inv(sol: GsSolution, x: Element) -> Element:
    """Group inverse -x * S(x)^{-1}; x must have invertible image."""
    sx = sol.eval(x)
    if not sx.is_invertible():
        raise NotInGroup("point image is not invertible")
    return -(x * sx.invert())


def rho_of(sol: GsSolution) -> Element:
    """Linear offset S(unit) - unit; the unit must lie in the group."""
    s1 = sol.eval(sol.algebra.unit())
    if not s1.is_invertible():
        raise UnitNotInGroup("image of the unit is not invertible")
    return s1 - sol.algebra.unit()


def adjustor(sol: GsSolution, x: Element) -> Element:
    """Deviation from the affine form: S(x) - unit - rho x."""
    return sol.eval(x) - sol.algebra.unit() - rho_of(sol) * x


adjustor_N = adjustor


@dataclass(frozen=True)
class GoldieResidualReport:
    """Sampled residuals of the composition law and the adjustor equation."""

    max_gs_residual: float
    max_goldie_residual: float
    samples_tested: int
    worst_pair: tuple

    def to_json(self) -> dict:
        return {"max_gs_residual": self.max_gs_residual,
                "max_goldie_residual": self.max_goldie_residual,
                "samples_tested": self.samples_tested,
                "worst_pair": [self.worst_pair[0].to_json(),
                               self.worst_pair[1].to_json()]}


def sample_box(algebra: AlgebraDescriptor, n: int, radius: float,
               rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-radius, radius, size=(n, algebra.dim))


def verify_gs(sol: GsSolution, n_samples: int = 10000, seed: int = 0,
              box_radius: float = 0.4, force_numpy: bool = False) -> GoldieResidualReport:
    """Sample pairs in a box around 0 and measure both identity residuals.

    Pairs leaving the group domain (image spectrum within GROUP_REJECT_EPS
    of 0, or outside a power form's half-plane) are rejected; more than 99%
    rejected raises DomainExhausted.  Deterministic for a given seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    X = sample_box(sol.algebra, n_samples, box_radius, rng)
    Y = sample_box(sol.algebra, n_samples, box_radius, rng)
    fam, mult, M, w, axis, r, g = sol._kernel_args()
    rho = rho_of(sol).coords
    unit = sol.algebra.unit().coords
    gs, goldie, valid = _kernels.gs_residual_batch(
        fam, mult, M, w, axis, r, g, rho, unit, X, Y, GROUP_REJECT_EPS,
        force_numpy=force_numpy)
    n_valid = int(valid.sum())
    if n_valid < max(1, math.ceil(0.01 * n_samples)):
        raise DomainExhausted(f"{n_samples - n_valid} of {n_samples} samples rejected")
    idx = int(np.argmax(np.where(valid.astype(bool), gs, -1.0)))
    pair = (sol.algebra.element(X[idx]), sol.algebra.element(Y[idx]))
    return GoldieResidualReport(float(np.max(gs)), float(np.max(goldie)),
                                n_valid, pair)


# ---------------------------------------------------------------------------
# derivative-based checks
# ---------------------------------------------------------------------------

def gamma(sol: GsSolution, u: Element) -> Element:
    """Derivative of the solution map at 0, applied to u (closed form)."""
    return sol.gamma(u)


def gamma_fd(sol: GsSolution, u: Element, h: float = 1e-6) -> Element:
    """Central finite-difference cross-check of the analytic derivative."""
    return (1.0 / (2.0 * h)) * (sol.eval(h * u) - sol.eval((-h) * u))


@dataclass(frozen=True)
class DecompositionReport:
    """Linear/non-linear split of the map at a point.

    ``n_x`` subtracts the derivative term, ``m_x`` the unit-scaled linear
    term; the four defects are the algebra-valued bilinear-form pairings
    that vanish for exact solutions (max-norms reported).
    """

    n_x: Element
    m_x: Element
    orth_defects: tuple


def decomposition_check(sol: GsSolution, x: Element) -> DecompositionReport:
    unit = sol.algebra.unit()
    sx = sol.eval(x)
    gx = sol.gamma(x)
    g1x = sol.gamma(unit) * x
    n_x = sx - unit - gx
    m_x = sx - unit - g1x
    form = lambda a, b: sol.gamma(a * b)                 # <a,b> = gamma(ab)
    form_g = lambda a, b: sol.gamma(a * sol.gamma(b))    # <a,b>_gamma
    defects = (form(gx, n_x).norm(), form_g(gx, n_x).norm(),
               form(gx, m_x).norm(), form_g(g1x, m_x).norm())
    return DecompositionReport(n_x, m_x, defects)


def _elem_power(a: Element, k: int) -> Element:
    out = a.algebra.unit()
    for _ in range(k):
        out = out * a
    return out


def check_omega_homogeneity(sol: GsSolution, u: Element, k_max: int) -> float:
    """Max defect of the power-raising identity over exponents 0..k_max."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    worst = 0.0
    gu = sol.gamma(u)
    for k in range(k_max + 1):
        lhs = sol.gamma(u * _elem_power(gu, k))
        rhs = _elem_power(gu, k + 1)
        worst = max(worst, (lhs - rhs).norm())
    return worst


@dataclass(frozen=True)
class DichotomyResult:
    b: Element
    s_of_b: Element


def dichotomy_check(sol: GsSolution, a: Element) -> DichotomyResult:
    """Map a to b = a (unit - S(a))^{-1}; globally defined solutions send b
    to a non-invertible image (zero for the linear families)."""
    unit = sol.algebra.unit()
    w = unit - sol.eval(a)
    if not w.is_invertible():
        raise NotInvertible("unit - S(a) is not invertible")
    b = a * w.invert()
    return DichotomyResult(b, sol.eval(b))


def popa_isomorphism_check(rho: Element, t_grid: Sequence[float]) -> float:
    """Defect of the one-parameter subgroup g(t) = rho^{-1}(e^{t rho} - unit)
    under x o y = x + (unit + rho x) y, over all grid pairs."""
    if not rho.is_invertible():
        raise NotInvertible("rho must be invertible")
    alg = rho.algebra
    unit = alg.unit()
    rho_inv = rho.invert()
    g = {t: rho_inv * ((t * rho).exp() - unit) for t in t_grid}
    worst = 0.0
    for s in t_grid:
        for t in t_grid:
            left = g[s] + (unit + rho * g[s]) * g[t]
            right = rho_inv * (((s + t) * rho).exp() - unit)
            worst = max(worst, (left - right).norm())
    return worst
