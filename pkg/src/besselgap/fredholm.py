"""Nystrom discretization and Fredholm determinants of the occupancy operator.

The generating function of k consecutive interval counts is

    F(xvec, svec) = det(1 - chi_(0,x_k) sum_j (1 - s_j) K chi_(x_{j-1}, x_j)),

with K the Bessel (or finite-n LUE) kernel operator.  Discretization follows
the Gauss-Legendre Nystrom scheme: per subinterval (x_{j-1}, x_j) take m
nodes u_a with weights w_a, set the multiplier c_a = 1 - s_{j(a)}, and form

    M_ab = sqrt(w_a) K(u_a, u_b) c_b sqrt(w_b),

whose I - M determinant converges spectrally fast to F for analytic kernels.
The kernel Gram matrix depends only on (nodes, kernel), so sweeps over s
reuse it; multipliers may be complex (coefficient extraction on the unit
circle), in which case the determinant is taken in complex arithmetic.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateParametersError, QuadratureConvergenceError,
                     SingularOperatorError, ValidationError)
from .kernels import BesselKernelSpec, LueModel, bessel_kernel_gram, lue_kernel_gram
from .specfun import DEFAULT_CONFIG


@dataclass(frozen=True)
class ParameterSet:
    """Admissible configuration (alpha, k, rvec, svec, x).

    Interval endpoints are x_j = r_j * x with r_0 = 0, so the j-th interval
    is (r_{j-1} x, r_j x); the convention s_{k+1} = 1 closes the multiplier
    list.  Construction enforces alpha > -1, strictly increasing positive r
    and x > 0.  Consecutive equal multipliers (including s_k = 1) are legal
    for the determinant route but reduce k; the coupled-ODE route requires
    strict admissibility, checked via require_strict().
    """

    alpha: float
    r: tuple
    s: tuple
    x: float = 1.0

    def __post_init__(self):
        if self.alpha <= -1.0:
            raise ValidationError(f"alpha must exceed -1, got {self.alpha}")
        r = tuple(float(v) for v in self.r)
        if len(r) == 0:
            raise ValidationError("r must be nonempty")
        if any(b <= a for a, b in zip((0.0,) + r[:-1], r)):
            raise ValidationError(f"r must be strictly increasing and positive, got {r}")
        s = tuple(complex(v) if isinstance(v, complex) else float(v) for v in self.s)
        if len(s) != len(r):
            raise ValidationError("r and s must have equal length")
        if not self.x > 0.0:
            raise ValidationError(f"x must be positive, got {self.x}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "x", float(self.x))

    @property
    def k(self):
        return len(self.r)

    @property
    def endpoints(self):
        """x_0 = 0, x_1, ..., x_k."""
        return (0.0,) + tuple(rj * self.x for rj in self.r)

    @property
    def s_extended(self):
        """s_1, ..., s_k, s_{k+1} = 1."""
        return self.s + (1.0,)

    @property
    def is_complex(self):
        return any(isinstance(v, complex) for v in self.s)

    @property
    def is_strict(self):
        """True when consecutive multipliers all differ (s_{k+1} = 1 included)."""
        se = self.s_extended
        return all(se[j] != se[j + 1] for j in range(self.k))

    def require_strict(self):
        if not self.is_strict:
            raise DegenerateParametersError(
                "consecutive multipliers coincide (s_j = s_{j+1}); the "
                "generating function equals the one with component j removed, "
                "so drop it and retry with k-1 intervals")

    def with_s(self, s):
        return ParameterSet(self.alpha, self.r, tuple(s), self.x)


@dataclass(frozen=True)
class DiscretizedOperator:
    """Quadrature rule, multipliers and kernel Gram matrix of the operator.

    gram = sqrt(w_a) K(u_a, u_b) sqrt(w_b) is multiplier-free and reusable
    across s;  matrix() applies the per-node multiplier column scaling.
    """

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    interval_index: np.ndarray = field(repr=False)
    multipliers: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)
    m: int

    def matrix(self, multipliers=None):
        c = self.multipliers if multipliers is None else multipliers
        return self.gram * c[None, :]


def gauss_legendre_segments(segments, m, grade_first=False):
    """Nodes, weights and segment index for a composite Gauss-Legendre rule.

    segments: list of (lo, hi) pairs.  With grade_first the first segment
    (lo = 0) is mapped through u = hi * v^2 with 2m points, clustering nodes
    quadratically at the origin; used for kernels with an algebraic
    singularity there (weight exponent in (-1, 0)).
    """
    xg, wg = np.polynomial.legendre.leggauss(m)
    nodes, weights, index = [], [], []
    for j, (lo, hi) in enumerate(segments):
        if j == 0 and grade_first:
            x2, w2 = np.polynomial.legendre.leggauss(2 * m)
            v = 0.5 * (x2 + 1.0)
            nodes.append(hi * v * v)
            weights.append(hi * v * w2)  # du = 2 hi v dv, dv = w2/2
            index.append(np.full(2 * m, j))
        else:
            nodes.append(0.5 * (hi - lo) * xg + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * wg)
            index.append(np.full(m, j))
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(index)


def _kernel_gram(kernel, nodes, config):
    if isinstance(kernel, BesselKernelSpec):
        return bessel_kernel_gram(kernel, nodes, config)
    if isinstance(kernel, LueModel):
        return lue_kernel_gram(kernel, nodes)
    raise ValidationError(f"unsupported kernel spec {type(kernel).__name__}")


def discretize(params, kernel=None, m=40, config=DEFAULT_CONFIG):
    """Discretized operator for a ParameterSet and a kernel spec.

    kernel defaults to the Bessel kernel of order params.alpha.  m is the
    node count per subinterval (the first subinterval gets 2m graded nodes
    when the kernel order is negative).
    """
    if m < 2:
        raise ValidationError("m must be at least 2")
    if kernel is None:
        kernel = BesselKernelSpec(alpha=params.alpha)
    ends = params.endpoints
    segments = list(zip(ends[:-1], ends[1:]))
    # both kernels carry a (u v)^(alpha/2) factor, so the first interval is
    # analytic after the v^2 grading only when alpha is a nonnegative integer
    a = kernel.alpha
    grade = a < 0.0 or a != round(a)
    nodes, weights, index = gauss_legendre_segments(segments, m, grade_first=grade)
    sq = np.sqrt(weights)
    gram = sq[:, None] * _kernel_gram(kernel, nodes, config) * sq[None, :]
    s_arr = np.array(params.s)
    mult = 1.0 - s_arr[index]
    return DiscretizedOperator(nodes=nodes, weights=weights, interval_index=index,
                               multipliers=mult, gram=gram, m=m)


@dataclass(frozen=True)
class DetResult:
    """Determinant with its log magnitude and phase (underflow-safe)."""

    value: complex
    log_abs: float
    phase: float

    @property
    def real(self):
        return float(np.real(self.value))


def det_one_minus(gram, multipliers):
    """det(I - gram * diag(multipliers)) via pivoted LU (slogdet)."""
    mat = np.eye(gram.shape[0], dtype=np.result_type(gram, multipliers)) \
        - gram * multipliers[None, :]
    sign, log_abs = np.linalg.slogdet(mat)
    if sign == 0:
        raise SingularOperatorError("LU found the discretized operator singular")
    value = sign * math.exp(log_abs) if log_abs > -700 else 0.0 * sign
    return DetResult(value=value, log_abs=float(log_abs),
                     phase=float(cmath.phase(complex(sign))))


def fredholm_det(op, multipliers=None):
    """Fredholm determinant det(I - M) of a discretized operator."""
    c = op.multipliers if multipliers is None else multipliers
    return det_one_minus(op.gram, np.asarray(c))


@dataclass(frozen=True)
class GenFnResult:
    """Converged generating-function value with quadrature diagnostics."""

    value: complex
    log_abs: float
    phase: float
    m: int
    err_est: float

    @property
    def real(self):
        return float(np.real(self.value))


def generating_fn(params, kernel=None, m0=16, tol=1e-10, max_doublings=5,
                  config=DEFAULT_CONFIG):
    """F(xvec, svec) by node doubling until two determinants agree to tol."""
    m = m0
    prev = fredholm_det(discretize(params, kernel, m, config))
    cur = prev
    for _ in range(max_doublings):
        m *= 2
        cur = fredholm_det(discretize(params, kernel, m, config))
        err = abs(cur.value - prev.value)
        if err < tol:
            return GenFnResult(value=cur.value, log_abs=cur.log_abs,
                               phase=cur.phase, m=m, err_est=err)
        prev = cur
    raise QuadratureConvergenceError(
        f"determinant not converged to {tol} after doubling to m={m}",
        last_values=(prev.value, cur.value))
