"""Correlation kernels: the hard-edge Bessel kernel and the finite-n LUE kernel.

K(x, y) = [J_a(sqrt x) sqrt(y) J_a'(sqrt y) - sqrt(x) J_a'(sqrt x) J_a(sqrt y)]
          / (2 (x - y)),                                     a > -1, x, y > 0,

with the removable singularity on the diagonal handled by an analytic branch
(J_a'' eliminated through the Bessel ODE).  The finite-n kernel is

K_n(l, v) = sqrt(w(l) w(v)) sum_{j<n} p_j(l) p_j(v),   w(x) = x^a e^{-x},

with p_j the orthonormal Laguerre polynomials, evaluated in Christoffel-
Darboux form off the diagonal and in derivative form on it.  After an
instance is constructed everything here is read-only, so concurrent
evaluation is safe.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .specfun import DEFAULT_CONFIG


@dataclass(frozen=True)
class BesselKernelSpec:
    """Hard-edge kernel of order alpha with near-diagonal branch control.

    diag_threshold is the coefficient of the |x - y| < c * max(1, x) switch
    into the analytic diagonal branch.
    """

    alpha: float
    diag_threshold: float = 1e-4

    def __post_init__(self):
        if self.alpha <= -1.0:
            raise ValueError(f"kernel order must exceed -1, got {self.alpha}")
        if not self.diag_threshold > 0.0:
            raise ValueError("diag_threshold must be positive")


def bessel_kernel(spec, x, y, config=DEFAULT_CONFIG):
    """Hard-edge kernel K(x, y) for x, y > 0."""
    if x <= 0.0 or y <= 0.0:
        raise ValueError("kernel arguments must be positive")
    return core.bessel_kernel_point(
        spec.alpha, float(x), float(y), spec.diag_threshold,
        config.series_tol, config.max_terms,
    )


def bessel_kernel_gram(spec, nodes, config=DEFAULT_CONFIG):
    """Kernel matrix K(u_a, u_b) on a vector of positive nodes."""
    return core.bessel_kernel_matrix(
        spec.alpha, np.asarray(nodes, dtype=float), spec.diag_threshold,
        config.series_tol, config.max_terms,
    )


@dataclass(frozen=True)
class LueModel:
    """Finite-n Laguerre ensemble data.

    rec_a[j] = 2j + alpha + 1 and rec_b[j] = sqrt(j (j + alpha)) are the
    orthonormal-recurrence coefficients (rec_b indexed from j = 1), and
    log_partition = sum_{j<n} [ln j! + ln Gamma(j + alpha + 1)] is the log
    of the moment determinant of the unperturbed weight.
    """

    n: int
    alpha: float
    rec_a: np.ndarray = field(repr=False)
    rec_b: np.ndarray = field(repr=False)
    log_partition: float
    diag_threshold: float = 1e-4

    @classmethod
    def create(cls, n, alpha, diag_threshold=1e-4):
        if n < 1:
            raise ValueError("matrix size n must be at least 1")
        if alpha <= -1.0:
            raise ValueError(f"weight exponent must exceed -1, got {alpha}")
        j = np.arange(n + 1, dtype=float)
        rec_a = 2.0 * j + alpha + 1.0
        rec_b = np.sqrt(j[1:] * (j[1:] + alpha))
        logz = sum(math.lgamma(jj + 1.0) + math.lgamma(jj + alpha + 1.0)
                   for jj in range(n))
        return cls(n=n, alpha=alpha, rec_a=rec_a, rec_b=rec_b,
                   log_partition=logz, diag_threshold=diag_threshold)


def _laguerre_pn_derivs(model, x, n_derivs):
    """p_{n-1} and p_n of the orthonormal Laguerre family with derivatives.

    Returns (P_prev, P_cur), each of shape (n_derivs + 1, len(x)); row l is
    the l-th derivative.  Forward recurrence, differentiated l times:
    p^(l)_{j+1} = ((x - a_j) p^(l)_j + l p^(l-1)_j - b_j p^(l)_{j-1}) / b_{j+1}.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = model.n
    a = model.rec_a
    b = model.rec_b
    prev = np.zeros((n_derivs + 1, x.size))
    cur = np.zeros((n_derivs + 1, x.size))
    cur[0] = math.exp(-0.5 * math.lgamma(model.alpha + 1.0))
    for j in range(n):
        bj = b[j - 1] if j > 0 else 0.0
        nxt = np.empty_like(cur)
        for ell in range(n_derivs + 1):
            acc = (x - a[j]) * cur[ell] - bj * prev[ell]
            if ell > 0:
                acc += ell * cur[ell - 1]
            nxt[ell] = acc / b[j]
        prev, cur = cur, nxt
    return prev, cur


def _sqrt_weight(model, x):
    """sqrt(w(x)) = exp((alpha ln x - x)/2), evaluated in log space."""
    x = np.asarray(x, dtype=float)
    return np.exp(0.5 * (model.alpha * np.log(x) - x))


def lue_kernel(model, lam, nu):
    """Finite-n LUE kernel K_n(lam, nu) for lam, nu > 0."""
    if lam <= 0.0 or nu <= 0.0:
        raise ValueError("kernel arguments must be positive")
    return float(lue_kernel_gram(model, np.array([lam, nu]))[0, 1]) \
        if lam != nu else float(lue_kernel_gram(model, np.array([lam]))[0, 0])


def lue_kernel_gram(model, nodes):
    """LUE kernel matrix on a vector of positive nodes.

    Christoffel-Darboux off the diagonal; on and near the diagonal a Taylor
    step in the node separation with p', p'', p''' from the differentiated
    recurrence.  The weight factor sqrt(w(l) w(v)) is exact in both branches.
    """
    u = np.asarray(nodes, dtype=float)
    pm, pn = _laguerre_pn_derivs(model, u, 3)
    sw = _sqrt_weight(model, u)
    cd = model.rec_b[model.n - 1]

    du = u[:, None] - u[None, :]
    num = pn[0][:, None] * pm[0][None, :] - pm[0][:, None] * pn[0][None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = num / du
    thr = np.minimum(model.diag_threshold
                     * np.maximum(1.0, np.maximum(u[:, None], u[None, :])),
                     0.5 * (u[:, None] + u[None, :]) / 256.0)
    fix = np.abs(du) < thr
    if np.any(fix):
        ia, ib = np.nonzero(fix)
        # midpoint Taylor: N/(l-v) = A1 + d^2 N3/2 at c = (l+v)/2, d = (l-v)/2
        c = 0.5 * (u[ia] + u[ib])
        d = 0.5 * (u[ia] - u[ib])
        pmc, pnc = _laguerre_pn_derivs(model, c, 3)
        f, f1, f2, f3 = pnc
        g, g1, g2, g3 = pmc
        a1 = f1 * g - f * g1
        n3 = (f3 * g - f * g3) / 3.0 + (f1 * g2 - f2 * g1)
        k[ia, ib] = a1 + 0.5 * d * d * n3
    return cd * (sw[:, None] * sw[None, :]) * k
