"""Coupled Painleve V route to the generating function.

For admissible (rvec, svec) the generating function factorizes over the
intervals,

    log F(rvec x, svec) = - sum_j (r_j / 4) int_0^x log(x/xi) q_j^2(xi) dxi,

where the amplitudes q_j solve k coupled Painleve V equations with Bessel
seeding q_j ~ sqrt(s_{j+1} - s_j) J_a(sqrt(r_j xi)) at xi -> 0.  q_j itself
may be imaginary when s_{j+1} < s_j (only q_j^2 is real), so the integration
uses the signed decomposition q_j = sigma_j^{1/2} rho_j with
sigma_j = sign(s_{j+1} - s_j); every term of equation j carries exactly one
factor of (q_j, q_j', q_j''), which makes the rho system closed and real.
See docs/coupled_system.md for the derivation.

The integrator carries the quadrature cumulants A_j = int q_j^2 and
B_j = int q_j^2 log xi alongside the state, so log F(x) is available for any
x on the trajectory from dense output; the (0, eps) head is integrated in
closed form from the seeding asymptotics (series in xi^(a+1)).

The same machinery integrates the two-function system with the extra
1/q1^3 term whose log-weight integral I(x; r) gives the tail probability
Q_a(r) of the ratio of the two smallest points.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from ._rk import StiffnessSignal, integrate_dp54
from .errors import IntegrationError, ValidationError
from .fredholm import (ParameterSet, discretize, fredholm_det,
                       gauss_legendre_segments, generating_fn)
from .specfun import DEFAULT_CONFIG, bessel_j, bessel_j_prime

DEFAULT_ODE_TOL = 1e-10
BLOWUP_LIMIT = 1e6  # |rho| beyond this aborts the integration


def default_eps(params):
    """Seeding abscissa 1e-9 * min(1, 1/r_k).

    The seeding truncates the boundary asymptotics at leading order; the
    neglected O(xi) correction biases downstream values by about
    eps * log(1/eps), so the default sits far below the 1e-4 scale one would
    pick on step-count grounds.  F-grade accuracy additionally extrapolates
    over eps (genfn_extrapolated).
    """
    return 1e-9 * min(1.0, 1.0 / params.r[-1])


@dataclass(frozen=True)
class PainleveState:
    """State of the signed coupled system at abscissa xi.

    q_j^2 = sigma_j rho_j^2; the signs sigma_j = sign(s_{j+1} - s_j) are
    constant along a trajectory.
    """

    xi: float
    rho: np.ndarray
    drho: np.ndarray
    sigma: np.ndarray

    @property
    def q_squared(self):
        return self.sigma * self.rho**2


def _signed_deltas(params):
    se = params.s_extended
    deltas = np.array([float(np.real(se[j + 1] - se[j])) for j in range(params.k)])
    return deltas, np.where(deltas >= 0.0, 1.0, -1.0)


def seed(params, eps, config=DEFAULT_CONFIG):
    """Seeding state at xi = eps from the Bessel boundary behaviour.

    rho_j(eps) = sqrt|s_{j+1} - s_j| J_a(sqrt(r_j eps)), with the derivative
    through the chain rule.  Degenerate parameter sets (s_j = s_{j+1}) are
    rejected; reduce k first.
    """
    params.require_strict()
    if not eps > 0.0:
        raise ValidationError("eps must be positive")
    deltas, sigma = _signed_deltas(params)
    r = np.array(params.r)
    z = np.sqrt(r * eps)
    amp = np.sqrt(np.abs(deltas))
    j = np.array([bessel_j(params.alpha, zz, config) for zz in z])
    jp = np.array([bessel_j_prime(params.alpha, zz, config) for zz in z])
    rho = amp * j
    drho = amp * jp * r / (2.0 * z)
    return PainleveState(xi=eps, rho=rho, drho=drho, sigma=sigma)


def accelerations(state, params):
    """Second derivatives rho'' at a state; raises near the rank-one singularity."""
    dd, ok = core.pv_accel(state.xi, state.rho, state.drho,
                           np.array(params.r), state.sigma, params.alpha)
    if not ok:
        raise IntegrationError(
            f"coupled system near-singular at xi = {state.xi:.6e} "
            f"(|1 - sum q^2| below {core.SINGULAR_TOL:g})", last_xi=state.xi)
    return dd


def _jsq_head_integrals(alpha, r, eps, x_ref, n_terms=8):
    """Closed-form head integrals of J_a(sqrt(r xi))^2 over (0, eps).

    Returns (int J^2 dxi, int J^2 log xi dxi) from the product series
    J_a(z)^2 = sum_m c_m (z^2/4)^(a+m); both integrals are series in
    eps^(a+m+1).  x_ref is unused but kept for signature symmetry.
    """
    a_int = 0.0
    b_int = 0.0
    for m in range(n_terms):
        lc = (math.lgamma(2 * alpha + 2 * m + 1)
              - math.lgamma(m + 1) - 2 * math.lgamma(alpha + m + 1)
              - math.lgamma(2 * alpha + m + 1))
        c = (-1) ** m * math.exp(lc) * (0.25 * r) ** (alpha + m)
        p = alpha + m + 1.0
        epow = eps ** p
        a_int += c * epow / p
        b_int += c * epow * (math.log(eps) / p - 1.0 / (p * p))
    return a_int, b_int


class PainleveTrajectory:
    """Dense-output trajectory of the coupled system on [eps, x_max].

    The state vector is [rho, rho', A, B] with the per-interval cumulants
    A_j(x) = int_0^x q_j^2 dxi and B_j(x) = int_0^x q_j^2 log xi dxi carried
    through the integration (head contributions from the seed asymptotics
    included), so the log-weight integrals of the product formula come out
    of the same dense output.  Immutable once returned.
    """

    def __init__(self, params, eps, sigma, sol, stats, config):
        self.params = params
        self.eps = eps
        self.sigma = sigma
        self._sol = sol
        self.stats = stats
        self._config = config

    @property
    def x_max(self):
        return self._sol.t_end

    @property
    def xis(self):
        return self._sol.t_breaks

    def _check_range(self, x):
        if np.any(np.asarray(x) < self.eps) or np.any(np.asarray(x) > self.x_max * (1 + 1e-12)):
            raise ValidationError(
                f"x outside trajectory range [{self.eps:g}, {self.x_max:g}]")

    def state(self, xi):
        self._check_range(xi)
        k = self.params.k
        y = self._sol(float(xi))
        return PainleveState(xi=float(xi), rho=y[:k], drho=y[k:2 * k],
                             sigma=self.sigma)

    def q_squared(self, xi):
        """q_j^2(xi) as shape (k,) for scalar xi, else (len(xi), k)."""
        self._check_range(xi)
        k = self.params.k
        y = self._sol(xi)
        rho = y[..., :k]
        return self.sigma * rho**2

    def cumulants(self, x):
        """A_j(x), B_j(x) including the (0, eps) head."""
        self._check_range(x)
        k = self.params.k
        y = self._sol(float(x))
        return y[2 * k:3 * k], y[3 * k:4 * k]


@dataclass(frozen=True)
class GenFnEvaluation:
    """Generating-function value from the product formula at scale x.

    per_interval[j] = -(r_j/4) int_0^x log(x/xi) q_j^2 dxi, so
    log_value = sum(per_interval) and value = exp(log_value).
    """

    x: float
    value: float
    log_value: float
    per_interval: np.ndarray


def _rhs_factory(params, sigma):
    r = np.array(params.r)
    alpha = params.alpha
    k = params.k

    def rhs(xi, y):
        rho = y[:k]
        drho = y[k:2 * k]
        dd, ok = core.pv_accel(xi, rho, drho, r, sigma, alpha)
        if not ok:
            raise StiffnessSignal
        qsq = sigma * rho * rho
        return np.concatenate([drho, dd, qsq, qsq * math.log(xi)])

    return rhs


def integrate(params, eps=None, x_max=1.0, tol=DEFAULT_ODE_TOL,
              config=DEFAULT_CONFIG):
    """Integrate the coupled system from the Bessel seed at eps up to x_max."""
    if eps is None:
        eps = default_eps(params)
    if not 0.0 < eps < x_max:
        raise ValidationError("require 0 < eps < x_max")
    state = seed(params, eps, config)
    deltas, sigma = _signed_deltas(params)
    heads = [_jsq_head_integrals(params.alpha, rj, eps, x_max)
             for rj in params.r]
    a0 = np.array([deltas[j] * heads[j][0] for j in range(params.k)])
    b0 = np.array([deltas[j] * heads[j][1] for j in range(params.k)])
    y0 = np.concatenate([state.rho, state.drho, a0, b0])
    rhs = _rhs_factory(params, sigma)
    k = params.k
    sol, stats = integrate_dp54(
        rhs, eps, x_max, y0, rtol=tol, atol=tol, h0=0.1 * eps,
        blowup_fn=lambda y: np.max(np.abs(y[:k])) > BLOWUP_LIMIT)
    return PainleveTrajectory(params, eps, sigma, sol, stats, config)


def genfn_painleve(traj, x):
    """F(rvec x, svec) from the product formula, evaluated at scale x.

    For x below the seeding abscissa the closed-form head integrals are used
    directly (the trajectory is not needed there).
    """
    params = traj.params
    r = np.array(params.r)
    if x <= traj.eps:
        deltas, _ = _signed_deltas(params)
        a = np.empty(params.k)
        b = np.empty(params.k)
        for j, rj in enumerate(params.r):
            aj, bj = _jsq_head_integrals(params.alpha, rj, x, x)
            a[j] = deltas[j] * aj
            b[j] = deltas[j] * bj
    else:
        a, b = traj.cumulants(x)
    per = -(r / 4.0) * (a * math.log(x) - b)
    log_f = float(np.sum(per))
    return GenFnEvaluation(x=float(x), value=math.exp(log_f),
                           log_value=log_f, per_interval=per)


def genfn_extrapolated(params, xs, eps0=None, levels=3, tol=DEFAULT_ODE_TOL,
                       config=DEFAULT_CONFIG):
    """F at scales xs with the seeding bias removed by extrapolation in eps.

    Integrates trajectories seeded at eps0, eps0/2, ..., and fits
    log F = c0 + c1 eps log(eps) + c2 eps per scale, returning exp(c0); the
    basis matches the leading truncation structure of the seed, and c0 is
    accurate to O(eps0^2 polylog) (about 1e-10 at the defaults).  xs may be
    a scalar or an array; one trajectory set serves every scale.
    """
    xs_arr = np.atleast_1d(np.asarray(xs, dtype=float))
    scalar = np.asarray(xs).ndim == 0
    if eps0 is None:
        eps0 = 1e-6 * min(1.0, 1.0 / params.r[-1])
    if levels < 1:
        raise ValidationError("levels must be at least 1")
    x_top = float(np.max(xs_arr))
    eps_list = [eps0 / 2**i for i in range(levels)]
    logs = np.empty((levels, xs_arr.size))
    for i, e in enumerate(eps_list):
        traj = integrate(params, eps=e, x_max=x_top, tol=tol, config=config)
        logs[i] = [genfn_painleve(traj, x).log_value for x in xs_arr]
    if levels == 1:
        out = logs[0]
    elif levels == 2:
        out = 2.0 * logs[1] - logs[0]
    else:
        basis = np.array([[1.0, e * math.log(e), e] for e in eps_list])
        coef, *_ = np.linalg.lstsq(basis, logs, rcond=None)
        out = coef[0]
    values = np.exp(out)
    return (float(values[0]), float(out[0])) if scalar else (values, out)


# ----------------------------------------------------------------------
# b-form view (Lax-pair consistency)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BFormView:
    """b-form of a trajectory on a grid of y = sqrt(x).

    b_j(y) = (y/2) q_j^2(y^2) for j = 1..k and b_0 = y/2 - sum_j b_j, with
    u from the order equation u b0^2 + b0'^2/4 - b0 b0''/2 = a^2/4.  The
    residuals array holds the j-equation defects
    (u - r_j) b_j^2 + b_j'^2/4 - b_j b_j''/2, one row per interval; entries
    where |b0| is too small for u to be recovered are NaN with valid False.
    """

    ys: np.ndarray
    b0: np.ndarray
    b: np.ndarray
    u: np.ndarray
    residuals: np.ndarray
    valid: np.ndarray

    @property
    def sum_rule_defect(self):
        """max |b0 + sum_j b_j - y/2| (identically 0 by construction)."""
        return float(np.max(np.abs(self.b0 + self.b.sum(axis=0) - 0.5 * self.ys)))


def bform(traj, ys=None, b0_floor=1e-12):
    """Evaluate the b-form and its equation residuals along a trajectory.

    The second derivatives of q_j^2 come from the system right-hand side at
    the interpolated state (not from differentiating the interpolant), so
    the residuals measure the algebraic consistency of the elimination that
    produced the coupled system.
    """
    params = traj.params
    k = params.k
    alpha = params.alpha
    if ys is None:
        lo = math.sqrt(traj.eps * 1.0000001)
        hi = math.sqrt(traj.x_max * 0.9999999)
        ys = np.linspace(lo, hi, 200)
    ys = np.asarray(ys, dtype=float)
    xs = ys * ys

    g = np.empty((k, ys.size))
    g1 = np.empty((k, ys.size))
    g2 = np.empty((k, ys.size))
    for i, x in enumerate(xs):
        st = traj.state(x)
        dd = accelerations(st, params)
        g[:, i] = st.sigma * st.rho**2
        g1[:, i] = 2.0 * st.sigma * st.rho * st.drho
        g2[:, i] = 2.0 * st.sigma * (st.drho**2 + st.rho * dd)

    b = 0.5 * ys * g
    b1 = 0.5 * g + (ys**2) * g1
    b2 = 3.0 * ys * g1 + 2.0 * ys**3 * g2
    b0 = 0.5 * ys - b.sum(axis=0)
    b0p = 0.5 - b1.sum(axis=0)
    b0pp = -b2.sum(axis=0)

    valid = np.abs(b0) > b0_floor
    u = np.full(ys.size, np.nan)
    u[valid] = ((0.25 * alpha * alpha - 0.25 * b0p[valid] ** 2
                 + 0.5 * b0[valid] * b0pp[valid]) / b0[valid] ** 2)
    residuals = (u[None, :] - np.array(params.r)[:, None]) * b * b \
        + 0.25 * b1 * b1 - 0.5 * b * b2
    residuals[:, ~valid] = np.nan
    return BFormView(ys=ys, b0=b0, b=b, u=u, residuals=residuals, valid=valid)


# ----------------------------------------------------------------------
# Two-function system for the ratio of the two smallest points
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TildeState:
    """State of the two-function system at abscissa xi (parameter r > 1)."""

    xi: float
    q1: float
    dq1: float
    q2: float
    dq2: float
    r: float


class TildeTrajectory:
    """Dense-output trajectory of the two-function system.

    State vector [q1, q2, q1', q2', A, B] with A = int (q1^2 + r q2^2) and
    B the same integrand times log xi.
    """

    def __init__(self, alpha, r, eps, sol, stats):
        self.alpha = alpha
        self.r = r
        self.eps = eps
        self._sol = sol
        self.stats = stats

    @property
    def x_max(self):
        return self._sol.t_end

    def state(self, xi):
        y = self._sol(float(xi))
        return TildeState(xi=float(xi), q1=y[0], q2=y[1], dq1=y[2], dq2=y[3],
                          r=self.r)

    def cumulants(self, x):
        y = self._sol(float(x))
        return y[4], y[5]


def _tilde_heads(alpha, r, eps):
    """Head integrals of q1^2 + r q2^2 over (0, eps) from the seeds.

    q1^2 = (2/(alpha+2)) (1 + 2 c1 xi) to the order the seed carries.
    """
    csq = 2.0 / (alpha + 2.0)
    c1 = alpha / (4.0 * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0))
    le = math.log(eps)
    a_head = csq * (eps + c1 * eps * eps)
    b_head = csq * ((eps * le - eps) + c1 * eps * eps * (le - 0.5))
    amp2 = (1.0 - 1.0 / r) ** 2
    a2, b2 = _jsq_head_integrals(alpha + 2.0, r, eps, eps)
    return a_head + r * amp2 * a2, b_head + r * amp2 * b2


def default_tilde_eps(alpha, r):
    """Seeding abscissa for the two-function system.

    At alpha = 0 the sum q1^2 + q2^2 reaches 1 at xi = 0 and the rank-one
    solve degenerates; 1 - S ~ -q2(eps)^2 must stay above the singularity
    guard, which bounds eps from below by ~1e-4 / D with
    D = (1 - 1/r) r / 8 the linear coefficient of q2.
    """
    a_gap = alpha / (alpha + 2.0)
    if a_gap > 1e-7:
        return 1e-5
    d_lin = (1.0 - 1.0 / r) * r / 8.0
    return min(max(3e-4 / d_lin, 1e-4), 3e-2)


def tilde_integrate(alpha, r, eps=None, x_max=1.0, tol=DEFAULT_ODE_TOL,
                    config=DEFAULT_CONFIG):
    """Integrate the two-function system from its constant/Bessel seed.

    The constant seed carries its first correction,
    q1(xi) = sqrt(2/(alpha+2)) (1 + c1 xi + O(xi^2)) with
    c1 = alpha / (4 (alpha+1)(alpha+2)(alpha+3)), obtained by balancing the
    order-xi terms of the first equation; without it the computed q1''
    diverges like 1/xi at the seed.  The q2 seed (1 - 1/r) J_{a+2}(sqrt(r xi))
    balances its equation exactly at this order.
    """
    if r <= 1.0:
        raise ValidationError(f"ratio parameter must exceed 1, got {r}")
    if eps is None:
        eps = default_tilde_eps(alpha, r)
    if not 0.0 < eps < x_max:
        raise ValidationError("require 0 < eps < x_max")
    z = math.sqrt(r * eps)
    amp = 1.0 - 1.0 / r
    c = math.sqrt(2.0 / (alpha + 2.0))
    c1 = alpha / (4.0 * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0))
    q1 = c * (1.0 + c1 * eps)
    dq1 = c * c1
    q2 = amp * bessel_j(alpha + 2.0, z, config)
    dq2 = amp * bessel_j_prime(alpha + 2.0, z, config) * r / (2.0 * z)
    a0, b0 = _tilde_heads(alpha, r, eps)
    y0 = np.array([q1, q2, dq1, dq2, a0, b0])

    def rhs(xi, y):
        dd, ok = core.tilde_accel(xi, y[:2], y[2:4], r, alpha)
        if not ok:
            raise StiffnessSignal
        gsum = y[0] * y[0] + r * y[1] * y[1]
        return np.array([y[2], y[3], dd[0], dd[1], gsum, gsum * math.log(xi)])

    sol, stats = integrate_dp54(
        rhs, eps, x_max, y0, rtol=tol, atol=tol, h0=0.1 * eps,
        blowup_fn=lambda y: max(abs(y[0]), abs(y[1])) > BLOWUP_LIMIT)
    return TildeTrajectory(alpha, r, eps, sol, stats)


def tilde_I(traj, x):
    """Log-weight integral I(x; r) = -(1/4) int_0^x (q1^2 + r q2^2) log(x/xi) dxi."""
    if x <= traj.eps:
        a, b = _tilde_heads(traj.alpha, traj.r, x)
    else:
        a, b = traj.cumulants(x)
    return -0.25 * (a * math.log(x) - b)


class ShotTildeTrajectory:
    """Separatrix trajectory of the two-function system, tracked by shooting.

    The initial data determine the solution only up to a higher-order free
    datum (the local expansion at 0 does not pin the solution), and the
    member selected by the ratio-probability formula is the separatrix
    between amplitudes that blow up and amplitudes that collapse.  Each leg
    bisects a perturbation of q1 at its anchor until the bracket collapses
    to machine precision, then re-anchors where the bracket trajectories
    still agree, restoring full resolution for the next stretch.
    """

    def __init__(self, alpha, r, eps, legs, x_valid):
        self.alpha = alpha
        self.r = r
        self.eps = eps
        self._legs = legs          # list of DenseSolution, increasing ranges
        self.x_valid = x_valid     # confirmed accuracy horizon

    @property
    def x_max(self):
        return self._legs[-1].t_end

    def _eval(self, x):
        for leg in reversed(self._legs):
            if x >= leg.t_start * (1.0 - 1e-12):
                return leg(min(x, leg.t_end))
        return self._legs[0](x)

    def state(self, xi):
        y = self._eval(float(xi))
        return TildeState(xi=float(xi), q1=y[0], q2=y[1], dq1=y[2], dq2=y[3],
                          r=self.r)

    def cumulants(self, x):
        y = self._eval(float(x))
        return y[4], y[5]


def _tilde_seed_vector(alpha, r, eps, config):
    z = math.sqrt(r * eps)
    amp = 1.0 - 1.0 / r
    c = math.sqrt(2.0 / (alpha + 2.0))
    c1 = alpha / (4.0 * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0))
    a0, b0 = _tilde_heads(alpha, r, eps)
    return np.array([
        c * (1.0 + c1 * eps),
        amp * bessel_j(alpha + 2.0, z, config),
        c * c1,
        amp * bessel_j_prime(alpha + 2.0, z, config) * r / (2.0 * z),
        a0, b0,
    ])


def _tilde_rhs_factory(alpha, r):
    def rhs(xi, y):
        dd, ok = core.tilde_accel(xi, y[:2], y[2:4], r, alpha)
        if not ok:
            raise StiffnessSignal
        g = y[0] * y[0] + r * y[1] * y[1]
        return np.array([y[2], y[3], dd[0], dd[1], g, g * math.log(xi)])
    return rhs


def tilde_shoot(alpha, r, x_target, tol=DEFAULT_ODE_TOL, config=DEFAULT_CONFIG,
                q_up=2.5, q_dn=0.25, max_legs=12):
    """Track the two-function separatrix out to x_target."""
    if r <= 1.0:
        raise ValidationError(f"ratio parameter must exceed 1, got {r}")
    eps = default_tilde_eps(alpha, r)
    rhs = _tilde_rhs_factory(alpha, r)
    x_stop = 1.2 * x_target + 2.0

    def run(y_from, xi_from, kappa):
        """Integrate a perturbed anchor; (side, solution).  side 0 = survived."""
        y0 = y_from.copy()
        y0[0] += kappa
        try:
            sol, _ = integrate_dp54(
                rhs, xi_from, x_stop, y0, rtol=tol, atol=tol,
                h0=min(0.1 * xi_from, 1e-3),
                blowup_fn=lambda y: y[0] > q_up or y[0] < q_dn)
            return 0, sol
        except IntegrationError as ex:
            sol = ex.partial
            if sol is None:
                raise
            y_end = sol(sol.t_end)
            if y_end[0] >= q_up * 0.98:
                side = 1
            elif y_end[0] <= q_dn * 1.02:
                side = -1
            else:
                # died at the S = 1 manifold: the growing family sits above it
                side = 1 if (y_end[0]**2 + y_end[1]**2) > 1.0 else -1
            return side, sol

    legs = []
    anchor_y = _tilde_seed_vector(alpha, r, eps, config)
    anchor_xi = eps
    x_valid = eps
    for _ in range(max_legs):
        # bracket the separatrix in the anchor perturbation
        k_hi = 1e-3 * max(1.0, abs(anchor_y[0]))
        side_lo = side_hi = 0
        for _ in range(20):
            side_hi, sol_hi = run(anchor_y, anchor_xi, k_hi)
            side_lo, sol_lo = run(anchor_y, anchor_xi, -k_hi)
            if side_hi == 0 or side_lo == 0:
                sol = sol_hi if side_hi == 0 else sol_lo
                legs.append(sol)
                return ShotTildeTrajectory(alpha, r, eps, legs, x_target)
            if side_hi != side_lo:
                break
            k_hi *= 4.0
        else:
            raise IntegrationError(
                f"cannot bracket the separatrix at xi = {anchor_xi:.3e}",
                last_xi=anchor_xi)
        lo, hi = -k_hi, k_hi
        if side_lo > side_hi:
            lo, hi = hi, lo            # orient: lo side = -1, hi side = +1
        sol_best = sol_hi if abs(hi) < abs(lo) else sol_lo
        floor = 8e-16 * max(1.0, abs(anchor_y[0]))
        while abs(hi - lo) > floor:
            mid = 0.5 * (lo + hi)
            side, sol = run(anchor_y, anchor_xi, mid)
            if side == 0:
                legs.append(sol)
                return ShotTildeTrajectory(alpha, r, eps, legs, x_target)
            if sol.t_end > (sol_best.t_end if sol_best is not None else 0.0):
                sol_best = sol
            if side > 0:
                hi = mid
            else:
                lo = mid
        # re-anchor where the final bracket trajectories still agree
        _, sol_a = run(anchor_y, anchor_xi, lo)
        _, sol_b = run(anchor_y, anchor_xi, hi)
        reach = min(sol_a.t_end, sol_b.t_end)
        ts = np.linspace(anchor_xi, reach, 60)
        agree = anchor_xi
        for t in ts[1:]:
            if abs(sol_a(t)[0] - sol_b(t)[0]) < 1e-11 * max(1.0, abs(anchor_y[0])):
                agree = t
            else:
                break
        if agree <= anchor_xi * 1.0000001:
            raise IntegrationError(
                f"separatrix tracking stalled at xi = {anchor_xi:.3e}",
                last_xi=anchor_xi)
        legs.append(sol_a)
        x_valid = agree
        if x_valid >= x_target:
            return ShotTildeTrajectory(alpha, r, eps, legs, x_valid)
        anchor_xi = agree
        anchor_y = sol_a(agree)
    raise IntegrationError(
        f"separatrix not tracked to {x_target} within {max_legs} legs",
        last_xi=x_valid)


def tilde_I_shot(traj, x):
    """I(x; r) from a shot trajectory (heads below the seeding abscissa)."""
    if x <= traj.eps:
        a, b = _tilde_heads(traj.alpha, traj.r, x)
    else:
        a, b = traj.cumulants(x)
    return -0.25 * (a * math.log(x) - b)


@dataclass(frozen=True)
class RatioQResult:
    """Q_a(r) by the two-function route and by differencing the determinant route."""

    tilde_route: float
    fredholm_route: float

    @property
    def value(self):
        return self.tilde_route

    @property
    def discrepancy(self):
        return abs(self.tilde_route - self.fredholm_route)


def ratio_Q(alpha, r, tol=1e-6, ode_tol=DEFAULT_ODE_TOL, m=48,
            fd_step=1e-3, config=DEFAULT_CONFIG):
    """Tail probability Q_a(r) of the ratio of the two smallest points, r > 1.

    Route A integrates the two-function system and evaluates

        Q = [4^(a+1) Gamma(1+a) Gamma(2+a)]^-1 int_0^inf x^a e^I(x;r) dx,

    truncating the outer integral where the integrand falls below tol times
    the running value.  Route B integrates d/dr1 d/ds F((r1 x, r x), (s, 0))
    at s = 0, r1 = 1 over dx/x by central differences of the determinant
    route.  Both values are returned.
    """
    if r <= 1.0:
        raise ValidationError(f"ratio parameter must exceed 1, got {r}")

    # ---- route A (separatrix shooting)
    lognorm = ((alpha + 1.0) * math.log(4.0) + math.lgamma(1.0 + alpha)
               + math.lgamma(2.0 + alpha))
    # e^I decays like exp(-(r-1)x/4), which sets the truncation point
    x_top = min(max(4.0 / (r - 1.0) * math.log(1.0 / tol), 12.0), 400.0)
    traj = tilde_shoot(alpha, r, x_top, tol=ode_tol, config=config)
    x_top = min(x_top, traj.x_max)

    def integrand_a(u):
        return math.exp(alpha * math.log(u) + tilde_I_shot(traj, u) - lognorm)

    edges = [0.0]
    while edges[-1] < x_top:
        edges.append(min(max(2.0 * edges[-1], 1.0), x_top))
    q_tilde = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes, weights, _ = gauss_legendre_segments(
            [(lo, hi)], m, grade_first=(lo == 0.0 and alpha < 0.0))
        q_tilde += float(np.dot(weights, [integrand_a(u) for u in nodes]))
    # truncated exponential tail estimate
    q_tilde += integrand_a(x_top) * 4.0 / (r - 1.0)

    # ---- route B
    def d2f(x):
        acc = 0.0
        for sr in (+1.0, -1.0):
            r1 = 1.0 + sr * fd_step
            base = discretize(ParameterSet(alpha, (r1, r), (0.0, 0.0), x),
                              m=m, config=config)
            for ss in (+1.0, -1.0):
                c = np.where(base.interval_index == 0, 1.0 - ss * fd_step, 1.0)
                val = fredholm_det(base, c).real
                acc += sr * ss * val
        return acc / (4.0 * fd_step * fd_step)

    x_hi_b = 24.0
    total_b = 0.0
    lo_edge = 0.0
    while True:
        edges = [lo_edge]
        while edges[-1] < x_hi_b:
            edges.append(min(max(2.0 * edges[-1], 1.0), x_hi_b))
        for lo, hi in zip(edges[:-1], edges[1:]):
            nodes, weights, _ = gauss_legendre_segments(
                [(lo, hi)], 24, grade_first=(lo == 0.0 and alpha < 0.0))
            total_b += float(np.dot(weights,
                                    [d2f(u) / u for u in nodes]))
        tail = abs(d2f(x_hi_b))
        if tail < tol * max(total_b, 1e-12):
            break
        if x_hi_b > 4096.0:
            raise IntegrationError("outer integral for Q (difference route) "
                                   "did not converge", last_xi=x_hi_b)
        lo_edge = x_hi_b
        x_hi_b *= 2.0
    return RatioQResult(tilde_route=q_tilde, fredholm_route=total_b)
