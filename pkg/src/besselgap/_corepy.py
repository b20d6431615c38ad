"""Hot-path numerical kernels, pure NumPy backend.

This is one of two interchangeable backends selected by besselgap.core; the
compiled twin _corecy.pyx implements the same functions with identical
semantics.  Everything here is pure (no module state is mutated after
import), so concurrent callers are safe.

Contents:
  - Bessel J_a and J_{a+1} for real order a > -1 on z >= 0, by ascending
    series below |z| = 12 and by the Hankel asymptotic expansion above it,
    with forward recurrence up to moderate order and a backward (Miller)
    recurrence when the order is comparable to the argument.
  - The hard-edge correlation kernel K(x, y) built from J_a, with a stable
    diagonal/near-diagonal branch (second-order Taylor step across the
    removable singularity, all Bessel derivatives eliminated via the ODE).
  - Right-hand sides of the coupled Painleve V system (k amplitudes, signed
    decomposition) and of the two-function variant with the extra 1/q1^3
    term, both solved for the second derivatives in closed form through a
    rank-one update.
"""

import math

import numpy as np

BACKEND = "pure"

# Bessel argument where the ascending series hands over to the asymptotic
# expansion.  Below 12 the series cancellation costs at most ~5 digits;
# above 12 the Hankel expansion reaches ~1e-13 for orders < 2.
SERIES_ASYM_SWITCH = 12.0


# ----------------------------------------------------------------------
# Bessel J
# ----------------------------------------------------------------------

def _series_j(alpha, z, tol, max_terms):
    """Ascending series J_a(z) = (z/2)^a/Gamma(a+1) * sum_m (-z^2/4)^m / (m! (a+1)_m).

    Valid for any a > -1; meant for z <= SERIES_ASYM_SWITCH.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    pos = z > 0.0
    if alpha == 0.0:
        out[~pos] = 1.0
    elif alpha > 0.0:
        out[~pos] = 0.0
    else:
        out[~pos] = np.inf
    zz = z[pos]
    if zz.size:
        q = -0.25 * zz * zz
        term = np.ones_like(zz)
        acc = np.ones_like(zz)
        for m in range(1, max_terms + 1):
            term = term * (q / (m * (m + alpha)))
            acc += term
            if np.max(np.abs(term)) <= tol * max(np.max(np.abs(acc)), 1e-300):
                break
        pref = np.exp(alpha * np.log(0.5 * zz) - math.lgamma(alpha + 1.0))
        out[pos] = pref * acc
    return out


def _asym_j(nu, z, tol, max_terms):
    """Hankel asymptotic expansion of J_nu(z) for large z.

    J_nu(z) ~ sqrt(2/(pi z)) [P cos w - Q sin w], w = z - nu pi/2 - pi/4,
    truncated at the smallest term.  Intended for z >= 12, |nu| < 2 where
    the optimal truncation error is ~1e-13 or better.
    """
    z = np.asarray(z, dtype=float)
    mu = 4.0 * nu * nu
    p = np.ones_like(z)
    qs = np.zeros_like(z)
    u = np.ones_like(z)
    prev = np.inf
    sp = -1.0
    sq = 1.0
    for k in range(1, max_terms + 1):
        u = u * ((mu - (2 * k - 1) ** 2) / (8.0 * k * z))
        mx = np.max(np.abs(u))
        if mx >= prev:
            break
        if k % 2 == 1:
            qs = qs + sq * u
            sq = -sq
        else:
            p = p + sp * u
            sp = -sp
        if mx <= tol:
            break
        prev = mx
    w = z - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * (p * np.cos(w) - qs * np.sin(w))


def _miller_pair(alpha, z, tol, max_terms):
    """J_alpha(z), J_{alpha+1}(z) by backward recurrence, scalar z > SERIES_ASYM_SWITCH.

    Used when the order is too close to (or above) the argument for forward
    recurrence.  Trial values are recurred down to the fractional base order
    b = alpha - floor(alpha) and normalized against the asymptotic value of
    J_b(z); the start offset is grown until two runs agree.
    """
    base = alpha - math.floor(alpha)
    ref = float(_asym_j(base, np.array([z]), 1e-16, max_terms)[0])
    nsteps = int(round(alpha - base))
    extra = 20
    last = None
    for _ in range(8):
        jp = 0.0
        jc = 1e-290
        v_a = v_a1 = None
        nu = base + nsteps + extra  # start order; recur down to base
        while nu > base + 0.5:
            jm = (2.0 * nu / z) * jc - jp
            jp, jc = jc, jm
            nu -= 1.0
            if abs(jc) > 1e260:
                jp *= 1e-260
                jc *= 1e-260
                if v_a is not None:
                    v_a *= 1e-260
                if v_a1 is not None:
                    v_a1 *= 1e-260
            if abs(nu - alpha) < 0.25:
                v_a = jc
                v_a1 = jp
        scale = ref / jc
        pair = (v_a * scale, v_a1 * scale)
        if last is not None and abs(pair[0] - last[0]) <= tol * (abs(pair[0]) + 1e-300):
            return pair
        last = pair
        extra += 15
    return last


def bessel_j_pair(alpha, z, tol=1e-11, max_terms=200):
    """Return (J_alpha(z), J_{alpha+1}(z)) elementwise for z >= 0, alpha > -1."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    ja = np.empty(z.shape)
    jb = np.empty(z.shape)

    small = z <= SERIES_ASYM_SWITCH
    if np.any(small):
        zs = z[small]
        ja[small] = _series_j(alpha, zs, tol, max_terms)
        jb[small] = _series_j(alpha + 1.0, zs, tol, max_terms)

    big = ~small
    if np.any(big):
        zb = z[big]
        if alpha < 0.0:
            # base pair at b = alpha+1 in (0,1); one stable downward step
            b = alpha + 1.0
            j_b = _asym_j(b, zb, 1e-16, max_terms)
            j_b1 = _asym_j(b + 1.0, zb, 1e-16, max_terms)
            ja[big] = (2.0 * b / zb) * j_b - j_b1
            jb[big] = j_b
        else:
            base = alpha - math.floor(alpha)
            nsteps = int(round(alpha - base))
            # forward recurrence is stable while the order stays below the
            # turning point at nu ~ z
            fwd_ok = (alpha + 1.0) <= (zb - 2.0 * np.cbrt(zb) - 2.0)
            tmp_a = np.empty(zb.shape)
            tmp_b = np.empty(zb.shape)
            if np.any(fwd_ok):
                zf = zb[fwd_ok]
                jm = _asym_j(base, zf, 1e-16, max_terms)
                jc = _asym_j(base + 1.0, zf, 1e-16, max_terms)
                nu = base + 1.0
                for _ in range(nsteps):
                    jm, jc = jc, (2.0 * nu / zf) * jc - jm
                    nu += 1.0
                tmp_a[fwd_ok] = jm
                tmp_b[fwd_ok] = jc
            mil = ~fwd_ok
            for i in np.nonzero(mil)[0]:
                tmp_a[i], tmp_b[i] = _miller_pair(alpha, float(zb[i]), tol, max_terms)
            ja[big] = tmp_a
            jb[big] = tmp_b

    if scalar:
        return float(ja[0]), float(jb[0])
    return ja, jb


# ----------------------------------------------------------------------
# Hard-edge Bessel kernel
# ----------------------------------------------------------------------

def _kernel_phi_psi(alpha, u, tol, max_terms):
    """phi(u) = J_a(sqrt u) and psi(u) = sqrt(u) J_a'(sqrt u) on u > 0."""
    z = np.sqrt(u)
    j, j1 = bessel_j_pair(alpha, z, tol, max_terms)
    return j, alpha * j - z * j1


def _kernel_diag_taylor(alpha, c, delta, tol, max_terms):
    """Kernel value at (c+delta, c-delta) by a Taylor step across the diagonal.

    The J_a'' and higher derivatives are eliminated through the Bessel ODE,
    so only (J_a, J_{a+1}) at sqrt(c) enter.  delta = 0 gives the exact
    diagonal K(c, c) = [J_a^2 + J_{a+1}^2 - (2a/sqrt(c)) J_a J_{a+1}] / 4,
    the form free of the a^2/c cancellation.
    """
    c = np.asarray(c, dtype=float)
    delta = np.asarray(delta, dtype=float)
    z = np.sqrt(c)
    j, j1 = bessel_j_pair(alpha, z, tol, max_terms)
    diag = 0.25 * (j * j + j1 * j1 - (2.0 * alpha / z) * j * j1)
    if not np.any(delta != 0.0):
        return diag

    jp = (alpha / z) * j - j1
    a2 = alpha * alpha
    od = 1.0 - a2 / (z * z)
    jpp = -jp / z - od * j
    jppp = -jpp / z + jp / (z * z) - od * jp - (2.0 * a2 / z**3) * j
    j4 = (-jppp / z + 2.0 * jpp / z**2 - 2.0 * jp / z**3
          - od * jpp - (4.0 * a2 / z**3) * jp + (6.0 * a2 / z**4) * j)

    # x-derivatives of phi = J(sqrt x), psi = sqrt(x) J'(sqrt x) at x = c
    f = j
    f1 = jp / (2.0 * z)
    f2 = jpp / (4.0 * z**2) - jp / (4.0 * z**3)
    f3 = jppp / (8.0 * z**3) - 3.0 * jpp / (8.0 * z**4) + 3.0 * jp / (8.0 * z**5)
    g = z * jp
    g1 = jp / (2.0 * z) + jpp / 2.0
    g2 = jpp / (4.0 * z**2) - jp / (4.0 * z**3) + jppp / (4.0 * z)
    g3 = j4 / (8.0 * z**2) - 3.0 * jpp / (8.0 * z**4) + 3.0 * jp / (8.0 * z**5)

    n3 = (f3 * g - f * g3) / 3.0 + (f1 * g2 - f2 * g1)
    return diag + 0.25 * delta * delta * n3


def _near_diag_threshold(thr_coef, x, y):
    """Half-width below which the Taylor branch replaces the raw ratio.

    thr_coef * max(1, max(x, y)), capped at (x+y)/512 so the Taylor step in
    delta/c stays small near the origin, where the function varies on the
    scale of x itself and where the raw ratio is well conditioned anyway.
    """
    c = 0.5 * (x + y)
    return np.minimum(thr_coef * np.maximum(1.0, np.maximum(x, y)), c / 256.0)


def bessel_kernel_point(alpha, x, y, thr_coef, tol=1e-11, max_terms=200):
    """Hard-edge kernel K(x, y) at a single pair x, y > 0."""
    if abs(x - y) < _near_diag_threshold(thr_coef, x, y):
        c = 0.5 * (x + y)
        return float(_kernel_diag_taylor(alpha, c, 0.5 * (x - y), tol, max_terms))
    fx, gx = _kernel_phi_psi(alpha, np.asarray(x), tol, max_terms)
    fy, gy = _kernel_phi_psi(alpha, np.asarray(y), tol, max_terms)
    return float((fx * gy - gx * fy) / (2.0 * (x - y)))


def bessel_kernel_matrix(alpha, u, thr_coef, tol=1e-11, max_terms=200):
    """Kernel matrix K(u_a, u_b) on a node vector u > 0 (symmetric)."""
    u = np.asarray(u, dtype=float)
    f, g = _kernel_phi_psi(alpha, u, tol, max_terms)
    du = u[:, None] - u[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (f[:, None] * g[None, :] - g[:, None] * f[None, :]) / (2.0 * du)
    thr = _near_diag_threshold(thr_coef, u[:, None], u[None, :])
    fix = np.abs(du) < thr
    if np.any(fix):
        ia, ib = np.nonzero(fix)
        c = 0.5 * (u[ia] + u[ib])
        d = 0.5 * (u[ia] - u[ib])
        k[ia, ib] = _kernel_diag_taylor(alpha, c, d, tol, max_terms)
    return k


# ----------------------------------------------------------------------
# Coupled Painleve V right-hand sides
# ----------------------------------------------------------------------

SINGULAR_TOL = 1e-13  # |1 - S| below this flags the rank-one solve as singular


def pv_accel(xi, rho, drho, r, sigma, alpha):
    """Second derivatives of the signed amplitudes rho_j at abscissa xi.

    The k coupled equations are linear in the vector of second derivatives:
    the matrix is xi^2 (1-S) [(1-S) I + q q^T] with S = sum q_l^2, and since
    q^T q = S its inverse is (I - q q^T) / (xi^2 (1-S)^2) exactly.  Writing
    the right-hand side as rhs_j = a^2 q_j/4 - xi q_j (1-S)(P + xi D)
    - (1-S)^2 G_j - xi^2 q_j P^2, one factor of (1-S) cancels identically:

      q_j'' = [a^2 q_j/4 - xi q_j (1-S)(P + xi D) - xi^2 q_j P^2]
              / (xi^2 (1-S))  -  [G_j - q_j sum_l q_l G_l] / xi^2,

    which is the form used here (better conditioned near S = 1).  Written in
    rho_j = sigma_j^{-1/2} q_j every quantity is real.

    Returns (ddrho, ok); ok is False when |1 - S| <= SINGULAR_TOL or xi <= 0,
    in which case ddrho is zeros and the caller should treat the step as
    stiff.
    """
    rho = np.asarray(rho, dtype=float)
    drho = np.asarray(drho, dtype=float)
    r = np.asarray(r, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    s_sum = float(np.dot(sigma, rho * rho))
    one = 1.0 - s_sum
    if xi <= 0.0 or abs(one) <= SINGULAR_TOL:
        return np.zeros_like(rho), False
    p = float(np.dot(sigma, rho * drho))
    d = float(np.dot(sigma, drho * drho))
    g = xi * (drho + 0.25 * r * rho)
    # sum_l q_l G_l = sum_l sigma_l rho_l g_l since G_l = sigma^(1/2) g_l
    qg = float(np.dot(sigma, rho * g))
    num = 0.25 * alpha * alpha * rho - xi * rho * one * (p + xi * d) \
        - xi * xi * rho * (p * p)
    dd = num / (xi * xi * one) - (g - rho * qg) / (xi * xi)
    return dd, True


def tilde_accel(xi, q, dq, r, alpha):
    """Second derivatives for the two-function system with the 1/q1^3 term.

    Same reduced rank-one form as pv_accel; the extra term joins
    G_1 = xi (q1' + q1/4) + 1/q1^3 and carries no second derivative.
    r > 1 multiplies the quarter term of the second equation only.
    """
    q1, q2 = float(q[0]), float(q[1])
    dq1, dq2 = float(dq[0]), float(dq[1])
    s_sum = q1 * q1 + q2 * q2
    one = 1.0 - s_sum
    if xi <= 0.0 or abs(one) <= SINGULAR_TOL or abs(q1) < 1e-8:
        return np.zeros(2), False
    p = q1 * dq1 + q2 * dq2
    d = dq1 * dq1 + dq2 * dq2
    g1 = xi * (dq1 + 0.25 * q1) + 1.0 / q1**3
    g2 = xi * (dq2 + 0.25 * r * q2)
    qg = q1 * g1 + q2 * g2
    a2q = 0.25 * alpha * alpha
    common = xi * one * (p + xi * d) + xi * xi * p * p
    num1 = a2q * q1 - q1 * common
    num2 = a2q * q2 - q2 * common
    den = xi * xi
    dd1 = num1 / (den * one) - (g1 - q1 * qg) / den
    dd2 = num2 / (den * one) - (g2 - q2 * qg) / den
    return np.array([dd1, dd2]), True
