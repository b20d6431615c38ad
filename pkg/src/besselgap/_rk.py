"""Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)) with dense output.

Fifth-order propagation with a fourth-order embedded error estimate, FSAL,
standard step-size controller, and the quartic Shampine interpolant for
continuous output.  The right-hand side may raise StiffnessSignal to force a
step rejection (used when the coupled-system solve approaches its rank-one
singularity); repeated halving below the floor aborts with IntegrationError.
"""

import numpy as np

from .errors import IntegrationError


class StiffnessSignal(Exception):
    """Raised by a right-hand side to request step rejection."""


_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
# Shampine's quartic interpolant: y(t0 + u h) = y0 + h K^T P [u, u^2, u^3, u^4]
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class DenseSolution:
    """Piecewise-quartic interpolant of an accepted integration.

    Callable on scalars or arrays within [t_start, t_end]; exact at the step
    points it was built from.
    """

    def __init__(self, t_breaks, y_nodes, coeffs):
        self.t_breaks = t_breaks     # (n_steps + 1,)
        self.y_nodes = y_nodes       # (n_steps + 1, dim)
        self._coeffs = coeffs        # list of (t0, h, y0, KTP (dim, 4))

    @property
    def t_start(self):
        return self.t_breaks[0]

    @property
    def t_end(self):
        return self.t_breaks[-1]

    def _eval_one(self, t):
        idx = np.searchsorted(self.t_breaks, t, side="right") - 1
        idx = min(max(idx, 0), len(self._coeffs) - 1)
        t0, h, y0, ktp = self._coeffs[idx]
        u = (t - t0) / h
        powers = np.array([u, u * u, u**3, u**4])
        return y0 + h * (ktp @ powers)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return self._eval_one(float(t_arr))
        return np.stack([self._eval_one(float(v)) for v in t_arr])


def integrate_dp54(rhs, t0, t1, y0, rtol=1e-10, atol=1e-12, h0=None,
                   max_steps=1_000_000, blowup_fn=None):
    """Integrate y' = rhs(t, y) from t0 to t1 > t0.

    Returns (DenseSolution, stats dict).  Local error per step is kept below
    atol + rtol * |y| in RMS norm.  Stiffness signals and nonfinite stages
    reject and halve the step; a step below 1e-14 * (t1 - t0) raises
    IntegrationError carrying the last good abscissa, as does blowup_fn(y)
    returning True on an accepted state.
    """
    t = float(t0)
    y = np.asarray(y0, dtype=float).copy()
    dim = y.size
    if h0 is None:
        h0 = (t1 - t0) / 1000.0
    h = min(h0, t1 - t0)
    h_floor = 1e-14 * (t1 - t0)

    def _call(tt, yy):
        out = np.asarray(rhs(tt, yy), dtype=float)
        if not np.all(np.isfinite(out)):
            raise StiffnessSignal
        return out

    k = np.empty((7, dim))
    try:
        k[0] = _call(t, y)
    except StiffnessSignal:
        raise IntegrationError("right-hand side rejected the initial state", last_xi=t)

    t_breaks = [t]
    y_nodes = [y.copy()]
    coeffs = []
    n_accept = n_reject = 0

    for _ in range(max_steps):
        if t >= t1:
            break
        h = min(h, t1 - t)
        if h < h_floor:
            raise IntegrationError(
                f"step size underflow at xi = {t:.6e}", last_xi=t,
                partial=DenseSolution(np.array(t_breaks), np.array(y_nodes), coeffs)
                if coeffs else None)
        try:
            for i in range(5):
                yi = y + h * (_A[i] @ k[: i + 1])
                k[i + 1] = _call(t + _C[i + 1] * h, yi)
            y_new = y + h * (_B[:6] @ k[:6])
            k[6] = _call(t + h, y_new)
        except StiffnessSignal:
            h *= 0.5
            n_reject += 1
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean(((h * (_E @ k)) / scale) ** 2))
        if err <= 1.0:
            ktp = k.T @ _P
            coeffs.append((t, h, y.copy(), ktp))
            t += h
            y = y_new
            k[0] = k[6]
            t_breaks.append(t)
            y_nodes.append(y.copy())
            n_accept += 1
            if blowup_fn is not None and blowup_fn(y):
                raise IntegrationError(
                    f"state blow-up at xi = {t:.6e}", last_xi=t,
                    partial=DenseSolution(np.array(t_breaks), np.array(y_nodes), coeffs))
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
            h *= max(0.2, factor)
        else:
            n_reject += 1
            h *= max(0.2, 0.9 * err ** -0.2)
    else:
        raise IntegrationError(
            f"exceeded {max_steps} steps at xi = {t:.6e}", last_xi=t,
            partial=DenseSolution(np.array(t_breaks), np.array(y_nodes), coeffs)
            if coeffs else None)

    sol = DenseSolution(np.array(t_breaks), np.array(y_nodes), coeffs)
    return sol, {"n_accept": n_accept, "n_reject": n_reject}
