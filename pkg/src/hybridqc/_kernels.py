"""Hot integration loops, jitted with numba when available.

Everything here works on the flat 10-vector (x1..x4, y1..y4, q, p) and plain
parameter arrays so the same code compiles under numba's nopython mode and
still runs (slowly) as ordinary Python if numba is missing.  Status codes:
0 = ok, 1 = fixed-point iteration failed to converge, 2 = non-finite state.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


SCHEME_MIDPOINT = 0
SCHEME_RK4 = 1

OK = 0
NO_CONVERGENCE = 1
NON_FINITE = 2


@njit(cache=True)
def field(out, z, rq, sq, cw, w4, inv_hbar, inv_m, two_k):
    """Hamilton vector field of the hybrid system, written into ``out``."""
    q = z[8]
    acc = 0.0
    for i in range(4):
        ax = 0.0
        ay = 0.0
        for j in range(4):
            ax += rq[i, j] * z[4 + j] + sq[i, j] * z[j]  # (R y + S x)_i
            ay += rq[i, j] * z[j] - sq[i, j] * z[4 + j]  # (R x - S y)_i
        out[i] = ax * inv_hbar + q * cw[i] * z[4 + i]
        out[4 + i] = -(ay * inv_hbar + q * cw[i] * z[i])
        acc += w4[i] * (z[i] * z[i] + z[4 + i] * z[4 + i])
    out[8] = z[9] * inv_m
    out[9] = -two_k * q - acc


@njit(cache=True)
def midpoint_step(z, dt, tol, max_iters, rq, sq, cw, w4, inv_hbar, inv_m, two_k):
    """One implicit midpoint step, fixed-point solved in the max-norm.

    Converged when the iterate change falls below ``tol``, or when it stops
    shrinking while already within 100*tol (the iteration has hit its roundoff
    floor; insisting on tol would spin until max_iters for nothing).
    Advances ``z`` in place on success.  Returns (status, iterations, residual).
    """
    guess = np.empty(10)
    mid = np.empty(10)
    deriv = np.empty(10)

    # explicit Euler predictor
    field(deriv, z, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
    for i in range(10):
        guess[i] = z[i] + dt * deriv[i]

    residual = np.inf
    previous = np.inf
    for it in range(1, max_iters + 1):
        for i in range(10):
            mid[i] = 0.5 * (z[i] + guess[i])
        field(deriv, mid, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
        residual = 0.0
        for i in range(10):
            nxt = z[i] + dt * deriv[i]
            delta = abs(nxt - guess[i])
            if delta > residual:
                residual = delta
            guess[i] = nxt
        if not np.isfinite(residual):
            return NON_FINITE, it, residual
        if residual <= tol or (residual >= previous and residual <= 100.0 * tol):
            for i in range(10):
                z[i] = guess[i]
            return OK, it, residual
        previous = residual
    return NO_CONVERGENCE, max_iters, residual


@njit(cache=True)
def rk4_step(z, dt, rq, sq, cw, w4, inv_hbar, inv_m, two_k):
    """One classical Runge-Kutta step, advancing ``z`` in place."""
    k1 = np.empty(10)
    k2 = np.empty(10)
    k3 = np.empty(10)
    k4 = np.empty(10)
    tmp = np.empty(10)

    field(k1, z, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
    for i in range(10):
        tmp[i] = z[i] + 0.5 * dt * k1[i]
    field(k2, tmp, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
    for i in range(10):
        tmp[i] = z[i] + 0.5 * dt * k2[i]
    field(k3, tmp, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
    for i in range(10):
        tmp[i] = z[i] + dt * k3[i]
    field(k4, tmp, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
    for i in range(10):
        z[i] += dt * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0


@njit(cache=True)
def integrate_loop(
    z0,
    n_steps,
    stride,
    dt,
    tol,
    max_iters,
    scheme,
    rq,
    sq,
    cw,
    w4,
    inv_hbar,
    inv_m,
    two_k,
):
    """Run ``n_steps`` steps, sampling every ``stride``-th state plus the last.

    Returns (samples, sample_steps, n_recorded, status, fail_step, iters,
    residual).  On failure the arrays hold the samples recorded so far.
    """
    n_samples = n_steps // stride + 1
    if n_steps % stride != 0:
        n_samples += 1
    samples = np.empty((n_samples, 10))
    sample_steps = np.empty(n_samples, dtype=np.int64)

    z = z0.copy()
    samples[0] = z
    sample_steps[0] = 0
    recorded = 1
    for step in range(1, n_steps + 1):
        if scheme == SCHEME_MIDPOINT:
            status, iters, residual = midpoint_step(
                z, dt, tol, max_iters, rq, sq, cw, w4, inv_hbar, inv_m, two_k
            )
            if status != OK:
                return samples, sample_steps, recorded, status, step, iters, residual
        else:
            rk4_step(z, dt, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
            if not np.isfinite(z).all():
                return samples, sample_steps, recorded, NON_FINITE, step, 0, np.inf
        if step % stride == 0 or step == n_steps:
            samples[recorded] = z
            sample_steps[recorded] = step
            recorded += 1
    return samples, sample_steps, recorded, OK, n_steps, 0, 0.0


@njit(cache=True)
def lyapunov_loop(
    z0,
    offset,
    d0,
    n_renorms,
    steps_per_interval,
    dt,
    tol,
    max_iters,
    scheme,
    rq,
    sq,
    cw,
    w4,
    inv_hbar,
    inv_m,
    two_k,
):
    """Two-trajectory separation-growth loop with periodic renormalization.

    Returns (log_ratios, status, fail_renorm).  ``offset`` is the initial unit
    displacement direction; the companion starts at ``z0 + d0*offset``.
    """
    logs = np.empty(n_renorms)
    za = z0.copy()
    zb = np.empty(10)
    for i in range(10):
        zb[i] = z0[i] + d0 * offset[i]

    for r in range(n_renorms):
        for _ in range(steps_per_interval):
            if scheme == SCHEME_MIDPOINT:
                status, _it, _res = midpoint_step(
                    za, dt, tol, max_iters, rq, sq, cw, w4, inv_hbar, inv_m, two_k
                )
                if status != OK:
                    return logs, status, r
                status, _it, _res = midpoint_step(
                    zb, dt, tol, max_iters, rq, sq, cw, w4, inv_hbar, inv_m, two_k
                )
                if status != OK:
                    return logs, status, r
            else:
                rk4_step(za, dt, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
                rk4_step(zb, dt, rq, sq, cw, w4, inv_hbar, inv_m, two_k)
        d2 = 0.0
        for i in range(10):
            diff = zb[i] - za[i]
            d2 += diff * diff
        d = np.sqrt(d2)
        if not np.isfinite(d) or d == 0.0:
            return logs, NON_FINITE, r
        logs[r] = np.log(d / d0)
        rescale = d0 / d
        for i in range(10):
            zb[i] = za[i] + rescale * (zb[i] - za[i])
    return logs, OK, n_renorms
