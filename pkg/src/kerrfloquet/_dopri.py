"""Dormand-Prince 5(4) integrator for the Duffing equation, compiled with numba.

Adaptive steps with the embedded 4th-order error estimate, local
extrapolation, and Hairer's 4th-order continuous extension to emit samples
on a uniform time grid.
"""

import math

import numpy as np
from numba import njit

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

OK, UNDERFLOW, TOO_MANY_STEPS = 0, 1, 2


@njit(cache=True)
def _rhs(t, x, p, m, w0sq, alpha, F, omega, gamma):
    return p / m, -m * w0sq * x - alpha * x * x * x - gamma * p + F * math.cos(omega * t)


@njit(cache=True)
def integrate_samples(x0, p0, t0, dt_sample, n_samples, m, omega0, alpha, F, omega, gamma, rtol, atol, h0, max_steps):
    """Integrate from ``t0`` and return ``(xs, ps, status, t_status, n_steps)``.

    Samples are taken at ``t0 + k*dt_sample`` for ``k < n_samples``.
    """
    w0sq = omega0 * omega0
    xs = np.empty(n_samples)
    ps = np.empty(n_samples)
    xs[0] = x0
    ps[0] = p0
    t_end = t0 + (n_samples - 1) * dt_sample
    next_k = 1
    t = t0
    x = x0
    p = p0
    h = h0
    k1x, k1p = _rhs(t, x, p, m, w0sq, alpha, F, omega, gamma)
    steps = 0
    while next_k < n_samples:
        if steps >= max_steps:
            return xs, ps, TOO_MANY_STEPS, t, steps
        if h < 1e-13 * max(1.0, abs(t)):
            return xs, ps, UNDERFLOW, t, steps
        # overshoot is fine: samples come from the dense output
        k2x, k2p = _rhs(t + C2 * h, x + h * A21 * k1x, p + h * A21 * k1p, m, w0sq, alpha, F, omega, gamma)
        k3x, k3p = _rhs(
            t + C3 * h, x + h * (A31 * k1x + A32 * k2x), p + h * (A31 * k1p + A32 * k2p),
            m, w0sq, alpha, F, omega, gamma,
        )
        k4x, k4p = _rhs(
            t + C4 * h,
            x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
            p + h * (A41 * k1p + A42 * k2p + A43 * k3p),
            m, w0sq, alpha, F, omega, gamma,
        )
        k5x, k5p = _rhs(
            t + C5 * h,
            x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
            p + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p),
            m, w0sq, alpha, F, omega, gamma,
        )
        k6x, k6p = _rhs(
            t + h,
            x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
            p + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p),
            m, w0sq, alpha, F, omega, gamma,
        )
        xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
        pn = p + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
        k7x, k7p = _rhs(t + h, xn, pn, m, w0sq, alpha, F, omega, gamma)
        ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ep = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
        sx = atol + rtol * max(abs(x), abs(xn))
        sp = atol + rtol * max(abs(p), abs(pn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ep / sp) ** 2))
        steps += 1
        if err <= 1.0:
            t_new = t + h
            # emit every sample inside (t, t_new]
            if next_k < n_samples and t0 + next_k * dt_sample <= t_new:
                dx = xn - x
                dp = pn - p
                bx = h * k1x - dx
                bp = h * k1p - dp
                r4x = dx - h * k7x - bx
                r4p = dp - h * k7p - bp
                r5x = h * (D1 * k1x + D3 * k3x + D4 * k4x + D5 * k5x + D6 * k6x + D7 * k7x)
                r5p = h * (D1 * k1p + D3 * k3p + D4 * k4p + D5 * k5p + D6 * k6p + D7 * k7p)
                while next_k < n_samples and t0 + next_k * dt_sample <= t_new:
                    ts = t0 + next_k * dt_sample
                    s = (ts - t) / h
                    s1 = 1.0 - s
                    xs[next_k] = x + s * (dx + s1 * (bx + s * (r4x + s1 * r5x)))
                    ps[next_k] = p + s * (dp + s1 * (bp + s * (r4p + s1 * r5p)))
                    next_k += 1
            t = t_new
            x = xn
            p = pn
            k1x = k7x
            k1p = k7p
            fac = 0.9 * err ** -0.2 if err > 0 else 5.0
            h = h * min(5.0, max(0.2, fac))
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
        if t + h > t_end:
            h = max(t_end - t, 1e-10 * max(1.0, abs(t)))
    return xs, ps, OK, t, steps
