"""First-order Krylov-Bogoliubov slow flow of the driven Duffing oscillator.

With the ansatz ``x = u cos(omega t) + v sin(omega t)`` and averaging over a
drive period,

    du/dt = -d v + k X^2 v - (gamma/2) u
    dv/dt =  d u - k X^2 u + f - (gamma/2) v

where ``d = (omega^2 - omega0^2)/(2 omega)``, ``k = 3 alpha/(8 m omega)``,
``f = F/(2 m omega)`` and ``X^2 = u^2 + v^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .meanfield import QuadratureVF
from .params import SystemParams

STABILITY_TOL = 1e-10


@dataclass(frozen=True)
class SlowFlowState:
    u: float
    v: float

    @property
    def X(self) -> float:
        return math.hypot(self.u, self.v)


@dataclass(frozen=True)
class SteadyState:
    state: SlowFlowState
    stable: bool
    eigenvalues: tuple[complex, complex]


def _coefficients(params: SystemParams):
    w, w0, m = params.omega, params.omega0, params.m
    detuning = (w - w0) * (w + w0) / (2.0 * w)
    kerr = 3.0 * params.alpha / (8.0 * m * w)
    drive = params.F / (2.0 * m * w)
    return detuning, kerr, drive, 0.5 * params.gamma


def quadrature_field(params: SystemParams, include_damping: bool = True) -> QuadratureVF:
    """The slow flow written as a :class:`QuadratureVF`."""
    d, k, f, g = _coefficients(params)
    if not include_damping:
        g = 0.0
    return QuadratureVF(
        linear=np.array([[-g, -d], [d, -g]]),
        cubic=np.array([[0.0, k], [-k, 0.0]]),
        drive=np.array([0.0, f]),
    )


def slow_flow_rhs(state: SlowFlowState, params: SystemParams) -> tuple[float, float]:
    d, k, f, g = _coefficients(params)
    u, v = state.u, state.v
    shift = d - k * (u * u + v * v)
    return (-shift * v - g * u, shift * u + f - g * v)


def _jacobian(u: float, v: float, params: SystemParams) -> np.ndarray:
    d, k, _, g = _coefficients(params)
    shift = d - k * (u * u + v * v)
    return np.array(
        [
            [2.0 * k * u * v - g, -shift + 2.0 * k * v * v],
            [shift - 2.0 * k * u * u, -2.0 * k * u * v - g],
        ]
    )


def stability(state: SlowFlowState, params: SystemParams, residual_tol: float = 1e-8):
    """Linear stability of a fixed point: ``(stable, eigenvalues)``.

    Stable means both eigenvalues have real part below ``-1e-10``; centers of
    the lossless flow are reported as not stable.
    """
    du, dv = slow_flow_rhs(state, params)
    if math.hypot(du, dv) > residual_tol:
        raise ValidationError(f"({state.u}, {state.v}) is not a fixed point (residual {math.hypot(du, dv):.3g})")
    eig = np.linalg.eigvals(_jacobian(state.u, state.v, params))
    stable = bool(np.all(eig.real < -STABILITY_TOL))
    return stable, (complex(eig[0]), complex(eig[1]))


def _polish(y: float, coeffs, steps: int = 3) -> float:
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(steps):
        slope = dp(y)
        if slope == 0:
            break
        y_next = y - p(y) / slope
        if not math.isfinite(y_next) or y_next <= 0:
            break
        y = y_next
    return y


def steady_states(params: SystemParams) -> list[SteadyState]:
    """All fixed points of the slow flow, sorted by amplitude.

    Eliminating the phase gives the response cubic
    ``[(d - k Y)^2 + g^2] Y = f^2`` in ``Y = X^2``; its positive real roots
    are found from the companion matrix and each is back-substituted into the
    linear system for ``(u, v)``.  For ``F = 0`` only the origin is returned.
    """
    d, k, f, g = _coefficients(params)
    if f == 0.0:
        origin = SlowFlowState(0.0, 0.0)
        stable, eig = stability(origin, params)
        return [SteadyState(origin, stable, eig)]
    coeffs = [k * k, -2.0 * d * k, d * d + g * g, -f * f]
    while coeffs[0] == 0.0:
        coeffs.pop(0)
    roots = np.roots(coeffs)
    ys = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * max(abs(r), 1e-300) and r.real > 0:
            ys.append(_polish(r.real, coeffs))
    if not ys:
        raise ConvergenceError("response cubic returned no positive real root")
    out = []
    for y in sorted(ys):
        shift = d - k * y
        # -g u - shift v = 0 ; shift u - g v = -f
        denom = shift * shift + g * g
        state = SlowFlowState(-shift * f / denom, g * f / denom)
        stable, eig = stability(state, params, residual_tol=1e-8 * max(1.0, abs(f)))
        out.append(SteadyState(state, stable, eig))
    return out


def high_branch(params: SystemParams) -> SteadyState:
    """The stable steady state of largest amplitude."""
    stable = [s for s in steady_states(params) if s.stable]
    if not stable:
        raise ConvergenceError("no stable steady state")
    return stable[-1]


def cubic_residual(state: SlowFlowState, params: SystemParams) -> float:
    du, dv = slow_flow_rhs(state, params)
    return math.hypot(du, dv)
