"""Lab-frame time evolution of the driven Duffing oscillator and its analysis.

This is the numerical ground truth: Hamilton's equations

    dx/dt = p/m,   dp/dt = -m omega0^2 x - alpha x^3 - gamma p + F cos(omega t)

integrated with an adaptive Dormand-Prince pair and sampled on a grid with an
integer number of points per drive period, so lock-in demodulation and
periodograms at the drive frequency are free of leakage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _dopri
from .errors import ConvergenceError, SweepError, ValidationError
from .params import SystemParams

DEFAULT_SAMPLES_PER_PERIOD = 32
DEFAULT_MEASURE_PERIODS = 64
DEFAULT_SETTLE_FACTOR = 10.0
CONTROLLER_MARGIN = 1e-2


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if not (len(self.t) == len(self.x) == len(self.p)):
            raise ValidationError("trajectory arrays must have equal length")
        if len(self.t) < 2:
            raise ValidationError("trajectory needs at least two samples")
        if np.any(np.diff(self.t) <= 0):
            raise ValidationError("sample times must be strictly increasing")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def final_state(self) -> tuple[float, float]:
        return float(self.x[-1]), float(self.p[-1])

    def samples_per_period(self, omega: float) -> int:
        """Number of samples per drive period; the grid must be commensurate."""
        ratio = (2.0 * math.pi / omega) / self.dt
        spp = int(round(ratio))
        if spp < 1 or abs(ratio - spp) > 1e-6 * ratio:
            raise ValidationError("sample grid is not commensurate with the drive period")
        return spp

    def tail(self, n_periods: int, omega: float, closed: bool = True) -> "Trajectory":
        """The last ``n_periods`` drive periods.

        ``closed`` keeps both end points (for trapezoidal quadrature); otherwise
        the window is half-open with exactly ``n_periods * spp`` samples, as a
        periodic DFT expects.
        """
        count = n_periods * self.samples_per_period(omega)
        if count + 1 > len(self.t):
            raise ValidationError(f"window of {n_periods} periods is longer than the trajectory")
        start = len(self.t) - count - 1
        stop = len(self.t) if closed else len(self.t) - 1
        return Trajectory(self.t[start:stop], self.x[start:stop], self.p[start:stop])


@dataclass(frozen=True)
class LockInResult:
    u: float
    v: float

    @property
    def X(self) -> float:
        return math.hypot(self.u, self.v)


@dataclass(frozen=True)
class Spectrum:
    """One-sided periodogram.

    ``psd`` is per unit of ordinary frequency ``Omega/(2 pi)``: summing
    ``psd / span`` over all bins gives the mean square of the windowed
    signal, and a tone ``A cos(Omega_k t)`` on bin ``k`` (rectangular window)
    carries ``psd = A^2 span / 2``.
    """

    omega: np.ndarray
    psd: np.ndarray
    span: float
    window: str

    @property
    def bin_width(self) -> float:
        """Bin width in ordinary frequency, ``1/span``."""
        return 1.0 / self.span

    NORMALIZATION = (
        "one-sided periodogram, psd_k = c_k |dt * sum_n w_n x_n exp(-i Omega_k t_n)|^2 / span, "
        "c_k = 2 except DC/Nyquist; sum(psd)/span = mean(w^2 x^2)"
    )


def duffing_rhs(state: Sequence[float], t: float, params: SystemParams) -> tuple[float, float]:
    x, p = state
    return (
        p / params.m,
        -params.m * params.omega0**2 * x - params.alpha * x**3 - params.gamma * p
        + params.F * math.cos(params.omega * t),
    )


def energy(x, p, params: SystemParams):
    """Undriven Hamiltonian ``p^2/2m + m omega0^2 x^2/2 + alpha x^4/4``."""
    x = np.asarray(x)
    p = np.asarray(p)
    return p**2 / (2 * params.m) + 0.5 * params.m * params.omega0**2 * x**2 + 0.25 * params.alpha * x**4


def integrate(
    initial: Sequence[float],
    t0: float,
    t1: float,
    params: SystemParams,
    tol: float = 1e-9,
    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD,
    atol: float | None = None,
    max_steps: int = 50_000_000,
) -> Trajectory:
    """Integrate from ``t0`` to ``t1`` and sample every ``(2 pi/omega)/samples_per_period``.

    ``tol`` bounds the relative local error per step.  The step controller
    aims at ``CONTROLLER_MARGIN * tol`` so that errors accumulated over
    thousands of periods stay near ``tol``.  The absolute tolerance defaults
    to ``1e-3 * tol`` times the larger of the initial amplitude and the
    static response ``F/(m omega0^2)``.
    """
    if not t1 > t0:
        raise ValidationError("t1 must be greater than t0")
    if not 1e-14 < tol < 1e-3:
        raise ValidationError("tol must lie in (1e-14, 1e-3)")
    if int(samples_per_period) != samples_per_period or samples_per_period < 32:
        raise ValidationError("samples_per_period must be an integer >= 32")
    x0, p0 = (float(v) for v in initial)
    if not (math.isfinite(x0) and math.isfinite(p0)):
        raise ValidationError("initial state must be finite")
    period = 2.0 * math.pi / params.omega
    dt = period / samples_per_period
    n_samples = int(math.floor((t1 - t0) / dt * (1 + 1e-12))) + 1
    if atol is None:
        scale = max(abs(x0), abs(p0) / (params.m * params.omega0), params.F / (params.m * params.omega0**2))
        atol = 1e-3 * tol * (scale if scale > 0 else 1.0)
    h0 = min(dt, 2.0 * math.pi / max(params.omega, params.omega0) / 50.0)
    xs, ps, status, t_stop, _ = _dopri.integrate_samples(
        x0, p0, float(t0), dt, n_samples,
        params.m, params.omega0, params.alpha, params.F, params.omega, params.gamma,
        CONTROLLER_MARGIN * tol, CONTROLLER_MARGIN * atol, h0, max_steps,
    )
    if status == _dopri.UNDERFLOW:
        raise ConvergenceError(f"step size underflow at t={t_stop:.6g}", where=t_stop)
    if status == _dopri.TOO_MANY_STEPS:
        raise ConvergenceError(f"step budget exhausted at t={t_stop:.6g}", where=t_stop)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ps))):
        raise ConvergenceError("non-finite state in trajectory", where=t_stop)
    t = t0 + dt * np.arange(n_samples)
    return Trajectory(t, xs, ps)


def lockin_amplitude(traj: Trajectory, omega: float, n_periods: int) -> LockInResult:
    """Demodulate the last ``n_periods`` drive periods at ``omega``.

    ``u = (2/T) int x cos(omega t) dt`` and ``v = (2/T) int x sin(omega t) dt``
    by the trapezoidal rule, so that ``x = u cos + v sin`` is recovered for a
    pure tone.
    """
    if n_periods < 4:
        raise ValidationError("lock-in needs at least 4 periods")
    window = traj.tail(n_periods, omega, closed=True)
    span = window.t[-1] - window.t[0]
    u = 2.0 / span * np.trapezoid(window.x * np.cos(omega * window.t), window.t)
    v = 2.0 / span * np.trapezoid(window.x * np.sin(omega * window.t), window.t)
    return LockInResult(float(u), float(v))


def settle_periods_for(params: SystemParams, factor: float = DEFAULT_SETTLE_FACTOR) -> int:
    """Drive periods covering ``factor / gamma`` time units."""
    if params.gamma <= 0:
        raise ValidationError("settling time needs gamma > 0; pass settle_periods explicitly")
    period = 2.0 * math.pi / params.omega
    return int(math.ceil(factor / (params.gamma * period)))


def sweep_response(
    params: SystemParams,
    delta_grid: Sequence[float],
    direction: str = "down",
    settle_periods: int | None = None,
    measure_periods: int = DEFAULT_MEASURE_PERIODS,
    *,
    initial: Sequence[float] = (0.0, 0.0),
    tol: float = 1e-9,
    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD,
) -> list[tuple[float, LockInResult]]:
    """Adiabatic frequency sweep with state continuation.

    At each detuning the drive frequency becomes ``omega0 + delta``; the
    oscillator starts from the previous point's final phase-space state,
    settles for ``settle_periods`` (default ``10/gamma`` time units) and is
    then demodulated over ``measure_periods``.  Every segment spans an integer
    number of periods, so the drive phase is continuous across points.
    """
    grid = np.asarray(delta_grid, dtype=float)
    if direction not in ("up", "down"):
        raise ValidationError("direction must be 'up' or 'down'")
    if grid.size == 0:
        raise ValidationError("empty detuning grid")
    steps = np.diff(grid)
    if (direction == "up" and np.any(steps <= 0)) or (direction == "down" and np.any(steps >= 0)):
        raise ValidationError(f"grid is not monotone in the '{direction}' direction")
    state = tuple(float(v) for v in initial)
    results: list[tuple[float, LockInResult]] = []
    for index, delta in enumerate(grid):
        point = params.with_detuning(float(delta))
        if point.omega <= 0:
            raise ValidationError(f"detuning {delta} gives a non-positive drive frequency")
        settle = settle_periods if settle_periods is not None else settle_periods_for(point)
        if point.gamma > 0 and settle * 2 * math.pi / point.omega < 5.0 / point.gamma * (1 - 1e-12):
            raise ValidationError("settle_periods must cover at least 5/gamma")
        period = 2.0 * math.pi / point.omega
        try:
            traj = integrate(
                state, 0.0, (settle + measure_periods) * period, point, tol=tol,
                samples_per_period=samples_per_period,
            )
        except ConvergenceError as exc:
            raise SweepError(f"integration failed at grid index {index}: {exc}", index, results) from exc
        results.append((float(delta), lockin_amplitude(traj, point.omega, measure_periods)))
        state = traj.final_state
    return results


def periodogram(traj: Trajectory, window: str = "rectangular") -> Spectrum:
    """Single-window periodogram of ``x(t)`` (see :class:`Spectrum` for units)."""
    n = len(traj.t)
    if n < 2**10:
        raise ValidationError("periodogram needs at least 1024 samples")
    dt = traj.dt
    if np.max(np.abs(np.diff(traj.t) - dt)) > 1e-9 * dt + 8 * np.finfo(float).eps * np.abs(traj.t).max():
        raise ValidationError("periodogram needs a uniform time grid")
    if window == "rectangular":
        w = np.ones(n)
    elif window == "hann":
        w = np.hanning(n + 1)[:-1]  # periodic Hann
    else:
        raise ValidationError("window must be 'rectangular' or 'hann'")
    span = n * dt
    coeffs = dt * np.fft.rfft(w * traj.x)
    psd = 2.0 * np.abs(coeffs) ** 2 / span
    psd[0] /= 2.0
    if n % 2 == 0:
        psd[-1] /= 2.0
    omega = 2.0 * math.pi * np.fft.rfftfreq(n, dt)
    return Spectrum(omega=omega, psd=psd, span=span, window=window)


def spectral_peaks(spectrum: Spectrum, rel_height: float = 1e-2) -> list[tuple[float, float]]:
    """Local maxima of the periodogram above ``rel_height * max``: ``(Omega, psd)`` pairs."""
    psd = spectrum.psd
    threshold = rel_height * psd.max()
    padded = np.concatenate([[-np.inf], psd, [-np.inf]])
    is_peak = (padded[1:-1] > padded[:-2]) & (padded[1:-1] >= padded[2:]) & (psd > threshold)
    return [(float(spectrum.omega[k]), float(psd[k])) for k in np.flatnonzero(is_peak)]


def tone_amplitude(spectrum: Spectrum, omega: float) -> float:
    """Amplitude of a bin-centred tone at ``omega`` from a rectangular-window periodogram."""
    k = int(np.argmin(np.abs(spectrum.omega - omega)))
    return math.sqrt(2.0 * spectrum.psd[k] / spectrum.span)


@dataclass(frozen=True)
class DrivenHOSolution:
    """``x(t) = A cos(omega t) + C cos(omega0 t) + S sin(omega0 t)``."""

    drive_amplitude: float
    C: float
    S: float
    omega: float
    omega0: float

    def __call__(self, t):
        t = np.asarray(t)
        return (
            self.drive_amplitude * np.cos(self.omega * t)
            + self.C * np.cos(self.omega0 * t)
            + self.S * np.sin(self.omega0 * t)
        )

    def tones(self) -> list[tuple[float, float]]:
        """``(frequency, amplitude)`` of the free and the driven tone."""
        return [(self.omega0, math.hypot(self.C, self.S)), (self.omega, abs(self.drive_amplitude))]


def driven_ho_exact(params: SystemParams, initial: Sequence[float] = (0.0, 0.0)) -> DrivenHOSolution:
    """Closed-form motion of the lossless driven harmonic oscillator (initial time 0)."""
    if params.alpha != 0 or params.gamma != 0:
        raise ValidationError("closed form requires alpha = 0 and gamma = 0")
    if params.omega == params.omega0:
        raise ValidationError("resonant drive grows secularly; no two-tone closed form")
    x0, p0 = initial
    amp = params.F / (params.m * (params.omega0**2 - params.omega**2))
    return DrivenHOSolution(amp, x0 - amp, p0 / (params.m * params.omega0), params.omega, params.omega0)
