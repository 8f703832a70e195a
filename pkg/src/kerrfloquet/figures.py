"""Canonical parameter sets and data generators for the reference figures.

Every generator returns plain column dictionaries (name -> 1-D array) so the
command line can write them as CSV without further processing.
"""

from __future__ import annotations

import math

import numpy as np

from . import classical, kb, lindblad
from .meanfield import first_order_amplitudes
from .params import BasisChoice, BasisKind, SystemParams, params_from_rwa, validity_epsilon

# Frequency response: Kerr and pump in units of omega0, light damping.
FIG2A_U = 1e-2
FIG2A_F_OVER_U = 1e-2
FIG2A_GAMMA = 2.5e-3
# Driven harmonic oscillator spectrum.
FIG2C_DELTA = 0.4
FIG2C_F = 3.5e-3
# Multiphoton resonances.
FIG3_U = 1e-2
FIG3_F_OVER_U = 0.8
FIG3_KAPPA_OVER_U = 0.1


def fig2a_params() -> SystemParams:
    return params_from_rwa(FIG2A_U, FIG2A_F_OVER_U * FIG2A_U, gamma=FIG2A_GAMMA)


def fig2c_params() -> SystemParams:
    return params_from_rwa(0.0, FIG2C_F, omega=1.0 + FIG2C_DELTA)


def fig3_params(f_over_u: float = FIG3_F_OVER_U) -> SystemParams:
    return params_from_rwa(FIG3_U, f_over_u * FIG3_U)


def fig3_kappa() -> float:
    return FIG3_KAPPA_OVER_U * FIG3_U


def _largest(values) -> float:
    return max(values) if values else math.nan


def frequency_response(
    params: SystemParams,
    delta_over_u,
    *,
    u_a: float,
    settle_factor: float = classical.DEFAULT_SETTLE_FACTOR,
    measure_periods: int = classical.DEFAULT_MEASURE_PERIODS,
    tol: float = 1e-9,
) -> dict:
    """Down-sweep lock-in amplitude next to the averaged and first-order predictions.

    ``delta_over_u`` is traversed from large to small detuning.  Columns:
    time-domain amplitude, stable high KB root, number of KB roots, largest
    first-order amplitude in the a- and b-basis, and the largest of the three
    validity parameters evaluated on the time-domain amplitude.
    """
    grid = np.sort(np.asarray(delta_over_u, dtype=float))[::-1]
    deltas = grid * u_a
    settle = [classical.settle_periods_for(params.with_detuning(d), settle_factor) for d in deltas]
    # one common settle length keeps each segment an integer number of periods
    sweep = classical.sweep_response(
        params, deltas, "down", max(settle), measure_periods, tol=tol
    )
    cols = {k: [] for k in ("delta_over_u", "delta", "u", "v", "X_exact", "X_kb", "kb_roots", "X_rwa_a", "X_rwa_b", "validity")}
    for (delta, lock), ratio in zip(sweep, grid):
        point = params.with_detuning(delta)
        roots = kb.steady_states(point)
        cols["delta_over_u"].append(ratio)
        cols["delta"].append(delta)
        cols["u"].append(lock.u)
        cols["v"].append(lock.v)
        cols["X_exact"].append(lock.X)
        cols["X_kb"].append(kb.high_branch(point).state.X)
        cols["kb_roots"].append(len(roots))
        cols["X_rwa_a"].append(_largest(first_order_amplitudes(point, BasisChoice.system(point))))
        cols["X_rwa_b"].append(_largest(first_order_amplitudes(point, BasisChoice.pump(point))))
        cols["validity"].append(max(validity_epsilon(point, lock.X)))
    return {k: np.asarray(v) for k, v in cols.items()}


def figure_2a(delta_over_u=None, **kwargs) -> dict:
    if delta_over_u is None:
        delta_over_u = np.linspace(20.0, -10.0, 61)
    return frequency_response(fig2a_params(), delta_over_u, u_a=FIG2A_U, **kwargs)


def figure_2c(periods: int = 700, samples_per_period: int = 32, tol: float = 1e-10):
    """Periodogram of the lossless driven oscillator started at rest.

    ``periods`` counts drive periods; with ``omega/omega0 = 7/5`` a multiple
    of 7 places both tones exactly on frequency bins.  Returns the spectrum
    columns and a tone table.
    """
    p = fig2c_params()
    period = 2.0 * math.pi / p.omega
    traj = classical.integrate((0.0, 0.0), 0.0, periods * period, p, tol=tol, samples_per_period=samples_per_period)
    # drop the closing sample so the record spans exactly `periods` periods
    record = classical.Trajectory(traj.t[:-1], traj.x[:-1], traj.p[:-1])
    spec = classical.periodogram(record)
    exact = classical.driven_ho_exact(p)
    tones = {
        "tone": np.array([p.omega0, p.omega]),
        "amplitude_numeric": np.array([classical.tone_amplitude(spec, w) for w in (p.omega0, p.omega)]),
        "amplitude_exact": np.array([a for _, a in exact.tones()]),
        "amplitude_rwa_a": np.array([0.0, _largest(first_order_amplitudes(p, BasisChoice.system(p)))]),
        "amplitude_rwa_b": np.array([0.0, _largest(first_order_amplitudes(p, BasisChoice.pump(p)))]),
    }
    return {"omega_response": spec.omega, "psd": spec.psd}, tones


def figure_3b(delta_over_u=None, f_over_u=None, *, model=lindblad.Model.EFFECTIVE_1B, dim: int = 40, **kwargs) -> dict:
    """Stationary photon number on the (detuning, pump) plane."""
    if delta_over_u is None:
        delta_over_u = np.linspace(-1.0, 5.0, 121)
    if f_over_u is None:
        f_over_u = np.linspace(0.0, 1.2, 25)
    d = np.asarray(delta_over_u, dtype=float)
    f = np.asarray(f_over_u, dtype=float)
    scan = lindblad.mpr_scan(fig3_params(), d * FIG3_U, f * FIG3_U, model, fig3_kappa(), dim, **kwargs)
    dd, ff = np.meshgrid(d, f, indexing="ij")
    return {
        "delta_over_u": dd.ravel(),
        "f_over_u": ff.ravel(),
        "n_avg": scan.n_avg.ravel(),
        "converged": scan.converged.ravel().astype(int),
    }


def figure_3c(delta_over_u=None, *, dim: int = 40, models=None, n_max: int = 12, **kwargs):
    """Line cut at the canonical pump with resonance predictions in both bases."""
    if delta_over_u is None:
        delta_over_u = np.linspace(1.0, 5.0, 200)
    if models is None:
        models = (lindblad.Model.EXACT_ROTATED,)
    d = np.asarray(delta_over_u, dtype=float)
    p = fig3_params()
    curves = {"delta_over_u": d}
    for model in models:
        scan = lindblad.mpr_scan(p, d * FIG3_U, [FIG3_F_OVER_U * FIG3_U], model, fig3_kappa(), dim, **kwargs)
        curves[f"n_{model.value}"] = scan.n_avg[:, 0]
    rows = {"basis": [], "convention": [], "n": [], "delta_over_u": []}
    for basis in (BasisKind.SYSTEM_PHOTONS, BasisKind.PUMP_PHOTONS):
        for conv in lindblad.Convention:
            for n in range(1, n_max + 1):
                pred = lindblad.mpr_predicted(p, basis, n, conv)
                rows["basis"].append(basis.value)
                rows["convention"].append(conv.value)
                rows["n"].append(n)
                rows["delta_over_u"].append(pred.delta_a / FIG3_U)
    return curves, rows
