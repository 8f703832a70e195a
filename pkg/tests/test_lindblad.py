import math

import numpy as np
import pytest

from kerrfloquet import fock, lindblad
from kerrfloquet.errors import ConvergenceError, DegenerateSteadyStateError, ValidationError
from kerrfloquet.params import BasisChoice, BasisKind, SystemParams, compute_rwa_coefficients, params_from_rwa
from kerrfloquet.vanvleck import rwa_analytic

L_ = lindblad


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


def linear_model(N=12, delta=0.02, f=0.01, kappa=0.05):
    c = compute_rwa_coefficients(SystemParams(), BasisChoice.system(SystemParams()))
    coeffs = type(c)(delta, 0.0, f, 1.0, 1.0, 0.0, f)
    return rwa_analytic(coeffs, 1.0, N).matrix, kappa


def test_pure_decay_has_vacuum_steady_state():
    L = L_.liouvillian(np.zeros((5, 5)), 0.3, 1.0)
    rho = L_.steady_state_direct(L)
    assert np.abs(rho - fock.projector(5, 0)).max() < 1e-12


def test_trace_row_vanishes():
    H, kappa = linear_model(6)
    L = L_.liouvillian(H, kappa, 1.0)
    assert np.abs(L_.vec(np.eye(6)) @ L).max() < 1e-12


def test_non_hermitian_rejected():
    H = np.zeros((3, 3))
    H[0, 1] = 1.0
    with pytest.raises(ValidationError):
        L_.liouvillian(H, 0.1, 1.0)
    with pytest.raises(ValidationError):
        L_.liouvillian(np.eye(3), -0.1, 1.0)


def test_single_photon_decay():
    L = L_.liouvillian(np.zeros((4, 4)), 1.0, 1.0)
    times = np.linspace(0.1, 5.0, 20)
    ev = L_.evolve(fock.projector(4, 1), L, times, tol=1e-10)
    assert np.abs(ev.expectation(fock.number(4)) - np.exp(-times)).max() < 1e-8


def test_linear_model_number_decay():
    N, w0, kappa = 10, 1.0, 0.2
    L = L_.liouvillian(w0 * fock.number(N), kappa, 1.0)
    rho0 = fock.coherent_state(N, 0.9)
    n0 = fock.expectation(rho0, fock.number(N)).real
    times = np.linspace(0.5, 10.0, 12)
    ev = L_.evolve(rho0, L, times, tol=1e-10)
    assert np.abs(ev.expectation(fock.number(N)) - n0 * np.exp(-kappa * times)).max() < 1e-8
    assert ev.trace_drift < 1e-8 and ev.hermiticity_drift < 1e-9 and ev.min_eigenvalue > -1e-6


def test_coherent_steady_state_of_linear_mode():
    delta, f, kappa = 0.02, 0.01, 0.05
    H, _ = linear_model(20, delta, f, kappa)
    rho = L_.steady_state_direct(L_.liouvillian(H, kappa, 1.0))
    a = fock.annihilation(20)
    assert abs(fock.expectation(rho, a)) ** 2 == pytest.approx(f**2 / (delta**2 + kappa**2 / 4), rel=1e-8)
    fock.check_density_matrix(rho)


def test_direct_and_lu_agree_with_long_time_evolution():
    H, kappa = linear_model(8, 0.03, 0.01, 0.5)
    L = L_.liouvillian(H, kappa, 1.0)
    svd = L_.steady_state_direct(L, method="svd")
    lu = L_.steady_state_direct(L_.sparse_liouvillian(H, kappa, 1.0), method="lu")
    ev = L_.evolve(fock.projector(8, 0), L, [80.0], tol=1e-11)
    assert trace_distance(svd, lu) < 1e-10
    assert trace_distance(svd, ev.states[-1]) < 1e-8


def test_degenerate_null_space_reported():
    with pytest.raises(DegenerateSteadyStateError) as info:
        L_.steady_state_direct(L_.liouvillian(np.diag([0.0, 1.0, 2.5]), 0.0, 1.0))
    assert len(info.value.basis) == 3


def test_evolve_validation():
    L = L_.liouvillian(np.zeros((3, 3)), 1.0, 1.0)
    with pytest.raises(ValidationError):
        L_.evolve(fock.projector(3, 0), L, [1.0], tol=1e-3)
    with pytest.raises(ValidationError):
        L_.evolve(fock.projector(3, 0), L, [2.0, 1.0])
    with pytest.raises(ValidationError):
        L_.evolve(fock.projector(4, 0), L, [1.0])


def test_photon_number_average():
    T = 2.0
    t = np.linspace(0.0, 8 * T, 8 * 16 + 1)
    assert L_.photon_number_average(t, np.full_like(t, 1.7), T, 4) == pytest.approx(1.7, rel=1e-14)
    y = 1.0 + 0.3 * np.cos(2 * math.pi * t / T)
    assert L_.photon_number_average(t, y, T, 4) == pytest.approx(1.0, abs=1e-12)
    assert abs(L_.photon_number_average(t, y, T, 8) - L_.photon_number_average(t, y, T, 4)) < 1e-6
    with pytest.raises(ValidationError):
        L_.photon_number_average(t, y, T, 3)
    with pytest.raises(ValidationError):
        L_.photon_number_average(t[::2], y[::2], T, 4)


def small_kerr(f_over_u=0.5, u=0.05, detuning=0.04):
    return params_from_rwa(u, f_over_u * u, omega=1.0 + detuning)


def test_harmonic_balance_matches_time_evolution():
    p = small_kerr()
    kappa = 0.1
    gen = L_.periodic_generator(p, kappa, 8)
    state = L_.periodic_steady_state(gen, harmonics=5)
    period = 2 * math.pi / p.omega
    t_end = round(500 / period) * period
    times = t_end + period * np.arange(0, 8 * 16 + 1) / 16
    ev = L_.evolve(fock.projector(8, 0), gen, times, tol=1e-10)
    n_time = L_.photon_number_average(ev.times, ev.expectation(fock.number(8)), period, 8)
    assert state.average(fock.number(8)) == pytest.approx(n_time, rel=1e-6)
    assert trace_distance(state.at(t_end), ev.states[0]) < 1e-7
    assert ev.trace_drift < 1e-8 and ev.hermiticity_drift < 1e-9 and ev.min_eigenvalue > -1e-6


def test_evolve_method_reaches_stationarity():
    p = small_kerr()
    run = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, 0.2, 8, method="evolve")
    ref = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, 0.2, 8, harmonics=3)
    assert run.converged
    assert run.n_avg == pytest.approx(ref.n_avg, rel=1e-4)


def test_vacuum_without_drive():
    p = params_from_rwa(0.05, 0.0, omega=1.03)
    for model in (L_.Model.EFFECTIVE_1A, L_.Model.EFFECTIVE_1B, L_.Model.EFFECTIVE_2B):
        run = L_.stationary_photon_number(p, model, 0.05, 8)
        assert abs(run.n_avg) < 1e-10
    # the exact pump-frame model keeps a small squeezing population of b photons
    run = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, 0.05, 8)
    assert 0 < run.n_avg < 1e-3
    at_resonance = L_.stationary_photon_number(p.replace(omega=1.0, alpha=0.0), L_.Model.EXACT_ROTATED, 0.05, 8)
    assert abs(at_resonance.n_avg) < 1e-12


def test_exact_linear_model_matches_closed_form():
    # alpha = 0 with a drive well above the squeezing background
    p = params_from_rwa(0.0, 2e-3, omega=1.01)
    kappa = 4e-3
    c = compute_rwa_coefficients(p, BasisChoice.pump(p))
    run = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, kappa, 16)
    assert run.n_avg == pytest.approx(c.f_c**2 / (c.delta_c**2 + kappa**2 / 4), rel=1e-2)
    fock.check_density_matrix(run.rho_final, herm_tol=1e-10, trace_tol=1e-10, neg_tol=1e-8)


def test_effective_agrees_with_exact_off_resonance():
    u = 1e-3
    for d in (0.7, 1.75, 3.3):
        p = params_from_rwa(u, 0.3 * u, omega=1.0 + d * u)
        exact = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, 0.1 * u, 16).n_avg
        eff = L_.stationary_photon_number(p, L_.Model.EFFECTIVE_1B, 0.1 * u, 16).n_avg
        assert eff == pytest.approx(exact, rel=0.05)


def test_cutoff_robustness():
    p = small_kerr(0.8, 1e-2, 3e-2)
    n1 = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, 1e-3, 24).n_avg
    n2 = L_.stationary_photon_number(p, L_.Model.EXACT_ROTATED, 1e-3, 32).n_avg
    assert abs(n2 / n1 - 1) < 1e-4


def test_scan_zero_force_column_and_ordering():
    p = small_kerr()
    scan = L_.mpr_scan(p, [0.0, 0.02, 0.04], [0.0, 0.01], L_.Model.EFFECTIVE_1B, 0.01, 10)
    assert scan.n_avg.shape == (3, 2)
    assert np.abs(scan.n_avg[:, 0]).max() < 1e-10
    assert scan.converged.all()
    single = L_.mpr_scan(p, [0.04], [0.01], L_.Model.EFFECTIVE_1B, 0.01, 10)
    assert single.n_avg[0, 0] == scan.n_avg[2, 1]


def test_scan_raises_cutoff_when_tail_is_populated():
    p = small_kerr(1.5, 1e-2)
    scan = L_.mpr_scan(p, [0.0], [1.5e-2], L_.Model.EFFECTIVE_1B, 1e-3, 6, max_dim=30)
    assert scan.dims[0, 0] > 6


def test_scan_parallel_matches_serial(monkeypatch):
    p = small_kerr()
    args = (p, [0.0, 0.03], [0.01], L_.Model.EFFECTIVE_1A, 0.01, 8)
    serial = L_.mpr_scan(*args, workers=1)
    monkeypatch.setenv(L_.WORKERS_ENV, "2")
    parallel = L_.mpr_scan(*args)
    assert np.array_equal(serial.n_avg, parallel.n_avg)


def test_peaks_on_parabola_and_monotone():
    x = np.linspace(0.0, 1.0, 21)
    y = 1.0 - (x - 0.4137) ** 2
    (peak,) = L_.mpr_peaks(x, y)
    assert peak == pytest.approx(0.4137, abs=1e-12)
    assert L_.mpr_peaks(x, x) == []
    with pytest.raises(ValidationError):
        L_.mpr_peaks(x[:4], y[:4])


def test_peaks_drop_small_bumps():
    x = np.linspace(0, 10, 1001)
    y = np.exp(-((x - 3) ** 2) * 10) + 0.01 * np.exp(-((x - 7) ** 2) * 10)
    assert len(L_.mpr_peaks(x, y)) == 1


def test_predictions():
    p = params_from_rwa(1e-2, 8e-3)
    for kind in (BasisKind.SYSTEM_PHOTONS, BasisKind.PUMP_PHOTONS):
        assert L_.mpr_predicted(p, kind, 1, L_.Convention.N_MINUS_ONE).delta_a == 0.0
    a = [L_.mpr_predicted(p, BasisKind.SYSTEM_PHOTONS, n, L_.Convention.N_MINUS_ONE).delta_a for n in range(1, 9)]
    assert np.allclose(np.diff(a), 0.5e-2, rtol=1e-10)
    for conv in L_.Convention:
        b = [L_.mpr_predicted(p, BasisKind.PUMP_PHOTONS, n, conv).delta_a for n in range(1, 12)]
        assert np.all(np.diff(b) > 0)
        assert np.all(np.diff(np.diff(b)) < 0)
    # the degeneracy convention is the printed one shifted by two photons
    for kind in (BasisKind.SYSTEM_PHOTONS, BasisKind.PUMP_PHOTONS):
        lhs = L_.mpr_predicted(p, kind, 3, L_.Convention.DIAGONAL_DEGENERACY).delta_a
        rhs = L_.mpr_predicted(p, kind, 5, L_.Convention.N_MINUS_ONE).delta_a
        assert lhs == pytest.approx(rhs, rel=1e-12)
    with pytest.raises(ValidationError):
        L_.mpr_predicted(p, BasisKind.PUMP_PHOTONS, 0, L_.Convention.N_MINUS_ONE)


def test_pump_prediction_solves_its_equation():
    p = params_from_rwa(1e-2, 8e-3)
    pred = L_.mpr_predicted(p, BasisKind.PUMP_PHOTONS, 4, L_.Convention.DIAGONAL_DEGENERACY)
    q = p.replace(omega=1.0 + pred.delta_a)
    c = compute_rwa_coefficients(q, BasisChoice.pump(q))
    assert c.delta_c / c.u_c == pytest.approx(2.5, rel=1e-12)


def test_prediction_outside_bracket():
    # a Kerr shift this large puts high resonances beyond omega = 4 omega0
    p = params_from_rwa(0.3, 0.0)
    with pytest.raises(ConvergenceError):
        L_.mpr_predicted(p, BasisKind.PUMP_PHOTONS, 1000, L_.Convention.N_MINUS_ONE)


def test_match_peaks_recovers_labels():
    p = params_from_rwa(1e-2, 8e-3)
    truth = [L_.mpr_predicted(p, BasisKind.PUMP_PHOTONS, n, L_.Convention.DIAGONAL_DEGENERACY).delta_a for n in range(4, 8)]
    match = L_.match_peaks(p, BasisKind.PUMP_PHOTONS, truth)
    assert match.tail_error < 1e-12
    assert max(abs(e) for e in match.errors) < 1e-12
