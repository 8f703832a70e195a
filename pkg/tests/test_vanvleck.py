import math

import numpy as np
import pytest

from kerrfloquet import fock
from kerrfloquet.errors import ValidationError
from kerrfloquet.params import BasisChoice, RWACoefficients, SystemParams, compute_rwa_coefficients
from kerrfloquet.vanvleck import (
    effective_hamiltonian,
    extract_coefficients,
    fourier_components,
    hermiticity_error,
    lab_hamiltonian,
    rotated_hamiltonian,
    rwa_analytic,
    second_order_correction,
)

N = 32
INTERIOR = N - 4


@pytest.fixture(params=["a", "b"])
def basis_label(request):
    return request.param


def test_free_oscillator_in_own_frame():
    p = SystemParams()
    basis = BasisChoice.pump(p)
    H0 = rotated_hamiltonian(p, basis, 0.0, 12)[:10, :10]
    H1 = rotated_hamiltonian(p, basis, 0.77, 12)[:10, :10]
    assert np.abs(H0 - H1).max() < 1e-14
    assert np.abs(H0 - H0[0, 0] * np.eye(10)).max() < 1e-14


def test_rotation_at_time_zero(duffing):
    basis = BasisChoice.pump(duffing)
    lhs = rotated_hamiltonian(duffing, basis, 0.0, 12)
    rhs = lab_hamiltonian(duffing, basis, 0.0, 12) - duffing.hbar * duffing.omega * fock.number(12)
    assert np.abs(lhs - rhs).max() < 1e-14


def test_rotated_periodicity(duffing):
    basis = BasisChoice.system(duffing)
    t = 0.3
    T = 2 * math.pi / duffing.omega
    diff = rotated_hamiltonian(duffing, basis, t, 12) - rotated_hamiltonian(duffing, basis, t + T, 12)
    assert np.abs(diff).max() < 1e-12


def test_component_structure(duffing, basis_label):
    comps = fourier_components(duffing, BasisChoice.from_label(basis_label, duffing), N).components
    for l in range(1, 5):
        assert np.abs(comps[-l] - comps[l].conj().T).max() < 1e-12
    for l in (-3, -1, 1, 3):
        assert np.abs(comps[l]).max() < 1e-12
    assert hermiticity_error(comps[0]) < 1e-12


def test_band_limit_refinement(duffing):
    basis = BasisChoice.pump(duffing)
    c16 = fourier_components(duffing, basis, 16).components
    c32 = fourier_components(duffing, basis, 16, samples=32).components
    assert max(np.abs(c16[l] - c32[l]).max() for l in c16) < 1e-13
    with pytest.raises(ValidationError):
        fourier_components(duffing, basis, 16, samples=8)


def test_static_system_has_only_zero_harmonic():
    p = SystemParams(omega=1.3)
    comps = fourier_components(p, BasisChoice.system(p), 10, headroom=4).components
    assert all(np.abs(comps[l]).max() < 1e-14 for l in comps if l)
    # in the pump basis the detuned quadratic potential itself squeezes
    comps = fourier_components(p, BasisChoice.pump(p), 10, headroom=4).components
    assert np.abs(comps[2]).max() > 1e-3
    assert all(np.abs(comps[l]).max() < 1e-14 for l in (-4, -3, -1, 1, 3, 4))


def test_linear_drive_harmonics_are_single_ladder():
    p = SystemParams(F=0.05, omega=1.3)
    comps = fourier_components(p, BasisChoice.system(p), 10, headroom=4).components
    for l in (2, -2):
        c = comps[l]
        mask = np.abs(np.subtract.outer(np.arange(10), np.arange(10))) == 1
        assert np.abs(c[~mask]).max() < 1e-14
        assert np.abs(c).max() > 0


def test_first_order_matches_analytic(duffing, basis_label):
    basis = BasisChoice.from_label(basis_label, duffing)
    H1 = effective_hamiltonian(fourier_components(duffing, basis, N), 1).matrix
    ref = rwa_analytic(compute_rwa_coefficients(duffing, basis), duffing.hbar, N).matrix
    assert np.abs(H1 - ref)[:INTERIOR, :INTERIOR].max() < 1e-10


def test_headroom_makes_every_element_exact(duffing):
    basis = BasisChoice.pump(duffing)
    H1 = effective_hamiltonian(fourier_components(duffing, basis, 16, headroom=4), 1).matrix
    ref = rwa_analytic(compute_rwa_coefficients(duffing, basis), duffing.hbar, 16).matrix
    assert np.abs(H1 - ref).max() < 1e-12


def test_second_order_hermitian_and_vanishing(duffing):
    comps = fourier_components(duffing, BasisChoice.pump(duffing), N)
    H2 = second_order_correction(comps, duffing.hbar, duffing.omega)
    assert hermiticity_error(H2) < 1e-12
    assert np.abs(H2).max() > 0
    for free, basis in (
        (SystemParams(omega=1.1), BasisChoice.system(SystemParams(omega=1.1))),
        (SystemParams(omega=1.0), BasisChoice.pump(SystemParams(omega=1.0))),
    ):
        zero = second_order_correction(fourier_components(free, basis, N, headroom=4), 1.0, free.omega)
        assert np.abs(zero).max() < 1e-14


def test_bases_coincide_at_resonance():
    p = SystemParams(alpha=0.02, F=0.01, omega=1.0)
    Ha = effective_hamiltonian(fourier_components(p, BasisChoice.system(p), 16), 1).matrix
    Hb = effective_hamiltonian(fourier_components(p, BasisChoice.pump(p), 16), 1).matrix
    assert np.abs(Ha - Hb).max() < 1e-12


def test_diagonal_independent_of_time_origin(duffing):
    basis = BasisChoice.pump(duffing)
    d0 = np.diag(effective_hamiltonian(fourier_components(duffing, basis, 16), 1).matrix)
    d1 = np.diag(effective_hamiltonian(fourier_components(duffing, basis, 16, t0=0.37), 1).matrix)
    assert np.abs(d0 - d1).max() < 1e-12


def test_rwa_analytic_examples():
    c = RWACoefficients(0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0)
    assert np.array_equal(rwa_analytic(c, 1.0, 2).matrix, np.array([[0, -1], [-1, 0]], dtype=complex))
    c = RWACoefficients(0.3, 0.05, 0.0, 1.0, 1.0, 0.05, 0.0)
    n = np.arange(8)
    assert np.allclose(np.diag(rwa_analytic(c, 1.0, 8).matrix).real, (-0.3 + 0.05) * n + 0.025 * n * (n - 1))


def test_extract_coefficients_roundtrip(duffing):
    c = compute_rwa_coefficients(duffing, BasisChoice.pump(duffing))
    assert np.allclose(extract_coefficients(rwa_analytic(c, 1.0, 6).matrix, 1.0), c.triple(), rtol=1e-12)


def test_order_three_unsupported(duffing):
    comps = fourier_components(duffing, BasisChoice.pump(duffing), 8)
    with pytest.raises(ValidationError):
        effective_hamiltonian(comps, 3)
