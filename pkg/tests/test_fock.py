import math

import numpy as np
import pytest

from kerrfloquet import fock
from kerrfloquet.errors import TruncationError, ValidationError
from kerrfloquet.params import bogoliubov_coefficients


def test_qubit_annihilation():
    assert np.array_equal(fock.annihilation(2), np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("N", [2, 3, 17, 64, 128])
def test_truncated_commutator(N):
    a = fock.annihilation(N)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(N)
    expected[-1, -1] = 1 - N
    assert np.abs(comm - expected).max() < 1e-12


def test_position_second_moment():
    N, m, wc, hbar = 20, 1.3, 0.7, 0.4
    x = fock.position(N, m, wc, hbar)
    x2 = np.real(np.diag(x @ x))
    n = np.arange(N - 1)
    assert np.allclose(x2[: N - 1], hbar / (2 * m * wc) * (2 * n + 1), rtol=1e-14)


def test_hermitian_by_construction():
    for op in (fock.number(9), fock.position(9, 1.0, 1.0, 1.0), fock.momentum(9, 1.0, 1.0, 1.0)):
        assert np.abs(op - op.conj().T).max() == 0.0


def test_squeeze_identity_at_zero():
    assert np.array_equal(fock.squeeze_operator(0.0, 10), np.eye(10))
    rho = fock.coherent_state(10, 0.3)
    assert np.array_equal(fock.transform_basis(rho, 0.0), rho)


def test_squeeze_unitary_on_interior():
    z, N = 0.4, 60
    S = fock.squeeze_operator(z, N)
    k = math.ceil(4 * abs(z) * math.sqrt(N))
    block = (S.conj().T @ S)[: N - k, : N - k]
    assert np.abs(block - np.eye(N - k)).max() < 1e-8


def test_squeeze_conjugation_reproduces_bogoliubov():
    c = bogoliubov_coefficients(1.0, 1.44)
    N = 80
    S = fock.squeeze_operator(c.z, N)
    a = fock.annihilation(N)
    lhs = S.conj().T @ a @ S
    rhs = c.mu * a - c.nu * a.conj().T
    # two truncated factors: keep to the lower half of the space
    K = N // 2
    assert np.abs(lhs - rhs)[:K, :K].max() < 1e-8


def test_squeeze_composition():
    N = 60
    lhs = fock.squeeze_operator(0.3, N) @ fock.squeeze_operator(-0.5, N)
    rhs = fock.squeeze_operator(-0.2, N)
    assert np.abs(lhs - rhs)[:30, :30].max() < 1e-8


def test_squeezed_vacuum_photon_number():
    N = 80
    rho = fock.transform_basis(fock.projector(N, 0), 0.5)
    n = fock.expectation(rho, fock.number(N)).real
    assert n == pytest.approx(math.sinh(0.5) ** 2, abs=1e-6)
    assert n == pytest.approx(0.27154, abs=1e-5)


def test_photon_number_two_paths():
    c = bogoliubov_coefficients(1.0, 1.3)
    N = 70
    rho_a = fock.coherent_state(N, 0.8 + 0.3j)
    n_a = fock.expectation(rho_a, fock.number(N))
    rho_b = fock.transform_basis(rho_a, -c.z)
    b = fock.annihilation(N)
    a_of_b = c.mu * b - c.nu * b.conj().T
    n_b = fock.expectation(rho_b, a_of_b.conj().T @ a_of_b)
    assert abs(n_a - n_b) < 1e-8


def test_expectations():
    N = 6
    assert fock.expectation(fock.projector(N, 0), fock.number(N)) == 0
    assert fock.expectation(fock.projector(N, 4), fock.number(N)) == 4
    rho = fock.coherent_state(N, 0.5j)
    A = fock.annihilation(N) + 2 * fock.number(N)
    assert fock.expectation(rho, A.conj().T) == pytest.approx(np.conj(fock.expectation(rho, A)), abs=1e-14)
    with pytest.raises(ValidationError):
        fock.expectation(fock.projector(3, 0), fock.number(4))


def test_truncation_errors():
    with pytest.raises(TruncationError):
        fock.squeeze_operator(3.0, 40)
    with pytest.raises(TruncationError):
        fock.squeeze_operator(1.5, 3)
    with pytest.raises(ValidationError):
        fock.projector(4, 4)


def test_density_matrix_check():
    fock.check_density_matrix(fock.coherent_state(8, 0.4))
    with pytest.raises(ValidationError):
        fock.check_density_matrix(2 * fock.projector(3, 0))
    bad = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValidationError):
        fock.check_density_matrix(bad)
