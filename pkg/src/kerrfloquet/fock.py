"""Dense linear algebra on a truncated Fock space.

Operators are plain ``(N, N)`` complex numpy arrays.  Truncation makes
products of ladder operators wrong near the cutoff; functions that are exact
only on an upper-left block say how large that block is.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .errors import TruncationError, ValidationError

MAX_SQUEEZE = 2.0


def _check_dim(N: int) -> None:
    if int(N) != N or N < 2:
        raise ValidationError(f"Fock dimension must be an integer >= 2, got {N}")


def annihilation(N: int) -> np.ndarray:
    _check_dim(N)
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)


def creation(N: int) -> np.ndarray:
    return annihilation(N).conj().T


def number(N: int) -> np.ndarray:
    _check_dim(N)
    return np.diag(np.arange(N, dtype=float)).astype(complex)


def identity(N: int) -> np.ndarray:
    _check_dim(N)
    return np.eye(N, dtype=complex)


def position(N: int, m: float, omega_c: float, hbar: float) -> np.ndarray:
    """``sqrt(hbar/(2 m omega_c)) (c + c^dag)``."""
    a = annihilation(N)
    return math.sqrt(hbar / (2.0 * m * omega_c)) * (a + a.conj().T)


def momentum(N: int, m: float, omega_c: float, hbar: float) -> np.ndarray:
    """``i sqrt(m hbar omega_c / 2) (c^dag - c)``."""
    a = annihilation(N)
    return 1j * math.sqrt(m * hbar * omega_c / 2.0) * (a.conj().T - a)


def projector(N: int, n: int) -> np.ndarray:
    """``|n><n|``."""
    _check_dim(N)
    if not 0 <= n < N:
        raise ValidationError(f"Fock index {n} outside 0..{N - 1}")
    out = np.zeros((N, N), dtype=complex)
    out[n, n] = 1.0
    return out


def coherent_state(N: int, beta: complex) -> np.ndarray:
    """Density matrix of the coherent state ``|beta>`` truncated and renormalized."""
    _check_dim(N)
    n = np.arange(N)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    amps = np.exp(-0.5 * abs(beta) ** 2 - 0.5 * log_fact) * np.power(complex(beta), n)
    amps /= np.linalg.norm(amps)
    return np.outer(amps, amps.conj())


def _squeeze_matrix(z: float, N: int) -> np.ndarray:
    a = annihilation(N)
    a2 = a @ a
    return scipy.linalg.expm(0.5 * z * (a2 - a2.conj().T))


def exact_block(z: float, N: int, tol: float = 1e-8) -> int:
    """Size of the upper-left block on which ``squeeze_operator(z, N)`` is exact to ``tol``.

    Compared against the same exponential computed with twice the cutoff.
    """
    if z == 0:
        return N
    small = _squeeze_matrix(z, N)
    big = _squeeze_matrix(z, 2 * N)[:N, :N]
    diff = np.abs(small - big)
    level = np.maximum.outer(np.arange(N), np.arange(N))
    worst = np.zeros(N)
    np.maximum.at(worst, level.ravel(), diff.ravel())
    bad = np.flatnonzero(np.maximum.accumulate(worst) > tol)
    return int(bad[0]) if bad.size else N


def squeeze_operator(z: float, N: int, check: bool = True) -> np.ndarray:
    """Single-mode squeeze operator ``exp((z/2)(c^2 - c^dag^2))`` for real ``z``.

    Conjugation gives ``S^dag c S = cosh(z) c - sinh(z) c^dag``.  With
    ``check`` the matrix is compared against a larger-cutoff computation and
    :class:`TruncationError` is raised when no useful block survives.
    """
    _check_dim(N)
    if not math.isfinite(z):
        raise ValidationError("squeeze parameter must be finite")
    if abs(z) > MAX_SQUEEZE:
        raise TruncationError(f"|z| = {abs(z):.3g} exceeds the supported range {MAX_SQUEEZE}")
    if check and z != 0 and exact_block(z, N) < 2:
        raise TruncationError(f"cutoff N={N} too small for squeeze parameter z={z}")
    return _squeeze_matrix(z, N)


def transform_basis(matrix: np.ndarray, z: float, check: bool = True) -> np.ndarray:
    """Conjugate an operator or density matrix by the squeeze: ``S(z) M S(z)^dag``.

    A state written in the a-Fock basis is re-expressed in the b-Fock basis
    with ``transform_basis(rho_a, -z)`` where ``z`` comes from
    :func:`kerrfloquet.params.bogoliubov_coefficients`.
    """
    matrix = np.asarray(matrix, dtype=complex)
    if z == 0:
        return matrix.copy()
    S = squeeze_operator(z, matrix.shape[0], check=check)
    return S @ matrix @ S.conj().T


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """``Tr(rho op)``."""
    state = np.asarray(state)
    op = np.asarray(op)
    if state.shape != op.shape or state.ndim != 2:
        raise ValidationError(f"dimension mismatch: {state.shape} vs {op.shape}")
    # Tr(AB) without forming the product.
    return complex(np.sum(state * op.T))


def check_density_matrix(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-10, neg_tol=1e-8) -> None:
    """Raise :class:`ValidationError` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise ValidationError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -neg_tol:
        raise ValidationError("density matrix has negative eigenvalues")
