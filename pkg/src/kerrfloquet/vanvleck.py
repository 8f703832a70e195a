"""Rotating-frame Hamiltonian, its Fourier harmonics and the van Vleck expansion.

The lab Hamiltonian is built from the truncated quadratures at reference
frequency ``omega_c`` and moved to the frame rotating at the drive frequency,

    H_rot(t) = U^dag H(t) U - hbar*omega*n,    U = exp(-i omega t n),

which multiplies matrix element ``(j, k)`` by ``exp(i omega t (j - k))``.
``H_rot`` only contains harmonics ``l = 0, +-2, +-4`` of ``omega``; they are
extracted by an exact DFT over one drive period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import ValidationError
from .params import BasisChoice, RWACoefficients, SystemParams

L_MAX = 4
MIN_DIM = 6


@dataclass(frozen=True)
class FourierComponents:
    """Harmonics ``H_l`` with ``H_rot(t) = sum_l H_l exp(i l omega t)``.

    ``energy_offset`` is the scalar (identity) part of ``H_0``, which the
    effective Hamiltonians drop.
    """

    l_max: int
    components: dict
    omega: float
    hbar: float
    energy_offset: float
    basis: BasisChoice

    @property
    def dim(self) -> int:
        return self.components[0].shape[0]

    def at(self, t: float) -> np.ndarray:
        """Reassemble ``H_rot(t)`` from the harmonics."""
        out = np.zeros_like(self.components[0])
        for l, comp in self.components.items():
            out += comp * np.exp(1j * l * self.omega * t)
        return out


@dataclass(frozen=True)
class EffectiveHamiltonian:
    order: int
    basis: BasisChoice | None
    matrix: np.ndarray


def _check_dim(N: int) -> None:
    if int(N) != N or N < MIN_DIM:
        raise ValidationError(f"rotating-frame Hamiltonian needs N >= {MIN_DIM}, got {N}")


def _lab_parts(params: SystemParams, basis: BasisChoice, N: int):
    wc = basis.omega_c
    x = fock.position(N, params.m, wc, params.hbar)
    p = fock.momentum(N, params.m, wc, params.hbar)
    x2 = x @ x
    static = p @ p / (2.0 * params.m) + 0.5 * params.m * params.omega0**2 * x2
    if params.alpha:
        static = static + 0.25 * params.alpha * (x2 @ x2)
    return static, x


def lab_hamiltonian(params: SystemParams, basis: BasisChoice, t: float, N: int) -> np.ndarray:
    """``H(t)`` in the Fock basis of ``basis`` (no frame change)."""
    _check_dim(N)
    basis.check(params)
    static, x = _lab_parts(params, basis, N)
    return static - params.F * math.cos(params.omega * t) * x


def _rotate(H: np.ndarray, omega: float, t: float, hbar: float) -> np.ndarray:
    n = np.arange(H.shape[0])
    phase = np.exp(1j * omega * t * n)
    return phase[:, None] * H * phase.conj()[None, :] - hbar * omega * np.diag(n)


def rotated_hamiltonian(params: SystemParams, basis: BasisChoice, t: float, N: int) -> np.ndarray:
    """``H_rot(t) = U^dag H(t) U - hbar omega n`` with ``U = exp(-i omega t n)``."""
    return _rotate(lab_hamiltonian(params, basis, t, N), params.omega, t, params.hbar)


def energy_offset(params: SystemParams, basis: BasisChoice) -> float:
    """Identity component of the time-averaged rotating-frame Hamiltonian."""
    wc, hbar = basis.omega_c, params.hbar
    zero_point = hbar * (wc**2 + params.omega0**2) / (4.0 * wc)
    quartic = 3.0 * params.alpha * hbar**2 / (16.0 * params.m**2 * wc**2)
    return zero_point + quartic


def fourier_components(
    params: SystemParams,
    basis: BasisChoice,
    N: int,
    *,
    samples: int = 16,
    t0: float = 0.0,
    headroom: int = 0,
) -> FourierComponents:
    """Harmonics ``H_l = <H_rot(t) exp(-i l omega t)>`` over one drive period.

    ``samples`` equally spaced times starting at ``t0`` give an exact DFT for
    the band-limited integrand as long as ``samples > 2 * L_MAX``.  With
    ``headroom > 0`` the operators are built at ``N + headroom`` and cropped,
    which makes every kept matrix element exact (projection rather than
    product of truncated quadratures).
    """
    _check_dim(N)
    basis.check(params)
    if samples <= 2 * L_MAX:
        raise ValidationError(f"need more than {2 * L_MAX} samples per period")
    M = N + headroom
    static, x = _lab_parts(params, basis, M)
    omega, hbar = params.omega, params.hbar
    times = t0 + np.arange(samples) * (2.0 * math.pi / omega) / samples
    acc = {l: np.zeros((M, M), dtype=complex) for l in range(-L_MAX, L_MAX + 1)}
    for t in times:
        H_t = _rotate(static - params.F * math.cos(omega * t) * x, omega, t, hbar)
        for l in acc:
            acc[l] += H_t * np.exp(-1j * l * omega * t)
    components = {l: comp[:N, :N] / samples for l, comp in acc.items()}
    return FourierComponents(
        l_max=L_MAX,
        components=components,
        omega=omega,
        hbar=hbar,
        energy_offset=energy_offset(params, basis),
        basis=basis,
    )


def second_order_correction(components: FourierComponents, hbar: float, omega: float) -> np.ndarray:
    """``sum_{l != 0} H_l H_{-l} / (l hbar omega)``."""
    comps = components.components
    out = np.zeros_like(comps[0])
    for l in range(1, components.l_max + 1):
        Hp, Hm = comps[l], comps[-l]
        # l and -l together form a commutator, Hermitian by construction.
        out += (Hp @ Hm - Hm @ Hp) / (l * hbar * omega)
    return out


def effective_hamiltonian(
    components: FourierComponents, order: int, hbar: float | None = None, omega: float | None = None
) -> EffectiveHamiltonian:
    """Van Vleck effective Hamiltonian to first or second order, identity part removed."""
    if order not in (1, 2):
        raise ValidationError("only orders 1 and 2 of the van Vleck expansion are supported")
    hbar = components.hbar if hbar is None else hbar
    omega = components.omega if omega is None else omega
    H = components.components[0] - components.energy_offset * np.eye(components.dim)
    if order == 2:
        H = H + second_order_correction(components, hbar, omega)
    return EffectiveHamiltonian(order=order, basis=components.basis, matrix=H)


def rwa_analytic(coeffs: RWACoefficients, hbar: float, N: int) -> EffectiveHamiltonian:
    """Matrix of ``hbar[(-delta+u) n + (u/2) c^dag c^dag c c - f (c + c^dag)]``."""
    if int(N) != N or N < 2:
        raise ValidationError("N must be >= 2")
    n = np.arange(N, dtype=float)
    diag = (-coeffs.delta_c + coeffs.u_c) * n + 0.5 * coeffs.u_c * n * (n - 1.0)
    a = fock.annihilation(N)
    H = hbar * (np.diag(diag) - coeffs.f_c * (a + a.conj().T))
    return EffectiveHamiltonian(order=1, basis=None, matrix=H.astype(complex))


def extract_coefficients(H: np.ndarray, hbar: float) -> tuple[float, float, float]:
    """Read ``(delta, u, f)`` back off a matrix of rotating-wave form.

    Uses the three lowest diagonal elements, ``E_n/hbar = (u - delta) n +
    (u/2) n(n-1) + E_0/hbar``, and the ``(0, 1)`` element ``-hbar f``.
    """
    H = np.asarray(H)
    if H.shape[0] < 3:
        raise ValidationError("need at least three levels to extract coefficients")
    e0, e1, e2 = (H[k, k].real / hbar for k in range(3))
    u = e2 - 2.0 * e1 + e0
    delta = u - (e1 - e0)
    f = -H[0, 1].real / hbar
    return delta, u, f


def hermiticity_error(H: np.ndarray) -> float:
    return float(np.abs(H - H.conj().T).max())
