"""Mean-field equations of motion and their classical limit.

From the rotating-wave Hamiltonian the Heisenberg equation for ``c`` is
taken in expectation with ``<c> -> beta``:

    d beta/dt = i (delta_c - u_c) beta - i u_c |beta|^2 beta + i f_c.

Each monomial remembers how its coefficient scales with hbar (``u_c ~
hbar``, ``f_c ~ hbar^-1/2``).  Substituting ``beta = sqrt(m omega_c /
(2 hbar)) (u + i v)`` then gives every term a net hbar power; positive
powers vanish as hbar -> 0 and the rest is a polynomial vector field for
the quadratures ``(u, v)`` that can be compared with the averaged classical
equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .params import BasisChoice, RWACoefficients, SystemParams, compute_rwa_coefficients


@dataclass(frozen=True)
class Monomial:
    """``coeff * hbar**hbar_exponent * beta**m * conj(beta)**n``."""

    m: int
    n: int
    coeff: complex
    hbar_exponent: Fraction


@dataclass(frozen=True)
class ComplexPolynomialVF:
    """Right-hand side of ``d beta/dt``.

    The same ``(m, n)`` powers may occur more than once when their
    coefficients scale differently with hbar (the linear term mixes the
    hbar-free detuning with the hbar-linear Kerr shift); ``(m, n,
    hbar_exponent)`` is unique.
    """

    monomials: tuple[Monomial, ...]

    def __post_init__(self):
        keys = [(t.m, t.n, t.hbar_exponent) for t in self.monomials]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate monomial keys")

    def __call__(self, beta: complex, hbar: float) -> complex:
        return sum(
            t.coeff * hbar ** float(t.hbar_exponent) * beta**t.m * np.conj(beta) ** t.n
            for t in self.monomials
        )


def meanfield_eom(coeffs: RWACoefficients, hbar: float | None = None) -> ComplexPolynomialVF:
    """Mean-field ``d beta/dt`` of the rotating-wave Hamiltonian with hbar bookkeeping."""
    if hbar is not None and hbar != coeffs.hbar:
        raise ValidationError("hbar differs from the one the coefficients were computed with")
    terms = []
    if coeffs.delta_c:
        terms.append(Monomial(1, 0, 1j * coeffs.delta_c, Fraction(0)))
    if coeffs.kerr_per_hbar:
        terms.append(Monomial(1, 0, -1j * coeffs.kerr_per_hbar, Fraction(1)))
        # [c, c^dag c^dag c c] = 2 c^dag c c, times u_c/2.
        terms.append(Monomial(2, 1, -1j * coeffs.kerr_per_hbar, Fraction(1)))
    if coeffs.pump_sqrt_hbar:
        terms.append(Monomial(0, 0, 1j * coeffs.pump_sqrt_hbar, Fraction(-1, 2)))
    return ComplexPolynomialVF(tuple(terms))


@dataclass(frozen=True)
class QuadratureVF:
    """``d(u, v)/dt = linear @ (u, v) + X^2 * cubic @ (u, v) + drive``."""

    linear: np.ndarray
    cubic: np.ndarray
    drive: np.ndarray

    def __call__(self, u: float, v: float) -> np.ndarray:
        w = np.array([u, v], dtype=float)
        return self.linear @ w + (u * u + v * v) * (self.cubic @ w) + self.drive

    def flat(self) -> np.ndarray:
        return np.concatenate([self.linear.ravel(), self.cubic.ravel(), self.drive])

    def with_damping(self, gamma: float) -> "QuadratureVF":
        """Add ``-(gamma/2)`` to both diagonal entries of the linear block."""
        return QuadratureVF(self.linear - 0.5 * gamma * np.eye(2), self.cubic.copy(), self.drive.copy())

    def jacobian(self, u: float, v: float) -> np.ndarray:
        w = np.array([u, v])
        return self.linear + (u * u + v * v) * self.cubic + 2.0 * np.outer(self.cubic @ w, w)


def _complex_to_real(coeff: complex, conjugate: bool) -> np.ndarray:
    # Matrix of w -> coeff * w (or coeff * conj(w)) acting on (Re w, Im w).
    a, b = coeff.real, coeff.imag
    if conjugate:
        return np.array([[a, b], [b, -a]])
    return np.array([[a, -b], [b, a]])


def classical_limit(vf: ComplexPolynomialVF, params: SystemParams, basis: BasisChoice) -> QuadratureVF:
    """hbar -> 0 limit of a mean-field field in the quadratures ``(u, v)``.

    ``beta = lam * hbar^-1/2 * (u + i v)`` with ``lam = sqrt(m omega_c / 2)``,
    so ``d(u+iv)/dt`` gains ``lam^(m+n-1)`` and net hbar power
    ``e - (m+n-1)/2`` per monomial.  Terms with a positive power are dropped;
    a negative power means the scaling is malformed.
    """
    lam = math.sqrt(params.m * basis.omega_c / 2.0)
    linear = np.zeros((2, 2))
    cubic = np.zeros((2, 2))
    drive = np.zeros(2)
    for t in vf.monomials:
        degree = t.m + t.n
        power = t.hbar_exponent - Fraction(degree - 1, 2)
        if power < 0:
            raise ValidationError(
                f"monomial beta^{t.m} beta*^{t.n} diverges as hbar -> 0 (power {power})"
            )
        if power > 0:
            continue
        coeff = complex(t.coeff) * lam ** (degree - 1)
        if (t.m, t.n) == (0, 0):
            drive += np.array([coeff.real, coeff.imag])
        elif (t.m, t.n) in ((1, 0), (0, 1)):
            linear += _complex_to_real(coeff, conjugate=(t.n == 1))
        elif (t.m, t.n) == (2, 1):
            cubic += _complex_to_real(coeff, conjugate=False)
        else:
            raise ValidationError(f"monomial beta^{t.m} beta*^{t.n} has no quadrature representation")
    return QuadratureVF(linear, cubic, drive)


def classical_field(params: SystemParams, basis: BasisChoice) -> QuadratureVF:
    """Shortcut: rotating-wave coefficients -> mean field -> classical limit."""
    coeffs = compute_rwa_coefficients(params, basis)
    return classical_limit(meanfield_eom(coeffs), params, basis)


_BLOCKS = {"linear": slice(0, 4), "cubic": slice(4, 8), "drive": slice(8, 10)}


def compare_vector_fields(
    vf1: QuadratureVF, vf2: QuadratureVF, *, block: str | None = None, relative: bool = True
) -> float:
    """Largest coefficient-wise deviation between two quadrature fields.

    Relative deviations use ``max(|c1|, |c2|)`` as the scale, falling back to
    the absolute difference when both coefficients are below 1e-300.
    """
    a, b = vf1.flat(), vf2.flat()
    if block is not None:
        if block not in _BLOCKS:
            raise ValidationError(f"block must be one of {sorted(_BLOCKS)}")
        a, b = a[_BLOCKS[block]], b[_BLOCKS[block]]
    diff = np.abs(a - b)
    if not relative:
        return float(diff.max())
    scale = np.maximum(np.abs(a), np.abs(b))
    tiny = scale < 1e-300
    rel = np.where(tiny, diff, diff / np.where(tiny, 1.0, scale))
    return float(rel.max())


def stationary_amplitudes(field: QuadratureVF) -> list[float]:
    """Amplitudes ``X`` of the fixed points of a rotation-invariant quadrature field.

    Valid for fields of the form produced by :func:`classical_limit` plus
    damping: ``linear = [[-g, -d], [d, -g]]``, ``cubic = [[0, k], [-k, 0]]``
    and a drive of magnitude ``f``.  Solves ``Y((d - kY)^2 + g^2) = f^2`` for
    ``Y = X^2``.
    """
    g = -field.linear[0, 0]
    d = field.linear[1, 0]
    k = field.cubic[0, 1]
    f2 = float(field.drive @ field.drive)
    if f2 == 0.0:
        return [0.0]
    poly = [k * k, -2.0 * d * k, d * d + g * g, -f2]
    while poly and poly[0] == 0.0:
        poly.pop(0)
    roots = np.roots(poly)
    ys = sorted(r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0)
    return [math.sqrt(y) for y in ys]


def first_order_amplitudes(params: SystemParams, basis: BasisChoice) -> list[float]:
    """Stationary amplitudes predicted by the first-order expansion in ``basis``.

    The classical limit of the rotating-wave mean field, with the damping
    ``gamma`` of ``params`` added, is solved for its fixed points.  In the
    pump basis this reproduces the averaged classical equations; in the
    system basis it carries the detuning ``omega - omega0``.
    """
    return stationary_amplitudes(classical_field(params, basis).with_damping(params.gamma))
