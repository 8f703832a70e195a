"""Physical parameters, operator-basis choice and rotating-frame coefficients.

The driven Duffing oscillator

    H(x, p, t) = p^2/(2m) + m*omega0^2*x^2/2 + alpha*x^4/4 - F*cos(omega*t)*x

is quantized with ladder operators ``c`` defined relative to a reference
frequency ``omega_c``.  Two choices matter: ``omega_c = omega0`` counts the
photons of the oscillator (the usual a-basis) and ``omega_c = omega`` counts
the photons of the pump (the b-basis).  Either way the rotating-wave
Hamiltonian has the form

    H_eff / hbar = (-delta_c + u_c) c^dag c + (u_c/2) c^dag c^dag c c - f_c (c + c^dag)

and only the coefficient triple depends on the basis.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping

from .errors import ValidationError

PARAM_KEYS = ("m", "omega0", "alpha", "F", "omega", "gamma", "hbar")


@dataclass(frozen=True)
class SystemParams:
    """Lab-frame parameters of the driven Duffing oscillator.

    ``gamma`` is a linear damping rate entering as ``-gamma * p`` in the
    momentum equation.  ``hbar`` is kept explicit so the classical limit can
    be taken by power counting.
    """

    m: float = 1.0
    omega0: float = 1.0
    alpha: float = 0.0
    F: float = 0.0
    omega: float = 1.0
    gamma: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for key in PARAM_KEYS:
            value = getattr(self, key)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"{key} must be a finite number, got {value!r}")
        for key in ("m", "omega0", "omega", "hbar"):
            if getattr(self, key) <= 0:
                raise ValidationError(f"{key} must be positive")
        for key in ("alpha", "gamma"):
            if getattr(self, key) < 0:
                raise ValidationError(f"{key} must be non-negative")

    @property
    def delta_a(self) -> float:
        """Drive detuning ``omega - omega0`` from the bare frequency."""
        return self.omega - self.omega0

    def replace(self, **changes) -> "SystemParams":
        data = asdict(self)
        data.update(changes)
        return SystemParams(**data)

    def with_detuning(self, delta_a: float) -> "SystemParams":
        return self.replace(omega=self.omega0 + delta_a)

    def to_dict(self) -> dict:
        return {key: float(getattr(self, key)) for key in PARAM_KEYS}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SystemParams":
        unknown = [key for key in data if key not in PARAM_KEYS]
        if unknown:
            raise ValidationError(f"unknown parameter keys: {unknown}")
        values = {}
        for key in PARAM_KEYS:
            if key in data:
                value = data[key]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValidationError(f"{key} must be a number, got {value!r}")
                values[key] = float(value)
        return cls(**values)

    @classmethod
    def from_json(cls, text: str) -> "SystemParams":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("parameter document must be a JSON object")
        return cls.from_dict({k: v for k, v in data.items() if k in PARAM_KEYS})


def params_from_rwa(
    u_a: float,
    f_a: float,
    omega: float | None = None,
    *,
    m: float = 1.0,
    omega0: float = 1.0,
    gamma: float = 0.0,
    hbar: float = 1.0,
) -> SystemParams:
    """Build lab parameters whose a-basis Kerr and pump coefficients are ``u_a``, ``f_a``."""
    alpha = 4.0 * m**2 * omega0**2 * u_a / (3.0 * hbar)
    force = 2.0 * f_a * math.sqrt(2.0 * m * omega0 * hbar)
    return SystemParams(
        m=m,
        omega0=omega0,
        alpha=alpha,
        F=force,
        omega=omega0 if omega is None else omega,
        gamma=gamma,
        hbar=hbar,
    )


class BasisKind(enum.Enum):
    SYSTEM_PHOTONS = "a"
    PUMP_PHOTONS = "b"
    CUSTOM = "custom"


@dataclass(frozen=True)
class BasisChoice:
    kind: BasisKind
    omega_c: float

    def __post_init__(self):
        if not self.omega_c > 0 or not math.isfinite(self.omega_c):
            raise ValidationError("reference frequency omega_c must be positive")

    @classmethod
    def system(cls, params: SystemParams) -> "BasisChoice":
        return cls(BasisKind.SYSTEM_PHOTONS, params.omega0)

    @classmethod
    def pump(cls, params: SystemParams) -> "BasisChoice":
        return cls(BasisKind.PUMP_PHOTONS, params.omega)

    @classmethod
    def custom(cls, omega_c: float) -> "BasisChoice":
        return cls(BasisKind.CUSTOM, omega_c)

    @classmethod
    def from_label(cls, label: str, params: SystemParams) -> "BasisChoice":
        if label == "a":
            return cls.system(params)
        if label == "b":
            return cls.pump(params)
        raise ValidationError(f"basis must be 'a' or 'b', got {label!r}")

    def check(self, params: SystemParams) -> None:
        """Reject a basis whose kind disagrees with its reference frequency."""
        expected = {
            BasisKind.SYSTEM_PHOTONS: params.omega0,
            BasisKind.PUMP_PHOTONS: params.omega,
        }.get(self.kind)
        if expected is not None and self.omega_c != expected:
            raise ValidationError(
                f"{self.kind.name} basis requires omega_c={expected}, got {self.omega_c}"
            )

    def resolve(self, params: SystemParams) -> "BasisChoice":
        """Re-anchor a named basis on ``params`` (used when the drive frequency changes)."""
        if self.kind is BasisKind.SYSTEM_PHOTONS:
            return BasisChoice.system(params)
        if self.kind is BasisKind.PUMP_PHOTONS:
            return BasisChoice.pump(params)
        return self


@dataclass(frozen=True)
class RWACoefficients:
    """Rotating-wave coefficients, all in rad/time.

    ``kerr_per_hbar`` and ``pump_sqrt_hbar`` are the hbar-free parts of
    ``u_c = kerr_per_hbar * hbar`` and ``f_c = pump_sqrt_hbar / sqrt(hbar)``.
    """

    delta_c: float
    u_c: float
    f_c: float
    omega_c: float
    hbar: float
    kerr_per_hbar: float
    pump_sqrt_hbar: float

    def triple(self) -> tuple[float, float, float]:
        return (self.delta_c, self.u_c, self.f_c)


def _detuning(omega: float, omega0: float, omega_c: float) -> float:
    # Factored form: exact zero at omega = omega0 and no cancellation for either named basis.
    return (omega - omega_c) + (omega_c - omega0) * (omega_c + omega0) / (2.0 * omega_c)


def compute_rwa_coefficients(params: SystemParams, basis: BasisChoice) -> RWACoefficients:
    """Coefficients of the rotating-wave Hamiltonian in the given operator basis.

    The Kerr coefficient is ``3 alpha hbar / (4 m^2 omega_c^2)``, which is the
    value for which normal ordering of ``alpha x^4 / 4`` reproduces the
    ``(u_c/2) c^dag c^dag c c`` term exactly.
    """
    omega_c = basis.omega_c
    if not omega_c > 0:
        raise ValidationError("reference frequency omega_c must be positive")
    basis.check(params)
    m, hbar = params.m, params.hbar
    kerr = 3.0 * params.alpha / (4.0 * m**2 * omega_c**2)
    pump = params.F / (2.0 * math.sqrt(2.0 * m * omega_c))
    return RWACoefficients(
        delta_c=_detuning(params.omega, params.omega0, omega_c),
        u_c=kerr * hbar,
        f_c=pump / math.sqrt(hbar),
        omega_c=omega_c,
        hbar=hbar,
        kerr_per_hbar=kerr,
        pump_sqrt_hbar=pump,
    )


@dataclass(frozen=True)
class BogoliubovCoefficients:
    """``a = mu*b - nu*b^dag`` with ``mu = cosh|z|`` and ``nu = sign(z) sinh|z|``."""

    mu: float
    nu: float
    z: float


def bogoliubov_coefficients(omega0: float, omega: float) -> BogoliubovCoefficients:
    if not (omega0 > 0 and omega > 0):
        raise ValidationError("frequencies must be positive")
    r = math.sqrt(omega / omega0)
    mu = 0.5 * (r + 1.0 / r)
    nu = 0.5 * (r - 1.0 / r)
    # mu = cosh(z), nu = sinh(z) with z = log(r); log is exact where arccosh loses digits near 1.
    z = math.log(r)
    return BogoliubovCoefficients(mu=mu, nu=nu, z=z)


def validity_epsilon(params: SystemParams, amplitude: float) -> tuple[float, float, float]:
    """The three smallness parameters of the averaging expansion at amplitude ``X``.

    Returns ``(alpha X^2/(m omega^2), |omega^2 - omega0^2|/omega^2,
    sqrt(alpha F^2/(m^3 omega^6)))``.  Deciding what counts as small is left
    to the caller.
    """
    if amplitude < 0:
        raise ValidationError("amplitude must be non-negative")
    m, w, w0 = params.m, params.omega, params.omega0
    eps1 = params.alpha * amplitude**2 / (m * w**2)
    eps2 = abs((w - w0) * (w + w0)) / w**2
    eps3 = math.sqrt(params.alpha * params.F**2 / (m**3 * w**6))
    return eps1, eps2, eps3
