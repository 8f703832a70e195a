"""Open-system dynamics with photon loss and multiphoton-resonance analysis.

The master equation

    d rho/dt = -(i/hbar) [H, rho] + kappa (c rho c^dag - {c^dag c, rho}/2)

is handled either with a time-independent effective Hamiltonian or with the
full rotating-frame Hamiltonian ``H_rot(t)``, which is periodic in time.
Superoperators use column stacking: ``vec(A rho B) = (B^T kron A) vec(rho)``.

The periodic case has an asymptotic state that is itself periodic.  Besides
plain time stepping, :func:`periodic_steady_state` obtains it directly from
the Fourier-coupled stationarity equations

    i k Omega rho_k = sum_l L_l rho_{k-l}

truncated to ``|k| <= harmonics``, which avoids integrating over ``1/kappa``
time scales.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.signal import find_peaks

from . import fock
from .errors import ConvergenceError, DegenerateSteadyStateError, ValidationError
from .params import (
    BasisChoice,
    BasisKind,
    SystemParams,
    compute_rwa_coefficients,
)
from .vanvleck import fourier_components, rwa_analytic, second_order_correction

WORKERS_ENV = "KERRFLOQUET_WORKERS"
TRACE_TOL = 1e-8
NEGATIVITY_TOL = 1e-6
TAIL_LEVELS = 4


class Model(enum.Enum):
    EXACT_ROTATED = "exact"
    EFFECTIVE_1A = "eff1a"
    EFFECTIVE_1B = "eff1b"
    EFFECTIVE_2B = "eff2b"


class Convention(enum.Enum):
    N_MINUS_ONE = "eq6"
    DIAGONAL_DEGENERACY = "degeneracy"


# --- superoperators -------------------------------------------------------


def _check_hermitian(H: np.ndarray) -> None:
    if np.abs(H - H.conj().T).max() > 1e-10 * max(1.0, np.abs(H).max()):
        raise ValidationError("Hamiltonian is not Hermitian")


def liouvillian(H: np.ndarray, kappa: float, hbar: float, loss: np.ndarray | None = None) -> np.ndarray:
    """Dense ``N^2 x N^2`` Lindblad generator for a Hermitian ``H``."""
    H = np.asarray(H, dtype=complex)
    _check_hermitian(H)
    if kappa < 0:
        raise ValidationError("kappa must be non-negative")
    N = H.shape[0]
    c = fock.annihilation(N) if loss is None else np.asarray(loss, dtype=complex)
    eye = np.eye(N)
    L = -1j / hbar * (np.kron(eye, H) - np.kron(H.T, eye))
    if kappa:
        cdc = c.conj().T @ c
        L += kappa * (np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye))
    return L


def _sparse_commutator(H, hbar):
    eye = sp.identity(H.shape[0], format="csr")
    Hs = sp.csr_matrix(H)
    return (-1j / hbar) * (sp.kron(eye, Hs) - sp.kron(Hs.T, eye))


def _sparse_dissipator(c, kappa):
    N = c.shape[0]
    eye = sp.identity(N, format="csr")
    cs = sp.csr_matrix(c)
    cdc = (cs.conj().T @ cs).tocsr()
    return kappa * (sp.kron(cs.conj(), cs) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye))


def sparse_liouvillian(H, kappa, hbar, loss=None):
    H = np.asarray(H, dtype=complex)
    _check_hermitian(H)
    c = fock.annihilation(H.shape[0]) if loss is None else loss
    return (_sparse_commutator(H, hbar) + _sparse_dissipator(c, kappa)).tocsc()


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, N: int) -> np.ndarray:
    return np.asarray(v).reshape(N, N, order="F")


def _trace_row(N: int) -> np.ndarray:
    return np.arange(N) * (N + 1)


# --- time-periodic generator ---------------------------------------------


@dataclass(frozen=True)
class PeriodicLindbladian:
    """``H(t) = sum_l H_l exp(i l omega t)`` with photon loss through ``loss``."""

    components: dict
    omega: float
    kappa: float
    hbar: float
    loss: np.ndarray

    @property
    def dim(self) -> int:
        return self.components[0].shape[0]

    def hamiltonian(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.components[0])
        for l, comp in self.components.items():
            out += comp * np.exp(1j * l * self.omega * t)
        return out

    def active(self) -> dict:
        """Components above round-off, ``1e-12`` relative to the largest one."""
        scale = max(np.abs(c).max() for c in self.components.values())
        return {l: c for l, c in self.components.items() if l == 0 or np.abs(c).max() > 1e-12 * scale}

    def harmonic_step(self) -> int:
        """Greatest common divisor of the harmonics present (2 for the Duffing drive)."""
        ls = [abs(l) for l in self.active() if l]
        return reduce(math.gcd, ls) if ls else 1


def static_rhs(L):
    def rhs(t, y):
        return L @ y

    return rhs


def _periodic_rhs(gen: PeriodicLindbladian):
    N = gen.dim
    c = gen.loss
    cd = c.conj().T
    cdc = cd @ c
    k, hbar = gen.kappa, gen.hbar

    def rhs(t, y):
        rho = y.reshape(N, N, order="F")
        H = gen.hamiltonian(t)
        out = (-1j / hbar) * (H @ rho - rho @ H)
        if k:
            out += k * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
        return out.reshape(-1, order="F")

    return rhs


@dataclass(frozen=True)
class Evolution:
    times: np.ndarray
    states: np.ndarray
    trace_drift: float
    hermiticity_drift: float
    min_eigenvalue: float

    def expectation(self, op: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("tij,ji->t", self.states, op))


def evolve(rho0: np.ndarray, generator, times, tol: float = 1e-9) -> Evolution:
    """Integrate from ``rho0`` at ``t = 0`` and return the states at ``times``.

    ``generator`` is a dense or sparse superoperator or a
    :class:`PeriodicLindbladian`.  Runge-Kutta 4(5) on the vectorized state;
    no trace renormalization is applied.  Trace drift above 1e-8 or
    eigenvalues below -1e-6 raise :class:`ConvergenceError`.
    """
    if not 1e-12 < tol < 1e-4:
        raise ValidationError("tol must lie in (1e-12, 1e-4)")
    rho0 = np.asarray(rho0, dtype=complex)
    fock.check_density_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")
    N = rho0.shape[0]
    if isinstance(generator, PeriodicLindbladian):
        if generator.dim != N:
            raise ValidationError("state and generator dimensions differ")
        rhs = _periodic_rhs(generator)
    else:
        if generator.shape != (N * N, N * N):
            raise ValidationError("state and generator dimensions differ")
        rhs = static_rhs(generator)
    if times[0] < 0:
        raise ValidationError("rho0 is the state at t = 0; times must be non-negative")
    t0 = 0.0
    sol = solve_ivp(
        rhs, (t0, times[-1]), vec(rho0), method="RK45", t_eval=times, rtol=tol, atol=tol * 1e-2
    )
    if not sol.success:
        raise ConvergenceError(f"master-equation integration failed: {sol.message}", where=sol.t[-1] if sol.t.size else t0)
    states = np.stack([unvec(sol.y[:, i], N) for i in range(sol.y.shape[1])])
    traces = np.einsum("tii->t", states)
    trace_drift = float(np.abs(traces - 1.0).max())
    herm = float(np.abs(states - states.conj().transpose(0, 2, 1)).max())
    min_eig = float(min(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min() for s in states))
    if trace_drift > TRACE_TOL:
        raise ConvergenceError(f"trace drift {trace_drift:.3g} exceeds {TRACE_TOL}")
    if min_eig < -NEGATIVITY_TOL:
        raise ConvergenceError(f"density matrix lost positivity (min eigenvalue {min_eig:.3g})")
    return Evolution(times, states, trace_drift, herm, min_eig)


# --- stationary states ------------------------------------------------------


def _hermitize(rho):
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def steady_state_direct(L, method: str = "auto") -> np.ndarray:
    """Stationary density matrix of a time-independent generator.

    ``method="svd"`` takes the right singular vector(s) for singular values
    below ``1e-10 * ||L||`` and raises :class:`DegenerateSteadyStateError`
    with all of them when there is more than one.  ``method="lu"`` replaces
    one equation by the trace condition and uses a sparse LU; a singular
    factorization falls back to the SVD path.  ``auto`` uses SVD up to
    ``N = 20``.
    """
    n2 = L.shape[0]
    N = int(round(math.sqrt(n2)))
    if N * N != n2 or L.shape != (n2, n2):
        raise ValidationError("generator must be square with side N^2")
    if method == "auto":
        method = "svd" if N <= 20 else "lu"
    dense = L.toarray() if sp.issparse(L) else np.asarray(L)
    norm = np.abs(dense).sum(axis=0).max() if method == "svd" else spla.norm(sp.csc_matrix(L), 1)
    if method == "svd":
        _, s, vh = scipy.linalg.svd(dense)
        null = vh[s <= 1e-10 * norm].conj()
        if null.shape[0] == 0:
            null = vh[-1:].conj()
        if null.shape[0] > 1:
            basis = [_hermitize_safe(unvec(v, N)) for v in null]
            raise DegenerateSteadyStateError(f"{null.shape[0]}-dimensional null space", basis)
        rho = _hermitize(unvec(null[0], N))
    elif method == "lu":
        A = sp.csr_matrix(L, dtype=complex)
        A = _replace_row(A, 0, _trace_row(N), np.ones(N))
        rhs = np.zeros(n2, dtype=complex)
        rhs[0] = 1.0
        try:
            x = spla.splu(A.tocsc()).solve(rhs)
        except RuntimeError:
            return steady_state_direct(L, method="svd")
        rho = _hermitize(unvec(x, N))
    else:
        raise ValidationError("method must be 'auto', 'svd' or 'lu'")
    residual = np.abs((L @ vec(rho))).max() if not sp.issparse(L) else np.abs(L @ vec(rho)).max()
    if residual > 1e-10 * norm:
        raise ConvergenceError(f"steady-state residual {residual:.3g} too large")
    return rho


def _hermitize_safe(rho):
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    return rho / tr if abs(tr) > 1e-14 else rho


def _replace_row(A: sp.csr_matrix, row: int, cols, values) -> sp.csr_matrix:
    mask = np.ones(A.shape[0])
    mask[row] = 0.0
    repl = sp.csr_matrix((np.asarray(values, dtype=complex), (np.full(len(cols), row), cols)), shape=A.shape)
    return (sp.diags(mask) @ A + repl).tocsr()


@dataclass(frozen=True)
class PeriodicState:
    """``rho(t) = sum_k rho_k exp(i k step omega t)``."""

    components: dict
    omega: float
    step: int

    def at(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.components[0])
        for k, comp in self.components.items():
            out += comp * np.exp(1j * k * self.step * self.omega * t)
        return out

    def average(self, op: np.ndarray) -> float:
        """Time average of ``Tr(rho(t) op)`` over a period."""
        return float(np.real(fock.expectation(self.components[0], op)))


def periodic_steady_state(gen: PeriodicLindbladian, harmonics: int = 2) -> PeriodicState:
    """Asymptotic periodic state from the truncated harmonic-balance equations."""
    if harmonics < 0:
        raise ValidationError("harmonics must be non-negative")
    N = gen.dim
    n2 = N * N
    step = gen.harmonic_step()
    supers = {}
    for l, comp in gen.active().items():
        if l % step:
            raise ValidationError("harmonics are not multiples of the common step")
        supers[l // step] = _sparse_commutator(comp, gen.hbar)
    supers[0] = supers.get(0, sp.csr_matrix((n2, n2), dtype=complex)) + _sparse_dissipator(gen.loss, gen.kappa)
    ks = list(range(-harmonics, harmonics + 1))
    blocks = []
    for k in ks:
        row = []
        for kk in ks:
            blk = supers.get(k - kk)
            if k == kk:
                shift = sp.identity(n2, format="csr") * (1j * k * step * gen.omega)
                blk = blk - shift
            row.append(blk)
        blocks.append(row)
    A = sp.bmat(blocks, format="csr", dtype=complex)
    r0 = harmonics * n2
    A = _replace_row(A, r0, r0 + _trace_row(N), np.ones(N))
    rhs = np.zeros(A.shape[0], dtype=complex)
    rhs[r0] = 1.0
    try:
        x = spla.splu(A.tocsc(), permc_spec="COLAMD").solve(rhs)
    except RuntimeError as exc:
        raise ConvergenceError(f"harmonic-balance system is singular: {exc}") from exc
    comps = {k: unvec(x[i * n2 : (i + 1) * n2], N) for i, k in enumerate(ks)}
    comps[0] = 0.5 * (comps[0] + comps[0].conj().T)
    return PeriodicState(comps, gen.omega, step)


# --- observables ------------------------------------------------------------


def photon_number_average(times, values, period: float, k: int, min_samples: int = 16) -> float:
    """Trapezoidal average of ``values`` over the last ``k`` periods."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if k < 4:
        raise ValidationError("average over at least 4 periods")
    start = times[-1] - k * period
    if start < times[0] - 1e-9 * period:
        raise ValidationError("trajectory shorter than the averaging window")
    sel = times >= start - 1e-9 * period
    if sel.sum() < k * min_samples:
        raise ValidationError(f"need at least {min_samples} samples per period")
    t, y = times[sel], values[sel]
    return float(np.trapezoid(y, t) / (t[-1] - t[0]))


def tail_occupation(rho: np.ndarray, levels: int = TAIL_LEVELS) -> float:
    """Population of the top ``levels`` Fock states."""
    diag = np.real(np.diag(rho))
    return float(diag[-levels:].sum())


# --- models -----------------------------------------------------------------


def periodic_generator(params: SystemParams, kappa: float, dim: int) -> PeriodicLindbladian:
    """Exact rotating-frame model in the pump-photon basis with loss through ``b``."""
    basis = BasisChoice.pump(params)
    comps = fourier_components(params, basis, dim, headroom=TAIL_LEVELS)
    # the identity part does not affect the dynamics; dropping it keeps H_0 small
    comps0 = dict(comps.components)
    comps0[0] = comps0[0] - comps.energy_offset * np.eye(dim)
    return PeriodicLindbladian(comps0, params.omega, kappa, params.hbar, fock.annihilation(dim))


def effective_hamiltonian_matrix(params: SystemParams, model: Model, dim: int) -> np.ndarray:
    if model is Model.EFFECTIVE_1A:
        basis = BasisChoice.system(params)
    else:
        basis = BasisChoice.pump(params)
    H = rwa_analytic(compute_rwa_coefficients(params, basis), params.hbar, dim).matrix
    if model is Model.EFFECTIVE_2B:
        big = fourier_components(params, basis, dim + 2 * TAIL_LEVELS, headroom=TAIL_LEVELS)
        H = H + second_order_correction(big, params.hbar, params.omega)[:dim, :dim]
    return H


@dataclass(frozen=True)
class LindbladRun:
    model: Model
    kappa: float
    dim: int
    t_final: float
    n_avg: float
    rho_final: np.ndarray
    converged: bool = True
    tail: float = 0.0
    info: dict = field(default_factory=dict)


def stationary_photon_number(
    params: SystemParams,
    model: Model,
    kappa: float,
    dim: int,
    *,
    method: str = "floquet",
    harmonics: int = 2,
    horizon: float | None = None,
    tol: float = 1e-9,
) -> LindbladRun:
    """Long-time photon number of one model at one parameter point.

    Effective models are time independent and use :func:`steady_state_direct`.
    The exact model uses :func:`periodic_steady_state` (``method="floquet"``)
    or explicit evolution from vacuum (``method="evolve"``), which stops once
    consecutive 8-period averages agree to 1e-5 relative or ``horizon`` is
    reached.
    """
    if kappa <= 0:
        raise ValidationError("a stationary state needs kappa > 0")
    n_op = fock.number(dim)
    if model is not Model.EXACT_ROTATED:
        H = effective_hamiltonian_matrix(params, model, dim)
        rho = steady_state_direct(sparse_liouvillian(H, kappa, params.hbar))
        n_avg = float(np.real(fock.expectation(rho, n_op)))
        tail = tail_occupation(rho)
        return LindbladRun(model, kappa, dim, math.inf, n_avg, rho, True, tail)
    gen = periodic_generator(params, kappa, dim)
    if method == "floquet":
        state = periodic_steady_state(gen, harmonics)
        rho = state.at(0.0)
        tail = max(tail_occupation(c) if k == 0 else 0.0 for k, c in state.components.items())
        return LindbladRun(model, kappa, dim, math.inf, state.average(n_op), rho, True, tail, {"harmonics": harmonics})
    if method == "evolve":
        return _evolve_until_stationary(gen, params, model, horizon, tol)
    raise ValidationError("method must be 'floquet' or 'evolve'")


def _evolve_until_stationary(gen, params, model, horizon, tol, window=8, rel=1e-5, spp=16):
    N = gen.dim
    period = 2.0 * math.pi / params.omega
    cap = horizon if horizon is not None else 50.0 / gen.kappa
    n_op = fock.number(N)
    rho = fock.projector(N, 0)
    t = 0.0
    previous = None
    converged = False
    while t < cap:
        times = t + period * np.arange(1, window * spp + 1) / spp
        # chunks start on whole drive periods, so restarting the clock keeps the phase
        ev = evolve(rho, gen, times - t, tol=tol)
        values = ev.expectation(n_op)
        avg = photon_number_average(
            np.concatenate([[0.0], times - t]), np.concatenate([[np.real(fock.expectation(rho, n_op))], values]),
            period, window,
        )
        rho = ev.states[-1]
        t = times[-1]
        if previous is not None and abs(avg - previous) <= rel * max(abs(avg), 1e-12):
            converged = True
            break
        previous = avg
    return LindbladRun(model, gen.kappa, N, t, avg, rho, converged, tail_occupation(rho), {"method": "evolve"})


# --- scans -----------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    deltas: np.ndarray
    forces: np.ndarray
    n_avg: np.ndarray
    converged: np.ndarray
    dims: np.ndarray


def _scan_point(job):
    params, model, kappa, dim, max_dim, tail_tol, kwargs = job
    while True:
        run = stationary_photon_number(params, model, kappa, dim, **kwargs)
        if run.tail < tail_tol:
            return run.n_avg, True, dim
        if dim + 8 > max_dim:
            return run.n_avg, False, dim
        dim += 8


def _workers() -> int:
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be an integer") from None


def pump_force(f_a: float, params: SystemParams) -> float:
    """Lab drive amplitude ``F`` whose a-basis pump strength is ``f_a``."""
    return 2.0 * f_a * math.sqrt(2.0 * params.m * params.omega0 * params.hbar)


def mpr_scan(
    params: SystemParams,
    delta_grid,
    f_grid,
    model: Model,
    kappa: float,
    dim: int,
    *,
    max_dim: int | None = None,
    tail_tol: float = 1e-6,
    workers: int | None = None,
    **kwargs,
) -> ScanResult:
    """Stationary photon number on a (detuning, pump) grid.

    ``delta_grid`` holds ``omega - omega0`` values and ``f_grid`` a-basis pump
    strengths ``F_a``.  A point whose top four Fock levels hold more than
    ``tail_tol`` is recomputed with the cutoff raised by 8 up to ``max_dim``
    and flagged as unconverged if that does not help.  Points are independent
    and run in ``workers`` processes (default from ``KERRFLOQUET_WORKERS``);
    the result is ordered by grid index.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    forces = np.asarray(f_grid, dtype=float)
    max_dim = dim + 16 if max_dim is None else max_dim
    jobs = []
    for d in deltas:
        for f in forces:
            point = params.replace(omega=params.omega0 + d, F=pump_force(f, params))
            jobs.append((point, model, kappa, dim, max_dim, tail_tol, kwargs))
    workers = _workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_point, jobs))
    else:
        results = [_scan_point(job) for job in jobs]
    shape = (deltas.size, forces.size)
    n_avg = np.array([r[0] for r in results]).reshape(shape)
    conv = np.array([r[1] for r in results]).reshape(shape)
    dims = np.array([r[2] for r in results]).reshape(shape)
    return ScanResult(deltas, forces, n_avg, conv, dims)


# --- multiphoton resonances -------------------------------------------------


def mpr_peaks(deltas, values, prominence: float = 0.05) -> list[float]:
    """Peak positions with three-point parabolic refinement.

    Local maxima whose prominence is below ``prominence`` times the curve
    maximum are discarded.
    """
    x = np.asarray(deltas, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 5:
        raise ValidationError("need at least 5 points")
    order = np.argsort(x)
    x, y = x[order], y[order]
    idx, _ = find_peaks(y, prominence=prominence * np.abs(y).max())
    peaks = []
    for i in idx:
        x0, x1, x2 = x[i - 1], x[i], x[i + 1]
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
        a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
        b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
        peaks.append(float(-b / (2 * a)) if a < 0 else float(x1))
    return peaks


@dataclass(frozen=True)
class MPRPrediction:
    n: int
    delta_a: float
    convention: Convention
    basis: BasisKind


def _level_factor(n: int, convention: Convention) -> float:
    if convention is Convention.N_MINUS_ONE:
        return 0.5 * (n - 1)
    return 0.5 * (n + 1)


def mpr_predicted(params: SystemParams, basis: BasisChoice | BasisKind, n: int, convention: Convention) -> MPRPrediction:
    """Detuning ``omega - omega0`` of the ``n``-photon resonance predicted in a basis.

    ``N_MINUS_ONE`` solves ``delta_c / u_c = (n-1)/2``; ``DIAGONAL_DEGENERACY``
    solves ``delta_c / u_c = (n+1)/2``, where the n-photon level of the
    rotating-wave diagonal crosses the vacuum.  For the pump basis both
    coefficients depend on the drive frequency and the root is bracketed on
    ``[omega0, 4 omega0]``.
    """
    if int(n) != n or n < 1:
        raise ValidationError("n must be a positive integer")
    kind = basis.kind if isinstance(basis, BasisChoice) else basis
    factor = _level_factor(n, convention)

    def mismatch(omega):
        point = params.replace(omega=omega)
        if kind is BasisKind.SYSTEM_PHOTONS:
            b = BasisChoice.system(point)
        elif kind is BasisKind.PUMP_PHOTONS:
            b = BasisChoice.pump(point)
        else:
            b = basis
        c = compute_rwa_coefficients(point, b)
        return c.delta_c - factor * c.u_c

    w0 = params.omega0
    if factor == 0.0 and kind is not BasisKind.CUSTOM:
        return MPRPrediction(n, 0.0, convention, kind)
    lo, hi = 1e-6 * w0, 4.0 * w0
    if kind is not BasisKind.CUSTOM:
        lo = w0
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise ConvergenceError(f"MPR n={n} not bracketed in [{lo}, {hi}]")
    omega = brentq(mismatch, lo, hi, xtol=1e-15 * w0, rtol=4 * np.finfo(float).eps)
    return MPRPrediction(n, omega - w0, convention, kind)


@dataclass(frozen=True)
class PeakMatch:
    """Best assignment of predicted resonances to a measured peak list."""

    basis: BasisKind
    convention: Convention
    first_n: int
    predicted: list
    errors: list

    @property
    def tail_error(self) -> float:
        """Total absolute error from the third peak on."""
        return float(np.sum(np.abs(self.errors[2:])))


def match_peaks(params: SystemParams, basis: BasisKind, peaks, n_max: int = 20) -> PeakMatch:
    """Fit convention and photon-number labelling on the first two peaks.

    Every convention and starting index ``n`` is tried; the one with the
    smallest error on the first two measured peaks fixes the labels of the
    remaining ones.
    """
    peaks = list(peaks)
    if len(peaks) < 2:
        raise ValidationError("need at least two peaks to fix the labelling")
    best = None
    for convention in Convention:
        table = [mpr_predicted(params, basis, n, convention).delta_a for n in range(1, n_max + len(peaks) + 1)]
        for start in range(1, n_max + 1):
            pred = table[start - 1 : start - 1 + len(peaks)]
            fit = abs(pred[0] - peaks[0]) + abs(pred[1] - peaks[1])
            if best is None or fit < best[0] - 1e-15:
                best = (fit, convention, start, pred)
    _, convention, start, pred = best
    errors = [p - q for p, q in zip(pred, peaks)]
    return PeakMatch(basis, convention, start, pred, errors)
