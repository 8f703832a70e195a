"""Command-line entry point.

    kerrfloquet <subcommand> [--config cfg.json] [--output path] [flags]

Parameters come from the JSON document (keys m, omega0, alpha, F, omega,
gamma, hbar, plus subcommand options) and are overridden by flags.  Every
CSV output starts with a ``# config: {...}`` line holding the resolved run
configuration; JSON outputs carry it under the ``"config"`` key.  Exit codes:
1 invalid input, 2 numerical non-convergence, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classical, figures, kb, lindblad
from .errors import ConvergenceError, ValidationError
from .meanfield import classical_field, compare_vector_fields, meanfield_eom
from .params import (
    PARAM_KEYS,
    BasisChoice,
    BasisKind,
    SystemParams,
    bogoliubov_coefficients,
    compute_rwa_coefficients,
)
from .vanvleck import effective_hamiltonian, extract_coefficients, fourier_components, hermiticity_error

EXIT_OK, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3

# option name -> (type, default, help); None means "not set"
_SWEEP = {
    "delta_min": (float, -0.05, "smallest detuning omega - omega0"),
    "delta_max": (float, 0.05, "largest detuning omega - omega0"),
    "n_points": (int, 41, "number of detuning points"),
}
OPTIONS: dict[str, dict] = {
    "coeffs": {},
    "classical-sweep": {
        **_SWEEP,
        "direction": (str, "down", "sweep direction: up or down"),
        "settle_periods": (int, None, "periods discarded per point (default 10/gamma)"),
        "measure_periods": (int, classical.DEFAULT_MEASURE_PERIODS, "periods demodulated per point"),
        "tol": (float, 1e-9, "integrator tolerance"),
    },
    "kb-steady": dict(_SWEEP),
    "psd": {
        "periods": (int, 700, "drive periods recorded"),
        "samples_per_period": (int, 32, "samples per drive period"),
        "window": (str, "rectangular", "rectangular or hann"),
        "x0": (float, 0.0, "initial position"),
        "p0": (float, 0.0, "initial momentum"),
        "tol": (float, 1e-10, "integrator tolerance"),
    },
    "vv": {
        "basis": (str, "b", "operator basis: a or b"),
        "order": (int, 1, "expansion order: 1 or 2"),
        "dim": (int, 32, "Fock cutoff"),
    },
    "meanfield-check": {"basis": (str, "b", "operator basis: a or b")},
    "lindblad-scan": {
        "delta_min": (float, 0.0, "smallest detuning omega - omega0"),
        "delta_max": (float, 0.05, "largest detuning omega - omega0"),
        "delta_steps": (int, 41, "number of detuning points"),
        "force": (float, None, "single a-basis pump strength F_a"),
        "force_min": (float, 0.0, "smallest F_a"),
        "force_max": (float, 0.01, "largest F_a"),
        "force_steps": (int, 1, "number of F_a points"),
        "kappa": (float, None, "photon loss rate (default 0.1 U_a)"),
        "dim": (int, 40, "Fock cutoff"),
        "model": (str, "exact", "exact, eff1a, eff1b or eff2b"),
        "method": (str, "floquet", "exact model: floquet or evolve"),
        "harmonics": (int, 2, "Fourier harmonics kept by the floquet method"),
        "horizon": (float, None, "evolve method: time cap (default 50/kappa)"),
        "tol": (float, 1e-9, "evolve method: integrator tolerance"),
    },
    "mpr": {
        "basis": (str, "b", "operator basis: a or b"),
        "convention": (str, "eq6", "eq6 or degeneracy"),
        "n_max": (int, 10, "largest photon number"),
    },
    "figure": {
        "which": (str, None, "2a, 2c, 3b or 3c"),
        "output_dir": (str, ".", "directory receiving the CSV files"),
        "delta_steps": (int, None, "detuning points (default per figure)"),
        "force_steps": (int, None, "pump points for 3b"),
        "dim": (int, 40, "Fock cutoff for 3b and 3c"),
        "model": (str, None, "Lindblad model for 3b (default eff1b)"),
    },
}


@dataclass
class RunConfig:
    subcommand: str
    params: SystemParams
    options: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "params": self.params.to_dict(),
            "options": dict(sorted(self.options.items())),
            "output": self.output,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            return cls(
                subcommand=data["subcommand"],
                params=SystemParams.from_dict(data["params"]),
                options=dict(data.get("options", {})),
                output=data.get("output"),
                seed=int(data.get("seed", 0)),
            )
        except KeyError as exc:
            raise ValidationError(f"config is missing {exc}") from None

    @classmethod
    def from_header(cls, line: str) -> "RunConfig":
        prefix = "# config: "
        if not line.startswith(prefix):
            raise ValidationError("not a config header line")
        return cls.from_dict(json.loads(line[len(prefix):]))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kerrfloquet", description="Driven Duffing oscillator: classical and quantum expansions.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand", parser_class=_Parser)
    sub.required = True
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name)
        if name == "figure":
            p.add_argument("which", choices=["2a", "2c", "3b", "3c"])
        p.add_argument("--config", help="JSON document with parameters and options")
        p.add_argument("--output", help="output file (default standard output)")
        p.add_argument("--seed", type=int, default=None)
        for key in PARAM_KEYS:
            p.add_argument(f"--{key}", type=float, default=None, dest=f"param_{key}")
        for key, (typ, _, help_) in opts.items():
            if key == "which":
                continue
            p.add_argument("--" + key.replace("_", "-"), type=typ, default=None, dest=f"opt_{key}", help=help_)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    # a JSON output document carries its resolved config under "config"
    if isinstance(data.get("config"), dict):
        data = data["config"]
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    doc = _load_config(args.config)
    # accept both the flat document and the nested form written in headers
    param_doc = dict(doc.get("params", {}))
    option_doc = dict(doc.get("options", {}))
    for key, value in doc.items():
        if key in PARAM_KEYS:
            param_doc[key] = value
        elif key not in ("params", "options", "subcommand", "output", "seed"):
            option_doc[key] = value
    for key in PARAM_KEYS:
        value = getattr(args, f"param_{key}")
        if value is not None:
            param_doc[key] = value
    params = SystemParams.from_dict(param_doc)
    spec = OPTIONS[args.subcommand]
    unknown = sorted(set(option_doc) - set(spec))
    if unknown:
        raise ValidationError(f"unknown options for {args.subcommand}: {unknown}")
    options = {}
    for key, (typ, default, _) in spec.items():
        value = getattr(args, f"opt_{key}", None)
        if key == "which":
            value = args.which
        if value is None:
            value = option_doc.get(key, default)
        if value is not None and not isinstance(value, typ):
            if typ is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            else:
                raise ValidationError(f"option {key} must be {typ.__name__}")
        options[key] = value
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    output = args.output if args.output is not None else doc.get("output")
    return RunConfig(args.subcommand, params, options, output, seed)


# --- output ----------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_csv(config: RunConfig, columns: dict) -> str:
    names = list(columns)
    data = [list(columns[n]) for n in names]
    lengths = {len(c) for c in data}
    if len(lengths) > 1:
        raise ValueError("columns differ in length")
    out = io.StringIO()
    out.write("# config: " + config.to_json() + "\n")
    out.write(",".join(names) + "\n")
    for row in zip(*data):
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def format_json(config: RunConfig, payload: dict) -> str:
    return json.dumps({"config": config.to_dict(), **payload}, indent=2, sort_keys=False) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _coeff_block(params, basis):
    c = compute_rwa_coefficients(params, basis)
    return {"omega_c": c.omega_c, "delta_c": c.delta_c, "u_c": c.u_c, "f_c": c.f_c}


def _grid(lo, hi, n):
    if n < 1:
        raise ValidationError("grid needs at least one point")
    return np.linspace(lo, hi, n)


def _delta_grid(opts):
    return _grid(opts["delta_min"], opts["delta_max"], opts["n_points"])


# --- subcommands -------------------------------------------------------------


def cmd_coeffs(cfg):
    p = cfg.params
    bog = bogoliubov_coefficients(p.omega0, p.omega)
    payload = {
        "a": _coeff_block(p, BasisChoice.system(p)),
        "b": _coeff_block(p, BasisChoice.pump(p)),
        "bogoliubov": {"mu": bog.mu, "nu": bog.nu, "z": bog.z},
    }
    return format_json(cfg, payload)


def cmd_classical_sweep(cfg):
    o = cfg.options
    grid = _delta_grid(o)
    if o["direction"] == "down":
        grid = grid[::-1]
    res = classical.sweep_response(
        cfg.params, grid, o["direction"], o["settle_periods"], o["measure_periods"], tol=o["tol"]
    )
    cols = {
        "delta": [d for d, _ in res],
        "u": [r.u for _, r in res],
        "v": [r.v for _, r in res],
        "X": [r.X for _, r in res],
    }
    return format_csv(cfg, cols)


def cmd_kb_steady(cfg):
    cols = {"delta": [], "X": [], "stable": []}
    for d in _delta_grid(cfg.options):
        for s in kb.steady_states(cfg.params.with_detuning(float(d))):
            cols["delta"].append(float(d))
            cols["X"].append(s.state.X)
            cols["stable"].append(s.stable)
    return format_csv(cfg, cols)


def cmd_psd(cfg):
    o, p = cfg.options, cfg.params
    period = 2.0 * math.pi / p.omega
    traj = classical.integrate(
        (o["x0"], o["p0"]), 0.0, o["periods"] * period, p, tol=o["tol"], samples_per_period=o["samples_per_period"]
    )
    record = classical.Trajectory(traj.t[:-1], traj.x[:-1], traj.p[:-1])
    spec = classical.periodogram(record, o["window"])
    return format_csv(cfg, {"omega_response": spec.omega, "psd": spec.psd})


def cmd_vv(cfg):
    o, p = cfg.options, cfg.params
    basis = BasisChoice.from_label(o["basis"], p)
    comps = fourier_components(p, basis, o["dim"])
    H = effective_hamiltonian(comps, o["order"]).matrix
    delta, u, f = extract_coefficients(H, p.hbar)
    payload = {
        "real": H.real.tolist(),
        "imag": H.imag.tolist(),
        "coefficients": {"delta": delta, "u": u, "f": f},
        "hermiticity_error": hermiticity_error(H),
    }
    return format_json(cfg, payload)


def _field_table(vf):
    return {"linear": vf.linear.tolist(), "cubic": vf.cubic.tolist(), "drive": vf.drive.tolist()}


def cmd_meanfield_check(cfg):
    p = cfg.params
    basis = BasisChoice.from_label(cfg.options["basis"], p)
    limit = classical_field(p, basis)
    reference = kb.quadrature_field(p, include_damping=False)
    eom = meanfield_eom(compute_rwa_coefficients(p, basis))
    payload = {
        "meanfield": [
            {"m": t.m, "n": t.n, "coeff": [t.coeff.real, t.coeff.imag], "hbar_exponent": str(t.hbar_exponent)}
            for t in eom.monomials
        ],
        "classical_limit": _field_table(limit),
        "kb": _field_table(reference),
        "deviation": compare_vector_fields(limit, reference),
        "deviation_linear_abs": compare_vector_fields(limit, reference, block="linear", relative=False),
    }
    return format_json(cfg, payload)


def _model(label):
    try:
        return lindblad.Model(label)
    except ValueError:
        raise ValidationError(f"unknown model {label!r}") from None


def _default_kappa(params):
    return 0.1 * compute_rwa_coefficients(params, BasisChoice.system(params)).u_c


def cmd_lindblad_scan(cfg):
    o, p = cfg.options, cfg.params
    deltas = _grid(o["delta_min"], o["delta_max"], o["delta_steps"])
    forces = np.array([o["force"]]) if o["force"] is not None else _grid(o["force_min"], o["force_max"], o["force_steps"])
    kappa = o["kappa"] if o["kappa"] is not None else _default_kappa(p)
    extra = {"method": o["method"], "harmonics": o["harmonics"], "horizon": o["horizon"], "tol": o["tol"]}
    scan = lindblad.mpr_scan(p, deltas, forces, _model(o["model"]), kappa, o["dim"], **extra)
    dd, ff = np.meshgrid(deltas, forces, indexing="ij")
    cols = {"delta": dd.ravel(), "force": ff.ravel(), "n_avg": scan.n_avg.ravel(), "converged": scan.converged.ravel()}
    return format_csv(cfg, cols)


def _convention(label):
    try:
        return lindblad.Convention(label)
    except ValueError:
        raise ValidationError(f"unknown convention {label!r}") from None


def cmd_mpr(cfg):
    o, p = cfg.options, cfg.params
    kind = {"a": BasisKind.SYSTEM_PHOTONS, "b": BasisKind.PUMP_PHOTONS}.get(o["basis"])
    if kind is None:
        raise ValidationError("basis must be 'a' or 'b'")
    conv = _convention(o["convention"])
    ns = list(range(1, o["n_max"] + 1))
    return format_csv(cfg, {"n": ns, "delta_a": [lindblad.mpr_predicted(p, kind, n, conv).delta_a for n in ns]})


def cmd_figure(cfg):
    o = cfg.options
    outdir = Path(o["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    which = o["which"]
    files = {}
    if which == "2a":
        grid = None if o["delta_steps"] is None else np.linspace(20.0, -10.0, o["delta_steps"])
        files["fig2a.csv"] = figures.figure_2a(grid)
    elif which == "2c":
        spectrum, tones = figures.figure_2c()
        files["fig2c_psd.csv"] = spectrum
        files["fig2c_tones.csv"] = tones
    elif which == "3b":
        d = None if o["delta_steps"] is None else np.linspace(-1.0, 5.0, o["delta_steps"])
        f = None if o["force_steps"] is None else np.linspace(0.0, 1.2, o["force_steps"])
        model = _model(o["model"] or "eff1b")
        files["fig3b.csv"] = figures.figure_3b(d, f, model=model, dim=o["dim"])
    elif which == "3c":
        d = None if o["delta_steps"] is None else np.linspace(1.0, 5.0, o["delta_steps"])
        curves, preds = figures.figure_3c(d, dim=o["dim"])
        files["fig3c.csv"] = curves
        files["fig3c_predictions.csv"] = preds
    else:
        raise ValidationError(f"unknown figure {which!r}")
    for name, cols in files.items():
        (outdir / name).write_text(format_csv(cfg, cols))
    return "".join(f"{outdir / name}\n" for name in files)


COMMANDS = {
    "coeffs": cmd_coeffs,
    "classical-sweep": cmd_classical_sweep,
    "kb-steady": cmd_kb_steady,
    "psd": cmd_psd,
    "vv": cmd_vv,
    "meanfield-check": cmd_meanfield_check,
    "lindblad-scan": cmd_lindblad_scan,
    "mpr": cmd_mpr,
    "figure": cmd_figure,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        text = COMMANDS[cfg.subcommand](cfg)
        if cfg.subcommand == "figure":
            sys.stdout.write(text)
        else:
            _emit(text, cfg.output)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
