"""Command-line front end.

    dielectric-energy <command> --config run.toml [flag overrides]

Commands: spectrum, energy, verify, simulate, kk-check. A run is fully
described by one TOML or JSON config (flags win over file values); every
report carries the SHA-256 of the resolved config and the library version,
and identical configs give byte-identical outputs. Exit status is 0 on
success, 1 on invalid input or unwritable output, 2 when a numerical
check or tolerance fails.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .absorbing_energy import (
    RegularizationConfig,
    e_field_spectrum,
    energy_breakdown,
    final_expression_spectrum,
    green_norm_integral,
    thermal_total_energy,
    total_energy_spectrum,
)
from .constants import C_SI, HBAR_SI, K_B_SI
from .dispersion import (
    DispersionModel,
    Kind,
    eval_permittivity,
    group_index,
    kramers_kronig_residual,
)
from .errors import QuadratureError, ValidationError
from .qed_spectrum import ThermalState, spectral_density_model
from .sed_sim import OscillatorParams, oscillator_energy_analytic, simulate_oscillator

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

COMMANDS = ("spectrum", "energy", "verify", "simulate", "kk-check")
EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2


class ConfigError(ValidationError):
    """Malformed or inconsistent run configuration."""


# --- configuration ---------------------------------------------------------------------


@dataclass(frozen=True)
class Band:
    omega_min: float = 0.1
    omega_max: float = 3.0
    n_points: int = 200
    spacing: str = "log"

    def __post_init__(self):
        if not (self.omega_min > 0 and math.isfinite(self.omega_min)):
            raise ConfigError("band.omega_min must be positive")
        if not (self.omega_max > self.omega_min and math.isfinite(self.omega_max)):
            raise ConfigError("band.omega_max must be finite and exceed band.omega_min")
        if self.n_points < 2:
            raise ConfigError("band.n_points must be at least 2")
        if self.spacing not in ("linear", "log"):
            raise ConfigError("band.spacing must be 'linear' or 'log'")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.omega_min, self.omega_max, self.n_points)
        return np.linspace(self.omega_min, self.omega_max, self.n_points)


@dataclass(frozen=True)
class Simulation:
    traj: int = 1000
    steps: int = 2000
    dt: float | None = None
    seed: int = 0
    omega_0: float | None = None
    gamma: float | None = None
    m: float = 1.0
    omega_c: float | None = None

    def __post_init__(self):
        if self.traj < 1:
            raise ConfigError("simulation.traj must be at least 1")
        if self.steps < 1:
            raise ConfigError("simulation.steps must be at least 1")
        if self.dt is not None and not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("simulation.dt must be positive")


@dataclass(frozen=True)
class Units:
    """``natural`` (hbar = c = k_B = 1) or ``si`` with one frequency unit = ``omega_scale`` rad/s."""

    system: str = "natural"
    omega_scale: float = 1.0

    def __post_init__(self):
        if self.system not in ("natural", "si"):
            raise ConfigError("units.system must be 'natural' or 'si'")
        if not (self.omega_scale > 0 and math.isfinite(self.omega_scale)):
            raise ConfigError("units.omega_scale must be positive")

    def temperature(self, value: float) -> float:
        """Temperature in natural frequency units (kelvin in SI mode)."""
        if self.system == "si":
            return K_B_SI * value / (HBAR_SI * self.omega_scale)
        return value

    @property
    def spectral_density_factor(self) -> float:
        """Natural-unit energy density per unit frequency -> J s / m^3 per rad/s."""
        if self.system == "si":
            return HBAR_SI * self.omega_scale**3 / C_SI**3
        return 1.0

    @property
    def energy_density_factor(self) -> float:
        """Natural-unit energy density -> J / m^3."""
        if self.system == "si":
            return HBAR_SI * self.omega_scale**4 / C_SI**3
        return 1.0


@dataclass(frozen=True)
class RunConfig:
    command: str
    material: dict
    band: Band = field(default_factory=Band)
    temperature: float = 0.0
    regularization_a: float | None = None
    regularization_relative: float = 1e-4
    simulation: Simulation = field(default_factory=Simulation)
    output_path: str | None = None
    output_format: str = "csv"
    units: Units = field(default_factory=Units)
    material_source: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not (self.temperature >= 0 and math.isfinite(self.temperature)):
            raise ConfigError("temperature must be finite and non-negative")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")

    def model(self) -> DispersionModel:
        return DispersionModel.from_dict(self.material)

    def regularization(self) -> RegularizationConfig:
        try:
            return RegularizationConfig(a=self.regularization_a, relative=self.regularization_relative)
        except ValidationError as exc:
            raise ConfigError(f"regularization: {exc}") from None

    def canonical(self) -> dict:
        """Everything that determines the output, in a stable form."""
        return {
            "command": self.command,
            "material": self.material,
            "band": vars(self.band),
            "temperature": self.temperature,
            "regularization": {"a": self.regularization_a, "relative": self.regularization_relative},
            "simulation": vars(self.simulation),
            "output_format": self.output_format,
            "units": vars(self.units),
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _read_mapping(path: Path, what: str) -> dict:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {str(path)!r}: {exc.strerror}") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode())
        else:
            data = tomllib.loads(raw.decode())
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {what} file {str(path)!r}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{what} file {str(path)!r} must hold a table/object")
    return data


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"config section '{name}' must be a table")
    return sec


def _number(sec: dict, key: str, where: str, kind=float):
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{where}.{key}' must be a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"field '{where}.{key}' must be an integer")
        return int(value)
    return float(value)


def _pick(sec: dict, keys: dict, where: str) -> dict:
    out = {}
    for key, kind in keys.items():
        if key in sec and sec[key] is not None:
            out[key] = kind(sec[key]) if kind is str else _number(sec, key, where, kind)
    unknown = set(sec) - set(keys)
    if unknown:
        raise ConfigError(f"unknown field(s) in '{where}': {', '.join(sorted(unknown))}")
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file (if any) with command-line overrides."""
    data: dict = {}
    base = Path.cwd()
    if args.config:
        cfg_path = Path(args.config)
        data = _read_mapping(cfg_path, "config")
        base = cfg_path.parent
    known = {"material", "band", "temperature", "regularization", "simulation", "output", "units"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")

    # Material: inline table or path (relative to the config file).
    material_source = None
    material = data.get("material")
    if args.material:
        material = args.material
        base = Path.cwd()
    if material is None:
        raise ConfigError("no material given (config field 'material' or --material)")
    if isinstance(material, str):
        path = Path(material)
        if not path.is_absolute():
            path = base / path
        material_source = str(path)
        material = _read_mapping(path, "material")
    if not isinstance(material, dict):
        raise ConfigError("field 'material' must be a file path or an inline table")
    # Validate early so malformed material files name the bad field.
    DispersionModel.from_dict(material)

    band = _pick(_section(data, "band"), {"omega_min": float, "omega_max": float, "n_points": int, "spacing": str}, "band")
    for flag, key in (("omega_min", "omega_min"), ("omega_max", "omega_max"), ("points", "n_points"), ("spacing", "spacing")):
        if getattr(args, flag) is not None:
            band[key] = getattr(args, flag)

    temperature = data.get("temperature", 0.0)
    if isinstance(temperature, bool) or not isinstance(temperature, (int, float)):
        raise ConfigError(f"field 'temperature' must be a number, got {temperature!r}")
    if args.temp is not None:
        temperature = args.temp

    reg = _pick(_section(data, "regularization"), {"a": float, "relative": float}, "regularization")
    if args.a is not None:
        reg["a"] = args.a

    sim = _pick(
        _section(data, "simulation"),
        {"traj": int, "steps": int, "dt": float, "seed": int, "omega_0": float, "gamma": float, "m": float, "omega_c": float},
        "simulation",
    )
    for key in ("traj", "steps", "dt", "seed", "omega_c"):
        if getattr(args, key) is not None:
            sim[key] = getattr(args, key)

    out = _pick(_section(data, "output"), {"path": str, "format": str}, "output")
    if args.out is not None:
        out["path"] = args.out
    if args.format is not None:
        out["format"] = args.format
    if "format" not in out:
        path = out.get("path")
        out["format"] = "json" if (path and path.lower().endswith(".json")) else ("json" if args.command == "verify" else "csv")

    units = _pick(_section(data, "units"), {"system": str, "omega_scale": float}, "units")

    units_obj = Units(**units)
    return RunConfig(
        command=args.command,
        material=material,
        band=Band(**band),
        temperature=float(temperature),
        regularization_a=reg.get("a"),
        regularization_relative=reg.get("relative", 1e-4),
        simulation=Simulation(**sim),
        output_path=out.get("path"),
        output_format=out["format"],
        units=units_obj,
        material_source=material_source,
    )


# --- report writing ---------------------------------------------------------------------------


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def render_csv(cfg: RunConfig, columns: list[str], rows: list[list], notes: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# dielectric_energy {__version__}\n")
    buf.write(f"# command: {cfg.command}\n")
    buf.write(f"# config_sha256: {cfg.digest()}\n")
    buf.write(f"# units: {cfg.units.system}\n")
    for key, value in (notes or {}).items():
        buf.write(f"# {key}: {_fmt(value) if not isinstance(value, str) else value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(cfg: RunConfig, records: list[dict]) -> str:
    stamp = {"config_sha256": cfg.digest(), "version": __version__, "command": cfg.command}
    out = []
    for rec in records:
        clean = {k: (_num(v) if isinstance(v, (float, np.floating)) else v) for k, v in rec.items()}
        clean = {k: (bool(v) if isinstance(v, np.bool_) else v) for k, v in clean.items()}
        out.append({**clean, **stamp})
    return json.dumps(out, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str | None, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; stdout if no path."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=directory)
    except OSError as exc:
        raise ConfigError(f"cannot write output {path!r}: {exc.strerror}") from None
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise ConfigError(f"cannot write output {path!r}: {exc.strerror}") from None


def _rows_to_records(columns, rows):
    return [dict(zip(columns, row)) for row in rows]


def _emit(cfg: RunConfig, columns, rows, notes=None) -> None:
    if cfg.output_format == "json":
        records = _rows_to_records(columns, rows)
        if notes:
            records = [{**rec} for rec in records]
            records.append({"summary": True, **notes})
        write_atomic(cfg.output_path, render_json(cfg, records))
    else:
        write_atomic(cfg.output_path, render_csv(cfg, columns, rows, notes))


# --- commands --------------------------------------------------------------------------------------


def _absorbing(model: DispersionModel) -> bool:
    return model.mu_model is None


def cmd_spectrum(cfg: RunConfig) -> int:
    """Optical constants and the field energy spectral density over the band.

    ``rho`` is the energy density per unit frequency including the thermal
    factor coth(w / 2T): from the absorbing-medium result for nonmagnetic
    media, from the transparent mode sum when a permeability is present.
    """
    model = cfg.model()
    w = cfg.band.grid()
    state = ThermalState(cfg.units.temperature(cfg.temperature))
    eps = np.asarray(eval_permittivity(model, w), dtype=complex)
    root = np.sqrt(eps)
    gi = np.asarray(group_index(model, w), dtype=float)
    with np.errstate(divide="ignore"):
        v_g = np.where(gi != 0, 1.0 / np.where(gi != 0, gi, 1.0), np.inf)
    if _absorbing(model):
        rho = total_energy_spectrum(model, w, cfg.regularization()) * 2.0 * state.mode_factor(w)
    else:
        rho = spectral_density_model(model, w, state)
    rho = np.asarray(rho) * cfg.units.spectral_density_factor
    columns = ["omega", "eps_R", "eps_I", "n_R", "n_I", "v_g_over_c", "rho"]
    rows = [list(r) for r in zip(w, eps.real, eps.imag, root.real, root.imag, v_g, rho)]
    _emit(cfg, columns, rows)
    return EXIT_OK


def cmd_energy(cfg: RunConfig) -> int:
    """Per-frequency energy breakdown and the band total.

    ``W_form_A`` is the total assembled from the W1/W2 pieces, ``W_form_B``
    the compact n_R^2 w^3 d(w n_R)/dw form; ``rel_diff`` is their relative gap.
    """
    model = cfg.model()
    w = cfg.band.grid()
    reg = cfg.regularization()
    b = energy_breakdown(model, w, reg)
    final = final_expression_spectrum(model, w)
    f = cfg.units.spectral_density_factor
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_diff = np.abs(b.total - final) / np.abs(final)
    columns = [
        "omega", "W_form_A", "W_form_B", "rel_diff", "w1_rate", "w2_rate", "cutoff_residual",
        "w1_static", "w2_static", "h_field", "h_field_cutoff", "w2_static_cutoff",
    ]
    parts = [b.total, final, None, b.w1_rate, b.w2_rate, b.cutoff_residual,
             b.w1_static, b.w2_static, b.h_field, b.h_field_cutoff, b.w2_static_cutoff]
    rows = [
        [wi] + [float(rel_diff[i]) if p is None else float(p[i]) * f for p in parts]
        for i, wi in enumerate(w)
    ]
    T = cfg.units.temperature(cfg.temperature)
    band = thermal_total_energy(model, (cfg.band.omega_min, cfg.band.omega_max), T, reg=reg)
    e = cfg.units.energy_density_factor
    notes = {
        "band_zero_point": band.zero_point * e,
        "band_thermal": band.thermal * e,
        "band_total": band.total * e,
    }
    _emit(cfg, columns, rows, notes)
    return EXIT_OK


def _check(name, value, tolerance, detail="", *, skip_reason=None):
    if skip_reason is not None:
        return {"check_name": name, "status": "skip", "pass": None, "max_error": None,
                "tolerance": tolerance, "detail": skip_reason}
    value = float(value)
    passed = bool(math.isfinite(value) and value <= tolerance)
    return {"check_name": name, "status": "pass" if passed else "fail", "pass": passed, "max_error": value,
            "tolerance": tolerance, "detail": detail}


def run_checks(cfg: RunConfig) -> list[dict]:
    """Identity checks of the library on the configured model and band."""
    model = cfg.model()
    w = cfg.band.grid()
    records = []
    absorbing = _absorbing(model)
    eps = np.asarray(eval_permittivity(model, w), dtype=complex)
    lossy = bool(np.all(eps.imag > 0))
    reason = None if absorbing else "model has a permeability; the absorbing-medium energy assumes mu = 1"

    if absorbing:
        reg = cfg.regularization()
        b = energy_breakdown(model, w, reg)
        final = final_expression_spectrum(model, w)
        records.append(_check("form_equivalence", np.max(np.abs(b.total - final) / np.abs(final)), 1e-9,
                              "assembled W1+W2 vs n_R^2 w^3 d(w n_R)/dw form, max relative deviation"))
        with np.errstate(invalid="ignore", divide="ignore"):
            rate = np.where(b.w1_rate != 0, np.abs(b.w1_rate + b.w2_rate) / np.abs(b.w1_rate), 0.0)
        records.append(_check("secular_balance", np.max(rate), 1e-12, "W1 and W2 growth rates cancel"))
        alt = energy_breakdown(model, w, RegularizationConfig(relative=1e-5))
        records.append(_check("cutoff_independence", np.max(np.abs(alt.total - b.total) / np.abs(b.total)), 1e-10,
                              "total at a = 1e-5 c/w vs configured cutoff"))
        records.append(_check("cutoff_cancellation", np.max(np.abs(b.cutoff_residual) / np.maximum(np.abs(b.h_field_cutoff), 1e-300)),
                              1e-10, "1/a terms of <H^2>/8pi and W2 cancel"))
    else:
        for name in ("form_equivalence", "secular_balance", "cutoff_independence", "cutoff_cancellation"):
            records.append(_check(name, 0, 0, skip_reason=reason))

    if absorbing and lossy:
        probe = w[:: max(1, len(w) // 8)]
        closed = green_norm_integral(eps[:: max(1, len(w) // 8)], probe)
        numeric = green_norm_integral(eps[:: max(1, len(w) // 8)], probe, method="quadrature")
        records.append(_check("green_norm_quadrature", np.max(np.abs(numeric / closed - 1)), 1e-8,
                              "k-integral closed form vs adaptive quadrature"))
        routes = np.abs(e_field_spectrum(model, probe, route="k_integral") / e_field_spectrum(model, probe) - 1)
        records.append(_check("e_field_routes", np.max(routes), 1e-10, "<E^2> spectrum, closed form vs k-integral"))
    else:
        skip = reason or "eps_I = 0 somewhere in the band; k-integrals diverge"
        records.append(_check("green_norm_quadrature", 0, 0, skip_reason=skip))
        records.append(_check("e_field_routes", 0, 0, skip_reason=skip))

    if model.kind in (Kind.LORENTZ, Kind.TABULATED):
        if model.kind is Kind.TABULATED:
            lo, hi = model.table_range
            grid = np.geomspace(lo, hi, 2000)
        else:
            grid = np.geomspace(1e-3 * model.omega_0, 1e3 * model.omega_0, 4000)
        rep = kramers_kronig_residual(model, grid)
        records.append(_check("kramers_kronig", rep.max_residual, 1e-4, f"causal={rep.causal}, converged={rep.converged}"))
    else:
        records.append(_check("kramers_kronig", 0, 0, skip_reason=f"not applicable to kind {model.kind.value!r}"))
    return records


def cmd_verify(cfg: RunConfig) -> int:
    records = run_checks(cfg)
    if cfg.output_format == "json":
        write_atomic(cfg.output_path, render_json(cfg, records))
    else:
        cols = ["check_name", "status", "max_error", "tolerance", "detail"]
        rows = [[r[c] if r[c] is not None else "" for c in cols] for r in records]
        write_atomic(cfg.output_path, render_csv(cfg, cols, rows))
    failed = [r["check_name"] for r in records if r["status"] == "fail"]
    if failed:
        print(f"verify: failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _oscillator(cfg: RunConfig) -> OscillatorParams:
    sim = cfg.simulation
    material = cfg.model()
    omega_0, gamma, omega_p = sim.omega_0, sim.gamma, 0.0
    if material.kind is Kind.LORENTZ:
        omega_0 = material.omega_0 if omega_0 is None else omega_0
        gamma = material.gamma if gamma is None else gamma
        omega_p = material.omega_p
    if omega_0 is None or gamma is None:
        raise ConfigError("simulation needs omega_0 and gamma (from a Lorentz material or the simulation block)")
    omega_c = sim.omega_c if sim.omega_c is not None else 50.0 * omega_0
    return OscillatorParams(omega_0, gamma, m=sim.m, omega_c=omega_c, omega_p=omega_p)


def cmd_simulate(cfg: RunConfig) -> int:
    params = _oscillator(cfg)
    sim = cfg.simulation
    dt = sim.dt if sim.dt is not None else 0.45 / params.omega_c
    T = cfg.units.temperature(cfg.temperature)
    ens = simulate_oscillator(params, T, dt, sim.steps, sim.traj, sim.seed)
    target = oscillator_energy_analytic(params, T)
    records = []

    def add(name, est, analytic):
        records.append({
            "estimator": name,
            "value": est.value,
            "std_error": est.std_error,
            "n": est.n,
            "analytic_target": analytic,
            "sigmas": est.sigmas(analytic) if analytic is not None else None,
        })

    add("energy", ens.energy(), target.total)
    add("kinetic_energy", ens.kinetic_energy(), None)
    add("potential_energy", ens.potential_energy(), None)
    add("dissipated_power", ens.dissipated_power(), None)
    add("injected_power", ens.injected_power(), None)
    add("power_balance", ens.power_balance(), 0.0)
    if cfg.output_format == "json":
        write_atomic(cfg.output_path, render_json(cfg, records))
    else:
        cols = ["estimator", "value", "std_error", "n", "analytic_target", "sigmas"]
        rows = [[r[c] if r[c] is not None else "" for c in cols] for r in records]
        notes = {"omega_0": params.omega_0, "gamma": params.gamma, "omega_c": params.omega_c, "dt": dt,
                 "burn_in_steps": ens.n_burn}
        write_atomic(cfg.output_path, render_csv(cfg, cols, rows, notes))
    return EXIT_OK


def cmd_kk_check(cfg: RunConfig) -> int:
    model = cfg.model()
    grid = cfg.band.grid()
    rep = kramers_kronig_residual(model, grid)
    notes = {"max_residual": rep.max_residual, "causal": rep.causal, "converged": rep.converged}
    columns = ["omega", "residual"]
    rows = [[wi, ri] for wi, ri in zip(rep.omega, rep.residual)]
    _emit(cfg, columns, rows, notes)
    if not rep.causal:
        print(f"kk-check: permittivity fails the Kramers-Kronig test (max residual {rep.max_residual:.3g})", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


HANDLERS = {
    "spectrum": cmd_spectrum,
    "energy": cmd_energy,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "kk-check": cmd_kk_check,
}


# --- entry point ---------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dielectric-energy", description="Field energy in dispersive, absorbing dielectrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or name).strip().splitlines()[0])
        p.add_argument("--config", help="TOML or JSON run configuration")
        p.add_argument("--material", "--model", dest="material", help="material file (TOML/JSON)")
        p.add_argument("--omega-min", dest="omega_min", type=float)
        p.add_argument("--omega-max", dest="omega_max", type=float)
        p.add_argument("--points", type=int)
        p.add_argument("--spacing", choices=("linear", "log"))
        p.add_argument("--temp", type=float, help="temperature (energy units; kelvin with SI units)")
        p.add_argument("--a", type=float, help="fixed cutoff length a")
        p.add_argument("--traj", type=int)
        p.add_argument("--steps", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--omega-c", dest="omega_c", type=float)
        p.add_argument("--out", help="output path ('-' or omitted: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return HANDLERS[cfg.command](cfg)
    except QuadratureError as exc:
        print(f"{args.command}: numerical tolerance not met: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except ValidationError as exc:
        print(f"{args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _entry() -> None:
    """Console-script wrapper that turns the return value into the exit status."""
    sys.exit(main())
