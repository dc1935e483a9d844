"""Run configurations, scenario execution and CSV/plot-script output.

Configurations are JSON documents validated against :data:`SCHEMA`.  All
numbers are in atomic units.  CSV floats use ``repr`` (shortest round-trip
form) and missing values are written as empty fields.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import json
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import analysis as an
from .dynamics import IntegratorConfig, calibrate_well_depth, ground_state_init, integrate
from .effective import equipotential_contour
from .errors import ConfigurationError, DomainError, IntegrationError
from .phase_space import DEFAULT_U
from .potentials import (
    CoRotating,
    CosEnvelope,
    Coulomb3D,
    Free,
    GaussianWell1D,
    HalfCycleSin3,
    Harmonic,
    Hydrogen3D,
    Lab,
    RotatingHalfCycle,
    SinEnvelope,
    Static,
    field_vector,
    fluence_matched_amplitude,
    intensity_conversion,
    model_pulse_check,
    peak_time,
)

SCHEMA_VERSION = 1
E_GROUND = -2.0 / 9.0

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_range = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}


def _typed(name, props, required=()):
    return {
        "if": {"properties": {"type": {"const": name}}, "required": ["type"]},
        "then": {
            "properties": {"type": True, **props},
            "required": list(required),
            "additionalProperties": False,
        },
    }


_MODELS = {
    "free": {"dim": {"enum": [1, 3]}},
    "harmonic": {"k": _pos, "dim": {"enum": [1, 3]}},
    "gaussian_well": {"depth": _pos, "target_energy": {"type": "number", "exclusiveMaximum": 0}},
    "coulomb": {"alpha_I": _nonneg, "softening": _nonneg},
    "hydrogen": {"softening": _nonneg},
}
_PULSES = {
    "none": ({}, ()),
    "static": ({"F": _vec3, "F0": _nonneg, "axis": {"enum": [0, 1, 2]}}, ()),
    "half_cycle": ({"F0": _nonneg, "omega": _pos}, ("F0", "omega")),
    "sin_envelope": ({"F0": _nonneg, "omega": _pos, "N": {"type": "number", "minimum": 0.5}}, ("F0", "omega")),
    "cos_envelope": (
        {"A0": _nonneg, "omega": _pos, "N": {"type": "number", "minimum": 0.5}, "epsilon": {"type": "number"}},
        ("A0", "omega"),
    ),
    "rotating_half_cycle": ({"E0": _nonneg, "omega": _pos}, ("E0", "omega")),
}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "model": {
            "oneOf": [
                {"enum": sorted(_MODELS)},
                {
                    "type": "object",
                    "required": ["type"],
                    "properties": {"type": {"enum": sorted(_MODELS)}},
                    "allOf": [_typed(k, v) for k, v in _MODELS.items()],
                },
            ]
        },
        "pulse": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": sorted(_PULSES)}},
            "allOf": [_typed(k, p, r) for k, (p, r) in _PULSES.items()],
        },
        "frame": {"enum": ["lab", "corotating"]},
        "U": _pos,
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": _pos,
                "abs_tol": _pos,
                "max_step": _pos,
                "t_start": {"type": "number"},
                "t_end": {"type": "number"},
                "stop_radius": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
        "criteria": {"type": "array", "items": {"enum": list(an.CRITERIA)}, "uniqueItems": True},
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_f": _pos,
                "detection_radius": _pos,
                "ionization_potential": _pos,
                "kinetic_factor_two": {"type": "boolean"},
                "plateau_slope": _pos,
                "suffix_tol": _pos,
                "smoothing_window": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "fluct_dt": _pos,
                "fluct_t_max": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameter", "values"],
            "properties": {
                "parameter": {"type": "string", "pattern": r"^(model|pulse)\.[A-Za-z_0-9]+$"},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "amplitude_rule": {"enum": ["fixed_amplitude", "fixed_fluence"]},
                "reference_omega": _pos,
            },
        },
        "contour": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "level": {"type": "number"},
                "time": {"type": "number"},
                "x_range": _range,
                "s_range": _range,
                "resolution": {
                    "type": "array", "items": {"type": "integer", "minimum": 3}, "minItems": 2, "maxItems": 2
                },
                "axis": {"type": "integer", "minimum": 0, "maximum": 2},
            },
        },
        "output": {"type": "string", "minLength": 1},
    },
}

ANALYSIS_DEFAULTS = {
    "t_f": 150.0,
    "detection_radius": 1000.0,
    "ionization_potential": 2.0 / 9.0,
    "kinetic_factor_two": False,
    "plateau_slope": 1e-4,
    "suffix_tol": 0.01,
    "smoothing_window": None,
    "fluct_dt": 0.05,
    "fluct_t_max": None,
}

TRAJECTORY_FILE = "trajectory.csv"
CRITERIA_FILE = "criteria.csv"
CONTOUR_FILE = "contour.csv"
BACKPROP_FILE = "backprop.csv"
ERROR_FILE = "error.json"

CRITERIA_COLUMNS = [
    "criterion", "F0", "omega", "N", "intensity_Wcm2", "tau_max", "tau_exit", "tau_ion",
    "exit_x", "exit_p", "spot_size", "offset_angle_deg", "found",
]


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    model: Any
    pulse: Any
    frame: Any
    U: float
    integrator: IntegratorConfig
    t_start: float
    stop_radius: float | None
    criteria: list
    analysis: dict
    sweep: dict | None
    contour: dict | None
    output_dir: Path
    raw: dict = field(repr=False, default_factory=dict)

    def points(self):
        """``(value, RunConfig)`` per sweep point (a single ``(None, self)`` otherwise)."""
        if not self.sweep:
            return [(None, self)]
        return [(v, _with_value(self, v)) for v in self.sweep["values"]]


def _error_path(err):
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def _describe(err):
    path = _error_path(err)
    if err.validator == "additionalProperties":
        return f"config key {path!r}: {err.message}"
    if err.validator in ("type", "enum", "const"):
        return f"config key {path!r}: expected {err.validator} {err.validator_value!r}, got {err.instance!r}"
    if err.validator in ("exclusiveMinimum", "minimum", "exclusiveMaximum", "maximum"):
        return f"config key {path!r}: value {err.instance!r} violates {err.validator} {err.validator_value}"
    return f"config key {path!r}: {err.message}"


def validate(raw: dict):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(list(e.absolute_path)), e.message))
    if errors:
        # prefer the deepest, most specific message
        best = jsonschema.exceptions.best_match(errors)
        raise ConfigurationError(_describe(best))


def build_model(spec):
    spec = {"type": spec} if isinstance(spec, str) else dict(spec)
    kind = spec.pop("type")
    if kind == "free":
        return Free(**spec)
    if kind == "harmonic":
        return Harmonic(**spec)
    if kind == "gaussian_well":
        if "depth" in spec and "target_energy" in spec:
            raise ConfigurationError("config key 'model': give either depth or target_energy, not both")
        if "depth" in spec:
            return GaussianWell1D(spec["depth"])
        return GaussianWell1D(calibrate_well_depth(spec.get("target_energy", E_GROUND)))
    if kind == "coulomb":
        return Coulomb3D(**spec)
    if kind == "hydrogen":
        return Hydrogen3D(**spec)
    raise ConfigurationError(f"unknown model {kind!r}")


def build_pulse(spec):
    if spec is None:
        return None
    spec = dict(spec)
    kind = spec.pop("type")
    cls = {
        "static": Static,
        "half_cycle": HalfCycleSin3,
        "sin_envelope": SinEnvelope,
        "cos_envelope": CosEnvelope,
        "rotating_half_cycle": RotatingHalfCycle,
    }.get(kind)
    if kind == "none":
        return None
    if kind == "static":
        if ("F" in spec) == ("F0" in spec):
            raise ConfigurationError("config key 'pulse': a static pulse needs exactly one of F or F0")
        if "F0" in spec:
            F = [0.0, 0.0, 0.0]
            F[spec.pop("axis", 2)] = spec.pop("F0")
            spec["F"] = F
        elif "axis" in spec:
            raise ConfigurationError("config key 'pulse.axis': only valid together with F0")
        spec["F"] = tuple(spec["F"])
    return cls(**spec)


def _from_raw(raw: dict, base_dir: Path | None = None) -> RunConfig:
    try:
        model = build_model(raw["model"])
        pulse = build_pulse(raw.get("pulse"))
        model_pulse_check(model, pulse)
        frame = Lab()
        if raw.get("frame", "lab") == "corotating":
            frame = CoRotating.for_pulse(pulse)
    except (TypeError, DomainError) as exc:
        raise ConfigurationError(f"invalid physical parameters: {exc}") from exc
    integ = dict(raw.get("integrator", {}))
    lo = pulse.support()[0] if pulse is not None else 0.0
    t_start = float(integ.pop("t_start", lo if math.isfinite(lo) else 0.0))
    stop_radius = integ.pop("stop_radius", None)
    icfg = IntegratorConfig(**integ)
    if icfg.t_end <= t_start:
        raise ConfigurationError(f"config key 'integrator.t_end': must exceed t_start={t_start}")
    analysis = {**ANALYSIS_DEFAULTS, **raw.get("analysis", {})}
    sweep = raw.get("sweep")
    if sweep:
        section, key = sweep["parameter"].split(".")
        spec = raw.get(section)
        if not isinstance(spec, dict) or key == "type":
            raise ConfigurationError(f"config key 'sweep.parameter': {sweep['parameter']!r} does not exist")
        allowed = _MODELS.get(spec["type"], {}) if section == "model" else _PULSES[spec["type"]][0]
        if key not in allowed:
            raise ConfigurationError(
                f"config key 'sweep.parameter': {spec['type']} has no parameter {key!r}"
            )
        if sweep.get("amplitude_rule", "fixed_amplitude") == "fixed_fluence" and key != "omega":
            raise ConfigurationError("config key 'sweep.amplitude_rule': fixed_fluence needs an omega sweep")
    out = Path(raw.get("output", "out"))
    if base_dir is not None and not out.is_absolute():
        out = base_dir / out
    return RunConfig(
        model=model, pulse=pulse, frame=frame, U=float(raw.get("U", DEFAULT_U)), integrator=icfg,
        t_start=t_start, stop_radius=stop_radius, criteria=list(raw.get("criteria", [])),
        analysis=analysis, sweep=sweep, contour=raw.get("contour"), output_dir=out, raw=raw,
    )


def parse_config(source) -> RunConfig:
    """Validate a JSON config (path, JSON text or dict) and build a RunConfig.

    Unknown keys are errors; the message names the offending key.
    """
    base = None
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigurationError(f"config file {str(path)!r} does not exist")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file {str(path)!r} is not valid JSON: {exc}") from exc
        base = path.parent
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    validate(raw)
    return _from_raw(raw, base)


def _with_value(cfg: RunConfig, value) -> RunConfig:
    raw = copy.deepcopy(cfg.raw)
    section, key = cfg.sweep["parameter"].split(".")
    if isinstance(raw[section], str):
        raw[section] = {"type": raw[section]}
    raw[section][key] = value
    if cfg.sweep.get("amplitude_rule") == "fixed_fluence":
        amp_key = {"half_cycle": "F0", "sin_envelope": "F0", "rotating_half_cycle": "E0", "cos_envelope": "A0"}
        ak = amp_key[raw["pulse"]["type"]]
        ref_w = cfg.sweep.get("reference_omega", cfg.raw["pulse"]["omega"])
        raw["pulse"][ak] = fluence_matched_amplitude(value, (cfg.raw["pulse"][ak], ref_w))
    raw.pop("sweep")
    new = _from_raw(raw)
    new.output_dir = cfg.output_dir
    return new


# --------------------------------------------------------------------------
# scenario execution
# --------------------------------------------------------------------------

def pulse_summary(pulse):
    """``(F0, omega, N, intensity)`` for the criteria table; ``None`` when absent."""
    if pulse is None:
        return None, None, None, None
    if isinstance(pulse, Static):
        F0 = float(np.linalg.norm(pulse.F))
        return F0, None, None, intensity_conversion(F0)
    amp = getattr(pulse, "F0", None) or getattr(pulse, "E0", None) or getattr(pulse, "A0", None) or 0.0
    N = getattr(pulse, "N", 0.5)
    peak = float(np.linalg.norm(field_vector(pulse, peak_time(pulse))))
    return float(amp), float(pulse.omega), float(N), intensity_conversion(peak)


@dataclass
class PointResult:
    value: float | None
    results: list
    spot: float | None = None
    angle_deg: float | None = None
    trajectory: Any = None
    backprop: Any = None
    contour: Any = None
    summary: tuple = ()


def _run_trajectory(cfg: RunConfig, t_end=None):
    gs = ground_state_init(cfg.model, cfg.U)
    ic = cfg.integrator
    t_end = ic.t_end if t_end is None else t_end
    icfg = IntegratorConfig(ic.rel_tol, ic.abs_tol, ic.max_step, t_end, ic.max_steps)
    stop = an.detection_stop(cfg.stop_radius, cfg.model.dim) if cfg.stop_radius else None
    return integrate(gs.state.replace(t=cfg.t_start), cfg.model, cfg.pulse, cfg.frame, icfg, stop)


def evaluate_criteria(traj, cfg: RunConfig):
    """Criterion results plus 3-D observables for one trajectory."""
    a = cfg.analysis
    out = []
    backprop = None
    for name in cfg.criteria:
        if name == "energy":
            out.append(an.exit_time_energy(traj))
        elif name == "momentum_backprop":
            if traj.t_end < a["t_f"]:
                out.append(an._not_found(name, an._tau_max(cfg.pulse), diagnostic="run shorter than t_f"))
                continue
            r = an.exit_time_momentum_backprop(traj, t_f=a["t_f"])
            backprop = r.extras.get("backprop")
            out.append(r)
        elif name == "static_traversal":
            if not isinstance(cfg.pulse, Static):
                raise ConfigurationError("static_traversal needs a static pulse")
            out.append(an.static_traversal(traj, F_static=cfg.pulse.F, E0=a["ionization_potential"]))
        elif name == "wkb_integral":
            if not isinstance(cfg.pulse, Static):
                raise ConfigurationError("wkb_integral needs a static pulse")
            try:
                tau = an.wkb_like_time(
                    cfg.model, cfg.pulse.F, a["ionization_potential"], U=cfg.U,
                    kinetic_factor_two=a["kinetic_factor_two"],
                )
                out.append(an.CriterionResult(name, tau, 0.0, True))
            except DomainError as exc:
                out.append(an._not_found(name, 0.0, diagnostic=str(exc)))
        elif name in ("fluct_fit", "fluct_inflection"):
            series = an.transverse_fluctuation(
                traj, dt=a["fluct_dt"], t_max=a["fluct_t_max"], window=a["smoothing_window"]
            )
            if name == "fluct_fit":
                out.append(an.exit_time_fluct_fit(series, a["plateau_slope"], a["suffix_tol"]))
            else:
                out.append(an.exit_time_fluct_inflection(series))
    spot = angle = None
    if traj.dim == 3 and cfg.pulse is not None and not isinstance(cfg.pulse, Static):
        sp = an.spot_size(traj, a["detection_radius"])
        if sp.found:
            spot = sp.spot
            angle = math.degrees(an.offset_angle(traj, detection_radius=a["detection_radius"]).final)
    return out, spot, angle, backprop


def run_point(cfg: RunConfig, value=None, keep_trajectory=True) -> PointResult:
    t_end = cfg.integrator.t_end
    if "momentum_backprop" in cfg.criteria:
        t_end = max(t_end, cfg.analysis["t_f"])
    traj = _run_trajectory(cfg, t_end)
    results, spot, angle, back = evaluate_criteria(traj, cfg)
    for r in results:
        r.extras.pop("backprop", None)
    return PointResult(
        value, results, spot, angle,
        trajectory=traj if keep_trajectory else None,
        backprop=back if keep_trajectory else None,
        summary=pulse_summary(cfg.pulse),
    )


def _sweep_worker(args):
    cfg, value = args
    return run_point(cfg, value, keep_trajectory=False)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return ""
    return repr(v)


def _exit_scalars(r):
    x, p = r.exit_position, r.exit_momentum
    if x is None:
        return None, None
    x, p = np.atleast_1d(x), np.atleast_1d(p)
    if x.size == 1:
        return float(x[0]), float(p[0])
    n = float(np.linalg.norm(x))
    return n, (float(p @ x) / n if n > 0 else None)


def criteria_rows(points, sweep=None):
    header = list(CRITERIA_COLUMNS)
    if sweep:
        header += ["sweep_parameter", "sweep_value"]
    rows = []
    for pt in points:
        F0, omega, N, inten = pt.summary
        for r in pt.results:
            ex, ep = _exit_scalars(r)
            row = [
                F0, omega, N, inten, r.tau_max, r.tau_exit if r.found else None,
                r.tau_ionization, ex, ep, pt.spot, pt.angle_deg, r.found,
            ]
            cells = [r.criterion] + [_fmt(v) for v in row]
            if sweep:
                cells += [sweep["parameter"], _fmt(pt.value)]
            rows.append(cells)
    return header, rows


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def resolve_threads(threads: int | None) -> int:
    env = os.environ.get("TUNNEL_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError as exc:
            raise ConfigurationError(f"TUNNEL_THREADS must be an integer, got {env!r}") from exc
    threads = 1 if threads is None else threads
    if threads < 1:
        raise ConfigurationError(f"thread count must be positive, got {threads}")
    return threads


def run_contour(cfg: RunConfig, out_dir: Path):
    spec = dict(cfg.contour or {})
    F = field_vector(cfg.pulse, spec.pop("time", 0.0)) if cfg.pulse is not None else None
    gs = ground_state_init(cfg.model, cfg.U)
    level = spec.pop("level", gs.energy)
    for k in ("x_range", "s_range", "resolution"):
        if k in spec:
            spec[k] = tuple(spec[k])
    cont = equipotential_contour(cfg.model, F, level, U=cfg.U, frozen_s=gs.s, **spec)
    axis = cont.axis + 1
    path = out_dir / CONTOUR_FILE
    cont.to_csv(path, x_label=f"x{axis}", s_label=f"s{axis}")
    return cont, path


def write_error(out_dir: Path, exc: BaseException):
    report = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, IntegrationError):
        report["t"] = None if exc.t is None else float(exc.t)
        report["y"] = None if exc.y is None else [float(v) for v in np.asarray(exc.y)]
        if exc.partial is not None and len(exc.partial) > 1:
            exc.partial.to_csv(out_dir / TRAJECTORY_FILE)
            report["partial_trajectory"] = TRAJECTORY_FILE
    else:
        report["traceback"] = traceback.format_exception_only(type(exc), exc)[-1].strip()
    path = out_dir / ERROR_FILE
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_scenario(cfg: RunConfig, out_dir=None, threads: int | None = 1, what: str = "criteria") -> dict:
    """Run ``cfg`` and write its artifacts; returns ``{"status": .., "files": [..]}``.

    ``what`` selects the subcommand flavour: ``evolve`` (trajectory only),
    ``criteria``, ``sweep``, ``backprop`` or ``contour``.  Integration
    failures leave the partial trajectory plus ``error.json`` on disk and
    return status 1; they are not raised.
    """
    out_dir = Path(out_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    try:
        if what == "contour" or cfg.contour:
            _, path = run_contour(cfg, out_dir)
            files.append(path)
            if what == "contour":
                files += emit_plot_scripts(out_dir)
                return {"status": 0, "files": [str(f) for f in files]}
        if what == "sweep" or (cfg.sweep and what == "criteria"):
            if not cfg.sweep:
                raise ConfigurationError("config key 'sweep': required for the sweep command")
            jobs = [(c, v) for v, c in cfg.points()]
            n = resolve_threads(threads)
            if n > 1:
                with ProcessPoolExecutor(max_workers=n) as pool:
                    points = list(pool.map(_sweep_worker, jobs))
            else:
                points = [_sweep_worker(j) for j in jobs]
            header, rows = criteria_rows(points, cfg.sweep)
            write_csv(out_dir / CRITERIA_FILE, header, rows)
            files.append(out_dir / CRITERIA_FILE)
        else:
            if what == "evolve":
                pt = run_point(dataclasses.replace(cfg, criteria=[]))
            elif what == "backprop":
                pt = run_point(dataclasses.replace(cfg, criteria=["momentum_backprop"]))
            else:
                pt = run_point(cfg)
            pt.trajectory.to_csv(out_dir / TRAJECTORY_FILE)
            files.append(out_dir / TRAJECTORY_FILE)
            if pt.backprop is not None and what in ("backprop", "criteria"):
                pt.backprop.to_csv(out_dir / BACKPROP_FILE)
                files.append(out_dir / BACKPROP_FILE)
            if pt.results:
                header, rows = criteria_rows([pt])
                write_csv(out_dir / CRITERIA_FILE, header, rows)
                files.append(out_dir / CRITERIA_FILE)
        files += emit_plot_scripts(out_dir)
    except IntegrationError as exc:
        files.append(write_error(out_dir, exc))
        return {"status": 1, "files": [str(f) for f in files], "error": str(exc)}
    return {"status": 0, "files": [str(f) for f in files]}


# --------------------------------------------------------------------------
# plot scripts
# --------------------------------------------------------------------------

def _header(path):
    with open(path, encoding="utf-8") as fh:
        return next(csv.reader(fh))


def _col(cols, name):
    return cols.index(name) + 1


def _trajectory_script(csv_name, cols):
    ax = "3" if "x3" in cols else "1"
    lines = [
        "# x(t), s(t) overlay",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't (a.u.)'",
        "set ylabel 'a.u.'",
        f"set output '{csv_name[:-4]}.png'",
        "set terminal pngcairo size 900,600",
        "plot \\",
    ]
    series = [f"x{ax}", f"s{ax}"] + (["s1"] if ax == "3" else [])
    series = [s for s in series if s in cols]
    parts = [f"  '{csv_name}' using 1:{_col(cols, s)} with lines title '{s}'" for s in series]
    lines.append(", \\\n".join(parts))
    return "\n".join(lines) + "\n"


def _criteria_script(csv_name, cols):
    return "\n".join([
        "# tau_ion versus peak intensity, one curve per criterion",
        "set datafile separator ','",
        "set xlabel 'I (W/cm^2)'",
        "set ylabel 'tau_ion (a.u.)'",
        "set terminal pngcairo size 900,600",
        "set output 'criteria.png'",
        f"crit = system(\"tail -n +2 {csv_name} | cut -d, -f1 | sort -u\")",
        f"plot for [c in crit] '{csv_name}' using (strcol(1) eq c ? ${_col(cols, 'intensity_Wcm2')} : 1/0):"
        f"{_col(cols, 'tau_ion')} with linespoints title c",
    ]) + "\n"


def _contour_script(csv_name, cols):
    return "\n".join([
        "# equipotential line of the effective potential",
        "set datafile separator ','",
        f"set xlabel '{cols[0]}'",
        f"set ylabel '{cols[1]}'",
        "set terminal pngcairo size 900,600",
        "set output 'contour.png'",
        f"plot '{csv_name}' using 1:2:3 with lines lc variable notitle",
    ]) + "\n"


_SCRIPTS = {
    TRAJECTORY_FILE: ("trajectory.gp", _trajectory_script),
    BACKPROP_FILE: ("backprop.gp", _trajectory_script),
    CRITERIA_FILE: ("criteria.gp", _criteria_script),
    CONTOUR_FILE: ("contour.gp", _contour_script),
}


def emit_plot_scripts(artifact_dir, require=()) -> list:
    """Write a gnuplot script for every known CSV in ``artifact_dir``.

    Scripts depend only on the CSV headers, so reruns are byte-identical.
    Names in ``require`` must be present or a :class:`FileNotFoundError`
    naming the file is raised.
    """
    d = Path(artifact_dir)
    for name in require:
        if not (d / name).exists():
            raise FileNotFoundError(f"missing CSV {name!r} in {str(d)!r}")
    written = []
    for csv_name, (script, fn) in _SCRIPTS.items():
        path = d / csv_name
        if path.exists():
            target = d / script
            target.write_text(fn(csv_name, _header(path)), encoding="utf-8")
            written.append(target)
    if not written and not require:
        raise FileNotFoundError(f"no CSV files in {str(d)!r}")
    return written
