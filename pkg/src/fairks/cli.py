"""Command line front end: config files, presets, sweeps and report emission.

Usage::

    fairks run CONFIG [--out DIR] [--jobs N] [--format csv,json,svg]
    fairks preset NAME [...]
    fairks sweep CONFIG [...]

Exit status: 0 success, 2 configuration error, 3 solver diagnosis, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import fastdiff, jko1d, kernel
from .domain import Frame, InvalidArgument, Params, RadialDensity, barenblatt, characteristic, gaussian
from .energy import estimate_chi_c
from .svg import Figure

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
MODES = ("FixedPoint", "Jko", "ChiCSweep", "PsiTable", "Envelope")
FORMATS = ("csv", "json", "svg")
PRESETS = ("figure1", "figure2", "psi-table", "chic-1d")


class ConfigError(ValueError):
    pass


class SolverDiagnosis(RuntimeError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


@dataclass
class Numerics:
    M: int = 400
    dt: float = 1e-3
    dt_max: float = 0.5
    t_end: float = 100.0
    steady_tol: float = 1e-8
    fp_tol: float = 1e-9
    max_iter: int = 5000
    relaxation: float = 0.5
    R_max: float | None = None
    jko_compare: bool = False


@dataclass
class InitialData:
    kind: str = "characteristic"
    radius: float = 0.5
    sigma: float = 1.0
    path: str | None = None


@dataclass
class RunConfig:
    params: Params
    mode: str
    numerics: Numerics
    initial: InitialData
    directory: Path
    formats: tuple
    chi_list: tuple = ()
    psi: dict = field(default_factory=dict)
    source: str = "<string>"


# --------------------------------------------------------------------------
# documented report layouts (JSON Schema)

_num = {"type": ["number", "null"]}
_bool = {"type": "boolean"}

FIXED_POINT_SCHEMA = {
    "type": "object",
    "required": ["mode", "diagnosis", "N", "k", "chi", "converged", "iterations", "final_residual",
                 "C_const", "I_k", "delta_lower", "delta_upper", "sandwich_value", "sandwich_ok",
                 "envelope_ok", "envelope_every_iterate", "el_residual", "max_density", "mass"],
    "properties": {
        "mode": {"enum": ["FixedPoint", "Envelope"]},
        "diagnosis": {"type": "string"},
        "N": {"type": "integer"},
        "iterations": {"type": "integer"},
        "converged": _bool, "envelope_ok": _bool, "sandwich_ok": _bool, "envelope_every_iterate": _bool,
        **{k: _num for k in ("k", "chi", "final_residual", "C_const", "I_k", "delta_lower",
                             "delta_upper", "sandwich_value", "el_residual", "max_density", "mass")},
        "jko": {"type": "object", "required": ["sup_diff_to_fixed_point", "converged_to_steady"]},
    },
}

JKO_SCHEMA = {
    "type": "object",
    "required": ["mode", "diagnosis", "k", "chi", "frame", "M", "t_final", "steps", "converged_to_steady",
                 "blow_up", "stalled", "F_total", "F_k", "max_density", "com"],
    "properties": {
        "mode": {"const": "Jko"},
        "diagnosis": {"enum": ["ok", "blow_up", "stalled"]},
        "M": {"type": "integer"},
        "steps": {"type": "integer"},
        "converged_to_steady": _bool, "blow_up": _bool, "stalled": _bool,
        **{k: _num for k in ("k", "chi", "t_final", "F_total", "F_k", "max_density", "com")},
    },
}

SWEEP_SCHEMA = {
    "type": "object",
    "required": ["mode", "k", "crossing", "bracket", "points", "reference_chi_c", "relative_difference",
                 "non_converged"],
    "properties": {
        "mode": {"const": "ChiCSweep"},
        "crossing": _num,
        "reference_chi_c": _num,
        "relative_difference": _num,
        "points": {
            "type": "array",
            "items": {"type": "object", "required": ["chi", "converged", "blow_up", "F_k", "V", "t_final"]},
        },
        "non_converged": {"type": "array", "items": {"type": "number"}},
    },
}

PSI_SCHEMA = {
    "type": "object",
    "required": ["mode", "N", "k_values", "rows", "psi_at_zero"],
    "properties": {
        "mode": {"const": "PsiTable"},
        "N": {"type": "integer"},
        "rows": {"type": "integer"},
        "k_values": {"type": "array", "items": {"type": "number"}},
        "psi_at_zero": {"type": "object"},
    },
}

CSV_HEADERS = {
    "profile.csv": {"FixedPoint": ["r", "rho"], "Jko": ["x", "rho"]},
    "envelope.csv": ["r", "rho", "m_envelope", "M_envelope"],
    "trajectory.csv": ["t", "F_total", "U", "W", "V", "com", "min_cell", "max_density"],
    "jko_profile.csv": ["x", "rho"],
    "sweep.csv": ["chi", "converged", "blow_up", "F_k", "V"],
    "psi_table.csv": ["k", "s", "psi", "sign", "slope_sign"],
}


# --------------------------------------------------------------------------
# parsing


def _line_of(text: str, section: str, key: str) -> int | None:
    cur = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            cur = m.group(1).strip()
        elif cur == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.I):
            return i
    return None


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    def where(section, key):
        ln = _line_of(text, section, key)
        return f"{source}:{ln}: [{section}] {key}" if ln else f"{source}: [{section}] {key}"

    def get(section, key, conv, default=None, required=False):
        if not cp.has_option(section, key):
            if required:
                raise ConfigError(f"{source}: missing [{section}] {key}")
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where(section, key)}: cannot parse {raw!r} ({exc})") from None

    def boolean(raw):
        v = raw.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")

    def floats(raw):
        return tuple(float(x) for x in raw.replace(",", " ").split())

    mode = get("run", "mode", str, required=True).strip()
    if mode not in MODES:
        raise ConfigError(f"{where('run', 'mode')}: unknown mode {mode!r}; expected one of {MODES}")
    N = get("params", "N", int, required=True)
    k = get("params", "k", float, 0.0 if mode == "PsiTable" else None, required=mode != "PsiTable")
    chi = get("params", "chi", float, 1.0 if mode in ("PsiTable", "ChiCSweep") else None,
              required=mode not in ("PsiTable", "ChiCSweep"))
    frame = get("params", "frame", str, "Rescaled").strip()
    try:
        params = Params(N, k, chi, Frame(frame))
    except (InvalidArgument, ValueError) as exc:
        raise ConfigError(f"{source}: [params] {exc}") from None

    num = Numerics(
        M=get("numerics", "M", int, 400),
        dt=get("numerics", "dt", float, 1e-3),
        dt_max=get("numerics", "dt_max", float, 0.5),
        t_end=get("numerics", "t_end", float, 100.0),
        steady_tol=get("numerics", "steady_tol", float, 1e-8),
        fp_tol=get("numerics", "fp_tol", float, 1e-9),
        max_iter=get("numerics", "max_iter", int, 5000),
        relaxation=get("numerics", "relaxation", float, 0.5),
        R_max=get("numerics", "R_max", float, None),
        jko_compare=get("numerics", "jko_compare", boolean, False),
    )
    for key in ("dt", "dt_max", "t_end", "steady_tol", "fp_tol", "relaxation"):
        if not getattr(num, key) > 0:
            raise ConfigError(f"{where('numerics', key)}: must be positive")
    if num.R_max is not None and not num.R_max > 0:
        raise ConfigError(f"{where('numerics', 'R_max')}: must be positive")
    if num.M < 16:
        raise ConfigError(f"{where('numerics', 'M')}: must be at least 16")
    if num.max_iter < 1:
        raise ConfigError(f"{where('numerics', 'max_iter')}: must be positive")
    if num.relaxation > 1:
        raise ConfigError(f"{where('numerics', 'relaxation')}: must lie in (0, 1]")

    init = InitialData(
        kind=get("initial", "kind", str, "characteristic").strip().lower(),
        radius=get("initial", "radius", float, 0.5),
        sigma=get("initial", "sigma", float, 1.0),
        path=get("initial", "path", str, None),
    )
    if init.kind not in ("characteristic", "gaussian", "barenblatt", "file"):
        raise ConfigError(f"{where('initial', 'kind')}: unknown initial data {init.kind!r}")
    if init.kind == "file" and not init.path:
        raise ConfigError(f"{source}: [initial] path required for kind = file")
    if not (init.radius > 0 and init.sigma > 0):
        raise ConfigError(f"{source}: [initial] radius and sigma must be positive")

    formats = tuple(x.strip() for x in get("output", "formats", str, "csv,json,svg").split(",") if x.strip())
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"{where('output', 'formats')}: unknown formats {bad}")
    directory = Path(get("output", "directory", str, "out"))

    chi_list = get("sweep", "chi_list", floats, ())
    if mode == "ChiCSweep":
        if not chi_list:
            raise ConfigError(f"{source}: [sweep] chi_list required for ChiCSweep")
        if any(c <= 0 for c in chi_list):
            raise ConfigError(f"{where('sweep', 'chi_list')}: values must be positive")
    psi = {
        "k_start": get("psi", "k_start", float, -5.8),
        "k_stop": get("psi", "k_stop", float, -0.2),
        "k_step": get("psi", "k_step", float, 0.2),
        "s_max": get("psi", "s_max", float, 3.0),
        "s_step": get("psi", "s_step", float, 0.05),
    }
    if mode == "PsiTable" and (psi["k_step"] <= 0 or psi["s_step"] <= 0 or psi["s_max"] <= 0):
        raise ConfigError(f"{source}: [psi] steps and s_max must be positive")
    return RunConfig(params, mode, num, init, directory, formats, chi_list, psi, source)


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    return parse_config(text, str(path))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    return resources.files("fairks").joinpath("presets", f"{name}.ini").read_text()


# --------------------------------------------------------------------------
# helpers


def initial_density(cfg: RunConfig) -> RadialDensity:
    N = cfg.params.N
    init = cfg.initial
    if init.kind == "characteristic":
        return characteristic(N, init.radius)
    if init.kind == "gaussian":
        return gaussian(N, init.sigma)
    if init.kind == "barenblatt":
        m = 1.0 - cfg.params.k / N
        if not m > 1:
            raise ConfigError(f"{cfg.source}: Barenblatt initial data needs k < 0")
        return barenblatt(N, m)
    try:
        with open(init.path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        r = np.array([float(x["r"]) for x in rows])
        v = np.array([float(x["rho"]) for x in rows])
    except OSError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{init.path}: expected columns r, rho ({exc})") from None
    return RadialDensity(r, v, N).normalized()


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# --------------------------------------------------------------------------
# modes


def run_fixed_point(cfg: RunConfig, out: Path, envelope_only: bool = False) -> dict:
    p = cfg.params
    if not (0 < p.k < p.N) or not p.rescaled:
        raise ConfigError(f"{cfg.source}: {cfg.mode} needs the rescaled frame with 0 < k < N")
    diagnosis = fastdiff.check_nonexistence(p)
    tcfg = fastdiff.make_config(p, fp_tol=cfg.numerics.fp_tol, max_iter=cfg.numerics.max_iter,
                                relaxation=cfg.numerics.relaxation, truncation_radius=cfg.numerics.R_max)
    init = initial_density(cfg)
    rep = fastdiff.solve_stationary(init, tcfg)
    rho = rep.density
    data = {"mode": cfg.mode, "diagnosis": diagnosis.value, **rep.to_json()}
    data["sandwich_ok"] = bool(rep.delta_lower <= rep.sandwich_value <= rep.delta_upper)
    data["envelope_every_iterate"] = bool(all(rep.envelope_history))
    m_env, M_env = fastdiff.envelope(rho.nodes, tcfg, (rep.delta_lower, rep.delta_upper))
    jko_state = None
    if cfg.numerics.jko_compare and not envelope_only:
        if p.N != 1:
            raise ConfigError(f"{cfg.source}: jko_compare is available for N = 1 only")
        jr = jko1d.run(init, p, cfg.numerics.t_end, cfg.numerics.dt, M=cfg.numerics.M,
                       dt_max=cfg.numerics.dt_max, steady_tol=cfg.numerics.steady_tol)
        jko_state = jr.final
        x, d = jko_state.midpoints(), jko_state.cell_density()
        data["jko"] = {
            **jr.to_json(),
            "sup_diff_to_fixed_point": float(np.max(np.abs(d - rho(np.abs(x))))),
        }
        if "csv" in cfg.formats:
            jko1d.write_trajectory_csv(out / "trajectory.csv", jr)
            jko1d.write_profile_csv(out / "jko_profile.csv", jko_state)
    if "csv" in cfg.formats:
        if not envelope_only:
            _write_csv(out / "profile.csv", ["r", "rho"], zip(rho.nodes, rho.values))
        fastdiff.write_envelope_csv(out / "envelope.csv", rep, tcfg)
    if "svg" in cfg.formats:
        view = rho.nodes <= max(4.0 * rho.support_radius(1e-3), 1e-3)
        r = rho.nodes[view]
        full = np.concatenate([-r[::-1], r])
        sym = lambda v: np.concatenate([v[view][::-1], v[view]])  # noqa: E731
        if not envelope_only:
            fig = Figure(f"stationary density, chi={p.chi:g}, k={p.k:g}", "x", "density")
            fig.add(full, sym(init(rho.nodes)), "initial data", "#222222", "")
            fig.add(full, sym(rho.values), "fixed point", "#c0392b", "")
            if jko_state is not None:
                fig.add(jko_state.midpoints(), jko_state.cell_density(), "JKO limit", "#27803b", "4,2")
            fig.save(out / "density.svg")
        fig = Figure(f"density and envelope, chi={p.chi:g}, k={p.k:g}", "x", "density", logy=True)
        fig.add(full, sym(rho.values), "density", "#c0392b", "")
        fig.add(full, sym(m_env), "m(x)", "#1f4e9c", "2,3")
        fig.add(full, sym(M_env), "M(x)", "#1f4e9c", "7,4")
        fig.save(out / "logdensity.svg")
    if "json" in cfg.formats:
        _write_json(out / "report.json", data)
    if not rep.converged or not rep.envelope_ok:
        raise SolverDiagnosis("fixed point not converged" if not rep.converged else "envelope violated", data)
    return data


def run_jko(cfg: RunConfig, out: Path) -> dict:
    p = cfg.params
    if p.N != 1:
        raise ConfigError(f"{cfg.source}: Jko mode is one-dimensional")
    init = initial_density(cfg)
    jr = jko1d.run(init, p, cfg.numerics.t_end, cfg.numerics.dt, M=cfg.numerics.M,
                   dt_max=cfg.numerics.dt_max, steady_tol=cfg.numerics.steady_tol, stop_at_steady=False)
    data = {"mode": "Jko", **jr.to_json()}
    data["diagnosis"] = "blow_up" if jr.blow_up else ("stalled" if jr.stalled else "ok")
    if "csv" in cfg.formats:
        jko1d.write_trajectory_csv(out / "trajectory.csv", jr)
        jko1d.write_profile_csv(out / "profile.csv", jr.final)
    if "svg" in cfg.formats:
        fig = Figure(f"JKO density, chi={p.chi:g}, k={p.k:g}", "x", "density")
        st0 = jko1d.Pseudoinverse.from_density(init, cfg.numerics.M)
        fig.add(st0.midpoints(), st0.cell_density(), "initial data", "#222222", "")
        fig.add(jr.final.midpoints(), jr.final.cell_density(), f"t={jr.times[-1]:.3g}", "#c0392b", "")
        fig.save(out / "density.svg")
        fig = Figure("free energy", "t", "F")
        fig.add(jr.times, jr.totals, "F_total", "#1f4e9c", "")
        fig.save(out / "energy.svg")
    if "json" in cfg.formats:
        _write_json(out / "report.json", data)
    if jr.blow_up or jr.stalled:
        raise SolverDiagnosis(data["diagnosis"], data)
    return data


def _sweep_task(args):
    chi, k, M, t_end, dt_max = args
    return jko1d.sweep_point(chi, k, M=M, t_end=t_end, dt_max=dt_max)


def run_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> dict:
    p = cfg.params
    if p.N != 1 or not (-1 < p.k <= 0):
        raise ConfigError(f"{cfg.source}: ChiCSweep needs N = 1 and -1 < k <= 0")
    tasks = [(chi, p.k, cfg.numerics.M, cfg.numerics.t_end, cfg.numerics.dt_max) for chi in cfg.chi_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_sweep_task, tasks))
    else:
        points = [_sweep_task(t) for t in tasks]
    res = jko1d.chi_crossing(points, p.k)
    data = {"mode": "ChiCSweep", **res.to_json()}
    if p.k < 0:
        est = estimate_chi_c(p)
        data["hls_estimate"] = est.to_json()
        ref = est.chi_c
    else:
        ref = 1.0
        data["reference"] = "logarithmic threshold"
    data["reference_chi_c"] = ref
    data["relative_difference"] = None if res.crossing is None else abs(res.crossing - ref) / ref
    data["non_converged"] = [pt.chi for pt in points if not pt.converged]
    if "csv" in cfg.formats:
        _write_csv(out / "sweep.csv", ["chi", "converged", "blow_up", "F_k", "V"],
                   [(pt.chi, int(pt.converged), int(pt.blow_up), pt.F_k, pt.V) for pt in points])
    if "svg" in cfg.formats:
        good = [pt for pt in points if pt.converged]
        fig = Figure(f"steady-state energy, k={p.k:g}", "chi", "F_k")
        fig.add([pt.chi for pt in good], [pt.F_k for pt in good], "F_k of steady state", "#c0392b", "")
        fig.save(out / "sweep.svg")
    if "json" in cfg.formats:
        _write_json(out / "sweep.json", data)
    if res.crossing is None:
        raise SolverDiagnosis(f"crossing undefined: {res.note}", data)
    return data


def psi_table_rows(N: int, ks, s_values):
    """Rows (k, s, psi, sign, slope_sign) for each k; s = 1 is skipped where singular."""
    rows = []
    for k in ks:
        s = np.array([x for x in s_values if not (x == 1.0 and k <= 2 - N)])
        vals = kernel.psi_values(s, N, k) if N > 1 else kernel.psi_one_dim(s, k)
        slope = np.concatenate([[0.0], np.sign(np.diff(vals))])
        rows.extend(zip([k] * s.size, s, vals, np.sign(vals), slope))
    return rows


def run_psi_table(cfg: RunConfig, out: Path) -> dict:
    N = cfg.params.N
    ps = cfg.psi
    n = int(round((ps["k_stop"] - ps["k_start"]) / ps["k_step"])) + 1
    ks = [round(ps["k_start"] + i * ps["k_step"], 12) for i in range(n)]
    ks = [k for k in ks if -N < k < N]
    ns = int(round(ps["s_max"] / ps["s_step"])) + 1
    s_values = [round(i * ps["s_step"], 12) for i in range(ns)]
    rows = psi_table_rows(N, ks, s_values)
    if "csv" in cfg.formats:
        _write_csv(out / "psi_table.csv", ["k", "s", "psi", "sign", "slope_sign"], rows)
    if "svg" in cfg.formats:
        fig = Figure(f"psi_k for N={N}", "s", "psi")
        for k in ks:
            sel = [r for r in rows if r[0] == k]
            y = np.array([r[2] for r in sel])
            fig.add([r[1] for r in sel], np.clip(y, -5, 5), f"k={k:g}" if k in (ks[0], ks[-1]) else "")
        fig.save(out / "psi.svg")
    data = {
        "mode": "PsiTable",
        "N": N,
        "k_values": ks,
        "rows": len(rows),
        "psi_at_zero": {str(k): float(r[2]) for k in ks for r in rows if r[0] == k and r[1] == 0.0},
    }
    if "json" in cfg.formats:
        _write_json(out / "report.json", data)
    return data


def execute(cfg: RunConfig, jobs: int = 1) -> dict:
    out = cfg.directory
    out.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "FixedPoint":
        return run_fixed_point(cfg, out)
    if cfg.mode == "Envelope":
        return run_fixed_point(cfg, out, envelope_only=True)
    if cfg.mode == "Jko":
        return run_jko(cfg, out)
    if cfg.mode == "ChiCSweep":
        return run_sweep(cfg, out, jobs)
    return run_psi_table(cfg, out)


# --------------------------------------------------------------------------
# entry point


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.out:
        cfg.directory = Path(args.out)
    if args.format:
        fm = tuple(x.strip() for x in args.format.split(",") if x.strip())
        bad = [f for f in fm if f not in FORMATS]
        if bad:
            raise ConfigError(f"--format: unknown formats {bad}")
        cfg.formats = fm
    return cfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fairks", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--format", help="comma-separated subset of csv,json,svg")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run a config file").add_argument("config")
    sub.add_parser("preset", parents=[common], help=f"run a shipped preset: {', '.join(PRESETS)}").add_argument("name")
    sub.add_parser("sweep", parents=[common], help="chi sweep from a config file").add_argument("config")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if args.command == "preset":
            cfg = parse_config(preset_text(args.name), f"preset:{args.name}")
        else:
            cfg = load_config(args.config)
        if args.command == "sweep":
            cfg.mode = "ChiCSweep"
            if not cfg.chi_list:
                raise ConfigError(f"{cfg.source}: [sweep] chi_list required")
        cfg = _apply_overrides(cfg, args)
        data = execute(cfg, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverDiagnosis as exc:
        print(f"solver diagnosis: {exc}", file=sys.stderr)
        print(json.dumps(_jsonable(exc.report), sort_keys=True), file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    summary = {k: v for k, v in data.items() if not isinstance(v, (list, dict))}
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
