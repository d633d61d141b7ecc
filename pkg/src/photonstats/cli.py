"""``photonstats`` command line.

    photonstats <command> [--config FILE] [--param value ...] [--out FILE] [--format csv|json]

Commands: ``jc-sweep``, ``com-sweep``, ``heatmap``, ``g2tau``, ``eigen``,
``preset NAME``. All rates are in units of kappa (kappa = 1 internally).

A config file is a flat JSON object using the same keys as the long flags
(with underscores). Precedence: built-in defaults < preset < file < flags.
The JSON output of a run embeds its fully resolved config under
``manifest.config``; passing that output file back as ``--config`` repeats the
run exactly.

Exit status: 0 all points succeeded, 2 invalid input, 3 numerical failure at
one or more points, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from importlib import metadata
from pathlib import Path
from typing import Any

from .errors import ParameterError, PhotonStatsError
from .models import (
    ModelParams,
    com_dressed_levels,
    jc_dressed_levels,
    two_photon_resonances,
)
from .sweep import (
    OUTPUTS,
    PRESETS,
    VARIABLES,
    Axis,
    SweepResult,
    SweepSpec,
    figure_preset,
    run,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

COMMANDS = ("jc-sweep", "com-sweep", "heatmap", "g2tau", "eigen", "preset")
PHYSICAL = ("delta_c", "delta_a", "delta_tilde", "nu", "g", "omega", "gamma", "Gamma")
PHONON_KEYS = ("nu", "Gamma")


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunConfig:
    command: str | None = None
    preset: str | None = None
    model: str | None = None
    delta_c: float | None = None
    delta_a: float | None = None
    delta_tilde: float | None = None
    nu: float | None = None
    g: float | None = None
    omega: float | None = None
    gamma: float | None = None
    Gamma: float | None = None
    kappa: float | None = None
    kappa_hz: float | None = None
    var: str | None = None
    min: float | None = None
    max: float | None = None
    points: int | None = None
    var2: str | None = None
    min2: float | None = None
    max2: float | None = None
    points2: int | None = None
    tau_max: float | None = None
    tau_points: int | None = None
    photon_cutoff: int | None = None
    phonon_cutoff: int | None = None
    convergence: bool | None = None
    manifold_max: int | None = None
    out: str | None = None
    format: str | None = None
    extra: dict = field(default_factory=dict, repr=False)


KEYS = tuple(f.name for f in fields(RunConfig) if f.name != "extra")
_INT_KEYS = {"points", "points2", "tau_points", "photon_cutoff", "phonon_cutoff", "manifold_max"}
_FLOAT_KEYS = set(PHYSICAL) | {"kappa", "kappa_hz", "min", "max", "min2", "max2", "tau_max"}
_STR_KEYS = {"command", "preset", "model", "var", "var2", "out", "format"}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            if isinstance(value, bool):
                raise ValueError
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key == "convergence":
            if isinstance(value, bool):
                return value
            raise ValueError
        if key in _STR_KEYS:
            if not isinstance(value, str):
                raise ValueError
            return value
    except (TypeError, ValueError):
        raise ParameterError(f"invalid value {value!r} for {key}") from None
    raise ParameterError(f"unknown config key {key!r}")


def load_config_file(path: str | Path) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "manifest" in doc:
        doc = doc["manifest"].get("config", {})
    if not isinstance(doc, dict):
        raise ParameterError("config file must hold a flat JSON object")
    return doc


def parse_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Merge a config file with flag overrides and validate the result."""
    merged: dict[str, Any] = {}
    if path is not None:
        merged.update(load_config_file(path))
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    unknown = sorted(set(merged) - set(KEYS))
    if unknown:
        raise ParameterError(f"unknown config key(s): {', '.join(unknown)}")
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ParameterError(f"command must be one of {COMMANDS}, got {cfg.command!r}")
    if cfg.command == "preset" and cfg.preset not in PRESETS:
        raise ParameterError(f"preset must be one of {PRESETS}, got {cfg.preset!r}")
    if cfg.command != "preset" and cfg.preset is not None:
        raise ParameterError("'preset' is only valid with the preset command")
    if cfg.format not in (None, "csv", "json"):
        raise ParameterError("format must be csv or json")
    if cfg.kappa is not None and cfg.kappa != 1.0:
        raise ParameterError("rates are in units of kappa; kappa is fixed to 1 (use kappa_hz for labeling)")
    for key in ("nu", "g", "omega", "gamma", "Gamma"):
        v = getattr(cfg, key)
        if v is not None and v < 0:
            raise ParameterError(f"{key} must be >= 0, got {v}")
    if cfg.kappa_hz is not None and cfg.kappa_hz <= 0:
        raise ParameterError("kappa_hz must be > 0")
    for key in ("var", "var2"):
        v = getattr(cfg, key)
        if v is not None and v not in VARIABLES:
            raise ParameterError(f"{key} must be one of {VARIABLES}, got {v!r}")
    for key in ("points", "points2", "tau_points"):
        v = getattr(cfg, key)
        if v is not None and v < 2:
            raise ParameterError(f"{key} must be >= 2")
    if cfg.tau_max is not None and cfg.tau_max <= 0:
        raise ParameterError("tau_max must be > 0")
    if cfg.manifold_max is not None and cfg.manifold_max < 1:
        raise ParameterError("manifold_max must be >= 1")
    model = model_of(cfg)
    if model == "jc":
        clash = [k for k in PHONON_KEYS if getattr(cfg, k) not in (None, 0.0)]
        if cfg.phonon_cutoff not in (None, 0):
            clash.append("phonon_cutoff")
        if "nu" in (cfg.var, cfg.var2):
            clash.append("var=nu")
        if clash:
            raise ParameterError(f"phonon settings {clash} conflict with the jc model")
        if cfg.delta_a is not None and cfg.delta_tilde is not None:
            raise ParameterError("give either delta_a or delta_tilde for the jc model, not both")
    else:
        if cfg.delta_tilde is not None:
            raise ParameterError("delta_tilde is a jc parameter; the motional model uses delta_a and nu")
        if cfg.delta_c is not None and "delta_c" not in (cfg.var, cfg.var2):
            raise ParameterError("delta_c is tied to delta_a + nu in the motional model")
        if cfg.phonon_cutoff is not None and cfg.phonon_cutoff < 1:
            raise ParameterError("motional model needs phonon_cutoff >= 1")


def model_of(cfg: RunConfig) -> str:
    if cfg.command == "jc-sweep":
        return "jc"
    if cfg.command == "com-sweep":
        return "com-effective"
    if cfg.command == "preset":
        return figure_preset(cfg.preset).model
    model = cfg.model or ("jc" if cfg.command == "eigen" else "com-effective")
    if model not in ("jc", "com-effective"):
        raise ParameterError(f"model must be jc or com-effective, got {model!r}")
    return model


def _default_spec(cfg: RunConfig) -> SweepSpec:
    if cfg.command == "preset":
        return figure_preset(cfg.preset)
    if cfg.command == "jc-sweep":
        return figure_preset("fig1d")
    if cfg.command == "com-sweep":
        return figure_preset("fig2d")
    if cfg.command == "heatmap":
        spec = figure_preset("fig3a")
        if model_of(cfg) == "jc":
            base = figure_preset("fig1d").base
            spec = replace(spec, model="jc", base=base, phonon_cutoff=0,
                           axes=(Axis("delta_c", -100.0, 100.0, 101), Axis("gamma", 0.5, 15.0, 101)))
        return spec
    if cfg.command in ("g2tau", "eigen"):
        spec = figure_preset("fig4")
        if model_of(cfg) == "jc":
            spec = replace(spec, model="jc", base=figure_preset("fig1d").base, phonon_cutoff=0,
                           photon_cutoff=6)
        return spec
    raise ParameterError(f"unknown command {cfg.command!r}")


def _resolve_params(cfg: RunConfig, base: ModelParams, model: str) -> ModelParams:
    kw = {k: getattr(cfg, k) for k in ("g", "omega", "gamma", "Gamma", "nu") if getattr(cfg, k) is not None}
    p = base.replace(**kw)
    if model == "jc":
        dt = cfg.delta_tilde if cfg.delta_tilde is not None else p.delta_tilde
        dc = cfg.delta_c if cfg.delta_c is not None else p.delta_c
        if cfg.delta_a is not None:
            return p.replace(delta_c=dc, delta_a=cfg.delta_a)
        return p.replace(delta_c=dc, delta_a=dc + dt)
    da = cfg.delta_a if cfg.delta_a is not None else p.delta_a
    if cfg.delta_c is not None:
        return p.replace(delta_c=cfg.delta_c, delta_a=cfg.delta_c - p.nu)
    return p.replace(delta_a=da, delta_c=da + p.nu)


def _resolve_axis(old: Axis | None, name, lo, hi, n) -> Axis | None:
    if old is None and name is None:
        if lo is not None or hi is not None or n is not None:
            raise ParameterError("grid bounds given without a sweep variable")
        return None
    if old is None:
        if lo is None or hi is None:
            raise ParameterError(f"sweep variable {name} needs min and max")
        return Axis(name, lo, hi, n or 801)
    return Axis(name or old.name, old.start if lo is None else lo, old.stop if hi is None else hi,
                old.points if n is None else n)


def build_spec(cfg: RunConfig) -> SweepSpec:
    """Turn a validated config into a sweep spec (eigen is handled separately)."""
    spec = _default_spec(cfg)
    model = model_of(cfg)
    base = _resolve_params(cfg, spec.base, model)
    changes: dict[str, Any] = {"base": base}
    if cfg.photon_cutoff is not None:
        changes["photon_cutoff"] = cfg.photon_cutoff
    if cfg.phonon_cutoff is not None:
        changes["phonon_cutoff"] = cfg.phonon_cutoff
    if cfg.convergence is not None:
        changes["convergence"] = cfg.convergence
    if spec.tau is not None and not spec.axes:
        if any(v is not None for v in (cfg.var, cfg.var2, cfg.min, cfg.max, cfg.points)):
            raise ParameterError("g2tau runs take no sweep variables")
        changes["tau"] = Axis("tau", 0.0, cfg.tau_max or spec.tau.stop, cfg.tau_points or spec.tau.points)
    else:
        if cfg.tau_max is not None or cfg.tau_points is not None:
            raise ParameterError("tau settings only apply to g2tau runs")
        ax1 = _resolve_axis(spec.axes[0] if spec.axes else None, cfg.var, cfg.min, cfg.max, cfg.points)
        ax2 = _resolve_axis(spec.axes[1] if len(spec.axes) > 1 else None, cfg.var2, cfg.min2, cfg.max2, cfg.points2)
        if cfg.command == "heatmap" and ax2 is None:
            raise ParameterError("heatmap needs two sweep variables")
        changes["axes"] = tuple(a for a in (ax1, ax2) if a is not None)
    return replace(spec, **changes)


def resolved_config(cfg: RunConfig, spec: SweepSpec) -> dict[str, Any]:
    """Flat config that reproduces ``spec`` when fed back through parse_config."""
    p = spec.base
    out: dict[str, Any] = {"command": cfg.command}
    if cfg.command == "preset":
        out["preset"] = cfg.preset
    if cfg.command in ("heatmap", "g2tau", "eigen"):
        out["model"] = spec.model
    sweeps_delta_c = any(ax.name == "delta_c" for ax in spec.axes)
    if spec.model == "jc":
        out.update(delta_c=p.delta_c, delta_tilde=p.delta_tilde)
    else:
        out.update(delta_a=p.delta_a, nu=p.nu)
        if sweeps_delta_c:
            out["delta_c"] = p.delta_c
    out.update(g=p.g, omega=p.omega, gamma=p.gamma)
    if spec.model != "jc":
        out["Gamma"] = p.Gamma
    for i, ax in enumerate(spec.axes):
        sfx = "" if i == 0 else "2"
        out.update({f"var{sfx}": ax.name, f"min{sfx}": ax.start, f"max{sfx}": ax.stop, f"points{sfx}": ax.points})
    if spec.tau is not None and not spec.axes:
        out.update(tau_max=spec.tau.stop, tau_points=spec.tau.points)
    out.update(photon_cutoff=spec.photon_cutoff, phonon_cutoff=spec.phonon_cutoff, convergence=spec.convergence)
    if cfg.kappa_hz is not None:
        out["kappa_hz"] = cfg.kappa_hz
    out["format"] = cfg.format or "csv"
    return out


def manifest(cfg: RunConfig, spec: SweepSpec | None, config: dict[str, Any], extra: dict | None = None) -> dict:
    m = {
        "artifact": "photonstats",
        "version": version(),
        "units": "rates and energies in units of kappa (kappa = 1)",
        "kappa_hz": cfg.kappa_hz,
        "config": config,
    }
    if spec is not None:
        m.update(
            model=spec.model,
            preset=spec.name,
            params=spec.base.as_dict(),
            cutoffs={"photon": spec.photon_cutoff, "phonon": spec.phonon_cutoff},
            convergence_check=spec.convergence,
            linked_detuning=("delta_a = delta_c + delta_tilde" if spec.model == "jc"
                             else "delta_c = delta_a + nu"),
            outputs=list(spec.outputs),
        )
    if extra:
        m.update(extra)
    return m


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".16e")
    return str(v)


def table_records(result: SweepResult) -> tuple[list[str], list[dict[str, Any]]]:
    cols = result.columns
    recs = []
    for r in result.rows:
        rec = {**r.coords, **r.values, **r.diagnostics, "error": r.error}
        recs.append({c: rec.get(c) for c in cols})
    return cols, recs


def emit(columns: list[str], records: list[dict[str, Any]], fmt: str, man: dict | None = None) -> bytes:
    """Serialize a table as CSV (header + rows) or JSON (manifest + rows)."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(rec.get(c)) for c in columns])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        rows = [{c: _json_value(rec.get(c)) for c in columns} for rec in records]
        doc = {"manifest": man or {}, "columns": columns, "rows": rows}
        return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")
    raise ParameterError(f"unknown output format {fmt!r}")


def _json_value(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def emit_result(result: SweepResult, fmt: str, man: dict | None = None) -> bytes:
    cols, recs = table_records(result)
    return emit(cols, recs, fmt, man)


def eigen_table(cfg: RunConfig) -> tuple[SweepSpec, list[str], list[dict[str, Any]]]:
    spec = build_spec(cfg)
    p = spec.base
    nmax = cfg.manifold_max or 3
    cols = ["kind", "n", "sign", "energy", "delta_c"]
    recs = []
    for n in range(1, nmax + 1):
        levels = jc_dressed_levels(n, p) if spec.model == "jc" else com_dressed_levels(n, p)
        for lvl in levels:
            recs.append({"kind": "level", "n": n, "sign": lvl.sign, "energy": lvl.energy, "delta_c": p.delta_c})
    if spec.model == "jc":
        res = two_photon_resonances(p)
        for key, n in (("single", 1), ("two_photon", 2)):
            for d in res[key]:
                recs.append({"kind": f"resonance_{key}", "n": n, "sign": None, "energy": 0.0, "delta_c": d})
    return spec, cols, recs


def gnuplot_hint(columns: list[str], out: str | None, heatmap: bool) -> str:
    src = out or "data.csv"
    if heatmap:
        z = columns.index("log10_g2_num") + 1
        return (f"gnuplot -p -e \"set datafile separator ','; set key autotitle columnhead; "
                f"set view map; splot '{src}' using 1:2:{z} with points palette pt 5\"")
    ys = [c for c in ("g2_num", "g2_ana", "nbar_num", "nbar_ana") if c in columns]
    plots = ", ".join(f"'{src}' using 1:{columns.index(c) + 1} with lines title '{c}'" for c in ys)
    return (f"gnuplot -p -e \"set datafile separator ','; set key autotitle columnhead; "
            f"set logscale y; plot {plots}\"")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON config file (or a previous JSON output)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default: csv)")
    g = p.add_argument_group("physical parameters (units of kappa)")
    g.add_argument("--delta-c", dest="delta_c", type=float, help="cavity-drive detuning Delta")
    g.add_argument("--delta-a", dest="delta_a", type=float, help="atom-drive detuning delta")
    g.add_argument("--delta-tilde", dest="delta_tilde", type=float, help="atom-cavity detuning (jc only; default 50)")
    g.add_argument("--nu", type=float, help="trap frequency (motional model)")
    g.add_argument("--g", type=float, help="coupling (default 50)")
    g.add_argument("--omega", type=float, help="drive strength (default 0.1)")
    g.add_argument("--gamma", type=float, help="atomic decay (default 1)")
    g.add_argument("--Gamma", type=float, help="phonon decay (motional model; default 0.1)")
    g.add_argument("--kappa", type=float, help="must be 1 if given")
    g.add_argument("--kappa-hz", dest="kappa_hz", type=float, help="kappa in Hz, recorded for labeling only")
    s = p.add_argument_group("grid")
    s.add_argument("--var", help=f"first sweep variable, one of {VARIABLES}")
    s.add_argument("--min", type=float)
    s.add_argument("--max", type=float)
    s.add_argument("--points", type=int, help="default 801 (1-D) or 101 (heatmap)")
    s.add_argument("--var2", help="second sweep variable (heatmap)")
    s.add_argument("--min2", type=float)
    s.add_argument("--max2", type=float)
    s.add_argument("--points2", type=int)
    s.add_argument("--tau-max", dest="tau_max", type=float, help="g2tau: last delay (default 2)")
    s.add_argument("--tau-points", dest="tau_points", type=int, help="g2tau: delays (default 400)")
    n = p.add_argument_group("numerics")
    n.add_argument("--photon-cutoff", dest="photon_cutoff", type=int, help="default 3 (6 for g2tau)")
    n.add_argument("--phonon-cutoff", dest="phonon_cutoff", type=int, help="default 3 (6 for g2tau); 0 for jc")
    n.add_argument("--no-convergence", dest="convergence", action="store_const", const=False,
                   help="skip the cutoff+1 truncation check")
    n.add_argument("--manifold-max", dest="manifold_max", type=int, help="eigen: highest manifold (default 3)")
    p.add_argument("--gnuplot-hint", action="store_true", help="print a plotting command to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonstats",
        description="Photon statistics of a weakly driven atom-cavity system (rates in units of kappa). "
        "Environment: PHOTONSTATS_WORKERS sets the worker-process count (default: CPU count).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "jc-sweep": "1-D sweep of the Jaynes-Cummings model (default: Delta in [-100, 100])",
        "com-sweep": "1-D sweep of the motional model (default: nu in [0, 200], delta = -100)",
        "heatmap": "2-D sweep with log10 g2(0) (default: nu x gamma, delta = -50)",
        "g2tau": "delayed correlation g2(tau) by regression and by the amplitude ODE",
        "eigen": "dressed-state energies and drive resonances",
        "preset": f"rerun a figure preset: {', '.join(PRESETS)}",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name], description=helps[name])
        if name == "preset":
            sp.add_argument("preset", help="preset name")
        if name in ("heatmap", "g2tau", "eigen"):
            sp.add_argument("--model", choices=("jc", "com-effective"))
        _add_common(sp)
    return parser


def _write(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    flags = {k: v for k, v in vars(args).items() if k in KEYS and v is not None}
    try:
        cfg = parse_config(args.config, flags)
        fmt = cfg.format or "csv"
        if cfg.command == "eigen":
            spec, cols, recs = eigen_table(cfg)
            man = manifest(cfg, spec, resolved_config(cfg, spec))
            _write(emit(cols, recs, fmt, man), cfg.out)
            return EXIT_OK
        spec = build_spec(cfg)
        result = run(spec)
    except ParameterError as exc:
        print(f"photonstats: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"photonstats: {exc}", file=sys.stderr)
        return EXIT_IO
    except PhotonStatsError as exc:
        print(f"photonstats: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    man = manifest(cfg, spec, resolved_config(cfg, spec), {"summary": result.meta} if result.meta else None)
    try:
        _write(emit_result(result, fmt, man), cfg.out)
    except OSError as exc:
        print(f"photonstats: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.gnuplot_hint:
        print(gnuplot_hint(result.columns, cfg.out, result.kind == "heatmap"), file=sys.stderr)
    failed = sum(r.error is not None for r in result.rows)
    if failed:
        print(f"photonstats: {failed} of {len(result.rows)} points failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
