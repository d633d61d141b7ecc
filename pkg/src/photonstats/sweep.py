"""Parameter sweeps and figure presets.

Each grid point runs the master-equation pipeline (steady state, nbar, g2(0),
plus a truncation check with every cutoff raised by one) and the closed-form
weak-drive pipeline. Points are independent and may be evaluated in worker
processes; rows always come back in grid order.

Linked detunings per point:

* ``jc``: delta_tilde is held fixed, delta_a = delta_c + delta_tilde.
* ``com-effective``: delta_c = delta_a + nu; if delta_c itself is swept,
  delta_a = delta_c - nu instead.
"""

from __future__ import annotations

import itertools
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .analytic import (
    amplitude_ode_g2tau,
    com_analytic_g2,
    com_analytic_nbar,
    jc_analytic_g2,
    jc_analytic_nbar,
)
from .correlations import g2_tau, g2_zero, mean_photon, schwarz_violation
from .errors import ParameterError, PhotonStatsError
from .hilbert import SpaceSpec, mode_operators
from .liouville import steady_state_residual, steadystate, system_liouvillian
from .models import ModelParams

SWEEP_MODELS = ("jc", "com-effective")
VARIABLES = ("delta_c", "nu", "gamma", "delta_a")
OUTPUTS = ("nbar_num", "g2_num", "nbar_ana", "g2_ana")
DIAGNOSTICS = ("residual", "trunc_delta")
WORKERS_ENV = "PHOTONSTATS_WORKERS"
PARALLEL_THRESHOLD = 64


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.points < 1:
            raise ParameterError(f"axis {self.name}: points must be >= 1")
        if self.points == 1 and self.start != self.stop:
            raise ParameterError(f"axis {self.name}: a single point needs start == stop")
        if self.points > 1 and not self.start < self.stop:
            raise ParameterError(f"axis {self.name}: need start < stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    model: str
    axes: tuple[Axis, ...]
    base: ModelParams
    outputs: tuple[str, ...] = OUTPUTS
    photon_cutoff: int = 3
    phonon_cutoff: int = 3
    convergence: bool = True
    tau: Axis | None = None
    name: str | None = None

    def __post_init__(self):
        if self.model not in SWEEP_MODELS:
            raise ParameterError(f"unknown sweep model {self.model!r}; expected one of {SWEEP_MODELS}")
        if len(self.axes) > 2:
            raise ParameterError("at most two sweep variables")
        if not self.axes and self.tau is None:
            raise ParameterError("a sweep needs one or two variables (or a tau grid)")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            raise ParameterError("sweep variables must be distinct")
        for n in names:
            if n not in VARIABLES:
                raise ParameterError(f"unknown sweep variable {n!r}; expected one of {VARIABLES}")
        for o in self.outputs:
            if o not in OUTPUTS + ("g2tau",):
                raise ParameterError(f"unknown output {o!r}")
        if self.model == "jc":
            if self.phonon_cutoff != 0:
                raise ParameterError("jc model takes no phonon mode (phonon_cutoff must be 0)")
            if "nu" in names:
                raise ParameterError("jc model has no trap frequency to sweep")
        elif self.phonon_cutoff < 1:
            raise ParameterError("com-effective model needs phonon_cutoff >= 1")
        self.space  # validates cutoffs

    @property
    def space(self) -> SpaceSpec:
        return SpaceSpec(self.photon_cutoff, self.phonon_cutoff)

    def grid(self) -> list[tuple[tuple[int, ...], dict[str, float]]]:
        """(grid index, coordinates) in row-major order of the axes."""
        if not self.axes:
            return [((), {})]
        values = [ax.values() for ax in self.axes]
        out = []
        for idx in itertools.product(*(range(len(v)) for v in values)):
            coords = {ax.name: float(v[i]) for ax, v, i in zip(self.axes, values, idx)}
            out.append((idx, coords))
        return out

    def params_at(self, coords: dict[str, float]) -> ModelParams:
        p = self.base
        if self.model == "jc":
            dt = p.delta_tilde
            p = replace(p, **coords)
            if "delta_a" not in coords:
                p = replace(p, delta_a=p.delta_c + dt)
        else:
            p = replace(p, **coords)
            if "delta_c" in coords:
                p = replace(p, delta_a=p.delta_c - p.nu)
            else:
                p = replace(p, delta_c=p.delta_a + p.nu)
        return p


@dataclass
class Row:
    index: tuple[int, ...]
    coords: dict[str, float]
    values: dict[str, float | None]
    diagnostics: dict[str, float | None]
    error: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[Row]
    kind: str = "sweep"
    extra_columns: tuple[str, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def coordinate_names(self) -> list[str]:
        if self.kind == "g2tau":
            return ["tau"]
        return [ax.name for ax in self.spec.axes]

    @property
    def value_names(self) -> list[str]:
        if self.kind == "g2tau":
            return ["g2_num", "g2_ana"]
        return [o for o in OUTPUTS if o in self.spec.outputs] + list(self.extra_columns)

    @property
    def columns(self) -> list[str]:
        diag = [] if self.kind == "g2tau" else list(DIAGNOSTICS)
        return self.coordinate_names + self.value_names + diag + ["error"]

    def column(self, name: str) -> np.ndarray:
        """Column as floats, NaN where a row failed or the value is absent."""
        out = []
        for r in self.rows:
            v = r.coords.get(name, r.values.get(name, r.diagnostics.get(name)))
            out.append(np.nan if v is None else v)
        return np.asarray(out, dtype=float)

    def ok(self) -> bool:
        return all(r.error is None for r in self.rows)


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def _numeric(model: str, p: ModelParams, space: SpaceSpec) -> tuple[float, float, float]:
    L = system_liouvillian(model, p, space)
    rho = steadystate(L, check_unique=False)
    a = mode_operators(space).a
    return mean_photon(rho, a), g2_zero(rho, a), steady_state_residual(L, rho)


def _analytic(model: str, p: ModelParams) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if model == "jc":
            return jc_analytic_nbar(p), jc_analytic_g2(p)
        return com_analytic_nbar(p), com_analytic_g2(p)


def evaluate_point(spec: SweepSpec, index: tuple[int, ...], coords: dict[str, float]) -> Row:
    values: dict[str, float | None] = {o: None for o in OUTPUTS if o in spec.outputs}
    diag: dict[str, float | None] = {d: None for d in DIAGNOSTICS}
    errors = []
    try:
        p = spec.params_at(coords)
    except PhotonStatsError as exc:
        return Row(index, coords, values, diag, f"parameters: {exc}")
    if "nbar_num" in values or "g2_num" in values:
        try:
            nbar, g2, resid = _numeric(spec.model, p, spec.space)
            values.update({k: v for k, v in (("nbar_num", nbar), ("g2_num", g2)) if k in values})
            diag["residual"] = resid
            if spec.convergence:
                _, g2_big, _ = _numeric(spec.model, p, spec.space.bigger())
                diag["trunc_delta"] = abs(g2_big - g2) / abs(g2)
        except PhotonStatsError as exc:
            errors.append(f"numeric: {exc}")
    if "nbar_ana" in values or "g2_ana" in values:
        try:
            nbar_a, g2_a = _analytic(spec.model, p)
            values.update({k: v for k, v in (("nbar_ana", nbar_a), ("g2_ana", g2_a)) if k in values})
        except PhotonStatsError as exc:
            errors.append(f"analytic: {exc}")
    if errors:
        # no partial numbers on a failed row
        values = {k: None for k in values}
    return Row(index, coords, values, diag, "; ".join(errors) or None)


def _evaluate_packed(args) -> Row:
    return evaluate_point(*args)


def _run_points(spec: SweepSpec, workers: int | None) -> list[Row]:
    grid = spec.grid()
    jobs = [(spec, idx, coords) for idx, coords in grid]
    n = worker_count() if workers is None else max(1, workers)
    if n == 1 or len(jobs) < PARALLEL_THRESHOLD:
        return [_evaluate_packed(j) for j in jobs]
    chunk = max(1, len(jobs) // (8 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_evaluate_packed, jobs, chunksize=chunk))


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    if not spec.axes:
        raise ParameterError("run_sweep needs at least one sweep variable")
    return SweepResult(spec, _run_points(spec, workers))


def run_heatmap(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """2-D sweep in long form with an extra log10(g2_num) column."""
    if len(spec.axes) != 2:
        raise ParameterError("a heatmap needs exactly two sweep variables")
    rows = _run_points(spec, workers)
    for r in rows:
        g2 = r.values.get("g2_num")
        r.values["log10_g2_num"] = math.log10(g2) if g2 is not None and g2 > 0 else None
    return SweepResult(spec, rows, kind="heatmap", extra_columns=("log10_g2_num",))


def run_g2tau(spec: SweepSpec) -> SweepResult:
    """Delayed correlation at the base point by regression and by the amplitude ODE."""
    if spec.tau is None:
        raise ParameterError("g2tau run needs a tau grid")
    if spec.axes:
        raise ParameterError("g2tau runs at a single parameter point")
    p = spec.params_at({})
    tau = spec.tau.values()
    meta: dict[str, Any] = {}
    num = ana = None
    errors = []
    try:
        L = system_liouvillian(spec.model, p, spec.space)
        rho = steadystate(L)
        num = g2_tau(L, rho, mode_operators(spec.space).a, tau)
        v = schwarz_violation(num)
        meta.update(violation_num=v.violated, violation_num_tau=v.tau, violation_num_excess=v.excess,
                    residual=steady_state_residual(L, rho))
    except PhotonStatsError as exc:
        errors.append(f"numeric: {exc}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ana = amplitude_ode_g2tau(p, tau, model="jc" if spec.model == "jc" else "com")
        v = schwarz_violation(ana)
        meta.update(violation_ana=v.violated, violation_ana_tau=v.tau, violation_ana_excess=v.excess)
    except PhotonStatsError as exc:
        errors.append(f"analytic: {exc}")
    err = "; ".join(errors) or None
    rows = []
    for i, t in enumerate(tau):
        values = {
            "g2_num": None if num is None else float(num.values[i]),
            "g2_ana": None if ana is None else float(ana.values[i]),
        }
        rows.append(Row((i,), {"tau": float(t)}, values, {}, err))
    return SweepResult(spec, rows, kind="g2tau", meta=meta)


def run(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Dispatch on the shape of the spec."""
    if spec.tau is not None and not spec.axes:
        return run_g2tau(spec)
    if len(spec.axes) == 2:
        return run_heatmap(spec, workers)
    return run_sweep(spec, workers)


# Grid densities are not given with the figures: 801 points per 1-D sweep and
# 101 x 101 per heatmap keep dip localization finer than 0.5 kappa.
SWEEP_POINTS = 801
HEATMAP_POINTS = 101
TAU_POINTS = 400

FIG1 = dict(g=50.0, omega=0.1, gamma=1.0)
FIG1_DELTA_TILDE = 50.0
# Dips at nu = 50, 150 and the peak at nu = 100 (Delta = 0) require delta = -100.
FIG2_DELTA = -100.0
FIG3 = dict(g=50.0, omega=0.1, gamma=1.0, Gamma=0.1)
FIG3_DELTA = -50.0
FIG1_COM_NU = 100.0

PRESETS = ("fig1c", "fig1d", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig4", "fig1c-com", "fig1d-com")


def figure_preset(name: str) -> SweepSpec:
    if name in ("fig1c", "fig1d"):
        outputs = ("nbar_num", "nbar_ana") if name == "fig1c" else OUTPUTS
        return SweepSpec(
            model="jc",
            axes=(Axis("delta_c", -100.0, 100.0, SWEEP_POINTS),),
            base=ModelParams.jc(0.0, FIG1_DELTA_TILDE, **FIG1),
            outputs=outputs,
            photon_cutoff=3,
            phonon_cutoff=0,
            name=name,
        )
    if name in ("fig1c-com", "fig1d-com"):
        # COM overlay against the cavity detuning; the trap frequency is not stated
        outputs = ("nbar_num", "nbar_ana") if name == "fig1c-com" else OUTPUTS
        return SweepSpec(
            model="com-effective",
            axes=(Axis("delta_c", -100.0, 100.0, SWEEP_POINTS),),
            base=ModelParams.com(-FIG1_COM_NU, FIG1_COM_NU, Gamma=0.1, **FIG1),
            outputs=outputs,
            name=name,
        )
    if name in ("fig2c", "fig2d"):
        outputs = ("nbar_num", "nbar_ana") if name == "fig2c" else OUTPUTS
        return SweepSpec(
            model="com-effective",
            axes=(Axis("nu", 0.0, 200.0, SWEEP_POINTS),),
            base=ModelParams.com(FIG2_DELTA, 0.0, Gamma=0.1, **FIG1),
            outputs=outputs,
            name=name,
        )
    if name in ("fig3a", "fig3b"):
        base = ModelParams.com(FIG3_DELTA, 0.0, **FIG3)
        if name == "fig3b":
            base = base.replace(Gamma=1.0)
        return SweepSpec(
            model="com-effective",
            axes=(Axis("nu", 0.0, 200.0, HEATMAP_POINTS), Axis("gamma", 0.5, 15.0, HEATMAP_POINTS)),
            base=base,
            outputs=("nbar_num", "g2_num", "g2_ana"),
            name=name,
        )
    if name == "fig3c":
        return SweepSpec(
            model="com-effective",
            axes=(Axis("nu", 0.0, 200.0, HEATMAP_POINTS), Axis("delta_a", -150.0, 50.0, HEATMAP_POINTS)),
            base=ModelParams.com(FIG3_DELTA, 0.0, **FIG3),
            outputs=("nbar_num", "g2_num", "g2_ana"),
            name=name,
        )
    if name == "fig4":
        return SweepSpec(
            model="com-effective",
            axes=(),
            base=ModelParams.com(-70.0, 50.0, g=20.0, omega=4.0, gamma=4.0, Gamma=0.1),
            outputs=("g2tau",),
            photon_cutoff=6,
            phonon_cutoff=6,
            tau=Axis("tau", 0.0, 2.0, TAU_POINTS),
            name=name,
        )
    raise ParameterError(f"unknown preset {name!r}; expected one of {PRESETS}")
