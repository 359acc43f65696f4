"""Time evolution of the boundary by the normal velocity of the flow.

Nodes move along their normals, ``x <- x + dt v nu``, with the explicit
midpoint rule and a fresh solve at the half step.  Each component is
resampled to equal arclength once its spacing ratio exceeds a threshold.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import shapes
from .curve import (Boundary, ClosedCurve, CurveError, perimeter_area, resample, self_intersects,
                    spectral_filter)
from .geometry import DomainGeometry, ubc_radius
from .stokes import FluidSolution, SolverError, solve

log = logging.getLogger(__name__)

MAX_RETRIES = 10


class ConfigError(ValueError):
    """Invalid scenario configuration."""


class StepRejected(RuntimeError):
    """The trial boundary kept self-intersecting after all step halvings."""


class RunFailure(RuntimeError):
    """A run aborted; ``state`` holds the last valid state."""

    def __init__(self, message, state=None, trajectory=None):
        super().__init__(message)
        self.state = state
        self.trajectory = trajectory


SHAPES = {"circle", "disk", "ellipse", "annulus", "perturbed_circle", "dumbbell", "file"}


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce a run.

    Attributes
    ----------
    shape : dict
        ``{"type": ..., **params}``; types are ``circle``, ``ellipse``,
        ``annulus``, ``perturbed_circle`` (``coefficients`` list of
        ``[m, a_m(, b_m)]``), ``dumbbell`` and ``file`` (curve CSV ``path``).
    theta : float
        Viscosity.
    N : int
        Nodes per component.
    t_end, dt_max : float
    cfl : float
        Safety factor in (0, 1].
    stiffness : float
        Coefficient ``c`` of the capillary bound ``dt <= cfl c theta h_min``.
    stiffness_scale : float
        Length scale in the bound ``dt <= cfl r_t^2 theta / scale``.
    fixed_dt : float or None
        Use this step (still capped at ``t_end``) instead of the adaptive one.
    r_min : float
        Stop once the rolling-ball radius drops below it.
    tol : float
        Solver traction-residual tolerance.
    velocity_source : str or dict
        ``"stokes"`` or ``{"kind": "constant", "value": c}`` /
        ``{"kind": "curvature", "scale": s}`` for prescribed normal speeds.
    record_every, snapshot_every : int
        Cadences in steps (0 disables snapshots).
    resample_ratio : float
        Spacing ratio that triggers resampling.
    interior_norms : bool
        Compute bulk velocity-gradient norms on the interior grid per record.
    calibration : float or None
        Constant ``C_cal`` of the curvature-growth envelope.
    area_tol : float
        Relative area drift reported as a failed acceptance flag.
    filter_order : int
        Order of the exponential filter applied to node positions after
        each stage (0 disables).
    """

    shape: dict = field(default_factory=lambda: {"type": "circle", "radius": 1.0})
    theta: float = 1.0
    N: int = 128
    t_end: float = 1.0
    dt_max: float = 1e-2
    cfl: float = 0.5
    stiffness: float = 1.0
    stiffness_scale: float = 1.0
    fixed_dt: float | None = None
    r_min: float = 1e-2
    tol: float = 1e-6
    velocity_source: str | dict = "stokes"
    record_every: int = 1
    snapshot_every: int = 0
    resample_ratio: float = 3.0
    interior_norms: bool = False
    calibration: float | None = None
    area_tol: float = 1e-4
    filter_order: int = 36
    max_steps: int = 1_000_000

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not isinstance(self.shape, dict) or self.shape.get("type") not in SHAPES:
            raise ConfigError(f"shape.type must be one of {sorted(SHAPES)}")
        for name in ("theta", "t_end", "dt_max", "r_min", "tol", "stiffness", "stiffness_scale",
                     "resample_ratio", "area_tol"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and np.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be a positive number, got {val!r}")
        if not (0 < self.cfl <= 1):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if self.fixed_dt is not None and not self.fixed_dt > 0:
            raise ConfigError("fixed_dt must be positive")
        if int(self.N) != self.N or self.N < 16 or self.N % 2:
            raise ConfigError("N must be an even integer >= 16")
        if self.record_every < 1 or self.snapshot_every < 0:
            raise ConfigError("record_every must be >= 1 and snapshot_every >= 0")
        if int(self.filter_order) != self.filter_order or self.filter_order < 0 or self.filter_order % 2:
            raise ConfigError("filter_order must be a non-negative even integer")
        if self.resample_ratio < 1:
            raise ConfigError("resample_ratio must be >= 1")
        vs = self.velocity_source
        if vs != "stokes":
            if not isinstance(vs, dict) or vs.get("kind") not in ("constant", "curvature"):
                raise ConfigError("velocity_source must be 'stokes' or a prescribed {'kind': ...}")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def prescribed(self) -> bool:
        return self.velocity_source != "stokes"

    def initial_boundary(self) -> Boundary:
        params = {k: v for k, v in self.shape.items() if k != "type"}
        kind = self.shape["type"]
        if kind == "file":
            from .io import read_curve_csv

            return read_curve_csv(params["path"])
        try:
            if kind in ("circle", "disk"):
                return shapes.disk(self.N, **params)
            return shapes.from_name(kind, self.N, **params)
        except TypeError as exc:
            raise ConfigError(f"bad shape parameters: {exc}") from exc


@dataclass(frozen=True)
class PrescribedVelocity:
    """Normal speed prescribed on the boundary, standing in for a flow solve."""

    normal_velocity: np.ndarray
    theta: float = 1.0
    traction_residual: float = 0.0


@dataclass(frozen=True, eq=False)
class SimulationState:
    t: float
    boundary: Boundary
    solution: FluidSolution | PrescribedVelocity
    step_index: int = 0
    last_dt: float = 0.0
    resampled: bool = False

    @property
    def geometry(self) -> DomainGeometry:
        geom = self.__dict__.get("_geometry")
        if geom is None:
            geom = ubc_radius(self.boundary)
            object.__setattr__(self, "_geometry", geom)
        return geom


def velocity(boundary: Boundary, config: ScenarioConfig):
    """Normal velocity source for ``boundary``: a flow solve or a prescribed field."""
    vs = config.velocity_source
    if vs == "stokes":
        return solve(boundary, config.theta, config.tol)
    if vs["kind"] == "constant":
        v = np.full(boundary.total_nodes, float(vs.get("value", -1.0)))
    else:
        v = float(vs.get("scale", 1.0)) * boundary.curvature
    return PrescribedVelocity(v, config.theta)


def _rebuild(boundary: Boundary, moved: np.ndarray, filter_order: int) -> Boundary:
    parts = boundary.split(moved)
    if filter_order:
        parts = [spectral_filter(p, filter_order) for p in parts]
    return Boundary(tuple(ClosedCurve(p, c.is_hole) for p, c in zip(parts, boundary.components)))


def displace(boundary: Boundary, speed: np.ndarray, dt: float, filter_order: int = 0) -> Boundary:
    """Move each node by ``dt * speed * nu``."""
    return _rebuild(boundary, boundary.nodes + dt * speed[:, None] * boundary.normals, filter_order)


def midpoint_step(boundary: Boundary, v0: np.ndarray, dt: float, velocity_fn: Callable,
                  filter_order: int = 0):
    half = displace(boundary, v0, 0.5 * dt, filter_order)
    vh = velocity_fn(half).normal_velocity
    return _rebuild(boundary, boundary.nodes + dt * vh[:, None] * half.normals, filter_order)


def initial_state(config: ScenarioConfig, boundary: Boundary | None = None) -> SimulationState:
    boundary = config.initial_boundary() if boundary is None else boundary
    return SimulationState(0.0, boundary, velocity(boundary, config))


def adapt_dt(state: SimulationState, config: ScenarioConfig) -> float:
    """Step size from the velocity, capillary-stiffness and geometry bounds."""
    if config.fixed_dt is not None:
        return float(config.fixed_dt)
    h_min = state.boundary.min_spacing
    vmax = float(np.max(np.abs(state.solution.normal_velocity)))
    dt = config.dt_max
    if vmax > 0:
        dt = min(dt, config.cfl * h_min / vmax)
    if not config.prescribed:
        dt = min(dt, config.cfl * config.stiffness * config.theta * h_min)
        r = state.geometry.r_omega
        dt = min(dt, config.cfl * r * r * config.theta / config.stiffness_scale)
    return float(dt)


def _maybe_resample(boundary: Boundary, ratio: float) -> tuple[Boundary, bool]:
    if all(c.spacing_ratio <= ratio for c in boundary.components):
        return boundary, False
    comps = tuple(resample(c) if c.spacing_ratio > ratio else c for c in boundary.components)
    return Boundary(comps), True


def step(state: SimulationState, config: ScenarioConfig, dt: float | None = None) -> SimulationState:
    """Advance one midpoint step, halving ``dt`` on trial self-intersection."""
    dt = adapt_dt(state, config) if dt is None else dt
    dt = min(dt, config.t_end - state.t) if config.t_end > state.t else dt
    vfn = lambda b: velocity(b, config)
    for _ in range(MAX_RETRIES + 1):
        try:
            trial = midpoint_step(state.boundary, state.solution.normal_velocity, dt, vfn,
                                  config.filter_order)
            if self_intersects(trial).intersects:
                raise CurveError("trial boundary self-intersects")
            trial, resampled = _maybe_resample(trial, config.resample_ratio)
        except CurveError:
            dt *= 0.5
            continue
        sol = velocity(trial, config)
        return SimulationState(state.t + dt, trial, sol, state.step_index + 1, dt, resampled)
    raise StepRejected(f"self-intersection persists after {MAX_RETRIES} halvings at t={state.t:.6g}")


@dataclass
class Snapshot:
    step_index: int
    t: float
    boundary: Boundary
    kappa: np.ndarray
    normal_velocity: np.ndarray


@dataclass
class Trajectory:
    config: ScenarioConfig
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final_state: SimulationState | None = None
    stop_reason: str = ""
    context: object = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


STOP_T_END = "t_end reached"
STOP_R_MIN = "r_min reached"
STOP_INTERSECTION = "self-intersection unresolved"
STOP_RESOLUTION = "resolution floor reached"


def run(config: ScenarioConfig, reporter=None, on_record=None, on_snapshot=None,
        boundary: Boundary | None = None) -> Trajectory:
    """Advance until ``t_end``, degeneration or loss of resolution.

    ``reporter(state, context, previous)`` builds the per-record diagnostics
    (default :func:`stokesdrop.diagnostics.report.report`); ``on_record`` and
    ``on_snapshot`` are streaming callbacks.
    """
    if reporter is None:
        from .diagnostics.report import ReportContext, report

        reporter = report
    else:
        from .diagnostics.report import ReportContext
    state = initial_state(config, boundary)
    traj = Trajectory(config)
    ctx = ReportContext.from_state(state, config)
    traj.context = ctx
    prev = None

    def emit(st):
        nonlocal prev
        rec = reporter(st, ctx, prev)
        traj.records.append(rec)
        prev = rec
        if on_record is not None:
            on_record(rec)

    def snap(st):
        s = Snapshot(st.step_index, st.t, st.boundary, st.boundary.curvature.copy(),
                     np.asarray(st.solution.normal_velocity).copy())
        traj.snapshots.append(s)
        if on_snapshot is not None:
            on_snapshot(s)

    emit(state)
    if config.snapshot_every:
        snap(state)
    reason = ""
    while True:
        if state.t >= config.t_end * (1 - 1e-12):
            reason = STOP_T_END
            break
        geom = state.geometry
        if geom.r_omega < config.r_min:
            reason = STOP_R_MIN
            break
        if geom.degenerate:
            reason = STOP_RESOLUTION
            break
        if state.step_index >= config.max_steps:
            reason = "max_steps reached"
            break
        try:
            state = step(state, config)
        except StepRejected:
            reason = STOP_INTERSECTION
            break
        except (SolverError, np.linalg.LinAlgError) as exc:
            traj.final_state = state
            raise RunFailure(f"solver failure at t={state.t:.6g}: {exc}", state, traj) from exc
        last = state.t >= config.t_end * (1 - 1e-12)
        if state.step_index % config.record_every == 0 or last:
            emit(state)
        if config.snapshot_every and (state.step_index % config.snapshot_every == 0 or last):
            snap(state)
    if traj.records[-1].step_index != state.step_index:
        emit(state)
    if config.snapshot_every and traj.snapshots[-1].step_index != state.step_index:
        snap(state)
    traj.final_state = state
    traj.stop_reason = reason
    log.info("run stopped: %s at t=%.6g after %d steps", reason, state.t, state.step_index)
    return traj
