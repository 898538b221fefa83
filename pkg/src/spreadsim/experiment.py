"""Inactive-core heating sweep.

All cores are first powered equally so that the die centre sits
``center_rise_target`` above ambient. Then only ``n_active`` cores keep that
power and the rest are switched off; the rise and MTTF of the switched-off
cores are recorded against the all-off (zero power) state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .network import (
    GridSpec,
    assemble_network,
    block_cell_weights,
    die_center_index,
    rasterize_power,
)
from .package import Floorplan, PackageConfig, PowerMap, ValidationError
from .reliability import MttfParams, report
from .solver import SolverError, solve_steady

SELECTIONS = ("random", "corner", "checkerboard")


def default_active_counts(n_cores: int) -> list[int]:
    """Active-core counts at 12.5 %, 25 %, ..., 87.5 % of ``n_cores``."""
    return sorted({round(n_cores * k / 8) for k in range(1, 8)})


@dataclass(frozen=True)
class ExperimentSpec:
    n_cores: int = 128
    grid_n: int = 32
    center_rise_target: float = 20.0  # K
    active_counts: tuple[int, ...] | None = None
    selection: str = "random"
    seed: int = 0
    trials: int = 10
    tol: float = 1e-8

    def __post_init__(self):
        if self.active_counts is None:
            object.__setattr__(self, "active_counts", tuple(default_active_counts(self.n_cores)))
        else:
            object.__setattr__(self, "active_counts", tuple(int(n) for n in self.active_counts))
        if self.n_cores < 1:
            raise ValidationError("n_cores must be >= 1")
        if any(not 0 <= n <= self.n_cores for n in self.active_counts):
            raise ValidationError(f"active_counts must lie in [0, {self.n_cores}]")
        if self.selection not in SELECTIONS:
            raise ValidationError(f"selection must be one of {SELECTIONS}, got {self.selection!r}")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.center_rise_target < 0:
            raise ValidationError("center_rise_target must be >= 0")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentSpec":
        allowed = {"n_cores", "grid_n", "center_rise_target", "active_counts", "selection", "seed", "trials", "tol"}
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"unknown experiment settings: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentRow:
    n_active: int
    n_cores: int
    # None when every core is active (there are no inactive cores to describe)
    mean_inactive_rise: float | None = None
    min_inactive_rise: float | None = None
    max_inactive_rise: float | None = None
    r_em: float | None = None
    r_tc: float | None = None
    r_sm: float | None = None

    @property
    def fraction_active(self) -> float:
        return self.n_active / self.n_cores

    @property
    def worst_mttf(self) -> float | None:
        if self.r_em is None:
            return None
        return min(self.r_em, self.r_tc, self.r_sm)


@dataclass
class _Model:
    """Assembled network plus the per-core lookups the sweep needs."""

    pkg: PackageConfig
    fp: Floorplan
    grid: GridSpec
    net: ThermalNetwork
    weights: object = field(repr=False)
    unit_power: list[np.ndarray] = field(repr=False)

    @classmethod
    def build(cls, pkg: PackageConfig, fp: Floorplan, grid: GridSpec) -> "_Model":
        net = assemble_network(pkg, grid)
        weights = block_cell_weights(fp, grid, pkg)
        # per-core cell power for 1 W in that core
        unit = [rasterize_power(PowerMap({b.name: 1.0}), fp, grid, pkg) for b in fp.blocks]
        return cls(pkg, fp, grid, net, weights, unit)

    def power_vector(self, watts: np.ndarray) -> np.ndarray:
        p = np.zeros(self.net.n_cells)
        for w, unit in zip(watts, self.unit_power):
            if w:
                p += w * unit
        return p

    def core_temps(self, temps: np.ndarray) -> np.ndarray:
        return self.weights @ temps[: self.net.cells_per_layer]


def calibrate_core_power(
    pkg: PackageConfig, fp: Floorplan, grid: GridSpec, target_rise: float, tol: float = 1e-8
) -> float:
    """Uniform per-core power that lifts the die-centre cell ``target_rise`` above ambient."""
    return _calibrate(_Model.build(pkg, fp, grid), target_rise, tol)


def _calibrate(model: _Model, target_rise: float, tol: float) -> float:
    if target_rise == 0:
        return 0.0
    p = model.power_vector(np.ones(len(model.fp.blocks)))
    field_, _ = solve_steady(model.net, p, model.pkg.ambient_temperature, tol)
    centre = die_center_index(model.net, model.pkg)
    r = field_.temps[centre] - model.pkg.ambient_temperature
    if not r > 0:
        raise SolverError(f"die-centre rise at 1 W/core is {r}; the network is broken")
    return target_rise / r


def _grid_positions(fp: Floorplan) -> list[tuple[int, int]]:
    """(row, col) rank of each block's centre among the distinct centre coordinates."""
    cy = [round(b.y + b.height / 2, 12) for b in fp.blocks]
    cx = [round(b.x + b.width / 2, 12) for b in fp.blocks]
    ys = {v: i for i, v in enumerate(sorted(set(cy)))}
    xs = {v: i for i, v in enumerate(sorted(set(cx)))}
    return [(ys[y], xs[x]) for y, x in zip(cy, cx)]


def activation_order(fp: Floorplan, selection: str, rng: np.random.Generator | None = None) -> list[int]:
    """Block indices in the order they are switched on.

    ``corner`` fills row by row from the lower-left corner; ``checkerboard``
    takes every (row + col)-even block before the odd ones, each group row-major.
    """
    pos = _grid_positions(fp)
    idx = list(range(len(fp.blocks)))
    if selection == "corner":
        return sorted(idx, key=lambda i: pos[i])
    if selection == "checkerboard":
        return sorted(idx, key=lambda i: ((pos[i][0] + pos[i][1]) % 2, pos[i]))
    if selection == "random":
        if rng is None:
            raise ValueError("random selection needs an rng")
        return [int(i) for i in rng.permutation(len(idx))]
    raise ValidationError(f"unknown selection {selection!r}")


def run_thought_experiment(
    spec: ExperimentSpec,
    pkg: PackageConfig,
    fp: Floorplan,
    mttf: MttfParams = MttfParams(),
) -> list[ExperimentRow]:
    if len(fp.blocks) != spec.n_cores:
        raise ValidationError(f"floorplan has {len(fp.blocks)} blocks, experiment expects {spec.n_cores}")
    grid = GridSpec.for_package(pkg, spec.grid_n)
    model = _Model.build(pkg, fp, grid)
    t_amb = pkg.ambient_temperature
    watts = _calibrate(model, spec.center_rise_target, spec.tol)

    zero = np.zeros(model.net.n_cells)
    base_field, _ = solve_steady(model.net, zero, t_amb, spec.tol)
    base = model.core_temps(base_field.temps)
    names = fp.names

    if spec.selection == "random":
        rng = np.random.default_rng(spec.seed)
        orders = [activation_order(fp, "random", rng) for _ in range(spec.trials)]
    else:
        orders = [activation_order(fp, spec.selection)]

    rows = []
    for n_active in spec.active_counts:
        if n_active == spec.n_cores:
            rows.append(ExperimentRow(n_active, spec.n_cores))
            continue
        trial_stats = []
        for order in orders:
            active = np.zeros(len(names), dtype=bool)
            active[order[:n_active]] = True
            loaded_field, _ = solve_steady(model.net, model.power_vector(np.where(active, watts, 0.0)), t_amb, spec.tol)
            loaded = model.core_temps(loaded_field.temps)
            inactive = np.flatnonzero(~active)
            rise = loaded[inactive] - base[inactive]
            ratios = report(
                {names[i]: float(base[i]) for i in inactive},
                {names[i]: float(loaded[i]) for i in inactive},
                mttf.tc_cycle_low,
                mttf,
            )
            trial_stats.append(
                (
                    float(rise.mean()),
                    float(rise.min()),
                    float(rise.max()),
                    math.fsum(r.r_em for r in ratios.values()) / len(ratios),
                    math.fsum(r.r_tc for r in ratios.values()) / len(ratios),
                    math.fsum(r.r_sm for r in ratios.values()) / len(ratios),
                )
            )
        cols = list(zip(*trial_stats))
        k = len(trial_stats)
        rows.append(
            ExperimentRow(
                n_active,
                spec.n_cores,
                mean_inactive_rise=math.fsum(cols[0]) / k,
                min_inactive_rise=min(cols[1]),
                max_inactive_rise=max(cols[2]),
                r_em=math.fsum(cols[3]) / k,
                r_tc=math.fsum(cols[4]) / k,
                r_sm=math.fsum(cols[5]) / k,
            )
        )
    return rows


def sweep_is_monotone(rows: Sequence[ExperimentRow]) -> bool:
    """True when mean inactive rise never drops as more cores switch on."""
    vals = [r.mean_inactive_rise for r in sorted(rows, key=lambda r: r.n_active) if r.mean_inactive_rise is not None]
    return all(b >= a for a, b in zip(vals, vals[1:]))
