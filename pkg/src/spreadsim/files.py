"""File formats: temperature CSV, PGM heatmaps, sweep tables and the JSON config."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .experiment import ExperimentRow, ExperimentSpec
from .package import PackageConfig, ValidationError, default_package
from .reliability import MttfParams
from .solver import TemperatureField

TEMPERATURE_HEADER = "layer,ix,iy,temp_c"


def _open_for_write(path: str | Path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_temperature_csv(field: TemperatureField, path: str | Path) -> None:
    """One row per grid cell, layer-major then iy then ix; the lumped sink node is omitted."""
    with _open_for_write(path) as fh:
        fh.write(TEMPERATURE_HEADER + "\n")
        for li, name in enumerate(field.layer_names):
            temps = field.layer(li)
            for iy in range(field.ny):
                for ix in range(field.nx):
                    fh.write(f"{name},{ix},{iy},{temps[iy, ix]:.6f}\n")


def read_temperature_csv(path: str | Path) -> dict[tuple[str, int, int], float]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return {(r["layer"], int(r["ix"]), int(r["iy"])): float(r["temp_c"]) for r in reader}


def heatmap_levels(values: np.ndarray) -> np.ndarray:
    """Map linearly onto 0..255 (min -> 0, max -> 255); a constant field maps to 128."""
    values = np.asarray(values, dtype=float)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full(values.shape, 128, dtype=int)
    return np.floor((values - lo) / (hi - lo) * 255.0 + 0.5).astype(int)


def write_heatmap_pgm(field: TemperatureField, layer: int | str, path: str | Path) -> None:
    """ASCII PGM (P2) of one layer, maxval 255.

    The first image row is the highest ``iy`` so the picture has y pointing up.
    """
    if isinstance(layer, str) and layer not in field.layer_names:
        raise KeyError(f"no layer {layer!r}; have {list(field.layer_names)}")
    levels = heatmap_levels(field.layer(layer))
    with _open_for_write(path) as fh:
        fh.write(f"P2\n{field.nx} {field.ny}\n255\n")
        for row in levels[::-1]:
            fh.write(" ".join(str(v) for v in row) + "\n")


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a P2 file back as a (height, width) array, first image row first."""
    tokens = []
    with open(path) as fh:
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not an ASCII PGM")
    width, height, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array(tokens[4:], dtype=int).reshape(height, width)


EXPERIMENT_HEADER = (
    "n_active,fraction_active,mean_inactive_rise_k,min_inactive_rise_k,max_inactive_rise_k,r_em,r_tc,r_sm"
)


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.6f}"


def write_experiment_csv(rows: Sequence[ExperimentRow], path: str | Path) -> None:
    """Sweep table; statistics of an empty inactive set are left blank."""
    with _open_for_write(path) as fh:
        fh.write(EXPERIMENT_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [str(r.n_active), f"{r.fraction_active:.6f}"]
                    + [
                        _fmt(v)
                        for v in (
                            r.mean_inactive_rise,
                            r.min_inactive_rise,
                            r.max_inactive_rise,
                            r.r_em,
                            r.r_tc,
                            r.r_sm,
                        )
                    ]
                )
                + "\n"
            )


@dataclass
class Config:
    package: PackageConfig = field(default_factory=default_package)
    mttf: MttfParams = field(default_factory=MttfParams)
    experiment: dict = field(default_factory=dict)

    def experiment_spec(self, **overrides) -> ExperimentSpec:
        settings = dict(self.experiment)
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentSpec.from_dict(settings)


def load_config(path: str | Path | None) -> Config:
    """Read the JSON config (sections ``package``, ``mttf``, ``experiment``); None gives defaults."""
    if path is None:
        return Config()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    unknown = set(data) - {"package", "mttf", "experiment"}
    if unknown:
        raise ValidationError(f"{path}: unknown config sections {sorted(unknown)}")
    try:
        mttf = MttfParams.from_dict(data.get("mttf", {}))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: bad mttf section ({exc})") from exc
    return Config(
        package=PackageConfig.from_dict(data.get("package", {})),
        mttf=mttf,
        experiment=dict(data.get("experiment", {})),
    )
