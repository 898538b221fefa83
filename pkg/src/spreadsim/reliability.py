"""Normalised MTTF ratios for electromigration, thermal cycling and stress migration.

Each ratio is MTTF(t) / MTTF(t_ref) with every non-thermal factor (current
density, geometry, cycle count) held fixed, so proportionality constants drop
out. Inputs are degC; conversion to kelvin happens here only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Mapping

KELVIN = 273.15


@dataclass(frozen=True)
class MttfParams:
    ea_em: float = 0.9  # eV
    ea_sm: float = 0.9  # eV
    n_sm: float = 2.5
    t_metal_sm: float = 500.0  # K, stress-free metal deposition temperature
    q_tc: float = 2.35  # Coffin-Manson exponent
    boltzmann: float = 8.617e-5  # eV/K
    # cold end of a power cycle (machine off, room temperature), degC
    tc_cycle_low: float = 25.0

    def __post_init__(self):
        for f in ("ea_em", "ea_sm", "n_sm", "t_metal_sm", "q_tc", "boltzmann"):
            value = getattr(self, f)
            # zero exponents/energies are allowed to switch a factor off
            if not (math.isfinite(value) and value >= 0) or f in ("t_metal_sm", "boltzmann") and value == 0:
                raise ValueError(f"MttfParams.{f} must be positive, got {value}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "MttfParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown mttf parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


def _kelvin(t: float) -> float:
    tk = t + KELVIN
    if not tk > 0:
        raise ValueError(f"temperature {t} degC is below absolute zero")
    return tk


def mttf_em_ratio(t: float, t_ref: float, p: MttfParams = MttfParams()) -> float:
    """Black's equation at fixed current density: exp(Ea/k * (1/T - 1/T_ref))."""
    if t == t_ref:
        return 1.0
    return math.exp(p.ea_em / p.boltzmann * (1.0 / _kelvin(t) - 1.0 / _kelvin(t_ref)))


def mttf_tc_ratio(t: float, t_ref: float, t_amb: float, p: MttfParams = MttfParams()) -> float:
    """Coffin-Manson with the swing (t - t_amb) as amplitude."""
    if not (t > t_amb and t_ref > t_amb):
        raise ValueError(
            f"thermal cycling needs t and t_ref above the cycle low point {t_amb} degC (got t={t}, t_ref={t_ref})"
        )
    if t == t_ref:
        return 1.0
    return ((t_ref - t_amb) / (t - t_amb)) ** p.q_tc


def mttf_sm_ratio(t: float, t_ref: float, p: MttfParams = MttfParams()) -> float:
    """|T_metal - T|^-n * exp(Ea/kT), taken as a ratio against t_ref."""
    tk, rk = _kelvin(t), _kelvin(t_ref)
    if tk >= p.t_metal_sm or rk >= p.t_metal_sm:
        raise ValueError(f"stress migration needs temperatures below t_metal_sm = {p.t_metal_sm} K")
    if t == t_ref:
        return 1.0
    stress = ((p.t_metal_sm - tk) / (p.t_metal_sm - rk)) ** (-p.n_sm)
    return stress * math.exp(p.ea_sm / p.boltzmann * (1.0 / tk - 1.0 / rk))


@dataclass(frozen=True)
class MttfRatios:
    r_em: float
    r_tc: float
    r_sm: float

    @property
    def worst(self) -> float:
        return min(self.r_em, self.r_tc, self.r_sm)


def report(
    temps_by_core_baseline: Mapping[str, float],
    temps_by_core_loaded: Mapping[str, float],
    t_amb: float,
    p: MttfParams = MttfParams(),
) -> dict[str, MttfRatios]:
    """Per-core ratios of loaded MTTF against the baseline temperature.

    ``t_amb`` is the low point used for the thermal-cycling swing.
    """
    if set(temps_by_core_baseline) != set(temps_by_core_loaded):
        missing = set(temps_by_core_baseline) ^ set(temps_by_core_loaded)
        raise KeyError(f"baseline and loaded core sets differ: {sorted(missing)}")
    out = {}
    for core in sorted(temps_by_core_baseline):
        ref = temps_by_core_baseline[core]
        t = temps_by_core_loaded[core]
        out[core] = MttfRatios(
            mttf_em_ratio(t, ref, p),
            mttf_tc_ratio(t, ref, t_amb, p),
            mttf_sm_ratio(t, ref, p),
        )
    return out
