"""Measurement reduction: thermocouple calibration, sensor interchange,
spreader surface statistics and comparative-method conductivity."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Mapping

from .package import ParseError, ValidationError

POSITIONS = ("TCT", "TCL", "TCB", "TCR")


@dataclass(frozen=True)
class CalibrationReference:
    ice_point: float = 0.0
    boiling_point: float = 99.304  # degC at 216 m, 987.56 mbar
    pressure_mbar: float = 987.56
    altitude_m: float = 216.0

    def __post_init__(self):
        if not self.boiling_point > self.ice_point:
            raise ValidationError("boiling_point must exceed ice_point")


@dataclass(frozen=True)
class CalibrationCurve:
    """``T_true = gain * T_raw + offset``."""

    gain: float
    offset: float
    # (raw, true) point the line passes through; evaluating about it keeps that
    # anchor exact instead of relying on gain*raw + offset cancelling.
    pivot: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.gain > 0:
            raise ValidationError(f"calibration gain must be > 0, got {self.gain}")


IDENTITY = CalibrationCurve(1.0, 0.0)


def two_point_calibration(
    raw_ice: float, raw_boil: float, ref: CalibrationReference = CalibrationReference()
) -> CalibrationCurve:
    """Linear map sending the raw ice and boiling readings onto the reference points."""
    if not raw_boil > raw_ice:
        raise ValidationError(f"raw boiling reading ({raw_boil}) must exceed raw ice reading ({raw_ice})")
    gain = (ref.boiling_point - ref.ice_point) / (raw_boil - raw_ice)
    offset = ref.ice_point - gain * raw_ice
    return CalibrationCurve(gain, offset, (raw_ice, ref.ice_point))


def apply_calibration(curve: CalibrationCurve, raw: float) -> float:
    if curve.pivot is None:
        return curve.gain * raw + curve.offset
    raw0, true0 = curve.pivot
    return true0 + curve.gain * (raw - raw0)


def interchange_correct(delta_forward: float, delta_swapped: float) -> float:
    """Average of a differential reading and its sensor-swapped repeat.

    With per-sensor additive offsets b1, b2 the two readings are
    ``D + (b1 - b2)`` and ``-D + (b1 - b2)``; half their difference is D.
    """
    return (delta_forward - delta_swapped) / 2.0


@dataclass(frozen=True)
class SpreaderReadingSet:
    readings: Mapping[str, float]
    cpu_center: float | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "readings", dict(self.readings))
        bad = [p for p in self.readings if p not in POSITIONS]
        if bad:
            raise ValidationError(f"unknown thermocouple positions {bad}; expected {POSITIONS}")


@dataclass(frozen=True)
class SpreadStats:
    max_pair_diff: float
    mean: float
    per_pair: dict[str, float] = field(default_factory=dict)


def _dec(x: float) -> Decimal:
    # readings are decimal measurements; the shortest repr recovers the printed digits
    return Decimal(repr(float(x)))


def spread_stats(rs: SpreaderReadingSet) -> SpreadStats:
    """Largest pairwise gap, mean, and signed differences keyed ``"A-B"``.

    Pairs follow the canonical TCT, TCL, TCB, TCR order.
    """
    if len(rs.readings) < 2:
        raise ValidationError(f"need at least 2 readings, got {len(rs.readings)}")
    ordered = [p for p in POSITIONS if p in rs.readings]
    vals = {p: _dec(rs.readings[p]) for p in ordered}
    per_pair = {f"{a}-{b}": float(vals[a] - vals[b]) for a, b in itertools.combinations(ordered, 2)}
    max_diff = max(abs(v) for v in per_pair.values())
    mean = float(sum(vals.values()) / len(vals))
    return SpreadStats(max_diff, mean, per_pair)


def parse_readings(text: str) -> list[SpreaderReadingSet]:
    """Parse ``label,position,temp_c`` CSV into reading sets, in first-seen label order.

    '#' comment lines are skipped (reported line numbers then count non-comment
    lines only). An optional ``cpu_c`` column fills ``cpu_center``; other extra columns are ignored.
    """
    body = "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))
    reader = csv.DictReader(io.StringIO(body))
    if reader.fieldnames is None or not {"label", "position", "temp_c"} <= set(reader.fieldnames):
        raise ParseError("readings CSV needs columns label,position,temp_c", 1)
    groups: dict[str, dict] = {}
    for row in reader:
        lineno = reader.line_num
        label = row["label"]
        pos = (row["position"] or "").strip()
        if pos not in POSITIONS:
            raise ParseError(f"unknown position {pos!r}", lineno)
        try:
            temp = float(row["temp_c"])
        except (TypeError, ValueError):
            raise ParseError(f"cannot parse temp_c {row['temp_c']!r}", lineno) from None
        g = groups.setdefault(label, {"readings": {}, "cpu": None})
        if pos in g["readings"]:
            raise ParseError(f"duplicate position {pos} for label {label!r}", lineno)
        g["readings"][pos] = temp
        cpu = (row.get("cpu_c") or "").strip()
        if cpu:
            g["cpu"] = float(cpu)
    return [SpreaderReadingSet(g["readings"], g["cpu"], label) for label, g in groups.items()]


def load_table1() -> list[SpreaderReadingSet]:
    """The bundled spreader-surface thermocouple readings (four sensor pairs x four instants)."""
    text = resources.files("spreadsim").joinpath("data/table1.csv").read_text()
    return parse_readings(text)


def table1_path() -> Path:
    return Path(str(resources.files("spreadsim").joinpath("data/table1.csv")))


@dataclass(frozen=True)
class Segment:
    area: float  # m^2
    length: float  # m
    delta_t: float  # K

    def __post_init__(self):
        if not (self.area > 0 and self.length > 0):
            raise ValidationError(f"segment geometry must be positive, got area={self.area}, length={self.length}")


@dataclass(frozen=True)
class ConductivityExperiment:
    w1: Segment
    sp: Segment
    w2: Segment
    kappa_c: float = 400.0  # W/(m K), copper reference

    def __post_init__(self):
        if not self.kappa_c > 0:
            raise ValidationError("kappa_c must be > 0")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConductivityExperiment":
        try:
            segs = {name: Segment(**{k: float(v) for k, v in data[name].items()}) for name in ("w1", "sp", "w2")}
            return cls(kappa_c=float(data.get("kappa_c", 400.0)), **segs)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad conductivity experiment: {exc!r}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ConductivityExperiment":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ConductivityResult:
    kappa_1: float
    kappa_2: float
    kappa_mean: float

    @property
    def inconsistency(self) -> float:
        """|kappa_1 - kappa_2| / kappa_mean; zero when both wire pairings agree."""
        return abs(self.kappa_1 - self.kappa_2) / self.kappa_mean


def comparative_conductivity(exp: ConductivityExperiment) -> ConductivityResult:
    """Unknown sample conductivity from a reference-sample-reference stack.

    The same heat flow ``k dT A / L`` crosses every segment, which gives two
    independent estimates (one per reference wire); the result is their mean.
    """
    sp_ = exp.sp
    if not sp_.delta_t > 0:
        raise ValidationError(f"degenerate experiment: sample temperature drop must be > 0, got {sp_.delta_t}")

    def pair(w: Segment) -> float:
        # ratio form: identical segments give kappa_c exactly
        return exp.kappa_c * (w.delta_t / sp_.delta_t) * (w.area / sp_.area) * (sp_.length / w.length)

    k1 = pair(exp.w1)
    k2 = pair(exp.w2)
    return ConductivityResult(k1, k2, (k1 + k2) / 2.0)


def forward_delta_t(heat_flow: float, kappa: float, area: float, length: float) -> float:
    """Temperature drop across a segment carrying ``heat_flow`` W."""
    if not (kappa > 0 and area > 0 and length > 0):
        raise ValueError("kappa, area and length must be positive")
    return heat_flow * length / (kappa * area)


def format_result(res: ConductivityResult) -> str:
    return (
        f"kappa_1 {res.kappa_1:.6g} W/(m K)\n"
        f"kappa_2 {res.kappa_2:.6g} W/(m K)\n"
        f"kappa_mean {res.kappa_mean:.6g} W/(m K)\n"
        f"inconsistency {res.inconsistency:.3g}"
    )
