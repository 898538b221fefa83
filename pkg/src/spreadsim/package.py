"""Package geometry, materials, floorplans and power maps.

Everything here is SI (metres, W, W/(m K)); temperatures are degrees Celsius.
Layers are stacked die-first and all layers are centred on the same vertical
axis, so a layer smaller than the global extent is padded with its filler
material.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant."""


class ParseError(ValidationError):
    """Malformed input text; ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


# Slack for floating point tiling; blocks are built from sums of widths.
LENGTH_TOL = 1e-12
OVERLAP_AREA_TOL = 1e-12


@dataclass(frozen=True)
class MaterialProps:
    conductivity: float  # W/(m K)
    volumetric_heat_capacity: float  # J/(m^3 K)

    def __post_init__(self):
        if not self.conductivity > 0:
            raise ValidationError(f"conductivity must be > 0, got {self.conductivity}")
        if not self.volumetric_heat_capacity > 0:
            raise ValidationError(
                f"volumetric_heat_capacity must be > 0, got {self.volumetric_heat_capacity}"
            )


SILICON = MaterialProps(100.0, 1.75e6)
TIM_MATERIAL = MaterialProps(4.0, 4.0e6)
COPPER = MaterialProps(400.0, 3.55e6)
FILLER = MaterialProps(0.25, 1.5e6)


@dataclass(frozen=True)
class Layer:
    name: str
    thickness: float
    material: MaterialProps
    extent: tuple[float, float]  # (width, height)
    filler: MaterialProps = FILLER

    def __post_init__(self):
        object.__setattr__(self, "extent", (float(self.extent[0]), float(self.extent[1])))
        if not self.thickness > 0:
            raise ValidationError(f"layer {self.name!r}: thickness must be > 0")
        if not (self.extent[0] > 0 and self.extent[1] > 0):
            raise ValidationError(f"layer {self.name!r}: extent must be positive")


@dataclass(frozen=True)
class PackageConfig:
    layers: tuple[Layer, ...]
    sink_convection_resistance_total: float = 0.1  # K/W
    ambient_temperature: float = 45.0  # degC

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        problems = self.validate()
        if problems:
            raise ValidationError("; ".join(problems))

    @property
    def extent(self) -> tuple[float, float]:
        """Global grid extent: the largest layer footprint."""
        return (
            max(layer.extent[0] for layer in self.layers),
            max(layer.extent[1] for layer in self.layers),
        )

    @property
    def die(self) -> Layer:
        return self.layers[0]

    def layer_index(self, name: str) -> int:
        for i, layer in enumerate(self.layers):
            if layer.name == name:
                return i
        raise KeyError(f"no layer named {name!r}; have {[l.name for l in self.layers]}")

    def die_origin(self) -> tuple[float, float]:
        """Offset of the die's lower-left corner in global coordinates."""
        width, height = self.extent
        return (
            (width - self.die.extent[0]) / 2.0,
            (height - self.die.extent[1]) / 2.0,
        )

    def validate(self) -> list[str]:
        problems = []
        if len(self.layers) < 2:
            problems.append("a package needs at least 2 layers")
        if not self.sink_convection_resistance_total > 0:
            problems.append("sink_convection_resistance_total must be > 0")
        if not math.isfinite(self.ambient_temperature):
            problems.append("ambient_temperature must be finite")
        names = [layer.name for layer in self.layers]
        if len(set(names)) != len(names):
            problems.append(f"layer names must be unique: {names}")
        if "spreader" in names and self.layers:
            spreader = self.layers[names.index("spreader")]
            die = self.layers[0]
            if spreader.extent[0] < die.extent[0] or spreader.extent[1] < die.extent[1]:
                problems.append("spreader extent must cover the die extent")
        return problems

    def to_dict(self) -> dict:
        return {
            "layers": [
                {
                    "name": layer.name,
                    "thickness": layer.thickness,
                    "material": _material_dict(layer.material),
                    "extent": list(layer.extent),
                    "filler": _material_dict(layer.filler),
                }
                for layer in self.layers
            ],
            "sink_convection_resistance_total": self.sink_convection_resistance_total,
            "ambient_temperature": self.ambient_temperature,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PackageConfig":
        """Build from a JSON-style mapping; missing top-level keys take defaults."""
        base = default_package()
        try:
            if "layers" in data:
                layers = tuple(
                    Layer(
                        name=str(item["name"]),
                        thickness=float(item["thickness"]),
                        material=MaterialProps(**item["material"]),
                        extent=tuple(item["extent"]),
                        filler=MaterialProps(**item["filler"]) if "filler" in item else FILLER,
                    )
                    for item in data["layers"]
                )
            else:
                layers = base.layers
            return cls(
                layers=layers,
                sink_convection_resistance_total=float(
                    data.get("sink_convection_resistance_total", base.sink_convection_resistance_total)
                ),
                ambient_temperature=float(data.get("ambient_temperature", base.ambient_temperature)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad package config: {exc!r}") from exc


def _material_dict(m: MaterialProps) -> dict:
    return {"conductivity": m.conductivity, "volumetric_heat_capacity": m.volumetric_heat_capacity}


def default_package() -> PackageConfig:
    """Four-layer package with representative HotSpot-5-style constants.

    die 16x16x0.15 mm silicon (k=100), TIM 16x16 mm x 50 um (k=4),
    spreader 30x30x1 mm copper (k=400), sink base 30x30x6.9 mm (k=400),
    0.1 K/W sink-to-air, 45 degC ambient, filler k=0.25.
    """
    die = (0.016, 0.016)
    spread = (0.03, 0.03)
    return PackageConfig(
        layers=(
            Layer("die", 0.15e-3, SILICON, die),
            Layer("tim", 50e-6, TIM_MATERIAL, die),
            Layer("spreader", 1e-3, COPPER, spread),
            Layer("sink", 6.9e-3, COPPER, spread),
        ),
        sink_convection_resistance_total=0.1,
        ambient_temperature=45.0,
    )


@dataclass(frozen=True)
class Block:
    name: str
    x: float
    y: float
    width: float
    height: float

    @property
    def area(self) -> float:
        return self.width * self.height


def _overlap_1d(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def overlap_area(a: Block, b: Block) -> float:
    return _overlap_1d(a.x, a.x + a.width, b.x, b.x + b.width) * _overlap_1d(
        a.y, a.y + a.height, b.y, b.y + b.height
    )


@dataclass(frozen=True)
class Floorplan:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def __len__(self):
        return len(self.blocks)

    @property
    def names(self) -> list[str]:
        return [b.name for b in self.blocks]

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)


def validate_floorplan(fp: Floorplan, die_extent: tuple[float, float] | None = None) -> None:
    """Raise ValidationError on duplicate names, bad sizes, overlap or overhang."""
    seen = set()
    for b in fp.blocks:
        if b.name in seen:
            raise ValidationError(f"duplicate block name {b.name!r}")
        seen.add(b.name)
        if not (b.width > 0 and b.height > 0):
            raise ValidationError(f"block {b.name!r}: width and height must be > 0")
        if b.x < -LENGTH_TOL or b.y < -LENGTH_TOL:
            raise ValidationError(f"block {b.name!r} is out of bounds (negative origin)")
        if die_extent is not None and (
            b.x + b.width > die_extent[0] + LENGTH_TOL or b.y + b.height > die_extent[1] + LENGTH_TOL
        ):
            raise ValidationError(f"block {b.name!r} is out of bounds of the die extent {die_extent}")
    for a, b in itertools.combinations(fp.blocks, 2):
        if overlap_area(a, b) > OVERLAP_AREA_TOL:
            raise ValidationError(f"overlap between blocks {a.name!r} and {b.name!r}")


def _strip_comments(text: str) -> list[tuple[int, str]]:
    lines = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lines.append((lineno, line))
    return lines


def _parse_float(value: str, what: str, lineno: int) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ParseError(f"{what}: cannot parse {value!r} as a number", lineno) from None
    if not math.isfinite(out):
        raise ParseError(f"{what}: value must be finite", lineno)
    return out


def parse_floorplan(text: str, die_extent: tuple[float, float] | None = None) -> Floorplan:
    """Parse ``name,x,y,w,h`` CSV (metres, '#' comments allowed) and validate.

    Bounds are only checked when ``die_extent`` is given.
    """
    lines = _strip_comments(text)
    if not lines:
        raise ParseError("empty floorplan")
    header_no, header = lines[0]
    if [h.strip() for h in header.split(",")] != ["name", "x", "y", "w", "h"]:
        raise ParseError(f"expected header 'name,x,y,w,h', got {header.strip()!r}", header_no)
    blocks = []
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != 5:
            raise ParseError(f"expected 5 fields, got {len(row)}", lineno)
        name = row[0].strip()
        if not name:
            raise ParseError("empty block name", lineno)
        x, y, w, h = (_parse_float(v, col, lineno) for v, col in zip(row[1:], "xywh"))
        blocks.append(Block(name, x, y, w, h))
    fp = Floorplan(tuple(blocks))
    validate_floorplan(fp, die_extent)
    return fp


def serialize_floorplan(fp: Floorplan) -> str:
    # repr() keeps floats round-trippable.
    out = ["name,x,y,w,h"]
    for b in fp.blocks:
        out.append(f"{b.name},{b.x!r},{b.y!r},{b.width!r},{b.height!r}")
    return "\n".join(out) + "\n"


def make_grid_floorplan(rows: int, cols: int, die_extent: tuple[float, float]) -> Floorplan:
    """Uniform ``rows`` x ``cols`` tiling of the die, blocks named ``c<r>_<c>``."""
    if rows < 1 or cols < 1:
        raise ValidationError(f"grid floorplan needs rows, cols >= 1, got {rows}x{cols}")
    width = die_extent[0] / cols
    height = die_extent[1] / rows
    blocks = [
        Block(f"c{r}_{c}", c * width, r * height, width, height)
        for r in range(rows)
        for c in range(cols)
    ]
    return Floorplan(tuple(blocks))


def grid_shape_for(n_cores: int) -> tuple[int, int]:
    """Most square (rows, cols) factorisation with rows <= cols; 128 -> (8, 16)."""
    if n_cores < 1:
        raise ValidationError("n_cores must be >= 1")
    rows = max(r for r in range(1, math.isqrt(n_cores) + 1) if n_cores % r == 0)
    return rows, n_cores // rows


@dataclass(frozen=True)
class PowerMap:
    per_block_power: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "per_block_power", dict(self.per_block_power))
        for name, watts in self.per_block_power.items():
            if not (math.isfinite(watts) and watts >= 0):
                raise ValidationError(f"power for {name!r} must be finite and >= 0, got {watts}")

    @property
    def total(self) -> float:
        return math.fsum(self.per_block_power.values())

    def check_against(self, fp: Floorplan) -> None:
        names = set(fp.names)
        unknown = [k for k in self.per_block_power if k not in names]
        if unknown:
            raise ValidationError(f"power map names unknown blocks: {unknown}")

    @classmethod
    def uniform(cls, names: Iterable[str], watts: float) -> "PowerMap":
        return cls({n: watts for n in names})


def parse_power_map(text: str) -> PowerMap:
    """Parse ``name,watts`` CSV."""
    lines = _strip_comments(text)
    if not lines:
        raise ParseError("empty power map")
    header_no, header = lines[0]
    if [h.strip() for h in header.split(",")] != ["name", "watts"]:
        raise ParseError(f"expected header 'name,watts', got {header.strip()!r}", header_no)
    powers: dict[str, float] = {}
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", lineno)
        name = row[0].strip()
        if name in powers:
            raise ParseError(f"duplicate entry for {name!r}", lineno)
        powers[name] = _parse_float(row[1], "watts", lineno)
        if powers[name] < 0:
            raise ParseError(f"negative power for {name!r}", lineno)
    return PowerMap(powers)


def serialize_power_map(pm: PowerMap) -> str:
    buf = io.StringIO()
    buf.write("name,watts\n")
    for name, watts in pm.per_block_power.items():
        buf.write(f"{name},{watts!r}\n")
    return buf.getvalue()
