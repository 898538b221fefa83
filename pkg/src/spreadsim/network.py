"""Finite-volume discretisation of the package into a conductance network.

Every layer shares one uniform ``nx`` x ``ny`` grid spanning the global
package extent. Cells partially covered by a layer's nominal footprint get an
area-weighted mix of the nominal and filler materials. The bottom (sink) layer
drains into a single lumped sink-air node, which couples to ambient through the
total convection resistance.

Flat index of cell ``(layer, ix, iy)`` is ``layer * nx * ny + iy * nx + ix``;
the lumped node is the last index.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .package import Floorplan, PackageConfig, PowerMap, ValidationError


def conductance(k: float, area: float, length: float) -> float:
    """Slab conductance ``k * area / length`` in W/K."""
    if not (k > 0 and area > 0 and length > 0):
        raise ValueError(f"conductance needs positive inputs, got k={k}, area={area}, length={length}")
    return k * area / length


def _series(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    return g1 * g2 / (g1 + g2)


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    width: float
    height: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValidationError(f"grid needs nx, ny >= 2, got {self.nx}x{self.ny}")
        if not (self.width > 0 and self.height > 0):
            raise ValidationError("grid extent must be positive")

    @classmethod
    def for_package(cls, pkg: PackageConfig, nx: int, ny: int | None = None) -> "GridSpec":
        width, height = pkg.extent
        return cls(nx, nx if ny is None else ny, width, height)

    @property
    def dx(self) -> float:
        return self.width / self.nx

    @property
    def dy(self) -> float:
        return self.height / self.ny

    def x_edges(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    def y_edges(self) -> np.ndarray:
        return np.arange(self.ny + 1) * self.dy


def _interval_overlaps(edges: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Length of [lo, hi] falling into each cell delimited by ``edges``."""
    return np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0, None)


@dataclass(frozen=True, eq=False)
class ThermalNetwork:
    G: sp.csr_matrix  # W/K
    C: np.ndarray  # J/K per node; the lumped node carries none
    g_amb: np.ndarray  # W/K per node
    grid: GridSpec
    layer_names: tuple[str, ...]

    @property
    def n_layers(self) -> int:
        return len(self.layer_names)

    @property
    def cells_per_layer(self) -> int:
        return self.grid.nx * self.grid.ny

    @property
    def n_cells(self) -> int:
        return self.n_layers * self.cells_per_layer + 1

    @property
    def lumped_index(self) -> int:
        return self.n_cells - 1

    def index(self, layer: int, ix: int, iy: int) -> int:
        nx, ny = self.grid.nx, self.grid.ny
        if not (0 <= layer < self.n_layers and 0 <= ix < nx and 0 <= iy < ny):
            raise IndexError(f"cell ({layer}, {ix}, {iy}) outside network")
        return layer * nx * ny + iy * nx + ix

    def cell(self, flat: int) -> tuple[int, int, int]:
        if not 0 <= flat < self.n_cells - 1:
            raise IndexError(f"flat index {flat} is not a grid cell")
        layer, rem = divmod(flat, self.cells_per_layer)
        iy, ix = divmod(rem, self.grid.nx)
        return layer, ix, iy

    def layer_slice(self, layer: int) -> slice:
        start = layer * self.cells_per_layer
        return slice(start, start + self.cells_per_layer)


def _layer_coverage(pkg: PackageConfig, grid: GridSpec) -> np.ndarray:
    """Fraction of each cell inside each layer's nominal footprint, shape (L, ny, nx)."""
    xe, ye = grid.x_edges(), grid.y_edges()
    out = np.empty((len(pkg.layers), grid.ny, grid.nx))
    for i, layer in enumerate(pkg.layers):
        w, h = layer.extent
        if w > grid.width * (1 + 1e-12) or h > grid.height * (1 + 1e-12):
            raise ValidationError(f"layer {layer.name!r} is larger than the grid extent")
        x0 = (grid.width - w) / 2.0
        y0 = (grid.height - h) / 2.0
        fx = _interval_overlaps(xe, x0, x0 + w) / grid.dx
        fy = _interval_overlaps(ye, y0, y0 + h) / grid.dy
        out[i] = np.outer(fy, fx)
    return out


def assemble_network(pkg: PackageConfig, grid: GridSpec) -> ThermalNetwork:
    """Assemble the sparse SPD conductance matrix for ``pkg`` on ``grid``."""
    nx, ny = grid.nx, grid.ny
    n_layers = len(pkg.layers)
    per_layer = nx * ny
    n = n_layers * per_layer + 1
    lumped = n - 1
    dx, dy = grid.dx, grid.dy

    cover = _layer_coverage(pkg, grid)
    k = np.empty_like(cover)
    cap = np.empty_like(cover)
    for i, layer in enumerate(pkg.layers):
        f = cover[i]
        k[i] = f * layer.material.conductivity + (1.0 - f) * layer.filler.conductivity
        cap[i] = f * layer.material.volumetric_heat_capacity + (1.0 - f) * layer.filler.volumetric_heat_capacity

    thick = np.array([layer.thickness for layer in pkg.layers])
    if np.any(thick <= 0) or dx <= 0 or dy <= 0:
        raise ValidationError("degenerate geometry: zero cell or layer size")
    t3 = thick[:, None, None]
    idx = np.arange(n_layers * per_layer).reshape(n_layers, ny, nx)

    rows, cols, vals = [], [], []

    # x-direction links: half-cell conductance across the face dy*t over dx/2
    gx = k * (dy * t3) / (dx / 2.0)
    rows.append(idx[:, :, :-1].ravel())
    cols.append(idx[:, :, 1:].ravel())
    vals.append(_series(gx[:, :, :-1], gx[:, :, 1:]).ravel())

    gy = k * (dx * t3) / (dy / 2.0)
    rows.append(idx[:, :-1, :].ravel())
    cols.append(idx[:, 1:, :].ravel())
    vals.append(_series(gy[:, :-1, :], gy[:, 1:, :]).ravel())

    gz = k * (dx * dy) / (t3 / 2.0)
    if n_layers > 1:
        rows.append(idx[:-1].ravel())
        cols.append(idx[1:].ravel())
        vals.append(_series(gz[:-1], gz[1:]).ravel())

    # bottom layer to lumped sink-air node: half the sink thickness
    rows.append(idx[-1].ravel())
    cols.append(np.full(per_layer, lumped))
    vals.append(gz[-1].ravel())

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValidationError("assembled a negative or non-finite conductance")

    g_amb = np.zeros(n)
    g_amb[lumped] = 1.0 / pkg.sink_convection_resistance_total

    # bincount sums in index order, so the diagonal is reproducible bit for bit
    diag = np.bincount(r, weights=v, minlength=n) + np.bincount(c, weights=v, minlength=n) + g_amb
    all_rows = np.concatenate([r, c, np.arange(n)])
    all_cols = np.concatenate([c, r, np.arange(n)])
    all_vals = np.concatenate([-v, -v, diag])
    G = sp.coo_matrix((all_vals, (all_rows, all_cols)), shape=(n, n)).tocsr()
    G.sort_indices()

    C = np.zeros(n)
    C[:-1] = (cap * (dx * dy) * t3).ravel()

    return ThermalNetwork(
        G=G,
        C=C,
        g_amb=g_amb,
        grid=grid,
        layer_names=tuple(layer.name for layer in pkg.layers),
    )


def rasterize_power(pm: PowerMap, fp: Floorplan, grid: GridSpec, pkg: PackageConfig) -> np.ndarray:
    """Spread each block's power over die-layer cells by overlap area.

    Returns a per-node vector (length ``n_layers * nx * ny + 1``); only the
    die layer is non-zero.
    """
    pm.check_against(fp)
    per_layer = grid.nx * grid.ny
    out = np.zeros(len(pkg.layers) * per_layer + 1)
    die = np.zeros((grid.ny, grid.nx))
    ox, oy = pkg.die_origin()
    xe, ye = grid.x_edges(), grid.y_edges()
    for block in fp.blocks:
        watts = pm.per_block_power.get(block.name, 0.0)
        if watts == 0.0:
            continue
        ax = _interval_overlaps(xe, ox + block.x, ox + block.x + block.width)
        ay = _interval_overlaps(ye, oy + block.y, oy + block.y + block.height)
        area = np.outer(ay, ax)
        total = area.sum()
        if not total > 0:
            raise ValidationError(f"block {block.name!r} does not overlap the grid")
        die += watts * (area / total)
    out[:per_layer] = die.ravel()
    return out


def block_cell_weights(fp: Floorplan, grid: GridSpec, pkg: PackageConfig) -> sp.csr_matrix:
    """Row-normalised overlap weights, shape (n_blocks, nx*ny), over die-layer cells.

    ``W @ die_temps`` gives the area-weighted mean temperature of each block.
    """
    ox, oy = pkg.die_origin()
    xe, ye = grid.x_edges(), grid.y_edges()
    rows, cols, vals = [], [], []
    for i, block in enumerate(fp.blocks):
        ax = _interval_overlaps(xe, ox + block.x, ox + block.x + block.width)
        ay = _interval_overlaps(ye, oy + block.y, oy + block.y + block.height)
        area = np.outer(ay, ax).ravel()
        nz = np.flatnonzero(area)
        if nz.size == 0:
            raise ValidationError(f"block {block.name!r} does not overlap the grid")
        rows.append(np.full(nz.size, i))
        cols.append(nz)
        vals.append(area[nz] / area[nz].sum())
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(fp.blocks), grid.nx * grid.ny),
    )


def die_center_index(net: ThermalNetwork, pkg: PackageConfig) -> int:
    """Flat index of the die-layer cell containing the die's geometric centre.

    A centre lying exactly on a cell edge belongs to the cell above/right of it.
    """
    ox, oy = pkg.die_origin()
    cx = ox + pkg.die.extent[0] / 2.0
    cy = oy + pkg.die.extent[1] / 2.0
    ix = min(int(np.floor(cx / net.grid.dx)), net.grid.nx - 1)
    iy = min(int(np.floor(cy / net.grid.dy)), net.grid.ny - 1)
    return net.index(0, ix, iy)


def write_matrix_market(net: ThermalNetwork, path: str | Path) -> None:
    scipy.io.mmwrite(str(path), net.G, comment="thermal conductance matrix, W/K", symmetry="symmetric")
