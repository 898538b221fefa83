"""Steady-state and transient solves on a ThermalNetwork.

The network is a weighted graph Laplacian plus ambient coupling, so
``G @ (T - t_amb) == P`` is the same system as ``G @ T == P + g_amb * t_amb``.
All linear algebra works on the rise above ambient.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .network import ThermalNetwork


class SolverError(RuntimeError):
    """The linear solve failed: no convergence or a matrix that is not SPD."""


@dataclass(frozen=True, eq=False)
class TemperatureField:
    temps: np.ndarray  # degC, flat, grid cells then the lumped node
    nx: int
    ny: int
    layer_names: tuple[str, ...]
    ambient: float

    @classmethod
    def like(cls, net: ThermalNetwork, temps: np.ndarray, ambient: float) -> "TemperatureField":
        return cls(np.asarray(temps, dtype=float), net.grid.nx, net.grid.ny, net.layer_names, float(ambient))

    @classmethod
    def uniform(cls, net: ThermalNetwork, value: float, ambient: float | None = None) -> "TemperatureField":
        return cls.like(net, np.full(net.n_cells, float(value)), value if ambient is None else ambient)

    def layer(self, which: int | str) -> np.ndarray:
        """Temperatures of one layer as an (ny, nx) array."""
        i = self.layer_names.index(which) if isinstance(which, str) else which
        per = self.nx * self.ny
        return self.temps[i * per:(i + 1) * per].reshape(self.ny, self.nx)

    @property
    def rise(self) -> np.ndarray:
        return self.temps - self.ambient


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual: float
    wall_time: float


def iteration_cap(n: int) -> int:
    return int(math.ceil(50 * math.sqrt(n)))


def pcg(A: sp.csr_matrix, b: np.ndarray, tol: float, maxiter: int, x0: np.ndarray | None = None):
    """Jacobi-preconditioned conjugate gradients.

    Stops on the true relative residual ``||b - A x|| / ||b||``. Returns
    ``(x, iterations, relative_residual)``; raises SolverError on a
    non-positive curvature direction or when ``maxiter`` is exhausted.
    """
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b), 0, 0.0
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverError("matrix is not positive definite (non-positive diagonal)")
    inv_d = 1.0 / diag

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    it = 0
    while True:
        z = inv_d * r
        p = z.copy()
        rz = r @ z
        while it < maxiter:
            if math.sqrt(r @ r) <= tol * b_norm:
                break
            Ap = A @ p
            curv = p @ Ap
            if not curv > 0:
                raise SolverError(f"matrix is not positive definite (p.Ap = {curv:.3e} at iteration {it})")
            alpha = rz / curv
            x += alpha * p
            r -= alpha * Ap
            z = inv_d * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
            it += 1
        # the recurrence drifts from the true residual; confirm and restart if needed
        r = b - A @ x
        res = np.linalg.norm(r) / b_norm
        if res <= tol:
            return x, it, res
        if it >= maxiter:
            raise SolverError(
                f"no convergence after {it} iterations (relative residual {res:.3e} > {tol:.1e})"
            )


def _check_symmetric(G: sp.csr_matrix) -> None:
    asym = abs(G - G.T).max() if G.nnz else 0.0
    if asym > 1e-12 * abs(G).max():
        raise SolverError(f"conductance matrix is not symmetric (max asymmetry {asym:.3e})")


def solve_steady(
    net: ThermalNetwork, p: np.ndarray, t_amb: float, tol: float = 1e-8
) -> tuple[TemperatureField, SolveReport]:
    if not 0 < tol <= 1e-2:
        raise ValueError(f"tol must lie in (0, 1e-2], got {tol}")
    p = np.asarray(p, dtype=float)
    n = net.G.shape[0]
    if p.shape != (n,):
        raise ValueError(f"power vector has shape {p.shape}, expected ({n},)")
    _check_symmetric(net.G)
    start = time.perf_counter()
    rise, iters, res = pcg(net.G, p, tol, iteration_cap(n))
    elapsed = time.perf_counter() - start
    return TemperatureField.like(net, t_amb + rise, t_amb), SolveReport(iters, res, elapsed)


def solve_transient(
    net: ThermalNetwork,
    p: np.ndarray,
    t0: TemperatureField,
    dt: float,
    steps: int,
) -> list[TemperatureField]:
    """Backward-Euler trajectory; returns the field after each of ``steps`` steps.

    Each step solves ``(C/dt + G) T_next = C/dt T + P + g_amb t_amb`` (in rise
    form). The step matrix is factorised once.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    p = np.asarray(p, dtype=float)
    _check_symmetric(net.G)
    t_amb = t0.ambient
    m = net.C / dt
    A = (net.G + sp.diags(m)).tocsc()
    try:
        step_solve = spla.factorized(A)
    except RuntimeError as exc:
        raise SolverError(f"step matrix factorisation failed: {exc}") from exc
    theta = np.asarray(t0.temps, dtype=float) - t_amb
    out = []
    for _ in range(steps):
        theta = step_solve(m * theta + p)
        if not np.all(np.isfinite(theta)):
            raise SolverError("transient step produced non-finite temperatures")
        out.append(TemperatureField.like(net, t_amb + theta, t_amb))
    return out


def energy_balance(net: ThermalNetwork, field: TemperatureField, p: np.ndarray) -> float:
    """Relative mismatch between heat leaving to ambient and heat injected."""
    total = math.fsum(np.asarray(p, dtype=float))
    if total == 0.0:
        return 0.0
    out = math.fsum(net.g_amb * (field.temps - field.ambient))
    return abs(out - total) / abs(total)
