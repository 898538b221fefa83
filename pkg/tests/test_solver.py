import numpy as np
import pytest
import scipy.sparse as sp

from conftest import dense_rise, random_die_power
from spreadsim.network import GridSpec, ThermalNetwork, assemble_network
from spreadsim.solver import (
    SolverError,
    TemperatureField,
    energy_balance,
    iteration_cap,
    pcg,
    solve_steady,
    solve_transient,
)


def single_node(g=2.0):
    return ThermalNetwork(
        G=sp.csr_matrix([[g]]),
        C=np.array([1.0]),
        g_amb=np.array([g]),
        grid=GridSpec(2, 2, 1.0, 1.0),
        layer_names=(),
    )


def test_single_node():
    field, rep = solve_steady(single_node(), np.array([10.0]), 45.0)
    assert field.temps[0] == pytest.approx(50.0, abs=1e-12)
    assert rep.residual <= 1e-8


def test_zero_power_is_ambient(net8):
    field, rep = solve_steady(net8, np.zeros(net8.n_cells), 45.0)
    assert np.all(field.temps == 45.0)
    assert rep.iterations == 0


def test_matches_dense_oracle(net8):
    rng = np.random.default_rng(7)
    p = random_die_power(net8, rng)
    field, rep = solve_steady(net8, p, 45.0, tol=1e-12)
    assert np.abs(field.rise - dense_rise(net8, p)).max() < 1e-8
    assert rep.residual <= 1e-12


def test_residual_contract(net8):
    p = random_die_power(net8, np.random.default_rng(1))
    field, rep = solve_steady(net8, p, 45.0, tol=1e-6)
    true = np.linalg.norm(net8.G @ field.rise - p) / np.linalg.norm(p)
    assert true == pytest.approx(rep.residual)
    assert true <= 1e-6


def test_deterministic(net8):
    p = random_die_power(net8, np.random.default_rng(3))
    a, _ = solve_steady(net8, p, 45.0)
    b, _ = solve_steady(net8, p, 45.0)
    assert np.array_equal(a.temps, b.temps)


@pytest.mark.parametrize("tol", [0.0, -1e-9, 0.02])
def test_tol_range(net8, tol):
    with pytest.raises(ValueError):
        solve_steady(net8, np.zeros(net8.n_cells), 45.0, tol=tol)


def test_bad_power_shape(net8):
    with pytest.raises(ValueError):
        solve_steady(net8, np.zeros(3), 45.0)


def test_iteration_cap():
    assert iteration_cap(4097) == int(np.ceil(50 * np.sqrt(4097)))


def test_not_positive_definite_detected():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(SolverError, match="positive definite"):
        pcg(A, np.array([1.0, -1.0]), 1e-10, 100)


def test_non_convergence_detected(net8):
    p = random_die_power(net8, np.random.default_rng(0))
    with pytest.raises(SolverError, match="no convergence"):
        pcg(net8.G, p, 1e-12, 3)


def test_asymmetric_matrix_rejected():
    net = single_node()
    bad = ThermalNetwork(sp.csr_matrix([[2.0, -1.0], [0.0, 2.0]]), np.ones(2), np.ones(2), net.grid, ())
    with pytest.raises(SolverError, match="symmetric"):
        solve_steady(bad, np.ones(2), 0.0)


def test_superposition_and_scaling(net8):
    rng = np.random.default_rng(11)
    p1, p2 = random_die_power(net8, rng), random_die_power(net8, rng)
    r1 = solve_steady(net8, p1, 45.0, tol=1e-12)[0].rise
    r2 = solve_steady(net8, p2, 45.0, tol=1e-12)[0].rise
    r12 = solve_steady(net8, p1 + p2, 45.0, tol=1e-12)[0].rise
    assert np.abs(r12 - (r1 + r2)).max() < 1e-8
    r3 = solve_steady(net8, 3.7 * p1, 45.0, tol=1e-12)[0].rise
    assert np.abs(r3 - 3.7 * r1).max() < 1e-8
    assert np.argmax(r3) == np.argmax(r1)


def test_m_matrix_inverse_nonnegative(pkg):
    net = assemble_network(pkg, GridSpec.for_package(pkg, 3))
    inv = np.linalg.inv(net.G.toarray())
    assert inv.min() > -1e-12


def test_monotone_in_single_cell_power(pkg):
    net = assemble_network(pkg, GridSpec.for_package(pkg, 4))
    rng = np.random.default_rng(5)
    p = random_die_power(net, rng)
    base = solve_steady(net, p, 45.0, tol=1e-12)[0].temps
    for cell in (0, 5, 15):
        bumped = p.copy()
        bumped[cell] += 1.0
        t = solve_steady(net, bumped, 45.0, tol=1e-12)[0].temps
        assert np.all(t >= base - 1e-10)
        dense = dense_rise(net, bumped) + 45.0
        assert np.abs(t - dense).max() < 1e-8


def test_maximum_principle(net8):
    p = random_die_power(net8, np.random.default_rng(2))
    field, _ = solve_steady(net8, p, 45.0)
    assert field.temps.min() >= 45.0 - 1e-9


def test_energy_balance(pkg, net8):
    p = random_die_power(net8, np.random.default_rng(4))
    p *= 100.0 / p.sum()
    field, _ = solve_steady(net8, p, 45.0)
    assert energy_balance(net8, field, p) < 1e-6


def test_energy_balance_zero_power(net8):
    field = TemperatureField.uniform(net8, 45.0)
    assert energy_balance(net8, field, np.zeros(net8.n_cells)) == 0.0


def test_energy_balance_flags_garbage(net8):
    p = random_die_power(net8, np.random.default_rng(4))
    junk = TemperatureField.like(net8, 45.0 + np.random.default_rng(9).uniform(0, 50, net8.n_cells), 45.0)
    assert energy_balance(net8, junk, p) > 1e-3


def test_layer_view(net8):
    field = TemperatureField.like(net8, np.arange(net8.n_cells, dtype=float), 0.0)
    assert field.layer("tim")[0, 0] == 64.0
    assert field.layer(0)[2, 3] == 2 * 8 + 3


# transient


def test_transient_constant_at_ambient(net8):
    t0 = TemperatureField.uniform(net8, 45.0)
    traj = solve_transient(net8, np.zeros(net8.n_cells), t0, 1.0, 20)
    assert len(traj) == 20
    assert all(np.all(f.temps == 45.0) for f in traj)


def test_transient_converges_to_steady(net8):
    p = random_die_power(net8, np.random.default_rng(6))
    steady = solve_steady(net8, p, 45.0, tol=1e-12)[0]
    traj = solve_transient(net8, p, TemperatureField.uniform(net8, 45.0), 2.0, 300)
    assert np.abs(traj[-1].temps - steady.temps).max() < 1e-6


def test_transient_energy_norm_decreases(net8):
    p = random_die_power(net8, np.random.default_rng(8))
    steady = solve_steady(net8, p, 45.0, tol=1e-12)[0].temps
    traj = solve_transient(net8, p, TemperatureField.uniform(net8, 45.0), 0.5, 60)
    G = net8.G
    energy = [float(e @ (G @ e)) for e in (f.temps - steady for f in traj)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(energy, energy[1:]))


def _field_at(net, p, horizon, dt):
    steps = int(round(horizon / dt))
    return solve_transient(net, p, TemperatureField.uniform(net, 45.0), dt, steps)[-1].temps


def test_transient_first_order_in_dt(net8):
    # before steady state the step error should halve with dt
    p = random_die_power(net8, np.random.default_rng(10))
    a, b, c = (_field_at(net8, p, 4.0, dt) for dt in (0.2, 0.1, 0.05))
    coarse = np.abs(a - b).max()
    fine = np.abs(b - c).max()
    assert 1.6 < coarse / fine < 2.4


def test_transient_600s_insensitive_to_dt(net8):
    p = random_die_power(net8, np.random.default_rng(10))
    early = np.abs(_field_at(net8, p, 4.0, 0.2) - _field_at(net8, p, 4.0, 0.1)).max()
    late = np.abs(_field_at(net8, p, 600.0, 10.0) - _field_at(net8, p, 600.0, 5.0)).max()
    # a first-order bound scaled up from the early error by the dt ratio
    assert late < early * (10.0 / 0.2)
    assert late < 1e-6


@pytest.mark.parametrize("dt,steps", [(0.0, 1), (-1.0, 1), (1.0, -1)])
def test_transient_rejects_bad_step(net8, dt, steps):
    with pytest.raises(ValueError):
        solve_transient(net8, np.zeros(net8.n_cells), TemperatureField.uniform(net8, 45.0), dt, steps)
