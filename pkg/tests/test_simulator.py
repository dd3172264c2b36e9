import math

import numpy as np
import pytest

from asymadmit.eigen import max_real_part, min_damping_sufficient
from asymadmit.energy import energy_breakdown
from asymadmit.simulator import (
    DivergenceError,
    Scenario,
    SimState,
    Wall,
    damping_from_zeta,
    detect_convergence,
    detect_spiral,
    overshoot,
    simulate,
    simulate_batch_tail_ke,
    step,
    tail_count,
)
from asymadmit.stiffness import AdmittanceParams, StiffnessMatrix


def tail_ke(tr, window=0.1):
    v = tr.velocity[-tail_count(window, tr.dt):]
    return float((0.5 * tr.params.m * (v**2).sum(axis=1)).mean())


def test_hand_computed_step(table_params):
    s = step(SimState(), (0.0, 10.0), table_params, 1e-3)
    assert (s.vx, s.vy) == (0.0, pytest.approx(0.1))
    assert (s.x, s.y) == (0.0, pytest.approx(1e-4))
    assert s.t == pytest.approx(1e-3)


def test_rest_is_unchanged(table_params):
    s = step(SimState(), (0.0, 0.0), table_params, 1e-3)
    assert (s.x, s.y, s.vx, s.vy) == (0, 0, 0, 0)


def test_static_balance_has_zero_acceleration(table_params):
    K = table_params.k.matrix
    eq = np.linalg.solve(K, [0.0, 10.0])
    s = SimState(eq[0], eq[1])
    nxt = step(s, (0.0, 10.0), table_params, 1e-3)
    assert abs(nxt.vx) < 1e-12 and abs(nxt.vy) < 1e-12


def test_equilibrium_is_a_fixed_point(table_params):
    eq = np.linalg.solve(table_params.k.matrix, [0.0, 10.0])
    s = SimState(eq[0], eq[1])
    for _ in range(10_000):
        s = step(s, (0.0, 10.0), table_params, 1e-3)
    assert np.abs(s.position - eq).max() <= 1e-9
    sc = Scenario.step_force(duration=10.0, initial=SimState(eq[0], eq[1]))
    tr = simulate(table_params, sc)
    assert np.abs(tr.position - eq).max() <= 1e-9


def test_step_rejects_bad_dt(table_params):
    with pytest.raises(ValueError):
        step(SimState(), (0, 0), table_params, 0.0)


def test_step_divergence_guard(table_params):
    with pytest.raises(DivergenceError):
        step(SimState(2e9, 0), (0, 0), table_params, 1e-3)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(dt=0)
    with pytest.raises(ValueError):
        Scenario(duration=1e-4, dt=1e-3)
    with pytest.raises(ValueError):
        Scenario(force_schedule=((0.5, 0, 1),))
    with pytest.raises(ValueError):
        Scenario(force_schedule=((0, 0, 1), (0, 1, 1)))
    with pytest.raises(ValueError):
        Scenario(integrator="euler")


def test_piecewise_schedule():
    sc = Scenario(force_schedule=((0.0, 0.0, 10.0), (1.0, 0.0, 0.0)), duration=2.0)
    f = sc.forces(sc.times())
    assert f[999].tolist() == [0, 10] and f[1000].tolist() == [0, 0]


def test_release_returns_to_origin():
    p = AdmittanceParams.from_values(0.1, 2.0, 100, 100, 0, 10)
    sc = Scenario(force_schedule=((0.0, 0.0, 10.0), (1.0, 0.0, 0.0)), duration=8.0)
    tr = simulate(p, sc)
    assert np.abs(tr.position[-1]).max() < 1e-6


def test_reference_runs(table_params):
    tr = simulate(table_params, Scenario.step_force())
    assert tr.status == "converged"
    assert len(tr) == 5001 and np.allclose(np.diff(tr.t), 1e-3)
    tr = simulate(table_params.with_damping(0.30), Scenario.step_force())
    assert tr.status in ("oscillating", "diverged")


def test_diverged_run_is_returned_not_raised():
    p = AdmittanceParams.from_values(0.1, 0.0, 100, 100, 0, 40)
    tr = simulate(p, Scenario.step_force(duration=20.0))
    assert tr.status == "diverged" and tr.diverged
    assert np.all(np.isfinite(tr.position))


def test_energy_attached_matches_recomputation(table_params):
    tr = simulate(table_params, Scenario.step_force(duration=1.0))
    again = energy_breakdown(tr, table_params)
    for name in ("kinetic", "potential", "dissipated", "curl_work", "total"):
        np.testing.assert_array_equal(getattr(tr.energy, name), getattr(again, name))


def test_batch_matches_single_run(table_params):
    sc = Scenario.step_force(duration=2.0)
    tr = simulate(table_params, sc)
    p = table_params
    ke, div = simulate_batch_tail_ke([p.m], [p.d], [p.k.kx], [p.k.ky], [p.k.ks], [p.k.ka], sc)
    assert not div[0]
    assert ke[0] == tail_ke(tr)


def test_convergence_agrees_with_eigen_analysis():
    rng = np.random.default_rng(7)
    rows = []
    while len(rows) < 100:
        kx, ky = rng.uniform(50, 150, 2)
        ks, ka = rng.uniform(-20, 20), rng.uniform(-30, 30)
        k = StiffnessMatrix(kx, ky, ks, ka)
        d = rng.uniform(0, 2) * min_damping_sufficient(k, 0.1)
        mr = max_real_part(AdmittanceParams(0.1, d, k))
        if abs(mr) > 0.05:
            rows.append((0.1, d, kx, ky, ks, ka, mr))
    m, d, kx, ky, ks, ka, mr = np.array(rows).T
    ke, div = simulate_batch_tail_ke(m, d, kx, ky, ks, ka, Scenario.step_force(duration=20.0))
    converged = (ke < 0.2) & ~div
    np.testing.assert_array_equal(converged, mr < 0)


def test_halving_dt_changes_tail_energy_little(table_params):
    for d in (0.34, 0.5, 1.0):
        p = table_params.with_damping(d)
        a = tail_ke(simulate(p, Scenario.step_force(dt=1e-3)))
        b = tail_ke(simulate(p, Scenario.step_force(dt=5e-4)))
        assert abs(a - b) < 0.1 * b


def test_rk4_agrees_with_semi_implicit_when_well_damped():
    p = AdmittanceParams.from_values(0.1, 3.0, 100, 100, 0, 10)
    a = simulate(p, Scenario.step_force(duration=2.0))
    b = simulate(p, Scenario.step_force(duration=2.0, integrator="rk4"))
    assert np.abs(a.position - b.position).max() < 5e-3


def test_damping_from_zeta():
    assert damping_from_zeta(StiffnessMatrix(100, 100), 1.0, 1.0) == pytest.approx(20.0)
    assert damping_from_zeta(StiffnessMatrix(100, 100, 0, 10), 0.1, 0.0) == 0.0
    with pytest.raises(ValueError):
        damping_from_zeta(StiffnessMatrix(100, 100), 1.0, -1.0)
    # complex branch: real part of sqrt(2 (s + j sqrt(-R)))
    k = StiffnessMatrix(100, 100, 0, 10)
    expected = 0.1 * (2 * complex(2000, 200)) ** 0.5
    assert damping_from_zeta(k, 0.1, 1.0) == pytest.approx(expected.real)


def test_detect_convergence_edge_cases(table_params):
    tr = simulate(table_params, Scenario.step_force(0.0, 0.0, duration=1.0))
    assert detect_convergence(tr)
    with pytest.raises(ValueError):
        detect_convergence(tr, window=2.0)


def test_straight_line_has_no_winding():
    k = StiffnessMatrix(100, 100)
    p = AdmittanceParams(0.1, damping_from_zeta(k, 0.1, 1.0), k)
    tr = simulate(p, Scenario.step_force())
    assert detect_spiral(tr) == 0.0
    assert overshoot(tr) <= 0


def test_spiral_versus_spiral_free_winding():
    for kk, spiral in (((100, 100, 0, 10), True), ((140, 60, 0, 30), False)):
        k = StiffnessMatrix(*kk)
        tr = simulate(AdmittanceParams(0.1, damping_from_zeta(k, 0.1, 1.0), k), Scenario.step_force())
        assert (abs(detect_spiral(tr)) >= 1) == spiral


def test_wall_limits_travel():
    p = AdmittanceParams.from_values(0.1, 2.0, 100, 100, 0, 10)
    sc = Scenario.step_force(duration=3.0, wall=Wall(axis=1, position=0.05, stiffness=1e4))
    tr = simulate(p, sc)
    assert tr.position[:, 1].max() < 0.05 + 0.01
