import math

import numpy as np
import pytest

import wsnpl as w
from conftest import max_alpha_reldiff, micro_networks, paper_range_instance


def test_bisection_matches_closed_form_references():
    k1, k2, _ = micro_networks()
    rep = w.solve_l1_bisection(w.ProblemSpec(k1, 0.02, w.L1), tol=1e-10)
    assert rep.allocation.alpha[0] == pytest.approx(1e-7, rel=1e-9)
    assert rep.method == "bisection"
    assert rep.max_abs_constraint_violation <= 1e-10

    rep2 = w.solve_l1_bisection(w.ProblemSpec(k2, 0.02, w.L1), tol=1e-10)
    assert rep2.allocation.r == pytest.approx([40.0, 10.0], rel=1e-9)


def test_bisection_infeasible():
    _, k2, _ = micro_networks()
    with pytest.raises(w.InfeasibleError):
        w.solve_l1_bisection(w.ProblemSpec(k2, 0.0079, w.L1))


def test_projected_descent_references():
    _, k2, shutoff = micro_networks()
    rep = w.projected_descent(w.ProblemSpec(k2, 0.02, w.L1))
    assert rep.allocation.objective == pytest.approx(8.33333333333e-8, rel=1e-6)

    homog = w.NetworkInstance(w=1.0, sensors=tuple(
        w.SensorSpec(sigma2=0.02, gain=1e-3, xi2=1e-12) for _ in range(4)))
    rep4 = w.projected_descent(w.ProblemSpec(homog, 0.01, w.L2))
    assert rep4.allocation.r == pytest.approx([25.0] * 4, rel=1e-6)

    rep_off = w.projected_descent(w.ProblemSpec(shutoff, 0.02, w.L1))
    assert rep_off.allocation.alpha[1] <= 1e-12
    assert rep_off.allocation.alpha[0] == pytest.approx(1e-7, rel=1e-6)


def test_projected_descent_agrees_on_random_instances():
    for i in range(100):
        prob = paper_range_instance(i, master=8080)
        closed = w.solve_l1(prob)
        pgd = w.projected_descent(prob).allocation
        assert max_alpha_reldiff(closed.alpha, pgd.alpha) <= 1e-6
        assert abs(pgd.objective - closed.objective) <= 1e-8 * closed.objective


def test_capped_simplex_projection_properties():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        ub = rng.uniform(0.5, 5.0, n)
        target = float(rng.uniform(0.05, 0.95)) * float(np.sum(ub))
        y = rng.normal(0.0, 2.0, n)
        weights = rng.uniform(0.1, 10.0, n) if rng.random() < 0.5 else None
        x = w.project_capped_simplex(y, ub, target, weights=weights)
        assert np.all(x >= 0.0) and np.all(x <= ub + 1e-15)
        assert float(np.sum(x)) == pytest.approx(target, rel=1e-12)
        again = w.project_capped_simplex(x, ub, target, weights=weights)
        assert np.allclose(again, x, atol=1e-9 * target)


def test_grid_search_limits_and_agreement():
    k1, k2, _ = micro_networks()
    rep1 = w.grid_search(w.ProblemSpec(k1, 0.02, w.L1))
    assert rep1.allocation.r[0] == pytest.approx(50.0, rel=1e-12)

    closed = w.solve_l1(w.ProblemSpec(k2, 0.02, w.L1))
    rep2 = w.grid_search(w.ProblemSpec(k2, 0.02, w.L1))
    assert np.max(np.abs(np.asarray(rep2.allocation.r) - np.asarray(closed.r))) <= 1e-4

    big = w.NetworkInstance(w=1.0, sensors=(k2.sensors * 2))
    with pytest.raises(ValueError):
        w.grid_search(w.ProblemSpec(big, 0.02, w.L1))


def test_grid_search_three_sensors():
    net = w.NetworkInstance(w=1.0, sensors=(
        w.SensorSpec(sigma2=0.013, gain=2.3e-7, xi2=1e-12),
        w.SensorSpec(sigma2=0.055, gain=8.1e-9, xi2=1e-12),
        w.SensorSpec(sigma2=0.031, gain=4.0e-8, xi2=1e-12)))
    d0 = 2.0 * w.distortion_floor(net)
    closed = w.solve_l1(w.ProblemSpec(net, d0, w.L1))
    rep = w.grid_search(w.ProblemSpec(net, d0, w.L1))
    scale = float(np.max(closed.r))
    assert np.max(np.abs(np.asarray(rep.allocation.r) - np.asarray(closed.r))) <= 1e-4 * scale


def test_solve_uniform_references():
    _, k2, _ = micro_networks()
    rep = w.solve_uniform(w.ProblemSpec(k2, 0.02, w.L1))
    assert rep.allocation.alpha == pytest.approx([5e-8, 5e-8], rel=1e-9)
    assert rep.allocation.objective == pytest.approx(1e-7, rel=1e-9)
    assert rep.allocation.active_count == 2
    assert rep.max_abs_constraint_violation <= 1e-10

    k1, _, _ = micro_networks()
    rep1 = w.solve_uniform(w.ProblemSpec(k1, 0.02, w.L1))
    opt1 = w.solve_l1(w.ProblemSpec(k1, 0.02, w.L1))
    assert rep1.allocation.alpha[0] == pytest.approx(opt1.alpha[0], rel=1e-9)

    with pytest.raises(w.InfeasibleError):
        w.solve_uniform(w.ProblemSpec(k2, 0.008, w.L1))


def test_solve_uniform_distortion_tight_on_random_instances():
    for i in range(60):
        prob = paper_range_instance(i, master=606)
        rep = w.solve_uniform(prob)
        mse = w.analytic_mse(rep.allocation, prob.network)
        assert abs(mse / prob.d0 - 1.0) <= 1e-10


def test_relative_power_savings():
    assert w.relative_power_savings(8.333333333333e-8, 1e-7) == pytest.approx(
        1.0 / 6.0, rel=1e-6)
    assert w.relative_power_savings(3.0, 3.0) == 0.0
    assert w.relative_power_savings(0.0, 5.0) == 1.0
    with pytest.raises(ValueError):
        w.relative_power_savings(1.0, 0.0)
    with pytest.raises(w.ConsistencyError):
        w.relative_power_savings(2.0, 1.0)


def test_average_node_lifetime():
    mean, idle = w.average_node_lifetime([1.0, 2.0], 1.0)
    assert mean == pytest.approx(0.75, rel=1e-12)
    assert idle == 0

    mean, idle = w.average_node_lifetime([3.0, 3.0, 3.0], 6.0)
    assert mean == pytest.approx(2.0, rel=1e-12)

    mean, idle = w.average_node_lifetime([1.0, 0.0], 1.0)
    assert mean == pytest.approx(1.0, rel=1e-12)
    assert idle == 1

    mean, idle = w.average_node_lifetime([0.0, 0.0], 1.0)
    assert mean == math.inf and idle == 2

    with pytest.raises(ValueError):
        w.average_node_lifetime([1.0], 0.0)


def test_bandwidth_requirement():
    assert w.bandwidth_requirement(10, 1e4, w.ANALOG_SSB_FDMA) == 5e4
    assert w.bandwidth_requirement(10, 1e4, w.DIGITAL_TDMA) == 1e5
    assert w.bandwidth_requirement(1, 8e3, w.ANALOG_SSB_FDMA) == 4e3
    assert w.bandwidth_requirement(1, 8e3, w.DIGITAL_TDMA) == 8e3
    # double the analog sensors fit in the digital system's spectrum
    for k in (1, 5, 32):
        assert (w.bandwidth_requirement(2 * k, 1e4, w.ANALOG_SSB_FDMA)
                == w.bandwidth_requirement(k, 1e4, w.DIGITAL_TDMA))
    with pytest.raises(ValueError):
        w.bandwidth_requirement(0, 1e4, w.ANALOG_SSB_FDMA)
    with pytest.raises(ValueError):
        w.bandwidth_requirement(1, 1e4, "fdm")
