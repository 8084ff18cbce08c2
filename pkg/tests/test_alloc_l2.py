import numpy as np
import pytest

import wsnpl as w
from conftest import micro_networks, paper_range_instance
from wsnpl.objectives import r_space_objective


def homogeneous_k4():
    return w.NetworkInstance(w=1.0, sensors=tuple(
        w.SensorSpec(sigma2=0.02, gain=1e-3, xi2=1e-12) for _ in range(4)))


def hard_k2():
    return w.NetworkInstance(w=1.0, sensors=(
        w.SensorSpec(sigma2=0.01, gain=1e-3, xi2=1e-12),
        w.SensorSpec(sigma2=0.04, gain=1e-9, xi2=1e-12)))


def test_options_validation():
    with pytest.raises(ValueError):
        w.L2SolverOptions(kkt_tolerance=0.0)
    with pytest.raises(ValueError):
        w.L2SolverOptions(barrier_decrease=1.0)
    with pytest.raises(ValueError):
        w.L2SolverOptions(initial_margin=0.0)
    with pytest.raises(ValueError):
        w.L2SolverOptions(max_iterations=0)


def test_homogeneous_equal_split():
    net = homogeneous_k4()
    prob = w.ProblemSpec(net, 0.01, w.L2)
    alloc = w.solve_l2(prob)
    assert alloc.r == pytest.approx([25.0] * 4, abs=1e-6)
    assert w.kkt_residual_l2(alloc.r, prob) <= 1e-9


def test_single_sensor_matches_total_power_solver():
    k1, _, _ = micro_networks()
    a_l2 = w.solve_l2(w.ProblemSpec(k1, 0.02, w.L2))
    a_l1 = w.solve_l1(w.ProblemSpec(k1, 0.02, w.L1))
    assert a_l2.r[0] == pytest.approx(a_l1.r[0], rel=1e-9)
    assert a_l2.alpha[0] == pytest.approx(a_l1.alpha[0], rel=1e-9)


def test_hard_two_sensor_matches_grid_oracle():
    prob = w.ProblemSpec(hard_k2(), 0.02, w.L2)
    alloc = w.solve_l2(prob)
    grid = w.grid_search(prob).allocation
    assert np.max(np.abs(np.asarray(alloc.r) - np.asarray(grid.r))) <= 1e-4
    assert w.kkt_residual_l2(alloc.r, prob) <= 1e-9


def test_kkt_residual_examples():
    net = homogeneous_k4()
    prob = w.ProblemSpec(net, 0.01, w.L2)
    optimum = np.full(4, 25.0)
    assert w.kkt_residual_l2(optimum, prob) <= 1e-12

    perturbed = optimum + np.array([1e-3, -1e-3, 0.0, 0.0])
    assert w.kkt_residual_l2(perturbed, prob) > 1e-7

    with pytest.raises(ValueError):
        w.kkt_residual_l2(np.array([0.0, 25.0, 25.0, 50.0]), prob)
    with pytest.raises(ValueError):
        w.kkt_residual_l2(np.array([25.0, 25.0, 25.0, 50.0]), prob)


def test_residual_below_tolerance_on_random_solves():
    for i in range(80):
        prob = paper_range_instance(i, norm=w.L2, master=31337, k_max=12)
        alloc = w.solve_l2(prob)
        assert w.kkt_residual_l2(alloc.r, prob) <= 1e-9
        assert abs(float(np.sum(alloc.r)) * prob.d0 - 1.0) <= 1e-9


def test_interior_point_never_beats_itself_across_norms():
    # the squared-norm optimizer is optimal for its own objective, and the
    # total-power solution is optimal for total power
    for i in range(40):
        prob2 = paper_range_instance(i, norm=w.L2, master=2718, k_max=10)
        prob1 = w.ProblemSpec(prob2.network, prob2.d0, w.L1)
        a2 = w.solve_l2(prob2)
        a1 = w.solve_l1(prob1)
        wsq = prob2.network.w ** 2
        l2_of_l1 = float(np.sum((wsq * np.asarray(a1.alpha)) ** 2))
        l1_of_l2 = float(np.sum(wsq * np.asarray(a2.alpha)))
        assert a2.objective <= l2_of_l1 * (1.0 + 1e-9)
        assert l1_of_l2 >= a1.objective * (1.0 - 1e-9)


def test_squared_norm_flattens_the_power_profile():
    # monitored property: the squared norm penalizes large entries, so its
    # peak node power never exceeds the total-power solution's peak
    seen_difference = 0
    for i in range(40):
        prob2 = paper_range_instance(i, norm=w.L2, master=1618, k_max=10)
        a2 = w.solve_l2(prob2)
        a1 = w.solve_l1(w.ProblemSpec(prob2.network, prob2.d0, w.L1))
        peak2 = float(np.max(a2.node_powers))
        peak1 = float(np.max(a1.node_powers))
        assert peak2 <= peak1 * (1.0 + 1e-9), (
            f"instance {i}: squared-norm peak {peak2} above total-power "
            f"peak {peak1}")
        if not np.allclose(a2.alpha, a1.alpha, rtol=1e-6):
            seen_difference += 1
    assert seen_difference > 0


def test_hessian_is_positive_on_the_box():
    prob = paper_range_instance(3, norm=w.L2, master=5)
    obj = r_space_objective(prob.network, w.L2)
    rng = np.random.default_rng(8)
    ub = 1.0 / prob.network.sigma2s()
    for _ in range(20):
        r = rng.uniform(0.0, 0.999, prob.network.k) * ub
        assert np.all(obj.hess_diag(r) > 0.0)


def test_deterministic_bit_identical():
    prob = paper_range_instance(11, norm=w.L2, master=404)
    a = w.solve_l2(prob)
    b = w.solve_l2(prob)
    assert np.array_equal(np.asarray(a.r), np.asarray(b.r))
    assert np.array_equal(np.asarray(a.alpha), np.asarray(b.alpha))


def test_errors():
    net = homogeneous_k4()
    with pytest.raises(ValueError):
        w.solve_l2(w.ProblemSpec(net, 0.01, w.L1))
    with pytest.raises(w.InfeasibleError):
        w.solve_l2(w.ProblemSpec(net, w.distortion_floor(net), w.L2))
