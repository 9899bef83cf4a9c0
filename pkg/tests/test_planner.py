"""Planner: convex finite-difference objective, cost evaluation, timed search."""

import numpy as np
import pytest

from cooptraj.planner import CostSpec, evaluate_cost, optimality_residual, plan
from cooptraj.trajectory import BoundaryState, Trajectory, quintic_point_to_point

REST = BoundaryState((0.0, 0.0))


def test_start_at_goal_constant_zero_cost():
    cost = CostSpec(goal=(0.0, 0.0), horizon=1.0, w_jerk=1.0, w_goal=1e6)
    out = plan(REST, cost, 0.01)
    assert np.allclose(out.trajectory.positions, 0.0, atol=1e-12)
    assert out.cost == pytest.approx(0.0, abs=1e-12)


def test_reproduces_min_jerk_quintic():
    cost = CostSpec(goal=(1.0, 0.0), horizon=1.0, w_jerk=1.0, w_goal=1e6)
    out = plan(REST, cost, 0.01)
    assert out.trajectory.n_samples == 101
    ref = quintic_point_to_point(REST, BoundaryState((1.0, 0.0)), 1.0, 0.01)
    dev = np.max(np.linalg.norm(out.trajectory.positions - ref.positions, axis=1))
    assert dev < 0.02


def test_doubling_weights_keeps_argmin():
    c1 = CostSpec(goal=(1.0, 0.5), horizon=1.0, w_jerk=1.0, w_goal=1e5)
    c2 = CostSpec(goal=(1.0, 0.5), horizon=1.0, w_jerk=2.0, w_goal=2e5)
    o1 = plan(REST, c1, 0.02)
    o2 = plan(REST, c2, 0.02)
    assert np.max(np.abs(o1.trajectory.positions - o2.trajectory.positions)) < 1e-9
    assert o2.cost == pytest.approx(2.0 * o1.cost, rel=1e-9)


def test_cost_self_consistency():
    cost = CostSpec(goal=(0.7, -0.4), horizon=1.2, w_jerk=0.5, w_goal=100.0, w_effort=0.1)
    out = plan(BoundaryState((0.1, 0.2), (0.3, 0.0)), cost, 0.02)
    assert evaluate_cost(out.trajectory, cost) == pytest.approx(out.cost, abs=1e-9)


def test_evaluate_cost_terminal_deviation():
    # w_goal=1, terminal 3 m from goal, other weights 0 -> cost 9
    t = Trajectory(0.1, [[0, 0], [0, 0], [3, 0]], np.zeros((3, 2)))
    cost = CostSpec(goal=(0.0, 0.0), horizon=0.2, w_jerk=0.0, w_goal=1.0)
    assert evaluate_cost(t, cost) == pytest.approx(9.0)


def test_evaluate_cost_constant_at_goal_zero():
    t = Trajectory(0.1, np.tile([1.0, 1.0], (6, 1)), np.zeros((6, 2)))
    cost = CostSpec(goal=(1.0, 1.0), horizon=0.5, w_jerk=2.0, w_goal=5.0, w_effort=1.0)
    assert evaluate_cost(t, cost) == 0.0


def test_global_minimality_spot_check():
    cost = CostSpec(goal=(1.0, 0.3), horizon=1.0, w_jerk=1.0, w_goal=1e4, w_effort=0.2)
    out = plan(REST, cost, 0.02)
    base = out.cost
    rng = np.random.default_rng(11)
    for _ in range(200):
        noise = rng.normal(scale=0.03, size=out.trajectory.positions.shape)
        noise[:3] = 0.0
        noise[-3:] = 0.0  # keep the clamped endpoints
        perturbed = Trajectory(
            out.trajectory.dt,
            out.trajectory.positions + noise,
            out.trajectory.velocities,
        )
        assert evaluate_cost(perturbed, cost) >= base - 1e-9


def test_optimality_residual_small():
    cost = CostSpec(goal=(1.0, 0.0), horizon=1.0, w_jerk=1.0, w_goal=1e6)
    assert optimality_residual(REST, cost, 0.01) < 1e-8


def test_nonzero_start_velocity_boundary():
    start = BoundaryState((0.0, 0.0), (1.0, -0.5))
    cost = CostSpec(goal=(1.0, 0.0), horizon=1.0, w_jerk=1.0, w_goal=1e6)
    out = plan(start, cost, 0.01)
    v0 = (out.trajectory.positions[1] - out.trajectory.positions[0]) / 0.01
    assert np.allclose(v0, [1.0, -0.5], atol=1e-6)
    # comes to rest at the end
    assert np.allclose(out.trajectory.positions[-1], out.trajectory.positions[-2])


def test_timed_search_prefers_shorter_horizon():
    slow = CostSpec(goal=(1.0, 0.0), horizon=2.0, w_jerk=1.0, w_goal=1e4, w_time=0.0)
    timed = CostSpec(goal=(1.0, 0.0), horizon=2.0, w_jerk=1.0, w_goal=1e4, w_time=100.0)
    t_slow = plan(REST, slow, 0.02).trajectory
    t_timed = plan(REST, timed, 0.02).trajectory
    assert t_timed.duration < t_slow.duration
    assert t_timed.duration >= 8 * 0.02


def test_invalid_arguments():
    with pytest.raises(ValueError):
        CostSpec(goal=(1, 0), horizon=1.0, w_jerk=0.0, w_goal=0.0, w_effort=0.0, w_time=0.0)
    cost = CostSpec(goal=(1, 0), horizon=0.05, w_jerk=1.0)
    with pytest.raises(ValueError):
        plan(REST, cost, 0.02)  # horizon too short
    goal_only = CostSpec(goal=(1, 0), horizon=1.0, w_jerk=0.0, w_goal=1.0)
    with pytest.raises(ValueError):
        plan(REST, goal_only, 0.02)  # singular without a smoothness term
