"""Human model: desire generation, desire estimation, deformation desires."""

import numpy as np
import pytest

from cooptraj.human import (
    DesireEstimator,
    HumanProfile,
    Observation,
    deformation_desire,
    estimate_desire,
    human_desire,
)
from cooptraj.trajectory import (
    BoundaryState,
    DisplacementDesire,
    QuinticSegment,
    constant_trajectory,
    quintic_point_to_point,
)

REST = BoundaryState((0.0, 0.0))


def window_from_quintic(goal, duration, n=30, span=0.8, noise=0.0, rng=None, offset=(0.0, 0.0)):
    seg = QuinticSegment(
        BoundaryState(offset), BoundaryState((goal[0] + offset[0], goal[1] + offset[1])), duration
    )
    times = np.arange(n) * (span * duration / (n - 1))
    pos = seg.position(times)
    vel = seg.velocity(times)
    if noise > 0:
        pos = pos + rng.normal(scale=noise, size=pos.shape)
    return [Observation(float(times[i]), tuple(pos[i]), tuple(vel[i])) for i in range(n)]


class TestHumanDesire:
    def test_goal_at_start_constant(self):
        p = HumanProfile(desired_goal=(0.0, 0.0), desired_duration=1.0)
        t = human_desire(p, REST, 0.02)
        assert np.allclose(t.positions, 0.0)
        assert np.allclose(t.velocities, 0.0)

    def test_delegates_to_quintic(self):
        p = HumanProfile(desired_goal=(1.0, 0.0), desired_duration=1.0)
        t = human_desire(p, REST, 0.01)
        ref = quintic_point_to_point(REST, BoundaryState((1.0, 0.0)), 1.0, 0.01)
        assert np.allclose(t.positions, ref.positions, atol=1e-12)
        assert np.allclose(t.velocities, ref.velocities, atol=1e-12)

    def test_duration_is_time_normalization(self):
        p1 = HumanProfile(desired_goal=(1.0, 2.0), desired_duration=1.0)
        p2 = HumanProfile(desired_goal=(1.0, 2.0), desired_duration=2.0)
        t1 = human_desire(p1, REST, 0.01)
        t2 = human_desire(p2, REST, 0.02)
        # equal sample counts; sample k of t2 is at the same normalized time
        assert t1.n_samples == t2.n_samples
        assert np.allclose(t1.positions, t2.positions, atol=1e-12)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            HumanProfile(desired_goal=(0, 0), desired_duration=1.0, compliance=1.5)
        with pytest.raises(ValueError):
            HumanProfile(desired_goal=(0, 0), desired_duration=-1.0)


class TestEstimator:
    def test_noiseless_recovery(self):
        w = window_from_quintic((2.0, 1.0), 2.0)
        est = estimate_desire(w, 0.02, (0.5, 4.0))
        assert np.linalg.norm(np.array(est.goal_estimate) - [2.0, 1.0]) < 1e-6
        assert abs(est.duration_estimate - 2.0) < 1e-5
        assert not est.degenerate

    def test_noiseless_recovery_100_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            goal = rng.uniform(-2, 2, size=2)
            duration = float(rng.uniform(0.8, 3.0))
            w = window_from_quintic(goal, duration)
            est = estimate_desire(w, 0.02, (0.3, 4.0))
            assert np.linalg.norm(np.array(est.goal_estimate) - goal) < 1e-6

    def test_noisy_recovery_rate(self):
        hits = 0
        for trial in range(500):
            rng = np.random.default_rng(1000 + trial)
            goal = rng.uniform(-2, 2, size=2)
            duration = float(rng.uniform(1.0, 2.5))
            w = window_from_quintic(goal, duration, n=25, noise=0.01, rng=rng)
            est = estimate_desire(w, 0.02, (0.3, 4.0))
            hits += np.linalg.norm(np.array(est.goal_estimate) - goal) < 0.05
        assert hits >= 0.95 * 500

    def test_degenerate_window(self):
        w = [Observation(i * 0.02, (1.0, 2.0)) for i in range(10)]
        est = estimate_desire(w, 0.02, (0.5, 2.0))
        assert est.degenerate
        assert est.goal_estimate == (1.0, 2.0)
        assert np.allclose(est.trajectory.positions, [1.0, 2.0])

    def test_translation_equivariance(self):
        w0 = window_from_quintic((1.5, -0.5), 1.7)
        w1 = window_from_quintic((1.5, -0.5), 1.7, offset=(3.0, -1.0))
        e0 = estimate_desire(w0, 0.02, (0.5, 4.0))
        e1 = estimate_desire(w1, 0.02, (0.5, 4.0))
        shift = np.array(e1.goal_estimate) - np.array(e0.goal_estimate)
        assert np.allclose(shift, [3.0, -1.0], atol=1e-9)

    def test_estimate_trajectory_from_family(self):
        w = window_from_quintic((1.0, 0.5), 1.5)
        est = estimate_desire(w, 0.05, (0.5, 4.0))
        # the returned trajectory is the quintic to the estimated goal
        assert np.allclose(est.trajectory.positions[0], w[0].position, atol=1e-9)
        assert np.allclose(est.trajectory.positions[-1], est.goal_estimate, atol=1e-9)

    def test_window_validation(self):
        w = window_from_quintic((1.0, 0.0), 1.0)[:5]
        with pytest.raises(ValueError):
            estimate_desire(w, 0.02, (0.5, 2.0))
        bad_times = window_from_quintic((1.0, 0.0), 1.0)
        bad_times[3] = Observation(bad_times[2].time, bad_times[3].position)
        with pytest.raises(ValueError):
            estimate_desire(bad_times, 0.02, (0.5, 2.0))

    def test_online_wrapper(self):
        w = window_from_quintic((2.0, 1.0), 2.0, n=40)
        est = DesireEstimator(0.02, (0.5, 4.0), window_size=30)
        assert not est.ready
        for obs in w:
            est.push(obs)
        assert est.ready
        assert len(est._window) == 30


class TestDeformation:
    def test_zero_force_zero_displacement(self):
        ref = constant_trajectory((0, 0), 21, 0.05)
        d = deformation_desire(ref, (0.0, 0.0), 10)
        assert np.allclose(d.positions, 0.0)

    def test_peak_and_pinned_endpoints(self):
        ref = constant_trajectory((0, 0), 21, 0.05)
        d = deformation_desire(ref, (0.0, 1.0), 10)
        assert isinstance(d, DisplacementDesire)
        assert np.array_equal(d.positions[0], [0.0, 0.0])
        assert np.array_equal(d.positions[-1], [0.0, 0.0])
        assert np.allclose(d.positions[10], [0.0, 1.0])
        assert np.max(np.linalg.norm(d.positions, axis=1)) == pytest.approx(1.0)

    def test_superposition(self):
        ref = constant_trajectory((0, 0), 31, 0.05)
        d1 = deformation_desire(ref, (0.4, 1.0), 12)
        d2 = deformation_desire(ref, (0.8, 2.0), 12)
        assert np.allclose(d2.positions, 2.0 * d1.positions, atol=1e-12)
        assert np.allclose(d2.velocities, 2.0 * d1.velocities, atol=1e-12)

    def test_off_center_peak(self):
        ref = constant_trajectory((0, 0), 21, 0.05)
        d = deformation_desire(ref, (1.0, 0.0), 5)
        assert np.allclose(d.positions[5], [1.0, 0.0])
        assert np.array_equal(d.positions[0], [0.0, 0.0])

    def test_boundary_index_rejected(self):
        ref = constant_trajectory((0, 0), 21, 0.05)
        with pytest.raises(ValueError):
            deformation_desire(ref, (0, 1), 0)
        with pytest.raises(ValueError):
            deformation_desire(ref, (0, 1), 20)
