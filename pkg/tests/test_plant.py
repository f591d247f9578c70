import math

import pytest

from tiltphase.config import ControllerConfig, PlantConfig
from tiltphase.controller import ActivationSet, pendulum_invariant
from tiltphase.estimator import AttitudeEstimator
from tiltphase.plant import Disturbance, PlantState, SurrogatePlant

IDLE = ActivationSet()
DT = 0.01


def run_idle(plant, duration, mu=0.0, disturbances=()):
    t = 0.0
    samples = []
    n = int(round(duration / DT))
    for k in range(n):
        samples.append(plant.step(IDLE, mu, list(disturbances), t, DT))
        t += DT
    return samples


class TestDisturbanceValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Disturbance("earthquake")

    def test_negative_magnitude(self):
        with pytest.raises(ValueError):
            Disturbance("impulse", magnitude=-1.0)


class TestDynamics:
    def test_upright_rest_stays_put(self):
        plant = SurrogatePlant(PlantConfig())
        run_idle(plant, 2.0)
        assert plant.state.px == 0.0
        assert plant.state.py == 0.0
        assert not plant.state.fallen

    def test_pendulum_invariant_conserved(self):
        # No stepping (constant mu), no activation: the free pendulum
        # invariant must be conserved by the integrator.
        cfg = PlantConfig()
        plant = SurrogatePlant(cfg)
        plant.state.px = 0.2
        plant.state.vx = 0.1
        g0 = pendulum_invariant(0.2, 0.1, cfg.pendulum_c)
        for k in range(500):
            plant.step(IDLE, 0.5, [], k * DT, DT)
            st = plant.state
            if st.fallen:
                break
            g = pendulum_invariant(st.px, st.vx, cfg.pendulum_c)
            assert g == pytest.approx(g0, rel=1e-3)

    def test_impulse_scales_velocity(self):
        cfg = PlantConfig(impulse_scale=2.0)
        plant = SurrogatePlant(cfg)
        plant.apply_push(0.0, 1.0)
        assert plant.state.vx == pytest.approx(0.5)
        assert plant.state.vy == pytest.approx(0.0, abs=1e-15)
        plant.apply_push(math.pi / 2, 1.0)
        assert plant.state.vy == pytest.approx(0.5)

    def test_impulse_disturbance_fires_once(self):
        plant = SurrogatePlant(PlantConfig())
        d = Disturbance("impulse", direction=0.0, magnitude=0.4, start_time=0.005)
        plant.step(IDLE, 0.5, [d], 0.0, DT)
        assert plant.state.vx == pytest.approx(0.4, abs=0.01)
        # Stepping over the same time window again must not re-apply it
        plant.step(IDLE, 0.5, [d], 0.0, DT)
        assert plant.state.vx == pytest.approx(0.4, abs=0.02)

    def test_fallen_is_absorbing(self):
        plant = SurrogatePlant(PlantConfig())
        plant.state.px = 2.0
        plant.state.vx = 3.0
        run_idle(plant, 0.5, mu=0.5)
        assert plant.state.fallen
        px = plant.state.px
        run_idle(plant, 0.5, mu=0.5)
        assert plant.state.fallen
        assert plant.state.px == px
        assert plant.state.vx == 0.0

    def test_push_ignored_after_fall(self):
        plant = SurrogatePlant(PlantConfig())
        plant.state.fallen = True
        plant.apply_push(0.0, 5.0)
        assert plant.state.vx == 0.0


class TestStepping:
    def test_strike_flips_support(self):
        plant = SurrogatePlant(PlantConfig())
        plant.step(IDLE, -0.1, [], 0.0, DT)
        assert plant.state.support == "R"
        plant.step(IDLE, 0.1, [], DT, DT)  # mu crosses 0 upward
        assert plant.state.support == "R"
        plant.step(IDLE, -3.1, [], 2 * DT, DT)  # wrap past +pi
        assert plant.state.support == "L"

    def test_strike_contracts_offset_and_velocity(self):
        cfg = PlantConfig()
        plant = SurrogatePlant(cfg)
        plant.state.px = 0.1
        plant.state.vx = 1.0
        plant._mu_prev = -0.05
        plant._foot_strike("R")
        expect_corr = min((1.0 - cfg.strike_reset) * 0.1, cfg.strike_capture)
        assert plant.state.px == pytest.approx(0.1 - expect_corr)
        assert plant.state.vx == pytest.approx(cfg.strike_restitution * 1.0)

    def test_strike_correction_is_capped(self):
        cfg = PlantConfig()
        plant = SurrogatePlant(cfg)
        plant.state.px = 1.0
        plant._foot_strike("L")
        assert plant.state.px == pytest.approx(1.0 - cfg.strike_capture)


class TestImuOutput:
    def test_estimator_tracks_plant_tilt(self):
        # Closing the estimator over the plant's synthetic IMU must
        # reproduce the true tilt closely after convergence.
        cfg = PlantConfig()
        plant = SurrogatePlant(cfg)
        plant.state.px = 0.15
        plant.state.vx = -0.2
        est = AttitudeEstimator(kp=5.0)
        errs = []
        for k in range(200):
            s = plant.step(IDLE, 0.5, [], k * DT, DT)
            p = est.step(s.gyro, s.accel, DT)
            if plant.state.fallen:
                break
            if 50 <= k <= 150:  # converged, before the terminal fast fall
                errs.append(math.hypot(p[0] - plant.state.px, p[1] - plant.state.py))
        assert errs and max(errs) < 0.01

    def test_bias_disturbance_offsets_imu_not_state(self):
        plant = SurrogatePlant(PlantConfig())
        d = Disturbance("bias", direction=0.0, magnitude=0.1, start_time=0.0, duration=10.0)
        est = AttitudeEstimator(kp=5.0)
        p = (0.0, 0.0)
        for k in range(400):
            s = plant.step(IDLE, 0.0, [d], k * DT, DT)
            p = est.step(s.gyro, s.accel, DT)
        assert plant.state.px == 0.0
        assert p[0] == pytest.approx(0.1, abs=0.01)

    def test_noise_is_seed_deterministic(self):
        cfg = PlantConfig(noise_gyro=0.02, noise_accel=0.1)
        a = SurrogatePlant(cfg, seed=9)
        b = SurrogatePlant(cfg, seed=9)
        for k in range(50):
            sa = a.step(IDLE, 0.0, [], k * DT, DT)
            sb = b.step(IDLE, 0.0, [], k * DT, DT)
            assert sa == sb

    def test_rejects_nonpositive_dt(self):
        plant = SurrogatePlant(PlantConfig())
        with pytest.raises(ValueError):
            plant.step(IDLE, 0.0, [], 0.0, 0.0)
