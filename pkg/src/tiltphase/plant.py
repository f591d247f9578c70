"""Surrogate tilt-dynamics plant for desk-scale closed-loop testing.

A 2-DOF spherical inverted pendulum expressed directly in tilt phase
coordinates, with gait-phase-driven stepping resets, push injection,
activation-to-acceleration coupling and synthetic IMU output. This is test
plumbing standing in for a robot: only the signs and rough scales of the
couplings matter, not fidelity.

Per axis the undisturbed dynamics about the current pivot offset is
``phi_ddot = C^2 * sin(phi)``, the nonlinear pendulum premise behind the
crossing energy. With the pivot at upright (the default) an exactly upright
resting plant stays put; with the pivot at a crossing phase the trajectory
conserves the pendulum invariant, which the conservation tests exploit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import List, Optional

from tiltphase.config import PlantConfig
from tiltphase.controller import ActivationSet
from tiltphase.estimator import ImuSample
from tiltphase.rotation import quat_conj, quat_from_tilt_phase, quat_mul, quat_normalize, quat_rotate


@dataclass
class Disturbance:
    """External disturbance acting on the plant.

    kind: 'impulse' (one-shot velocity jump at start_time), 'force'
    (constant tilt acceleration over [start_time, start_time + duration]),
    or 'bias' (software orientation offset added to the emitted IMU data
    over the window; the true state is untouched).
    """

    kind: str
    direction: float = 0.0  # rad in the (px, py) plane; 0 = +x (lateral)
    magnitude: float = 0.0
    start_time: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in ("impulse", "force", "bias"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.magnitude < 0.0:
            raise ValueError("disturbance magnitude must be >= 0")


@dataclass
class PlantState:
    px: float = 0.0
    py: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    support: str = "R"
    pivot_x: float = 0.0
    pivot_y: float = 0.0
    odometry: float = 0.0
    fallen: bool = False


class SurrogatePlant:
    def __init__(self, cfg: PlantConfig, seed: int = 0):
        cfg.validate()
        self.cfg = cfg
        self.state = PlantState(
            pivot_x=cfg.pivot_x_right, pivot_y=cfg.pivot_y
        )
        self.rng = random.Random(seed)
        self._mu_prev: Optional[float] = None
        self._q_meas_prev = (1.0, 0.0, 0.0, 0.0)
        self._applied_impulses: set = set()

    # -- disturbance and stepping hooks --------------------------------------

    def apply_push(self, direction: float, impulse: float) -> None:
        """Instantaneous velocity jump of impulse/impulse_scale along direction."""
        if impulse < 0.0:
            raise ValueError("impulse must be >= 0")
        if self.state.fallen:
            return
        dv = impulse / self.cfg.impulse_scale
        self.state.vx += dv * math.cos(direction)
        self.state.vy += dv * math.sin(direction)

    def _foot_strike(self, new_support: str) -> None:
        st = self.state
        st.support = new_support
        st.pivot_x = (
            self.cfg.pivot_x_left if new_support == "L" else self.cfg.pivot_x_right
        )
        # Foot placement pulls the body back over the new pivot, but a single
        # step can only correct so much tilt; the rest of the offset stays
        dx = st.px - st.pivot_x
        dy = st.py - st.pivot_y
        m = math.hypot(dx, dy)
        correction = min((1.0 - self.cfg.strike_reset) * m, self.cfg.strike_capture)
        if m > 0.0:
            scale = (m - correction) / m
            st.px = st.pivot_x + scale * dx
            st.py = st.pivot_y + scale * dy
        st.vx *= self.cfg.strike_restitution
        st.vy *= self.cfg.strike_restitution

    def _handle_gait_events(self, mu: float) -> None:
        prev = self._mu_prev
        self._mu_prev = mu
        if prev is None:
            return
        # mu crossing 0 upward -> right support; wrap past pi -> left support
        if prev < 0.0 <= mu and mu - prev < math.pi:
            self._foot_strike("R")
        elif mu < prev and prev - mu > math.pi:  # wrapped from +pi to -pi side
            self._foot_strike("L")

    # -- dynamics -------------------------------------------------------------

    def _acceleration(self, px, py, vx, vy, act: ActivationSet, f_ext):
        cfg = self.cfg
        c = cfg.pendulum_c * act.max_hip_height  # lower hips -> slower dynamics
        c2 = c * c
        # The equilibrium of sin(p - eq) is unstable, so shifting it toward
        # positive p accelerates the body the other way: positive activation
        # therefore raises eq to oppose positive deviation.
        eq_x = (
            self.state.pivot_x
            + cfg.couple_cft * act.continuous_foot_tilt[0]
            + cfg.couple_hip * act.hip_shift[0]
        )
        eq_y = (
            self.state.pivot_y
            + cfg.couple_cft * act.continuous_foot_tilt[1]
            + cfg.couple_hip * act.hip_shift[1]
            + cfg.couple_lean * act.lean_tilt[1]
        )
        ax = (
            c2 * math.sin(px - eq_x)
            - cfg.couple_foot * act.support_foot_tilt[0]
            - cfg.couple_arm * act.arm_tilt[0]
            - cfg.couple_plane * act.swing_ground_plane[0]
            - cfg.couple_swing_out * act.swing_out_tilt[0]
            + f_ext[0]
        )
        ay = (
            c2 * math.sin(py - eq_y)
            - cfg.couple_foot * act.support_foot_tilt[1]
            - cfg.couple_arm * act.arm_tilt[1]
            - cfg.couple_plane * act.swing_ground_plane[1]
            - cfg.couple_swing_out * act.swing_out_tilt[1]
            + f_ext[1]
        )
        return ax, ay

    def step(
        self,
        act: ActivationSet,
        mu: float,
        disturbances: List[Disturbance],
        t: float,
        dt: float,
    ) -> ImuSample:
        """Advance the plant by dt (internal RK4 substeps) and emit an IMU sample."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        st = self.state
        t_end = t + dt
        if not st.fallen:
            self._handle_gait_events(mu)

            # One-shot impulses whose start time falls inside this step
            for i, d in enumerate(disturbances):
                if d.kind == "impulse" and i not in self._applied_impulses:
                    if t <= d.start_time < t_end:
                        self._applied_impulses.add(i)
                        self.apply_push(d.direction, d.magnitude)

            fx = 0.0
            fy = 0.0
            for d in disturbances:
                if d.kind == "force" and d.start_time <= t < d.start_time + d.duration:
                    fx += d.magnitude * math.cos(d.direction)
                    fy += d.magnitude * math.sin(d.direction)

            n_sub = max(1, math.ceil(dt / self.cfg.substep_dt))
            h = dt / n_sub
            px, py, vx, vy = st.px, st.py, st.vx, st.vy
            for _ in range(n_sub):
                px, py, vx, vy = self._rk4(px, py, vx, vy, act, (fx, fy), h)
            st.px, st.py, st.vx, st.vy = px, py, vx, vy
            st.odometry += abs(act.gait_frequency) * dt

            if math.hypot(st.px, st.py) > self.cfg.fall_angle:
                st.fallen = True
                st.vx = 0.0
                st.vy = 0.0

        return self._emit_imu(disturbances, t_end, dt)

    def _rk4(self, px, py, vx, vy, act, f_ext, h):
        def deriv(px_, py_, vx_, vy_):
            ax, ay = self._acceleration(px_, py_, vx_, vy_, act, f_ext)
            return vx_, vy_, ax, ay

        k1 = deriv(px, py, vx, vy)
        k2 = deriv(px + 0.5 * h * k1[0], py + 0.5 * h * k1[1],
                   vx + 0.5 * h * k1[2], vy + 0.5 * h * k1[3])
        k3 = deriv(px + 0.5 * h * k2[0], py + 0.5 * h * k2[1],
                   vx + 0.5 * h * k2[2], vy + 0.5 * h * k2[3])
        k4 = deriv(px + h * k3[0], py + h * k3[1],
                   vx + h * k3[2], vy + h * k3[3])
        return (
            px + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            py + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
            vx + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
            vy + h / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
        )

    def _emit_imu(self, disturbances, t_now, dt) -> ImuSample:
        st = self.state
        cfg = self.cfg
        bias_x = 0.0
        bias_y = 0.0
        for d in disturbances:
            if d.kind == "bias" and d.start_time <= t_now < d.start_time + d.duration:
                bias_x += d.magnitude * math.cos(d.direction)
                bias_y += d.magnitude * math.sin(d.direction)

        q_meas = quat_from_tilt_phase((st.px + bias_x, st.py + bias_y))
        # Exact body rates of the measured orientation over this step
        dq = quat_normalize(quat_mul(quat_conj(self._q_meas_prev), q_meas))
        w, x, y, z = dq
        s = math.sqrt(x * x + y * y + z * z)
        if s < 1e-15:
            gyro = [0.0, 0.0, 0.0]
        else:
            k = 2.0 * math.atan2(s, w) / (s * dt)
            gyro = [k * x, k * y, k * z]
        self._q_meas_prev = q_meas

        accel = list(quat_rotate(quat_conj(q_meas), (0.0, 0.0, cfg.gravity)))
        if cfg.noise_gyro > 0.0:
            for i in range(3):
                gyro[i] += self.rng.gauss(0.0, cfg.noise_gyro)
        if cfg.noise_accel > 0.0:
            for i in range(3):
                accel[i] += self.rng.gauss(0.0, cfg.noise_accel)
        return ImuSample(t_now, tuple(gyro), tuple(accel))
