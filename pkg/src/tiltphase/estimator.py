"""Passive nonlinear complementary filter for yaw-free tilt estimation.

Estimates the body orientation from 3-axis gyro and accelerometer data and
outputs only the 2D tilt phase (px, py) of the estimate -- yaw cannot be
estimated drift-free from an IMU alone and plays no role in balance
feedback, so it is removed.

The filter integrates bias-corrected gyro rates through quaternion
kinematics and applies a proportional (and optionally integral, for bias
estimation) correction from the mismatch between the measured and predicted
gravity direction. Accelerometer corrections are gated to a norm trust
window around 1 g, so free-fall or impact spikes do not corrupt the tilt.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence, Tuple

from tiltphase.rotation import TiltPhase2D, quat_normalize

GRAVITY = 9.81


class ImuSample(NamedTuple):
    t: float
    gyro: Tuple[float, float, float]
    accel: Tuple[float, float, float]


class AttitudeEstimator:
    """3D passive complementary filter returning the 2D tilt phase."""

    __slots__ = ("kp", "ki", "bias_limit", "acc_min", "acc_max", "q", "bias")

    def __init__(
        self,
        kp: float = 2.0,
        ki: float = 0.0,
        bias_limit: float = 0.1,
        acc_min_g: float = 0.5,
        acc_max_g: float = 1.5,
        gravity: float = GRAVITY,
    ):
        self.kp = kp
        self.ki = ki
        self.bias_limit = bias_limit
        self.acc_min = acc_min_g * gravity
        self.acc_max = acc_max_g * gravity
        self.q = (1.0, 0.0, 0.0, 0.0)
        self.bias = (0.0, 0.0, 0.0)

    def reset(self, q=(1.0, 0.0, 0.0, 0.0)) -> None:
        self.q = quat_normalize(q)
        self.bias = (0.0, 0.0, 0.0)

    def step(self, gyro: Sequence[float], accel: Sequence[float], dt: float) -> TiltPhase2D:
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        w, x, y, z = self.q
        bx, by, bz = self.bias
        gx = gyro[0] - bx
        gy = gyro[1] - by
        gz = gyro[2] - bz

        ax, ay, az = accel
        an = math.sqrt(ax * ax + ay * ay + az * az)
        if self.acc_min <= an <= self.acc_max:
            # Predicted up direction in body frame: R(q)^T e_z
            vx = 2.0 * (x * z - w * y)
            vy = 2.0 * (y * z + w * x)
            vz = 1.0 - 2.0 * (x * x + y * y)
            # Measured up direction from the accelerometer (specific force)
            mx = ax / an
            my = ay / an
            mz = az / an
            # Correction rotates predicted toward measured: e = v_meas x v_pred
            ex = my * vz - mz * vy
            ey = mz * vx - mx * vz
            ez = mx * vy - my * vx
            kp = self.kp
            gx += kp * ex
            gy += kp * ey
            gz += kp * ez
            if self.ki != 0.0:
                lim = self.bias_limit
                bx = min(lim, max(-lim, bx - self.ki * ex * dt))
                by = min(lim, max(-lim, by - self.ki * ey * dt))
                bz = min(lim, max(-lim, bz - self.ki * ez * dt))
                self.bias = (bx, by, bz)

        # Integrate body rates: q <- q * exp(0.5 * omega * dt)
        th = math.sqrt(gx * gx + gy * gy + gz * gz) * dt
        if th > 1e-12:
            h = 0.5 * th
            s = math.sin(h) / (th / dt)  # sin(h) / |omega|
            dw = math.cos(h)
            dx = s * gx
            dy = s * gy
            dz = s * gz
            nw = w * dw - x * dx - y * dy - z * dz
            nx = w * dx + x * dw + y * dz - z * dy
            ny = w * dy - x * dz + y * dw + z * dx
            nz = w * dz + x * dy - y * dx + z * dw
            n = math.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
            if nw < 0.0:
                n = -n
            self.q = (nw / n, nx / n, ny / n, nz / n)

        return self.tilt_phase()

    def tilt_phase(self) -> TiltPhase2D:
        """2D tilt phase of the current estimate (fused yaw removed by construction)."""
        w, x, y, z = self.q
        s = math.sqrt(x * x + y * y)
        if s < 1e-300:
            return TiltPhase2D(0.0, 0.0)
        h = math.sqrt(w * w + z * z)
        alpha = 2.0 * math.atan2(s, h)
        if h < 1e-12:
            k = alpha / s
            return TiltPhase2D(k * x, k * y)
        # (alpha*cos(gamma), alpha*sin(gamma)) without trig: the direction
        # vector (wx + zy, wy - zx) has norm h*s exactly
        k = alpha / (h * s)
        return TiltPhase2D(k * (w * x + z * y), k * (w * y - z * x))
