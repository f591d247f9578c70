"""Gait phase, expected tilt phase waveform and deviation tilt.

The deviation tilt is the error signal behind nearly all corrective
actions: the 2D tilt phase of the inverse of the unique tilt rotation
relative to the nominal ground plane N that takes the body from its
current orientation to the expected one,

    q_d = q_y(p_yN) * q_P(P_B)^* * q_z(psi_E) * q_P(P_E) * q_y(-p_yN)
    P_d = P_q(q_d^*)

with psi_E chosen so that the fused yaw of q_d is zero. Since q_d is
linear in (cos(psi_E/2), sin(psi_E/2)), the zero-yaw constraint has the
closed-form solution psi_E = 2*atan2(-z1, z2), where z1 and z2 are the
quaternion z-components of the products with q_z(psi_E) replaced by the
identity and by the unit z quaternion respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from tiltphase.rotation import TiltPhase2D, wrap_pi

TWO_PI = 2.0 * math.pi


def gait_phase_step(mu: float, f_g: float, dt: float) -> float:
    """Advance the gait phase by f_g * dt and wrap into (-pi, pi]."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if f_g <= 0.0:
        raise ValueError("gait frequency must be positive")
    return wrap_pi(mu + f_g * dt)


@dataclass(frozen=True)
class ExpectedWaveform:
    """Per-axis sinusoid-with-offset model of the nominal tilt phase trajectory."""

    amp_x: float = 0.0
    amp_y: float = 0.0
    phase_x: float = 0.0
    phase_y: float = 0.0
    offset_x: float = 0.0
    offset_y: float = 0.0

    def __post_init__(self):
        if self.amp_x < 0.0 or self.amp_y < 0.0:
            raise ValueError("waveform amplitudes must be non-negative")

    def evaluate(self, mu: float) -> TiltPhase2D:
        return TiltPhase2D(
            self.amp_x * math.sin(mu + self.phase_x) + self.offset_x,
            self.amp_y * math.sin(mu + self.phase_y) + self.offset_y,
        )


def expected_phase(mu: float, waveform: ExpectedWaveform) -> TiltPhase2D:
    return waveform.evaluate(mu)


class DeviationResult(NamedTuple):
    px: float
    py: float
    psi_e: float
    residual: float
    converged: bool


def deviation_tilt(p_b, p_e, p_yn: float) -> DeviationResult:
    """Deviation tilt P_d of the body tilt P_B from the expected tilt P_E.

    Degenerate configurations where the zero-yaw constraint does not pin
    down psi_E (both sensitivity coefficients vanish, e.g. half-turn tilts)
    fall back to psi_E = 0 and report converged=False instead of aborting.
    """
    # With a zero expected tilt and a level nominal ground plane the whole
    # composition collapses: q_d = q_P(P_B)^* already has zero fused yaw,
    # so the deviation is exactly the body tilt.
    if p_yn == 0.0 and p_e[0] == 0.0 and p_e[1] == 0.0:
        return DeviationResult(p_b[0], p_b[1], 0.0, 0.0, True)

    # Inline quaternion arithmetic: this runs every control cycle.
    hy = 0.5 * p_yn
    cyn = math.cos(hy)
    syn = math.sin(hy)

    bx, by = p_b[0], p_b[1]
    alpha_b = math.sqrt(bx * bx + by * by)
    if alpha_b < 1e-300:
        qb = (1.0, 0.0, 0.0, 0.0)
    else:
        sb = math.sin(0.5 * alpha_b) / alpha_b
        qb = (math.cos(0.5 * alpha_b), sb * bx, sb * by, 0.0)
    ex, ey = p_e[0], p_e[1]
    alpha_e = math.sqrt(ex * ex + ey * ey)
    if alpha_e < 1e-300:
        qe = (1.0, 0.0, 0.0, 0.0)
    else:
        se = math.sin(0.5 * alpha_e) / alpha_e
        qe = (math.cos(0.5 * alpha_e), se * ex, se * ey, 0.0)

    # A = q_y(p_yN) * q_P(P_B)^*: multiply (cyn, 0, syn, 0) by the conjugate
    bw, bxq, byq, bzq = qb
    a0 = cyn * bw + syn * byq
    a1 = -cyn * bxq - syn * bzq
    a2 = -cyn * byq + syn * bw
    a3 = -cyn * bzq + syn * bxq
    # B = q_P(P_E) * q_y(-p_yN): multiply qe by (cyn, 0, -syn, 0)
    ew, exq, eyq, ezq = qe
    b0 = ew * cyn + eyq * syn
    b1 = exq * cyn + ezq * syn
    b2 = -ew * syn + eyq * cyn
    b3 = -exq * syn + ezq * cyn

    # z components of A*B and (A*k)*B where k = (0, 0, 0, 1)
    z1 = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    k0, k1, k2, k3 = -a3, a2, -a1, a0
    z2 = k0 * b3 + k1 * b2 - k2 * b1 + k3 * b0
    converged = True
    if z1 * z1 + z2 * z2 < 1e-28:
        psi_e = 0.0
        converged = False
    else:
        psi_e = wrap_pi(2.0 * math.atan2(-z1, z2))

    hz = 0.5 * psi_e
    cz = math.cos(hz)
    sz = math.sin(hz)
    # q_d = A * q_z(psi_E) * B, with A * q_z = cz*A + sz*(A*k)
    c0 = cz * a0 + sz * k0
    c1 = cz * a1 + sz * k1
    c2 = cz * a2 + sz * k2
    c3 = cz * a3 + sz * k3
    qd = (
        c0 * b0 - c1 * b1 - c2 * b2 - c3 * b3,
        c0 * b1 + c1 * b0 + c2 * b3 - c3 * b2,
        c0 * b2 - c1 * b3 + c2 * b0 + c3 * b1,
        c0 * b3 + c1 * b2 - c2 * b1 + c3 * b0,
    )
    if qd[0] == 0.0 and qd[3] == 0.0:
        residual = 0.0
    else:
        residual = abs(wrap_pi(2.0 * math.atan2(qd[3], qd[0])))

    # P_d = P_q(q_d^*): 2D tilt phase of the conjugate
    w, x, y, z = qd[0], -qd[1], -qd[2], -qd[3]
    s = math.sqrt(x * x + y * y)
    if s < 1e-300:
        return DeviationResult(0.0, 0.0, psi_e, residual, converged)
    h = math.sqrt(w * w + z * z)
    alpha = 2.0 * math.atan2(s, h)
    if h < 1e-12:
        k = alpha / s
        return DeviationResult(k * x, k * y, psi_e, residual, converged)
    k = alpha / (h * s)
    return DeviationResult(
        k * (w * x + z * y), k * (w * y - z * x), psi_e, residual, converged
    )
