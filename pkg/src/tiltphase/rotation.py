"""Quaternion and tilt phase space rotation math.

Conventions
-----------
Quaternions are scalar-first tuples ``(w, x, y, z)`` mapping body frame to
world frame. Every constructor and operation returns a unit quaternion in
canonical form (``w >= 0``), so round trips are sign-free.

A rotation decomposes as ``q = q_z(psi) * q_tilt`` where ``psi`` is the
fused yaw and ``q_tilt`` is a pure tilt rotation, i.e. a rotation about an
axis in the horizontal xy-plane (zero fused yaw). Writing the tilt axis
angle as ``gamma`` (``gamma = 0`` is a pure x-axis tilt) and the tilt angle
as ``alpha``, the tilt phase coordinates are::

    px = alpha * cos(gamma)      (lateral)
    py = alpha * sin(gamma)      (sagittal)
    pz = psi                     (fused yaw)

Tilt rotations form a vector space under componentwise addition of
``(px, py)``, which is what makes scaling and combining tilt feedback terms
well defined.

Singularity: at ``alpha = pi`` the fused yaw is undefined; it is returned
as 0 there, and ``gamma`` is recovered from the quaternion vector part.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

TWO_PI = 2.0 * math.pi

IDENTITY = (1.0, 0.0, 0.0, 0.0)


class Quat(NamedTuple):
    w: float
    x: float
    y: float
    z: float


class TiltPhase2D(NamedTuple):
    px: float
    py: float


class TiltPhase3D(NamedTuple):
    px: float
    py: float
    pz: float


class TiltAngles(NamedTuple):
    psi: float
    gamma: float
    alpha: float


class FusedAngles(NamedTuple):
    psi: float
    theta: float
    phi: float
    hemisphere: int


def wrap_pi(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - angle) % TWO_PI


def quat_normalize(q) -> Quat:
    """Renormalize and put into canonical form (w >= 0)."""
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n <= 1e-300:
        return Quat(1.0, 0.0, 0.0, 0.0)
    if w < 0.0:
        n = -n
    return Quat(w / n, x / n, y / n, z / n)


def quat_mul(a, b) -> Quat:
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return Quat(
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    )


def quat_conj(q) -> Quat:
    w, x, y, z = q
    return Quat(w, -x, -y, -z)


def quat_rotate(q, v):
    """Rotate a 3-vector by q (body -> world for a body-to-world q)."""
    w, x, y, z = q
    vx, vy, vz = v
    # t = 2 * (q_vec x v)
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return (
        vx + w * tx + y * tz - z * ty,
        vy + w * ty + z * tx - x * tz,
        vz + w * tz + x * ty - y * tx,
    )


def axis_rotation(axis: str, angle: float) -> Quat:
    """Unit quaternion for a pure rotation about the x, y or z axis."""
    h = 0.5 * angle
    c = math.cos(h)
    s = math.sin(h)
    if c < 0.0:
        c, s = -c, -s
    if axis == "x":
        return Quat(c, s, 0.0, 0.0)
    if axis == "y":
        return Quat(c, 0.0, s, 0.0)
    if axis == "z":
        return Quat(c, 0.0, 0.0, s)
    raise ValueError(f"unknown axis {axis!r}")


def fused_yaw(q) -> float:
    """Fused yaw of a rotation, in (-pi, pi]; 0 at the alpha = pi singularity."""
    w, _, _, z = q
    if w == 0.0 and z == 0.0:
        return 0.0
    return wrap_pi(2.0 * math.atan2(z, w))


def quat_from_tilt_phase(p) -> Quat:
    """Quaternion with fused yaw pz and tilt phase (px, py).

    Accepts a 2-tuple (pure tilt) or a 3-tuple.
    """
    if len(p) == 2:
        px, py = p
        pz = 0.0
    else:
        px, py, pz = p
    alpha = math.sqrt(px * px + py * py)
    hz = 0.5 * pz
    cz = math.cos(hz)
    sz = math.sin(hz)
    if alpha < 1e-300:
        return quat_normalize((cz, 0.0, 0.0, sz))
    ha = 0.5 * alpha
    ca = math.cos(ha)
    sa = math.sin(ha) / alpha
    tx = sa * px
    ty = sa * py
    # q_z(pz) * q_tilt
    return quat_normalize((cz * ca, cz * tx - sz * ty, cz * ty + sz * tx, sz * ca))


def tilt_phase_from_quat(q) -> TiltPhase3D:
    """3D tilt phase (alpha*cos(gamma), alpha*sin(gamma), psi) of a unit quaternion.

    At alpha = pi (w = z = 0) the yaw is taken as 0 and the tilt axis angle
    comes directly from the vector part, gamma = atan2(y, x).
    """
    w, x, y, z = q
    h = math.sqrt(w * w + z * z)
    s = math.sqrt(x * x + y * y)
    alpha = 2.0 * math.atan2(s, h)
    if h < 1e-12:
        gamma = math.atan2(y, x)
        return TiltPhase3D(alpha * math.cos(gamma), alpha * math.sin(gamma), 0.0)
    psi = wrap_pi(2.0 * math.atan2(z, w))
    if s < 1e-300:
        return TiltPhase3D(0.0, 0.0, psi)
    # De-yawed vector part: q_z(-psi) * q has vector (wx + zy, wy - zx, 0) / h
    gamma = math.atan2(w * y - z * x, w * x + z * y)
    return TiltPhase3D(alpha * math.cos(gamma), alpha * math.sin(gamma), psi)


def remove_fused_yaw(q) -> Quat:
    """Pure tilt rotation with the same 2D tilt phase as q (fused yaw removed)."""
    w, x, y, z = q
    h = math.sqrt(w * w + z * z)
    if h < 1e-12:
        # Already a half-turn tilt; yaw is singular and defined as zero.
        return quat_normalize((0.0, x, y, 0.0))
    return quat_normalize((h, (w * x + z * y) / h, (w * y - z * x) / h, 0.0))


def tilt_angles_from_quat(q) -> TiltAngles:
    """Tilt angles (psi, gamma, alpha) of a unit quaternion."""
    px, py, psi = tilt_phase_from_quat(q)
    alpha = math.sqrt(px * px + py * py)
    gamma = math.atan2(py, px) if alpha > 0.0 else 0.0
    return TiltAngles(psi, gamma, alpha)


def fused_angles_from_quat(q) -> FusedAngles:
    """Fused angles (psi, theta, phi, hemisphere) of a unit quaternion."""
    psi, gamma, alpha = tilt_angles_from_quat(q)
    sa = math.sin(alpha)
    phi = math.asin(max(-1.0, min(1.0, sa * math.cos(gamma))))
    theta = math.asin(max(-1.0, min(1.0, sa * math.sin(gamma))))
    hemi = 1 if math.cos(alpha) >= 0.0 else -1
    return FusedAngles(psi, theta, phi, hemi)


def tilt_vector_add(*tilts: Iterable[float]) -> TiltPhase2D:
    """Commutative addition of 2D tilt phases (componentwise vector sum)."""
    px = 0.0
    py = 0.0
    for t in tilts:
        px += t[0]
        py += t[1]
    return TiltPhase2D(px, py)
