"""Shared vocabulary: states, parameters, environment, zones, attitude kinematics.

Conventions used throughout the package:

* World frame: right-handed, z positive upward, water surface at z = 0.
* Body frame: x forward, y left, z up along the thrust axis.
* Attitude: Euler angles (roll phi, pitch theta, yaw psi), Z-Y-X convention,
  so the body-to-world matrix is Rz(psi) @ Ry(theta) @ Rx(phi).
* Angles in radians, lengths in meters, everything SI unless a function says
  otherwise (propeller immersion depths are in millimeters, rotor speeds in
  rpm; see propeller.py).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .propeller import RotorCommand

Vec3 = tuple[float, float, float]
Mat3 = tuple[Vec3, Vec3, Vec3]

# Pitch values within 1e-3 rad of +-pi/2 are rejected: the Euler-rate
# kinematics divide by cos(theta) and the simulation treats near-vertical
# pitch as divergence worth surfacing, not clamping.
PITCH_SINGULARITY_MARGIN = 1e-3
MAX_PITCH = math.pi / 2 - PITCH_SINGULARITY_MARGIN


class SingularAttitudeError(ValueError):
    """Pitch magnitude at or beyond the gimbal-lock guard."""


class Zone(Enum):
    """Operating zone of the vehicle's center of gravity."""

    AIR = "Air"
    HYBRID = "Hybrid"
    WATER = "Water"


@dataclass(frozen=True)
class VehicleState:
    """Full rigid-body state.

    position: world-frame (x, y, z), m.  z > 0 above the water surface.
    body_velocity: (u, v, w), m/s, body frame.
    attitude: (phi, theta, psi), rad.
    body_rates: (P, Q, R), rad/s, body frame.
    """

    position: Vec3 = (0.0, 0.0, 0.0)
    body_velocity: Vec3 = (0.0, 0.0, 0.0)
    attitude: Vec3 = (0.0, 0.0, 0.0)
    body_rates: Vec3 = (0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, ...]:
        """Flatten to (x, y, z, u, v, w, phi, theta, psi, P, Q, R)."""
        return self.position + self.body_velocity + self.attitude + self.body_rates

    @staticmethod
    def from_tuple(y: tuple[float, ...]) -> "VehicleState":
        return VehicleState(
            position=(y[0], y[1], y[2]),
            body_velocity=(y[3], y[4], y[5]),
            attitude=(y[6], y[7], y[8]),
            body_rates=(y[9], y[10], y[11]),
        )

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_tuple())

    def with_position(self, position: Vec3) -> "VehicleState":
        return replace(self, position=position)


@dataclass(frozen=True)
class VehicleParams:
    """Physical parameters of the vehicle.

    Defaults are the simulation parameter set of the reference prototype
    (0.3 kg quadrotor, 0.1 m arms).  Added rotational inertias default to
    zero; the drag-area diagonal expands the scalar 0.02 m^2 to six channels
    with the rotational entries scaled by l^2.
    """

    m_v: float = 0.3          # vehicle mass, kg
    m_a0: float = 0.05        # fully-submerged added mass, kg
    I_xx: float = 0.005       # principal inertias, kg m^2
    I_yy: float = 0.005
    I_zz: float = 0.008
    I_a_xx: float = 0.0       # fully-submerged added rotational inertias, kg m^2
    I_a_yy: float = 0.0
    I_a_zz: float = 0.0
    # Rotor spin inertia.  The fitted thrust coefficients put hover rotor
    # speeds in the 1e6 rpm range, so this default is scaled down to keep the
    # hover rotor angular momentum at the level of a physical small propeller
    # (~1e-3 N m s); the gyroscopic terms stay present but sane.
    I_zzm: float = 4e-9
    l: float = 0.1            # arm length, m
    H: float = 0.1            # vehicle height, m
    V_0: float = 1.5e-4       # fully-submerged displaced volume, m^3
    A_d0: tuple[float, float, float, float, float, float] = (
        0.02, 0.02, 0.02, 2e-4, 2e-4, 2e-4,
    )                         # drag-area diagonal (u, v, w, roll, pitch, yaw)
    C_d: float = 1.0          # drag coefficient, dimensionless
    d_prop: float = 0.02      # rotor plane height above the CG, m

    def validate(self) -> None:
        if not (self.m_v > 0 and self.H > 0 and self.l > 0):
            raise ValueError("m_v, H and l must be positive")
        if not (self.I_xx > 0 and self.I_yy > 0 and self.I_zz > 0 and self.I_zzm > 0):
            raise ValueError("inertias must be positive")
        if min(self.I_a_xx, self.I_a_yy, self.I_a_zz) < 0:
            raise ValueError("added inertias must be non-negative")
        if self.m_a0 < 0 or self.V_0 < 0:
            raise ValueError("m_a0 and V_0 must be non-negative")
        if len(self.A_d0) != 6 or min(self.A_d0) < 0:
            raise ValueError("A_d0 must be six non-negative entries")
        if self.C_d < 0:
            raise ValueError("C_d must be non-negative")


@dataclass(frozen=True)
class Environment:
    """Fluid environment constants.

    rho_air is documentation only: aerial fluid forces are neglected, so it
    never enters the dynamics.
    """

    rho_water: float = 1000.0   # kg/m^3
    rho_air: float = 1.225      # kg/m^3
    g0: float = 9.81            # m/s^2
    water_surface_z: float = 0.0

    def validate(self) -> None:
        if not (self.rho_water > self.rho_air > 0):
            raise ValueError("require rho_water > rho_air > 0")
        if self.g0 <= 0:
            raise ValueError("g0 must be positive")


@dataclass(frozen=True)
class ControlOutput:
    """Actuation wrench plus the rotor data needed by the dynamics.

    T_z: collective thrust along body +z, N (non-negative).
    tau: body torques (tau_x, tau_y, tau_z), N m.
    rotor_command: the rotor speeds that realized this wrench, if allocated.
    W_G: net signed rotor angular velocity for the gyroscopic terms, rad/s.
    """

    T_z: float
    tau: Vec3
    rotor_command: "RotorCommand | None" = None
    W_G: float = 0.0

    def __post_init__(self) -> None:
        if self.T_z < 0:
            raise ValueError("collective thrust must be non-negative")


def classify_zone(z: float, params: VehicleParams) -> Zone:
    """Zone of a CG height z: Air for z >= H/2, Water for z <= -H/2, else Hybrid.

    Boundary points belong to the homogeneous zones.
    """
    if not math.isfinite(z):
        raise ValueError(f"non-finite vertical position: {z!r}")
    half = params.H / 2
    if z >= half:
        return Zone.AIR
    if z <= -half:
        return Zone.WATER
    return Zone.HYBRID


def _check_pitch(theta: float) -> None:
    if not math.isfinite(theta):
        raise SingularAttitudeError(f"non-finite pitch: {theta!r}")
    if abs(theta) >= MAX_PITCH:
        raise SingularAttitudeError(
            f"pitch {theta:.6f} rad within {PITCH_SINGULARITY_MARGIN} rad of gimbal lock"
        )


def euler_to_rotation(attitude: Vec3) -> Mat3:
    """Body-to-world direction cosine matrix for Z-Y-X Euler angles."""
    phi, theta, psi = attitude
    _check_pitch(theta)
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return (
        (cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi),
        (cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi),
        (-sth, sphi * cth, cphi * cth),
    )


def euler_rate_matrix(attitude: Vec3) -> Mat3:
    """Matrix mapping body rates (P, Q, R) to Euler angle rates."""
    phi, theta, _ = attitude
    _check_pitch(theta)
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth = math.cos(theta)
    tth = math.tan(theta)
    return (
        (1.0, sphi * tth, cphi * tth),
        (0.0, cphi, -sphi),
        (0.0, sphi / cth, cphi / cth),
    )


def mat_vec(m: Mat3, v: Vec3) -> Vec3:
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def mat_t_vec(m: Mat3, v: Vec3) -> Vec3:
    """Apply the transpose of m (world-to-body for a rotation matrix)."""
    return (
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    )


def world_velocity(state: VehicleState) -> Vec3:
    """World-frame velocity (dx, dy, dz) of the CG."""
    return mat_vec(euler_to_rotation(state.attitude), state.body_velocity)


def vertical_velocity(state: VehicleState) -> float:
    """World-frame dz of the CG; cheaper than the full rotation."""
    phi, theta, _ = state.attitude
    u, v, w = state.body_velocity
    return (
        -math.sin(theta) * u
        + math.sin(phi) * math.cos(theta) * v
        + math.cos(phi) * math.cos(theta) * w
    )


def euler_rates(state: VehicleState) -> Vec3:
    """Attitude rates (dphi, dtheta, dpsi) from the body rates."""
    return mat_vec(euler_rate_matrix(state.attitude), state.body_rates)
