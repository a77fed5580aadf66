"""Full state derivative across all zones, plus an energy diagnostic.

The translational and rotational equations follow the printed model exactly,
including its sign conventions for the velocity cross-coupling and the
gyroscopic rotor terms; the controller package inverts the same model, so
internal consistency is what the tests pin down.  Two printed defects are
corrected (see the module tests): the rotational inertia coupling uses the
standard principal-axis coefficients, and the body-frame drag vector is
(F_du, F_dv, F_dw).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fluid import fluid_effects
from .types import (
    ControlOutput,
    Environment,
    MAX_PITCH,
    SingularAttitudeError,
    Vec3,
    VehicleParams,
    VehicleState,
)

Wrench6 = tuple[float, float, float, float, float, float]

ZERO_WRENCH6: Wrench6 = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class StateDerivative:
    d_position: Vec3        # world frame, m/s
    d_body_velocity: Vec3   # body frame, m/s^2
    d_attitude: Vec3        # rad/s
    d_body_rates: Vec3      # body frame, rad/s^2

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.d_position + self.d_body_velocity + self.d_attitude + self.d_body_rates
        )


class Plant:
    """Unpacked parameter set with the flat-tuple derivative hot path.

    The engine holds one of these per run; the public derivative() wraps it.
    """

    __slots__ = (
        "m_v", "m_a0", "i_xx", "i_yy", "i_zz", "i_a_xx", "i_a_yy", "i_a_zz",
        "i_zzm", "h_half", "h_height", "v0_rho_g", "drag_k", "a_d0", "g0",
        "params", "env",
    )

    def __init__(self, params: VehicleParams, env: Environment) -> None:
        params.validate()
        env.validate()
        self.params = params
        self.env = env
        self.m_v = params.m_v
        self.m_a0 = params.m_a0
        self.i_xx, self.i_yy, self.i_zz = params.I_xx, params.I_yy, params.I_zz
        self.i_a_xx, self.i_a_yy, self.i_a_zz = (
            params.I_a_xx, params.I_a_yy, params.I_a_zz,
        )
        self.i_zzm = params.I_zzm
        self.h_half = params.H / 2
        self.h_height = params.H
        self.v0_rho_g = env.rho_water * env.g0 * params.V_0
        self.drag_k = 0.5 * params.C_d * env.rho_water
        self.a_d0 = params.A_d0
        self.g0 = env.g0

    def immersion_weight(self, z: float) -> float:
        if z >= self.h_half:
            return 0.0
        if z <= -self.h_half:
            return 1.0
        return 0.5 - z / self.h_height

    def derivative_flat(
        self,
        y: tuple[float, ...],
        t_z: float,
        tau: Vec3,
        w_g: float,
        disturbance: Wrench6 = ZERO_WRENCH6,
    ) -> tuple[float, ...]:
        (x, yy, z, u, v, w, phi, theta, psi, p, q, r) = y
        if abs(theta) >= MAX_PITCH:
            raise SingularAttitudeError(
                f"pitch {theta:.6f} rad at the gimbal-lock guard"
            )

        cphi, sphi = math.cos(phi), math.sin(phi)
        cth, sth = math.cos(theta), math.sin(theta)
        cpsi, spsi = math.cos(psi), math.sin(psi)

        c = self.immersion_weight(z)
        m_eff = self.m_v + c * self.m_a0
        g_eff = self.g0 - c * self.v0_rho_g / self.m_v
        ixx = self.i_xx + c * self.i_a_xx
        iyy = self.i_yy + c * self.i_a_yy
        izz = self.i_zz + c * self.i_a_zz

        # Element-wise quadratic drag, signed to oppose motion.
        k = self.drag_k * c
        a = self.a_d0
        fd_u = -k * a[0] * u * abs(u)
        fd_v = -k * a[1] * v * abs(v)
        fd_w = -k * a[2] * w * abs(w)
        md_p = -k * a[3] * p * abs(p)
        md_q = -k * a[4] * q * abs(q)
        md_r = -k * a[5] * r * abs(r)

        # Kinematics: world velocity and Euler rates.
        dx = cth * cpsi * u + (sphi * sth * cpsi - cphi * spsi) * v + (
            cphi * sth * cpsi + sphi * spsi
        ) * w
        dy = cth * spsi * u + (sphi * sth * spsi + cphi * cpsi) * v + (
            cphi * sth * spsi - sphi * cpsi
        ) * w
        dz = -sth * u + sphi * cth * v + cphi * cth * w

        tth = sth / cth
        dphi = p + sphi * tth * q + cphi * tth * r
        dtheta = cphi * q - sphi * r
        dpsi = sphi / cth * q + cphi / cth * r

        dfx, dfy, dfz, dtx, dty, dtz = disturbance

        du = q * w - r * v + g_eff * sth + (fd_u + dfx) / m_eff
        dv = r * u - p * w - g_eff * sphi * cth + (fd_v + dfy) / m_eff
        dw = (
            p * v - q * u
            - g_eff * cphi * cth
            + (t_z + fd_w + dfz) / m_eff
        )

        dp = (
            (iyy - izz) / ixx * q * r
            + (tau[0] + md_p + dtx) / ixx
            - self.i_zzm / ixx * q * w_g
        )
        dq = (
            (izz - ixx) / iyy * p * r
            + (tau[1] + md_q + dty) / iyy
            - self.i_zzm / iyy * p * w_g
        )
        dr = (ixx - iyy) / izz * p * q + (tau[2] + md_r + dtz) / izz

        return (dx, dy, dz, du, dv, dw, dphi, dtheta, dpsi, dp, dq, dr)


def derivative(
    state: VehicleState,
    control: ControlOutput,
    params: VehicleParams,
    env: Environment,
    disturbance: Wrench6 = ZERO_WRENCH6,
) -> StateDerivative:
    """State derivative under the given actuation wrench.

    disturbance is an optional additive body-frame wrench
    (fx, fy, fz, tau_x, tau_y, tau_z), the plumbing hook for pulse injection.
    """
    if not state.is_finite():
        raise ValueError("non-finite state")
    plant = Plant(params, env)
    d = plant.derivative_flat(
        state.as_tuple(), control.T_z, control.tau, control.W_G, disturbance
    )
    out = StateDerivative(
        d_position=d[0:3],
        d_body_velocity=d[3:6],
        d_attitude=d[6:9],
        d_body_rates=d[9:12],
    )
    if not all(math.isfinite(v) for v in d):
        raise ValueError("non-finite derivative")
    return out


def _potential_energy(z: float, params: VehicleParams, env: Environment) -> float:
    """Potential consistent with the model's gravity term.

    The model applies the effective gravity as an acceleration to the
    effective mass, so the conservative vertical force is
    -m_eff(z) * g_eff(z) and the potential is its integral from z = 0.
    With this choice the only energy sinks along unforced trajectories are
    the drag terms.
    """
    half = params.H / 2
    b_max = env.rho_water * env.g0 * params.V_0

    def band_integral(z1: float, z2: float) -> float:
        # Over the hybrid band C(s) = 0.5 - s/H, so the weight force
        # m_eff*g_eff = m_v*g0 + C*(m_a0*g0 - b_max) - C^2*m_a0*b_max/m_v
        # is quadratic in C; integrate in C (ds = -H dC).
        a0 = params.m_v * env.g0
        a1 = params.m_a0 * env.g0 - b_max
        a2 = -params.m_a0 * b_max / params.m_v

        def antider(s: float) -> float:
            c = 0.5 - s / params.H
            return -params.H * (a0 * c + a1 * c * c / 2 + a2 * c**3 / 3)

        return antider(z2) - antider(z1)

    if z >= half:
        return band_integral(0.0, half) + params.m_v * env.g0 * (z - half)
    if z >= -half:
        return band_integral(0.0, z)
    deep_rate = (params.m_v + params.m_a0) * (env.g0 - b_max / params.m_v)
    return band_integral(0.0, -half) + deep_rate * (z + half)


def total_energy(
    state: VehicleState, params: VehicleParams, env: Environment
) -> float:
    """Kinetic plus potential energy diagnostic, J.

    Uses the zone-dependent effective masses and inertias; not consumed by
    the dynamics, only by dissipation sanity checks.
    """
    fx = fluid_effects(state, params, env)
    c = fx.weight_coefficient
    m_eff = params.m_v + fx.added_mass
    u, v, w = state.body_velocity
    p, q, r = state.body_rates
    ke = 0.5 * m_eff * (u * u + v * v + w * w) + 0.5 * (
        (params.I_xx + c * params.I_a_xx) * p * p
        + (params.I_yy + c * params.I_a_yy) * q * q
        + (params.I_zz + c * params.I_a_zz) * r * r
    )
    return ke + _potential_energy(state.position[2], params, env)
