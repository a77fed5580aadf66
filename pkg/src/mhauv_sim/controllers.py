"""Cascade PID (homogeneous media) and twisting sliding-mode control (transition).

Sign conventions, fixed by stability of the respective laws:

* Sliding-mode tracking error e = actual - reference, so the twisting law
  u = -r1*sgn(sigma) - r2*sgn(dsigma) is stabilizing.
* Cascade PID error = reference - actual, so positive altitude error adds
  thrust.

The PID derivative term multiplies the per-update error increment (the
fixed-step flight-controller convention), not the error rate; the reference
gain set is only meaningful under that scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .fluid import FluidEffects
from .types import (
    Vec3,
    VehicleParams,
    VehicleState,
    euler_rate_matrix,
    vertical_velocity,
)

Quad = tuple[float, float, float, float]

CHANNELS = ("z", "roll", "pitch", "yaw")

# The shaping term 0.5*c*de/|e|^0.5 in the equivalent control diverges as a
# raw formula when the error crosses zero with nonzero rate, but on the
# sliding surface itself (de = -c*|e|^0.5*sgn(e)) its magnitude is exactly
# c^2/2.  It is therefore capped at that asymptote: exact on-surface and for
# moderate off-surface errors, bounded through zero crossings.
_ERR_FLOOR = 1e-12

# Equivalent control is refused per channel when its projection divisor
# falls below this.
_DIVISOR_MIN = 1e-3


class EquivalentControlError(ValueError):
    """A channel's equivalent-control divisor is too close to singular."""

    def __init__(self, channels: tuple[str, ...]) -> None:
        self.channels = channels
        super().__init__(
            f"near-singular equivalent control on channel(s): {', '.join(channels)}"
        )


def _sgn(x: float) -> float:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@dataclass(frozen=True)
class Reference:
    """Tracked references and their derivatives.

    Altitude and attitude carry second derivatives for the sliding-mode
    feedforward; x, y are used only by the cascade position loops.
    """

    z: float = 0.0
    z_dot: float = 0.0
    z_ddot: float = 0.0
    roll: float = 0.0
    roll_dot: float = 0.0
    roll_ddot: float = 0.0
    pitch: float = 0.0
    pitch_dot: float = 0.0
    pitch_ddot: float = 0.0
    yaw: float = 0.0
    yaw_dot: float = 0.0
    yaw_ddot: float = 0.0
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class PidGains:
    """One PID loop: output = kp*e + ki*integral(e) + kd*(e_k - e_{k-1}).

    out_limit bounds the loop's contribution symmetrically; the integrator is
    clamped at int_limit (defaults to out_limit/ki).
    """

    kp: float
    ki: float
    kd: float
    out_limit: float
    int_limit: float | None = None

    def validate(self) -> None:
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("PID gains must be non-negative")
        if self.out_limit <= 0:
            raise ValueError("output limit must be positive")

    def integrator_limit(self) -> float:
        if self.int_limit is not None:
            return self.int_limit
        if self.ki > 0:
            return self.out_limit / self.ki
        return 0.0


@dataclass(frozen=True)
class CascadeGains:
    """Gain set for the 6-DOF cascade controller.

    The altitude integrator limit is tighter than out_limit/ki: the
    feedforward already carries the weight, so the integral only trims model
    error, and a wider clamp lets a mid-transient bumpless seed pin a
    multi-newton bias that takes minutes to unwind.
    """

    altitude: PidGains = PidGains(kp=60.0, ki=0.5, kd=3000.0, out_limit=12.0,
                                  int_limit=4.0)
    attitude: PidGains = PidGains(kp=6.0, ki=0.05, kd=30.0, out_limit=0.5)
    position: PidGains = PidGains(kp=1.0, ki=0.0, kd=500.0, out_limit=3.0)
    thrust_min: float = 0.0
    thrust_max: float = 15.0
    max_tilt: float = 0.2            # rad, clamp on commanded roll/pitch
    tilt_divisor_floor: float = 0.5  # m/s^2, floor on the accel-to-tilt divisor

    def validate(self) -> None:
        self.altitude.validate()
        self.attitude.validate()
        self.position.validate()
        if not self.thrust_max > self.thrust_min >= 0:
            raise ValueError("require thrust_max > thrust_min >= 0")


@dataclass(frozen=True)
class TwsmcGains:
    """Sliding-surface gains, twisting magnitudes, and output limits.

    The twisting magnitudes dwarf any feasible wrench, so the thrust channel
    is effectively a relay between thrust_min and thrust_max.  The default
    ceiling keeps that relay roughly symmetric about the transition-zone
    weight (~2x hover) so the reaching transient does not bounce the vehicle
    back across the switching boundary.
    """

    c: Quad = (10.0, 10.0, 10.0, 10.0)
    r1: float = 2500.0
    r2: float = 1500.0
    k_m: float = 1.0       # advisory convergence-condition constants
    k_big: float = 1.5
    c_bound: float = 500.0
    thrust_min: float = 0.0
    thrust_max: float = 6.0
    torque_limit: Vec3 = (0.5, 0.5, 0.5)

    def validate(self) -> None:
        if not (self.r1 > self.r2 > 0):
            raise ValueError("twisting gains must satisfy r1 > r2 > 0")
        if min(self.c) <= 0:
            raise ValueError("surface gains must be positive")
        if not self.thrust_max > self.thrust_min >= 0:
            raise ValueError("require thrust_max > thrust_min >= 0")


@dataclass
class PidChannelState:
    integrator: float = 0.0
    prev_error: float | None = None


@dataclass
class CascadePidState:
    """Mutable per-run controller memory, one channel per controlled axis."""

    z: PidChannelState = field(default_factory=PidChannelState)
    x: PidChannelState = field(default_factory=PidChannelState)
    y: PidChannelState = field(default_factory=PidChannelState)
    roll: PidChannelState = field(default_factory=PidChannelState)
    pitch: PidChannelState = field(default_factory=PidChannelState)
    yaw: PidChannelState = field(default_factory=PidChannelState)

    def reset(self) -> None:
        for ch in (self.z, self.x, self.y, self.roll, self.pitch, self.yaw):
            ch.integrator = 0.0
            ch.prev_error = None


def _pid_update(
    ch: PidChannelState, gains: PidGains, error: float, dt: float
) -> float:
    ch.integrator += error * dt
    limit = gains.integrator_limit()
    ch.integrator = min(max(ch.integrator, -limit), limit)
    if ch.prev_error is None:
        d_term = 0.0
    else:
        d_term = gains.kd * (error - ch.prev_error)
    ch.prev_error = error
    out = gains.kp * error + gains.ki * ch.integrator + d_term
    return min(max(out, -gains.out_limit), gains.out_limit)


def sliding_surface(e: Quad, e_dot: Quad, gains: TwsmcGains) -> Quad:
    """sigma_i = de_i + c_i * sqrt(|e_i|) * sgn(e_i)."""
    return tuple(
        de + c * math.sqrt(abs(ei)) * _sgn(ei)
        for de, c, ei in zip(e_dot, gains.c, e)
    )


def twisting_term(sigma: Quad, sigma_dot: Quad, gains: TwsmcGains) -> Quad:
    """Per-channel -r1*sgn(sigma) - r2*sgn(dsigma), with sgn(0) = 0."""
    gains.validate()
    return tuple(
        -gains.r1 * _sgn(s) - gains.r2 * _sgn(sd)
        for s, sd in zip(sigma, sigma_dot)
    )


@dataclass(frozen=True)
class TwistingReport:
    satisfied: bool
    margin_dominant: float   # (r1+r2)Km - C - [(r1-r2)KM + C]
    margin_reaching: float   # (r1-r2)Km - C


def check_twisting_conditions(gains: TwsmcGains) -> TwistingReport:
    """Evaluate the twisting finite-time convergence inequalities.

    Purely advisory: reports pass/fail with numeric margins, never blocks a
    simulation.
    """
    gains.validate()
    if gains.k_m <= 0:
        raise ValueError("K_m must be positive")
    if gains.k_big < gains.k_m:
        raise ValueError("require K_M >= K_m")
    if gains.c_bound < 0:
        raise ValueError("C bound must be non-negative")
    r1, r2 = gains.r1, gains.r2
    m1 = (r1 + r2) * gains.k_m - gains.c_bound - ((r1 - r2) * gains.k_big + gains.c_bound)
    m2 = (r1 - r2) * gains.k_m - gains.c_bound
    return TwistingReport(satisfied=(m1 > 0 and m2 > 0),
                          margin_dominant=m1, margin_reaching=m2)


def _wrap_pi(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def tracked_outputs(state: VehicleState, reference: Reference) -> tuple[Quad, Quad]:
    """Sliding-mode errors e = actual - reference and their rates.

    Yaw error is wrapped to (-pi, pi].
    """
    z_dot = vertical_velocity(state)
    dphi, dtheta, dpsi = _euler_rates(state)
    phi, theta, psi = state.attitude
    e = (
        state.position[2] - reference.z,
        _wrap_pi(phi - reference.roll),
        _wrap_pi(theta - reference.pitch),
        _wrap_pi(psi - reference.yaw),
    )
    e_dot = (
        z_dot - reference.z_dot,
        dphi - reference.roll_dot,
        dtheta - reference.pitch_dot,
        dpsi - reference.yaw_dot,
    )
    return e, e_dot


def _euler_rates(state: VehicleState) -> Vec3:
    m = euler_rate_matrix(state.attitude)
    p, q, r = state.body_rates
    return (
        m[0][0] * p + m[0][1] * q + m[0][2] * r,
        m[1][0] * p + m[1][1] * q + m[1][2] * r,
        m[2][0] * p + m[2][1] * q + m[2][2] * r,
    )


def _equivalent_control(
    state: VehicleState,
    reference: Reference,
    fluid: FluidEffects,
    params: VehicleParams,
    gains: TwsmcGains,
    w_g: float,
) -> tuple[Quad, Quad, tuple[bool, bool, bool, bool]]:
    """Model inversion that makes dsigma = 0 under exact model match.

    Returns (eq_wrench, trim_wrench, valid): eq_wrench zeroes the surface
    derivative (it includes the finite-time shaping term, a large transient
    demand while sliding); trim_wrench tracks the reference acceleration
    alone and is the sustained level a successor controller should be seeded
    against.  Channels whose divisor is below threshold carry 0 in both and
    False in the mask.
    """
    phi, theta, psi = state.attitude
    u, v, w = state.body_velocity
    p, q, r = state.body_rates
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)

    c_w = fluid.weight_coefficient
    m_eff = params.m_v + fluid.added_mass
    ixx = params.I_xx + c_w * params.I_a_xx
    iyy = params.I_yy + c_w * params.I_a_yy
    izz = params.I_zz + c_w * params.I_a_zz
    g_eff = fluid.effective_gravity
    fd = fluid.drag_force
    md = fluid.drag_moment

    # Error dynamics shaping: ddq_cmd makes dsigma = 0; ddq_ref alone gives
    # the sustained trim.
    e, e_dot = tracked_outputs(state, reference)
    ddq_ref = (reference.z_ddot, reference.roll_ddot,
               reference.pitch_ddot, reference.yaw_ddot)
    ddq_cmd = []
    for ddr, c, de, ei in zip(ddq_ref, gains.c, e_dot, e):
        corr = 0.5 * c * de / math.sqrt(max(abs(ei), _ERR_FLOOR))
        cap = 0.5 * c * c
        corr = min(max(corr, -cap), cap)
        ddq_cmd.append(ddr - corr)
    ddq_cmd = tuple(ddq_cmd)

    # Thrust-free body acceleration (mirrors the plant model).
    a_u = q * w - r * v + g_eff * sth + fd[0] / m_eff
    a_v = r * u - p * w - g_eff * sphi * cth + fd[1] / m_eff
    a_w = p * v - q * u - g_eff * cphi * cth + fd[2] / m_eff

    # Torque-free body angular acceleration.
    al_p = (iyy - izz) / ixx * q * r - params.I_zzm / ixx * q * w_g + md[0] / ixx
    al_q = (izz - ixx) / iyy * p * r - params.I_zzm / iyy * p * w_g + md[1] / iyy
    al_r = (ixx - iyy) / izz * p * q + md[2] / izz

    dphi, dtheta, _ = _euler_rates(state)

    # ddz = d(r3)/dt . v_b + r3 . (a + (0,0,T/m)); r3 is the bottom DCM row.
    r3 = (-sth, sphi * cth, cphi * cth)
    dr3 = (
        -cth * dtheta,
        cphi * cth * dphi - sphi * sth * dtheta,
        -sphi * cth * dphi - cphi * sth * dtheta,
    )
    zdd_free = (
        dr3[0] * u + dr3[1] * v + dr3[2] * w
        + r3[0] * a_u + r3[1] * a_v + r3[2] * a_w
    )

    # Euler-rate matrix, its time derivative, and its inverse.
    tth = sth / cth
    sec2 = 1.0 / (cth * cth)
    e_mat = ((1.0, sphi * tth, cphi * tth),
             (0.0, cphi, -sphi),
             (0.0, sphi / cth, cphi / cth))
    de_mat = (
        (0.0,
         cphi * dphi * tth + sphi * dtheta * sec2,
         -sphi * dphi * tth + cphi * dtheta * sec2),
        (0.0, -sphi * dphi, -cphi * dphi),
        (0.0,
         (cphi * dphi * cth + sphi * sth * dtheta) * sec2,
         (-sphi * dphi * cth + cphi * sth * dtheta) * sec2),
    )
    att_free = tuple(
        de_mat[i][0] * p + de_mat[i][1] * q + de_mat[i][2] * r
        + e_mat[i][0] * al_p + e_mat[i][1] * al_q + e_mat[i][2] * al_r
        for i in range(3)
    )

    # Per-channel projection divisors, as printed in the source model.
    div_thrust = cth * cphi
    divisors = (div_thrust, 1.0, cphi, cphi / cth)
    valid = tuple(abs(d) >= _DIVISOR_MIN for d in divisors)

    def solve(ddq: Quad) -> Quad:
        # tau = diag(I) . E^{-1} . (ddq_att - att_free); thrust from ddz.
        rhs = (ddq[1] - att_free[0], ddq[2] - att_free[1], ddq[3] - att_free[2])
        tau_x = ixx * (rhs[0] - sth * rhs[2])
        tau_y = iyy * (cphi * rhs[1] + sphi * cth * rhs[2])
        tau_z = izz * (-sphi * rhs[1] + cphi * cth * rhs[2])
        thrust = m_eff * (ddq[0] - zdd_free) / div_thrust if valid[0] else 0.0
        return (
            thrust,
            tau_x if valid[1] else 0.0,
            tau_y if valid[2] else 0.0,
            tau_z if valid[3] else 0.0,
        )

    return solve(ddq_cmd), solve(ddq_ref), valid


def equivalent_control(
    state: VehicleState,
    reference: Reference,
    fluid: FluidEffects,
    params: VehicleParams,
    gains: TwsmcGains,
    w_g: float = 0.0,
) -> Quad:
    """Feedforward wrench rendering dsigma = 0 under exact model match.

    Raises EquivalentControlError naming any channel whose divisor magnitude
    is below 1e-3; the caller may then fall back to convergence-only control
    for that channel (twsmc_step does this internally).
    """
    wrench, _, valid = _equivalent_control(state, reference, fluid, params,
                                           gains, w_g)
    if not all(valid):
        bad = tuple(name for name, ok in zip(CHANNELS, valid) if not ok)
        raise EquivalentControlError(bad)
    return wrench


@dataclass(frozen=True)
class TwsmcResult:
    wrench: Quad                       # (T_z, tau_x, tau_y, tau_z), clamped
    sigma: Quad
    sigma_dot: Quad                    # backward-difference estimate
    saturated: tuple[bool, bool, bool, bool]
    eq_valid: tuple[bool, bool, bool, bool]
    eq_wrench: Quad                    # clamped equivalent part alone
    trim_wrench: Quad                  # clamped reference-tracking trim; the
                                       # smooth component a successor
                                       # controller should be seeded against


def twsmc_step(
    state: VehicleState,
    reference: Reference,
    fluid: FluidEffects,
    params: VehicleParams,
    gains: TwsmcGains,
    sigma_prev: Quad | None,
    dt: float,
    w_g: float = 0.0,
) -> TwsmcResult:
    """One twisting-controller update: equivalent + convergence terms, clamped.

    sigma_prev is the previous update's surface value (None right after a
    hand-over, which zeroes the dsigma estimate).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    e, e_dot = tracked_outputs(state, reference)
    sigma = sliding_surface(e, e_dot, gains)
    if sigma_prev is None:
        sigma_dot = (0.0, 0.0, 0.0, 0.0)
    else:
        sigma_dot = tuple((s - sp) / dt for s, sp in zip(sigma, sigma_prev))
    conv = twisting_term(sigma, sigma_dot, gains)
    eq, trim, valid = _equivalent_control(
        state, reference, fluid, params, gains, w_g
    )

    def clamp4(w: Quad) -> Quad:
        t = min(max(w[0], gains.thrust_min), gains.thrust_max)
        taus = tuple(
            min(max(w[i + 1], -gains.torque_limit[i]), gains.torque_limit[i])
            for i in range(3)
        )
        return (t,) + taus

    raw = tuple(eqi + ci for eqi, ci in zip(eq, conv))
    clamped = clamp4(raw)
    saturated = tuple(c != r for c, r in zip(clamped, raw))
    return TwsmcResult(
        wrench=clamped,
        sigma=sigma,
        sigma_dot=sigma_dot,
        saturated=saturated,
        eq_valid=valid,
        eq_wrench=clamp4(eq),
        trim_wrench=clamp4(trim),
    )


def gravity_feedforward(
    state: VehicleState, fluid: FluidEffects, params: VehicleParams,
    gains: CascadeGains,
) -> float:
    """Thrust holding the vehicle against effective weight at this attitude."""
    phi, theta, _ = state.attitude
    m_eff = params.m_v + fluid.added_mass
    proj = max(math.cos(phi) * math.cos(theta), 0.5)
    return m_eff * fluid.effective_gravity / proj


def cascade_pid_step(
    state: VehicleState,
    reference: Reference,
    pid_state: CascadePidState,
    gains: CascadeGains,
    fluid: FluidEffects,
    params: VehicleParams,
    dt: float,
) -> Quad:
    """One 6-DOF cascade update: position -> attitude -> wrench.

    The outer loop turns horizontal position errors into desired world
    accelerations, inverted to roll/pitch setpoints at small angles; the
    altitude loop adds thrust around the gravity/buoyancy feedforward; the
    inner loop turns attitude errors into body torques.  Both loops run at
    the same rate.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    phi, theta, psi = state.attitude

    # Altitude: PID output is newtons around the weight feedforward.
    thrust_ff = gravity_feedforward(state, fluid, params, gains)
    err_z = reference.z - state.position[2]
    thrust = thrust_ff + _pid_update(pid_state.z, gains.altitude, err_z, dt)
    thrust = min(max(thrust, gains.thrust_min), gains.thrust_max)

    # Horizontal position: desired world accelerations, inverted to tilt
    # setpoints at small angles (divisor floored for near-neutral buoyancy).
    acc_x = _pid_update(pid_state.x, gains.position, reference.x - state.position[0], dt)
    acc_y = _pid_update(pid_state.y, gains.position, reference.y - state.position[1], dt)
    g_div = max(fluid.effective_gravity, gains.tilt_divisor_floor)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    pitch_des = (acc_x * cpsi + acc_y * spsi) / g_div
    roll_des = (acc_x * spsi - acc_y * cpsi) / g_div
    tilt = gains.max_tilt
    pitch_des = min(max(pitch_des, -tilt), tilt)
    roll_des = min(max(roll_des, -tilt), tilt)

    # Attitude: PID output is body torque.
    tau_x = _pid_update(pid_state.roll, gains.attitude, roll_des - phi, dt)
    tau_y = _pid_update(pid_state.pitch, gains.attitude, pitch_des - theta, dt)
    tau_z = _pid_update(
        pid_state.yaw, gains.attitude, _wrap_pi(reference.yaw - psi), dt
    )
    return (thrust, tau_x, tau_y, tau_z)


def seed_bumpless(
    pid_state: CascadePidState,
    gains: CascadeGains,
    state: VehicleState,
    reference: Reference,
    fluid: FluidEffects,
    params: VehicleParams,
    target_wrench: Quad,
    dt: float,
) -> None:
    """Initialize integrators so the next cascade output matches target_wrench.

    Shared channels only (thrust and torques); the horizontal loops are left
    untouched.  With ki = 0 on a loop the match is impossible and that loop
    is skipped.  The seeded integrators respect the anti-windup clamp, so an
    out-of-range target is matched as closely as the limits allow.
    """
    thrust_ff = gravity_feedforward(state, fluid, params, gains)
    err_z = reference.z - state.position[2]
    _seed_channel(pid_state.z, gains.altitude, err_z,
                  target_wrench[0] - thrust_ff, dt)
    phi, theta, psi = state.attitude
    _seed_channel(pid_state.roll, gains.attitude, 0.0 - phi, target_wrench[1], dt)
    _seed_channel(pid_state.pitch, gains.attitude, 0.0 - theta, target_wrench[2], dt)
    _seed_channel(pid_state.yaw, gains.attitude,
                  _wrap_pi(reference.yaw - psi), target_wrench[3], dt)


def _seed_channel(
    ch: PidChannelState, gains: PidGains, error: float, target_out: float,
    dt: float,
) -> None:
    ch.prev_error = error  # zero derivative kick on the next update
    if gains.ki <= 0:
        return
    target_out = min(max(target_out, -gains.out_limit), gains.out_limit)
    integ = (target_out - gains.kp * error) / gains.ki - error * dt
    limit = gains.integrator_limit()
    ch.integrator = min(max(integ, -limit), limit)
