"""Immersion-dependent propeller thrust, the rotor mixer, and its inverse.

Unit convention for the thrust law T = C_T * Omega^2 * D^4: Omega in rpm,
D in meters, T in newtons.  The fitted coefficients make the water-zone
constant yield order-1 N thrusts at 10^3-rpm scale speeds; the air-zone
constant then requires very large rpm values to lift the vehicle.  Both
coefficients and the speed limit are configurable; the convention itself is
fixed and documented here because it is not standard.

Immersion h is in millimeters, positive when the rotor center is below the
water surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .types import ControlOutput, Vec3, VehicleParams, VehicleState, euler_to_rotation

# Rotor layout ("+" configuration): 1 on +y, 2 on +x, 3 on -y, 4 on -x.
# Rotors 1 and 3 spin CCW (positive), 2 and 4 CW.
SPIN_DIRECTIONS = (1.0, -1.0, 1.0, -1.0)

Quad = tuple[float, float, float, float]


@dataclass(frozen=True)
class ThrustModel:
    """Piecewise thrust-coefficient curve and per-rotor thrust law."""

    c_t_air: float = 1.5e-9      # plateau for h < h_air
    c_t_water: float = 1.3e-6    # plateau for h > h_water
    h_air: float = -50.0         # mm
    h_water: float = 100.0       # mm
    diameter: float = 0.0889     # m (3.5 inch prototype propeller)
    torque_thrust_ratio: float = 0.01   # rotor drag torque per thrust, m
    omega_max: float = 1e7       # rpm

    def validate(self) -> None:
        if not (self.c_t_water > self.c_t_air > 0):
            raise ValueError("require c_t_water > c_t_air > 0")
        if not self.h_water > self.h_air:
            raise ValueError("require h_water > h_air")
        if self.diameter <= 0 or self.omega_max <= 0:
            raise ValueError("diameter and omega_max must be positive")
        if self.torque_thrust_ratio < 0:
            raise ValueError("torque_thrust_ratio must be non-negative")


@dataclass(frozen=True)
class RotorCommand:
    """Four rotor speeds in rpm, each within [0, omega_max]."""

    omega: Quad

    def __post_init__(self) -> None:
        if min(self.omega) < 0:
            raise ValueError("rotor speeds must be non-negative")


def thrust_coefficient(h: float, model: ThrustModel = ThrustModel()) -> float:
    """C_T at immersion h (mm): plateaus with a log-linear bridge between."""
    if not math.isfinite(h):
        raise ValueError(f"non-finite immersion: {h!r}")
    if h < model.h_air:
        return model.c_t_air
    if h > model.h_water:
        return model.c_t_water
    alpha = (model.h_water - h) / (model.h_water - model.h_air)
    return math.exp(
        alpha * math.log(model.c_t_air) + (1.0 - alpha) * math.log(model.c_t_water)
    )


def rotor_thrust(omega: float, h: float, model: ThrustModel = ThrustModel()) -> float:
    """Thrust in N of one rotor at speed omega (rpm) and immersion h (mm)."""
    if omega < 0:
        raise ValueError("rotor speed must be non-negative")
    return thrust_coefficient(h, model) * omega * omega * model.diameter**4


def rotor_drag_torque(thrust: float, model: ThrustModel) -> float:
    """Magnitude of the aerodynamic/hydrodynamic reaction torque, N m."""
    return model.torque_thrust_ratio * thrust


def rotor_offsets(params: VehicleParams) -> tuple[Vec3, Vec3, Vec3, Vec3]:
    """Body-frame rotor center positions relative to the CG."""
    l, d = params.l, params.d_prop
    return ((0.0, l, d), (l, 0.0, d), (0.0, -l, d), (-l, 0.0, d))


def rotor_immersions(state: VehicleState, params: VehicleParams) -> Quad:
    """Immersion h (mm, submerged positive) of each rotor center."""
    r = euler_to_rotation(state.attitude)
    z_cg = state.position[2]
    out = []
    for ox, oy, oz in rotor_offsets(params):
        z_rotor = z_cg + r[2][0] * ox + r[2][1] * oy + r[2][2] * oz
        out.append(-1000.0 * z_rotor)
    return tuple(out)


def rotor_immersion(state: VehicleState, rotor_index: int, params: VehicleParams) -> float:
    """Immersion of a single rotor (index 0..3)."""
    return rotor_immersions(state, params)[rotor_index]


def net_rotor_rate(command: RotorCommand) -> float:
    """Signed sum of rotor speeds (rad/s) for the gyroscopic terms.

    Vanishes at symmetric hover because adjacent rotors counter-rotate.
    """
    total = sum(s * o for s, o in zip(SPIN_DIRECTIONS, command.omega))
    return total * math.pi / 30.0


def mix(
    rotor_thrusts: Quad,
    rotor_torques: Quad,
    params: VehicleParams,
) -> ControlOutput:
    """Collective thrust and body torques produced by per-rotor actuation.

    T_z = T1+T2+T3+T4, tau_x = (T1-T3)l, tau_y = (-T2+T4)l,
    tau_z = -M1+M2-M3+M4.
    """
    if min(rotor_thrusts) < 0:
        raise ValueError("rotor thrusts must be non-negative")
    t1, t2, t3, t4 = rotor_thrusts
    m1, m2, m3, m4 = rotor_torques
    return ControlOutput(
        T_z=t1 + t2 + t3 + t4,
        tau=((t1 - t3) * params.l, (-t2 + t4) * params.l, -m1 + m2 - m3 + m4),
    )


@dataclass(frozen=True)
class AllocationResult:
    command: RotorCommand
    thrusts: Quad          # clamped per-rotor thrusts, N
    saturated: bool

    @property
    def W_G(self) -> float:
        return net_rotor_rate(self.command)


def allocate(
    desired: ControlOutput,
    per_rotor_ct: Quad,
    model: ThrustModel,
    params: VehicleParams,
) -> AllocationResult:
    """Invert the mixer: wrench -> per-rotor thrusts -> rotor speeds.

    Solves the 4x4 linear map exactly when the wrench is feasible and keeps
    every thrust inside the rotor's currently-achievable range
    [0, C_T(h_i) * omega_max^2 * D^4], inverting the thrust law with that
    rotor's own coefficient.  An infeasible wrench is never raised; demands
    are shed in priority order: the collective share is clamped first, the
    roll and pitch differentials are scaled into the remaining room, and the
    (thrust-expensive) yaw differential takes whatever margin is left.
    Clamping rotors independently instead would convert railed torque
    commands into spurious net thrust, and scaling all torques jointly would
    let a railed yaw demand starve the roll/pitch authority.
    """
    if desired.T_z < 0:
        raise ValueError("cannot allocate negative collective thrust")
    if min(per_rotor_ct) <= 0:
        raise ValueError("thrust coefficients must be positive")
    l = params.l
    c = model.torque_thrust_ratio
    d4 = model.diameter**4
    caps = tuple(ct * model.omega_max**2 * d4 for ct in per_rotor_ct)

    quarter = desired.T_z / 4.0
    saturated = False
    if quarter > min(caps):
        quarter = min(caps)
        saturated = True

    def fit(share: float, room_pos: float, room_neg: float) -> float:
        # Largest fraction of `share` fitting room_pos upward / room_neg down.
        if share > room_pos:
            return room_pos
        if share < -room_neg:
            return -room_neg
        return share

    # Roll acts on the (1, 3) pair, pitch on (2, 4); each pair is
    # independent so the two differentials scale separately.
    a = fit(tx := desired.tau[0] / (2.0 * l), caps[0] - quarter, quarter)
    a = fit(a, quarter, caps[2] - quarter)  # T3 = quarter - a
    b = fit(ty := desired.tau[1] / (2.0 * l), caps[3] - quarter, quarter)
    b = fit(b, quarter, caps[1] - quarter)  # T2 = quarter - b
    t1, t2, t3, t4 = quarter + a, quarter - b, quarter - a, quarter + b

    yaw = desired.tau[2] / (4.0 * c) if c > 0 else 0.0
    # Yaw subtracts from rotors 1, 3 and adds to 2, 4.
    room_pos = min(t1, t3, caps[1] - t2, caps[3] - t4)
    room_neg = min(caps[0] - t1, caps[2] - t3, t2, t4)
    y = fit(yaw, room_pos, room_neg)

    if (a, b, y) != (tx, ty, yaw):
        saturated = True

    thrusts = (
        max(t1 - y, 0.0), max(t2 + y, 0.0), max(t3 - y, 0.0), max(t4 + y, 0.0),
    )
    speeds = tuple(
        math.sqrt(t / (ct * d4)) for t, ct in zip(thrusts, per_rotor_ct)
    )
    return AllocationResult(
        command=RotorCommand(omega=speeds),
        thrusts=thrusts,
        saturated=saturated,
    )


def thrusts_at_immersion(
    command: RotorCommand, immersions: Quad, model: ThrustModel
) -> Quad:
    """Per-rotor thrusts of held speeds evaluated at the current immersions."""
    return tuple(
        rotor_thrust(o, h, model) for o, h in zip(command.omega, immersions)
    )


def wrench_from_command(
    command: RotorCommand,
    immersions: Quad,
    model: ThrustModel,
    params: VehicleParams,
) -> ControlOutput:
    """Wrench actually produced by held rotor speeds at the given immersions."""
    thrusts = thrusts_at_immersion(command, immersions, model)
    torques = tuple(rotor_drag_torque(t, model) for t in thrusts)
    out = mix(thrusts, torques, params)
    return ControlOutput(
        T_z=out.T_z, tau=out.tau, rotor_command=command, W_G=net_rotor_rate(command)
    )


def ct_curve(
    h_min: float, h_max: float, n_samples: int, model: ThrustModel = ThrustModel()
) -> list[tuple[float, float]]:
    """Evenly spaced (h, C_T) samples for export/plotting."""
    if not h_min < h_max:
        raise ValueError("require h_min < h_max")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    step = (h_max - h_min) / (n_samples - 1)
    return [
        (h_min + i * step, thrust_coefficient(h_min + i * step, model))
        for i in range(n_samples)
    ]
