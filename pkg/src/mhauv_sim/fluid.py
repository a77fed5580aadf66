"""Depth-dependent buoyancy, added mass, effective gravity, and quadratic drag.

All hydrodynamic quantities scale with a single immersion weight C(z) that is
0 in air, 1 fully submerged, and linear in between, so every assembled effect
is continuous across the zone boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .types import Environment, Vec3, VehicleParams, VehicleState


@dataclass(frozen=True)
class FluidEffects:
    """Hydrodynamic state at one instant.

    drag_force / drag_moment are body-frame and already carry the sign that
    opposes the corresponding velocity component, so the dynamics add them.
    """

    weight_coefficient: float   # C in [0, 1]
    added_mass: float           # kg
    buoyancy_force: float       # N, upward positive
    effective_gravity: float    # g0 - B/m_v, m/s^2
    drag_force: Vec3            # N
    drag_moment: Vec3           # N m


def zone_weight(z: float, params: VehicleParams) -> float:
    """Immersion weight: 0 for z >= H/2, 1 for z <= -H/2, 0.5 - z/H between."""
    if not math.isfinite(z):
        raise ValueError(f"non-finite vertical position: {z!r}")
    half = params.H / 2
    if z >= half:
        return 0.0
    if z <= -half:
        return 1.0
    return 0.5 - z / params.H


def fluid_effects(
    state: VehicleState, params: VehicleParams, env: Environment
) -> FluidEffects:
    """Assemble all immersion-weighted fluid effects at the current state.

    Drag is element-wise quadratic, 0.5*C_d*A_d[i]*rho_w*C*nu[i]*|nu[i]| with
    nu = (u, v, w, P, Q, R), signed to oppose motion.  In the air zone every
    hydrodynamic output is exactly zero and effective gravity equals g0.
    """
    c = zone_weight(state.position[2], params)
    if c == 0.0:
        return FluidEffects(
            weight_coefficient=0.0,
            added_mass=0.0,
            buoyancy_force=0.0,
            effective_gravity=env.g0,
            drag_force=(0.0, 0.0, 0.0),
            drag_moment=(0.0, 0.0, 0.0),
        )
    added_mass = c * params.m_a0
    buoyancy = c * env.rho_water * env.g0 * params.V_0
    g_eff = env.g0 - buoyancy / params.m_v
    k = 0.5 * params.C_d * env.rho_water * c
    nu = state.body_velocity + state.body_rates
    drag = tuple(-k * a * x * abs(x) for a, x in zip(params.A_d0, nu))
    return FluidEffects(
        weight_coefficient=c,
        added_mass=added_mass,
        buoyancy_force=buoyancy,
        effective_gravity=g_eff,
        drag_force=drag[:3],
        drag_moment=drag[3:],
    )
