"""Hybrid automaton selecting the active control strategy.

Switches fire only on directional boundary crossings outside a hysteresis
band, only between adjacent strategies, only when the attitude guard holds,
and no sooner than a minimum dwell time after the previous switch.  When the
guard blocks, the current strategy persists even outside its nominal zone
until the guard clears.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .controllers import (
    CascadeGains,
    CascadePidState,
    Quad,
    Reference,
    seed_bumpless,
)
from .fluid import FluidEffects
from .types import VehicleParams, VehicleState, euler_rates, vertical_velocity


class Strategy(Enum):
    S_A = "S_A"   # air: cascade PID, 6-DOF
    S_H = "S_H"   # transition: twisting SMC on altitude and attitude
    S_W = "S_W"   # water: cascade PID, 6-DOF


@dataclass(frozen=True)
class SwitchConfig:
    """Boundaries, hysteresis, and guard limits for strategy switching."""

    h_upper: float = 0.05    # air/hybrid boundary H/2, m
    h_lower: float = -0.05   # hybrid/water boundary -H/2, m
    delta_z: float = 0.02    # hysteresis buffer, m
    a_m: float = 0.26        # max |roll|, |pitch| at a switch, rad
    a_vm: float = 1.0        # max |roll rate|, |pitch rate| at a switch, rad/s
    dwell: float = 0.05      # minimum time between switches, s

    def validate(self) -> None:
        if self.delta_z < 0:
            raise ValueError("delta_z must be non-negative")
        if not self.h_upper > self.h_lower:
            raise ValueError("require h_upper > h_lower")
        if self.a_m <= 0 or self.a_vm <= 0 or self.dwell < 0:
            raise ValueError("guard limits must be positive, dwell non-negative")

    @classmethod
    def for_params(cls, params: VehicleParams, **overrides) -> "SwitchConfig":
        return cls(h_upper=params.H / 2, h_lower=-params.H / 2, **overrides)


@dataclass(frozen=True)
class SwitchEvent:
    t: float
    from_strategy: Strategy
    to_strategy: Strategy
    z: float
    z_dot: float
    roll: float
    pitch: float
    roll_rate: float
    pitch_rate: float


def initial_strategy(z: float, config: SwitchConfig) -> Strategy:
    if z >= config.h_upper:
        return Strategy.S_A
    if z <= config.h_lower:
        return Strategy.S_W
    return Strategy.S_H


class Supervisor:
    """Per-run switching state machine.  Single-threaded, one per scenario."""

    def __init__(self, config: SwitchConfig, initial: Strategy) -> None:
        config.validate()
        self.config = config
        self.current = initial
        self._last_switch_t: float | None = None

    def evaluate_switch(
        self, t: float, state: VehicleState
    ) -> tuple[Strategy, SwitchEvent | None]:
        """Advance the automaton at time t; returns (strategy, event-or-None)."""
        cfg = self.config
        z = state.position[2]
        z_dot = vertical_velocity(state)
        roll, pitch, _ = state.attitude
        roll_rate, pitch_rate, _ = euler_rates(state)

        target = self.current
        if self.current is Strategy.S_H:
            if z >= cfg.h_upper + cfg.delta_z and z_dot >= 0:
                target = Strategy.S_A
            elif z <= cfg.h_lower - cfg.delta_z and z_dot <= 0:
                target = Strategy.S_W
        elif self.current is Strategy.S_A:
            if z < cfg.h_upper - cfg.delta_z and z_dot < 0:
                target = Strategy.S_H
        elif self.current is Strategy.S_W:
            if z > cfg.h_lower + cfg.delta_z and z_dot > 0:
                target = Strategy.S_H

        if target is self.current:
            return self.current, None

        guard_ok = (
            abs(roll) <= cfg.a_m
            and abs(pitch) <= cfg.a_m
            and abs(roll_rate) <= cfg.a_vm
            and abs(pitch_rate) <= cfg.a_vm
        )
        dwell_ok = (
            self._last_switch_t is None or t - self._last_switch_t >= cfg.dwell
        )
        if not (guard_ok and dwell_ok):
            return self.current, None

        event = SwitchEvent(
            t=t,
            from_strategy=self.current,
            to_strategy=target,
            z=z,
            z_dot=z_dot,
            roll=roll,
            pitch=pitch,
            roll_rate=roll_rate,
            pitch_rate=pitch_rate,
        )
        self.current = target
        self._last_switch_t = t
        return target, event


class ControllerMemory:
    """State owned by one scenario run: PID memory and surface history.

    last_smooth_wrench is the hand-over target: the full output while PID is
    active, but only the equivalent-control component while TWSMC is active.
    Matching the raw twisting output would seed the incoming integrators to
    whichever chatter rail the convergence term happened to be on.
    """

    __slots__ = ("pid", "sigma_prev", "last_smooth_wrench")

    def __init__(self, initial_wrench: Quad) -> None:
        self.pid = CascadePidState()
        self.sigma_prev: Quad | None = None
        self.last_smooth_wrench: Quad = initial_wrench


def handover(
    event: SwitchEvent,
    memory: ControllerMemory,
    state: VehicleState,
    reference: Reference,
    fluid: FluidEffects,
    params: VehicleParams,
    cascade_gains: CascadeGains,
    dt: float,
) -> None:
    """Bumpless transfer into the incoming controller.

    Into PID: integrators are seeded so the first output matches the
    outgoing wrench on the shared channels; the horizontal loops restart
    their derivative memory.  Into TWSMC: the surface history is re-seeded
    from the current state (first dsigma estimate is zero).  The outgoing
    controller's memory is left frozen for a possible return.
    """
    if event.to_strategy is Strategy.S_H:
        memory.sigma_prev = None
        return
    seed_bumpless(
        memory.pid, cascade_gains, state, reference, fluid, params,
        memory.last_smooth_wrench, dt,
    )
    memory.pid.x.prev_error = None
    memory.pid.y.prev_error = None
