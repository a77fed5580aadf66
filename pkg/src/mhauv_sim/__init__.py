"""Deterministic 6-DOF cross-medium multirotor simulation and control."""

from .controllers import (
    CascadeGains,
    CascadePidState,
    EquivalentControlError,
    PidGains,
    Reference,
    TwsmcGains,
    cascade_pid_step,
    check_twisting_conditions,
    equivalent_control,
    sliding_surface,
    twisting_term,
    twsmc_step,
)
from .dynamics import StateDerivative, derivative, total_energy
from .engine import (
    DisturbancePulse,
    Metrics,
    RunResult,
    Scenario,
    SimRecord,
    build_comparison_scenarios,
    compare,
    integrate_step,
    run,
)
from .fluid import FluidEffects, fluid_effects, zone_weight
from .propeller import (
    RotorCommand,
    ThrustModel,
    allocate,
    ct_curve,
    mix,
    rotor_immersion,
    rotor_immersions,
    rotor_thrust,
    thrust_coefficient,
)
from .references import CosineRef, ProfileRef, SineRef, StepRef
from .supervisor import Strategy, Supervisor, SwitchConfig, SwitchEvent
from .types import (
    ControlOutput,
    Environment,
    SingularAttitudeError,
    VehicleParams,
    VehicleState,
    Zone,
    classify_zone,
    euler_rate_matrix,
    euler_to_rotation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
