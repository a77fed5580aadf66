"""Fixed-step closed-loop simulation, metrics, and the controller comparison.

Loop structure per control period: evaluate the reference and supervisor,
run the active controller (zero-order-held wrench), allocate rotor speeds
once, then integrate physics sub-steps with per-rotor thrusts re-evaluated
at each sub-step's immersions.  Everything is deterministic given the
scenario; the seed field is reserved for future stochastic disturbances and
is recorded but unused.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .controllers import (
    CascadeGains,
    Quad,
    TwsmcGains,
    cascade_pid_step,
    gravity_feedforward,
    twsmc_step,
)
from .dynamics import Plant, Wrench6, ZERO_WRENCH6
from .fluid import fluid_effects
from .propeller import (
    ThrustModel,
    allocate,
    rotor_drag_torque,
    rotor_immersions,
    thrust_coefficient,
    thrusts_at_immersion,
)
from .references import ReferenceSpec, hold_segments, reference_at
from .supervisor import (
    ControllerMemory,
    Strategy,
    Supervisor,
    SwitchConfig,
    SwitchEvent,
    handover,
    initial_strategy,
)
from .types import (
    ControlOutput,
    Environment,
    SingularAttitudeError,
    VehicleParams,
    VehicleState,
    Zone,
    classify_zone,
)

MODES = ("pure-pid", "pure-twsmc", "hybrid")
COMPARISON_SHAPES = ("step", "sine", "cosine")

# Saturation flag bits in SimRecord.sat_flags.
SAT_THRUST = 1
SAT_TAU_X = 2
SAT_TAU_Y = 4
SAT_TAU_Z = 8
SAT_ROTOR = 16

LOG_COLUMNS = (
    "t", "x", "y", "z", "u", "v", "w", "phi", "theta", "psi", "p", "q", "r",
    "z_ref", "phi_ref", "theta_ref", "psi_ref", "zone", "strategy",
    "t_z", "tau_x", "tau_y", "tau_z", "omega1", "omega2", "omega3", "omega4",
    "sigma_z", "sigma_phi", "sigma_theta", "sigma_psi", "sat_flags",
)

EVENT_COLUMNS = (
    "t", "from", "to", "z", "z_dot", "phi", "theta", "phi_dot", "theta_dot",
)


@dataclass(frozen=True)
class DisturbancePulse:
    """Additive body-frame wrench over [t_start, t_start + duration)."""

    t_start: float
    duration: float
    wrench: Wrench6

    def validate(self) -> None:
        if self.duration < 0:
            raise ValueError("pulse duration must be non-negative")
        if len(self.wrench) != 6:
            raise ValueError("pulse wrench must have six components")


@dataclass(frozen=True)
class Scenario:
    """Complete description of one closed-loop run."""

    reference: ReferenceSpec
    duration: float
    vehicle: VehicleParams = VehicleParams()
    environment: Environment = Environment()
    thrust_model: ThrustModel = ThrustModel()
    cascade_gains: CascadeGains = CascadeGains()
    twsmc_gains: TwsmcGains = TwsmcGains()
    switch_config: SwitchConfig = SwitchConfig()
    initial_state: VehicleState = VehicleState()
    physics_dt: float = 0.001
    control_dt: float = 0.002
    mode: str = "hybrid"
    disturbances: tuple[DisturbancePulse, ...] = ()
    seed: int = 0

    def validate(self) -> None:
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.physics_dt <= 0 or self.control_dt <= 0:
            raise ValueError("time steps must be positive")
        if self.physics_dt > self.control_dt:
            raise ValueError("physics step must not exceed the control period")
        ratio = self.control_dt / self.physics_dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("control period must be a multiple of the physics step")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        self.vehicle.validate()
        self.environment.validate()
        self.thrust_model.validate()
        self.cascade_gains.validate()
        self.twsmc_gains.validate()
        self.switch_config.validate()
        for pulse in self.disturbances:
            pulse.validate()
        if hasattr(self.reference, "validate"):
            self.reference.validate()
        if not self.initial_state.is_finite():
            raise ValueError("initial state must be finite")


@dataclass(frozen=True)
class SimRecord:
    """One control-period row of the simulation log."""

    t: float
    state: VehicleState
    z_ref: float
    roll_ref: float
    pitch_ref: float
    yaw_ref: float
    zone: Zone
    strategy: Strategy
    wrench: Quad
    omega: Quad
    sigma: Quad | None
    sat_flags: int


@dataclass(frozen=True)
class Metrics:
    """Scalar summary of one run.  Angles in radians, thrust rates in N/s."""

    rms_z_error: float
    max_z_error: float
    steady_state_z_error: float
    steady_state_segments: tuple[float, ...]
    max_roll: float
    max_pitch: float
    attitude_envelope: float
    chattering_air: float
    chattering_hybrid: float
    chattering_water: float
    crossing_times_down: tuple[float, ...]
    crossing_times_up: tuple[float, ...]
    switch_count: int

    def to_flat_dict(self) -> dict[str, float | int]:
        out: dict[str, float | int] = {
            "rms_z_error": self.rms_z_error,
            "max_z_error": self.max_z_error,
            "steady_state_z_error": self.steady_state_z_error,
            "max_roll": self.max_roll,
            "max_pitch": self.max_pitch,
            "attitude_envelope": self.attitude_envelope,
            "chattering_air": self.chattering_air,
            "chattering_hybrid": self.chattering_hybrid,
            "chattering_water": self.chattering_water,
            "switch_count": self.switch_count,
        }
        for i, v in enumerate(self.steady_state_segments):
            out[f"steady_state_z_error_seg{i}"] = v
        for i, v in enumerate(self.crossing_times_down):
            out[f"crossing_time_down_{i}"] = v
        for i, v in enumerate(self.crossing_times_up):
            out[f"crossing_time_up_{i}"] = v
        return out


@dataclass(frozen=True)
class RunResult:
    records: list[SimRecord]
    events: list[SwitchEvent]
    metrics: Metrics
    diverged: bool = False
    divergence_time: float | None = None


def integrate_step(
    state: VehicleState,
    control: ControlOutput,
    params: VehicleParams,
    env: Environment,
    dt: float,
    disturbance: Wrench6 = ZERO_WRENCH6,
) -> VehicleState:
    """A single classical RK4 step under a held wrench."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    plant = Plant(params, env)
    y = _rk4(plant, state.as_tuple(), control.T_z, control.tau, control.W_G,
             disturbance, dt)
    out = VehicleState.from_tuple(y)
    if not out.is_finite():
        raise ValueError("non-finite state after integration step")
    return out


def _rk4(
    plant: Plant,
    y: tuple[float, ...],
    t_z: float,
    tau,
    w_g: float,
    dist: Wrench6,
    dt: float,
) -> tuple[float, ...]:
    k1 = plant.derivative_flat(y, t_z, tau, w_g, dist)
    half = 0.5 * dt
    y2 = tuple(a + half * b for a, b in zip(y, k1))
    k2 = plant.derivative_flat(y2, t_z, tau, w_g, dist)
    y3 = tuple(a + half * b for a, b in zip(y, k2))
    k3 = plant.derivative_flat(y3, t_z, tau, w_g, dist)
    y4 = tuple(a + dt * b for a, b in zip(y, k3))
    k4 = plant.derivative_flat(y4, t_z, tau, w_g, dist)
    sixth = dt / 6.0
    return tuple(
        a + sixth * (b1 + 2.0 * (b2 + b3) + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def _disturbance_at(pulses: tuple[DisturbancePulse, ...], t: float) -> Wrench6:
    if not pulses:
        return ZERO_WRENCH6
    acc = [0.0] * 6
    hit = False
    for p in pulses:
        if p.t_start <= t < p.t_start + p.duration:
            hit = True
            for i in range(6):
                acc[i] += p.wrench[i]
    return tuple(acc) if hit else ZERO_WRENCH6


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario to completion or divergence."""
    scenario.validate()
    params = scenario.vehicle
    env = scenario.environment
    model = scenario.thrust_model
    plant = Plant(params, env)
    n_sub = round(scenario.control_dt / scenario.physics_dt)
    n_ctrl = round(scenario.duration / scenario.control_dt)
    dt_c = scenario.control_dt
    dt_p = scenario.physics_dt

    state = scenario.initial_state
    supervisor = Supervisor(
        scenario.switch_config,
        initial_strategy(state.position[2], scenario.switch_config),
    )
    fluid0 = fluid_effects(state, params, env)
    memory = ControllerMemory(
        initial_wrench=(
            gravity_feedforward(state, fluid0, params, scenario.cascade_gains),
            0.0, 0.0, 0.0,
        )
    )

    records: list[SimRecord] = []
    events: list[SwitchEvent] = []
    diverged = False
    divergence_time: float | None = None
    w_g_held = 0.0

    for k in range(n_ctrl):
        t = k * dt_c
        ref = reference_at(scenario.reference, t)
        try:
            fluid = fluid_effects(state, params, env)
            strategy, event = supervisor.evaluate_switch(t, state)
            if event is not None:
                events.append(event)
                if scenario.mode == "hybrid":
                    handover(event, memory, state, ref, fluid, params,
                             scenario.cascade_gains, dt_c)

            use_twsmc = scenario.mode == "pure-twsmc" or (
                scenario.mode == "hybrid" and strategy is Strategy.S_H
            )
            sat = 0
            if use_twsmc:
                result = twsmc_step(
                    state, ref, fluid, params, scenario.twsmc_gains,
                    memory.sigma_prev, dt_c, w_g=w_g_held,
                )
                memory.sigma_prev = result.sigma
                wrench = result.wrench
                sigma = result.sigma
                memory.last_smooth_wrench = result.trim_wrench
                if result.saturated[0]:
                    sat |= SAT_THRUST
                if result.saturated[1]:
                    sat |= SAT_TAU_X
                if result.saturated[2]:
                    sat |= SAT_TAU_Y
                if result.saturated[3]:
                    sat |= SAT_TAU_Z
            else:
                wrench = cascade_pid_step(
                    state, ref, memory.pid, scenario.cascade_gains, fluid,
                    params, dt_c,
                )
                sigma = None
                memory.last_smooth_wrench = wrench

            immersions = rotor_immersions(state, params)
            per_ct = tuple(thrust_coefficient(h, model) for h in immersions)
            desired = ControlOutput(T_z=wrench[0], tau=wrench[1:])
            alloc = allocate(desired, per_ct, model, params)
            if alloc.saturated:
                sat |= SAT_ROTOR
            command = alloc.command
            w_g = w_g_held = alloc.W_G

            records.append(SimRecord(
                t=t,
                state=state,
                z_ref=ref.z,
                roll_ref=ref.roll,
                pitch_ref=ref.pitch,
                yaw_ref=ref.yaw,
                zone=classify_zone(state.position[2], params),
                strategy=strategy,
                wrench=wrench,
                omega=command.omega,
                sigma=sigma,
                sat_flags=sat,
            ))

            y = state.as_tuple()
            for j in range(n_sub):
                t_sub = t + j * dt_p
                sub_state = VehicleState.from_tuple(y)
                imm = rotor_immersions(sub_state, params)
                thrusts = thrusts_at_immersion(command, imm, model)
                torques = tuple(rotor_drag_torque(th, model) for th in thrusts)
                t1, t2, t3, t4 = thrusts
                m1, m2, m3, m4 = torques
                t_z = t1 + t2 + t3 + t4
                tau = ((t1 - t3) * params.l, (-t2 + t4) * params.l,
                       -m1 + m2 - m3 + m4)
                dist = _disturbance_at(scenario.disturbances, t_sub)
                y = _rk4(plant, y, t_z, tau, w_g, dist, dt_p)
                if not all(math.isfinite(v) for v in y):
                    raise ValueError("non-finite state during integration")
            state = VehicleState.from_tuple(y)
        except (SingularAttitudeError, ValueError, OverflowError):
            diverged = True
            divergence_time = t
            break

    metrics = compute_metrics(records, scenario)
    return RunResult(records=records, events=events, metrics=metrics,
                     diverged=diverged, divergence_time=divergence_time)


def compute_metrics(records: list[SimRecord], scenario: Scenario) -> Metrics:
    """Recompute all summary metrics from the log records."""
    if not records:
        return Metrics(
            rms_z_error=0.0, max_z_error=0.0, steady_state_z_error=0.0,
            steady_state_segments=(), max_roll=0.0, max_pitch=0.0,
            attitude_envelope=0.0, chattering_air=0.0, chattering_hybrid=0.0,
            chattering_water=0.0, crossing_times_down=(),
            crossing_times_up=(), switch_count=0,
        )
    dt = scenario.control_dt
    errs = [r.z_ref - r.state.position[2] for r in records]
    rms = math.sqrt(sum(e * e for e in errs) / len(errs))
    max_abs = max(abs(e) for e in errs)

    segs: list[float] = []
    for t0, t1 in hold_segments(scenario.reference, scenario.duration):
        w0 = max(t0, t1 - 2.0)
        # Half-open window: at t1 a step reference has already jumped.
        window = [
            abs(e) for r, e in zip(records, errs) if w0 <= r.t < t1
        ]
        if window:
            segs.append(sum(window) / len(window))
    steady = max(segs) if segs else 0.0

    max_roll = max(abs(r.state.attitude[0]) for r in records)
    max_pitch = max(abs(r.state.attitude[1]) for r in records)

    tv = {Zone.AIR: 0.0, Zone.HYBRID: 0.0, Zone.WATER: 0.0}
    span = {Zone.AIR: 0.0, Zone.HYBRID: 0.0, Zone.WATER: 0.0}
    for prev, cur in zip(records, records[1:]):
        if prev.zone is cur.zone:
            tv[cur.zone] += abs(cur.wrench[0] - prev.wrench[0])
            span[cur.zone] += dt
    chatter = {
        z: (tv[z] / span[z] if span[z] > 0 else 0.0) for z in tv
    }

    h_half = scenario.vehicle.H / 2
    down, up = _crossing_times(records, h_half)

    switch_count = sum(
        1 for prev, cur in zip(records, records[1:])
        if prev.strategy is not cur.strategy
    )
    return Metrics(
        rms_z_error=rms,
        max_z_error=max_abs,
        steady_state_z_error=steady,
        steady_state_segments=tuple(segs),
        max_roll=max_roll,
        max_pitch=max_pitch,
        attitude_envelope=max(max_roll, max_pitch),
        chattering_air=chatter[Zone.AIR],
        chattering_hybrid=chatter[Zone.HYBRID],
        chattering_water=chatter[Zone.WATER],
        crossing_times_down=tuple(down),
        crossing_times_up=tuple(up),
        switch_count=switch_count,
    )


def _crossing_times(
    records: list[SimRecord], h_half: float
) -> tuple[list[float], list[float]]:
    """Durations between a reference boundary crossing and the vehicle's.

    Downward: reference drops through +H/2, vehicle subsequently drops
    through -H/2.  Upward: reference rises through -H/2, vehicle
    subsequently rises through +H/2.
    """
    down: list[float] = []
    up: list[float] = []
    n = len(records)
    for i in range(1, n):
        r_prev, r_cur = records[i - 1], records[i]
        if r_prev.z_ref > h_half >= r_cur.z_ref:
            t_cross = _vehicle_crossing(records, i, -h_half, downward=True)
            if t_cross is not None:
                down.append(t_cross - r_cur.t)
        if r_prev.z_ref < -h_half <= r_cur.z_ref:
            t_cross = _vehicle_crossing(records, i, h_half, downward=False)
            if t_cross is not None:
                up.append(t_cross - r_cur.t)
    return down, up


def _vehicle_crossing(
    records: list[SimRecord], start: int, boundary: float, downward: bool
) -> float | None:
    for j in range(start, len(records)):
        z = records[j].state.position[2]
        if downward and z <= boundary:
            return records[j].t
        if not downward and z >= boundary:
            return records[j].t
    return None


# ---------------------------------------------------------------------------
# Output writers.  All floating-point values use 9 significant digits.
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_log_csv(records: list[SimRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for r in records:
            s = r.state
            sigma = ["", "", "", ""] if r.sigma is None else [_fmt(v) for v in r.sigma]
            writer.writerow(
                [_fmt(r.t)]
                + [_fmt(v) for v in s.position]
                + [_fmt(v) for v in s.body_velocity]
                + [_fmt(v) for v in s.attitude]
                + [_fmt(v) for v in s.body_rates]
                + [_fmt(r.z_ref), _fmt(r.roll_ref), _fmt(r.pitch_ref), _fmt(r.yaw_ref)]
                + [r.zone.value, r.strategy.value]
                + [_fmt(v) for v in r.wrench]
                + [_fmt(v) for v in r.omega]
                + sigma
                + [str(r.sat_flags)]
            )


def write_events_csv(events: list[SwitchEvent], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_COLUMNS)
        for e in events:
            writer.writerow([
                _fmt(e.t), e.from_strategy.value, e.to_strategy.value,
                _fmt(e.z), _fmt(e.z_dot), _fmt(e.roll), _fmt(e.pitch),
                _fmt(e.roll_rate), _fmt(e.pitch_rate),
            ])


def write_metrics_json(result: RunResult, path: str) -> None:
    doc: dict[str, object] = {"diverged": result.diverged}
    if result.divergence_time is not None:
        doc["divergence_time"] = result.divergence_time
    doc.update(result.metrics.to_flat_dict())
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Controller comparison.
# ---------------------------------------------------------------------------

def comparison_reference(shape: str, amplitude: float = 0.5,
                         period: float = 10.0, t_step: float = 2.0):
    from .references import CosineRef, SineRef, StepRef

    if shape == "step":
        return StepRef(z_from=amplitude, z_to=-amplitude, t_step=t_step)
    if shape == "sine":
        return SineRef(amplitude=amplitude, period=period)
    if shape == "cosine":
        return CosineRef(amplitude=amplitude, period=period)
    raise ValueError(f"unknown comparison shape {shape!r}")


# Comparison runs start this far below the initial reference so every
# controller is genuinely exercised from the first sample (starting exactly
# on the reference would leave a sliding-mode controller at its analytic
# equilibrium, masking its chattering in the hold segments).
COMPARISON_START_OFFSET = -0.05


def build_comparison_scenarios(base: Scenario) -> dict[tuple[str, str], Scenario]:
    """Nine scenarios: the three canonical shapes times the three modes.

    Each run starts at rest slightly below the shape's initial reference
    altitude; everything else is inherited from the base scenario.
    """
    out: dict[tuple[str, str], Scenario] = {}
    for shape in COMPARISON_SHAPES:
        ref = comparison_reference(shape)
        z0 = ref.evaluate(0.0)[0] + COMPARISON_START_OFFSET
        init = replace(base.initial_state, position=(0.0, 0.0, z0))
        for mode in MODES:
            out[(shape, mode)] = replace(
                base, reference=ref, initial_state=init, mode=mode,
            )
    return out


def _run_for_compare(item: tuple[tuple[str, str], Scenario]):
    key, scenario = item
    return key, run(scenario)


def compare(
    scenarios: dict[tuple[str, str], Scenario]
) -> dict[tuple[str, str], RunResult]:
    """Run a set of labelled scenarios, optionally in parallel.

    Parallelism is capped by the MHAUV_SIM_THREADS environment variable
    (default 1, sequential).  Results are keyed and ordered like the input,
    so output files are byte-identical either way.
    """
    items = sorted(scenarios.items())
    workers = int(os.environ.get("MHAUV_SIM_THREADS", "1") or "1")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_for_compare, items))
    else:
        results = dict(_run_for_compare(item) for item in items)
    return results


COMPARISON_COLUMNS = (
    "shape", "mode", "diverged", "rms_z_error", "max_z_error",
    "steady_state_z_error", "attitude_envelope", "chattering_air",
    "chattering_hybrid", "chattering_water", "crossing_time_down",
    "crossing_time_up", "switch_count",
)


def write_comparison_csv(
    results: dict[tuple[str, str], RunResult], path: str
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARISON_COLUMNS)
        for (shape, mode) in sorted(results):
            res = results[(shape, mode)]
            m = res.metrics
            writer.writerow([
                shape, mode, str(res.diverged).lower(),
                _fmt(m.rms_z_error), _fmt(m.max_z_error),
                _fmt(m.steady_state_z_error), _fmt(m.attitude_envelope),
                _fmt(m.chattering_air), _fmt(m.chattering_hybrid),
                _fmt(m.chattering_water),
                _fmt(m.crossing_times_down[0]) if m.crossing_times_down else "",
                _fmt(m.crossing_times_up[0]) if m.crossing_times_up else "",
                str(m.switch_count),
            ])
