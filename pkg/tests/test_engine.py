import pytest

from mhauv_sim.controllers import CascadeGains, PidGains
from mhauv_sim.engine import (
    DisturbancePulse,
    Scenario,
    build_comparison_scenarios,
    compare,
    compute_metrics,
    integrate_step,
    run,
    write_comparison_csv,
    write_events_csv,
    write_log_csv,
    write_metrics_json,
    LOG_COLUMNS,
)
from mhauv_sim.references import ProfileRef, SineRef, StepRef
from mhauv_sim.supervisor import Strategy
from mhauv_sim.types import ControlOutput, Environment, VehicleParams, VehicleState, Zone

PARAMS = VehicleParams()
ENV = Environment()
HOVER = PARAMS.m_v * ENV.g0

EXPERIMENT_PROFILE = ProfileRef(
    knots=((0, 0), (2, 0.5), (7, 0.5), (11, -0.5), (16, -0.5), (20, 0.5), (25, 0.5))
)


def test_integrate_step_preserves_equilibrium():
    state = VehicleState(position=(0, 0, 0.5))
    control = ControlOutput(T_z=HOVER, tau=(0.0, 0.0, 0.0))
    out = integrate_step(state, control, PARAMS, ENV, 0.01)
    assert max(abs(a - b) for a, b in zip(out.as_tuple(), state.as_tuple())) < 1e-14


def test_integrate_step_free_fall_displacement():
    state = VehicleState(position=(0, 0, 1.0))
    control = ControlOutput(T_z=0.0, tau=(0.0, 0.0, 0.0))
    out = integrate_step(state, control, PARAMS, ENV, 0.1)
    assert out.position[2] - 1.0 == pytest.approx(-0.04905, abs=1e-9)


def test_integrate_step_requires_positive_dt():
    state = VehicleState(position=(0, 0, 1.0))
    with pytest.raises(ValueError):
        integrate_step(state, ControlOutput(T_z=0.0, tau=(0, 0, 0)), PARAMS, ENV, 0.0)


def test_zero_wrench_free_fall_matches_analytic():
    # Wrench forced to zero: position follows -g t^2 / 2 through air.
    state = VehicleState(position=(0, 0, 10.0))
    control = ControlOutput(T_z=0.0, tau=(0.0, 0.0, 0.0))
    dt = 1e-3
    for k in range(500):
        state = integrate_step(state, control, PARAMS, ENV, dt)
    t = 0.5
    assert state.position[2] - 10.0 == pytest.approx(-0.5 * ENV.g0 * t * t, abs=1e-6)


def test_rk4_halving_step_shrinks_error_16x():
    # Submerged sinking with drag against a fine-step reference solution.
    def final_z(dt, steps):
        state = VehicleState(position=(0, 0, -1.0))
        control = ControlOutput(T_z=0.0, tau=(0.0, 0.0, 0.0))
        for _ in range(steps):
            state = integrate_step(state, control, PARAMS, ENV, dt)
        return state.position[2]

    z_ref = final_z(1e-5, 100000)
    err_coarse = abs(final_z(4e-3, 250) - z_ref)
    err_fine = abs(final_z(2e-3, 500) - z_ref)
    assert err_coarse / err_fine == pytest.approx(16.0, rel=0.3)


def test_hover_scenario_regulates_tightly():
    scenario = Scenario(
        reference=StepRef(z_from=0.5, z_to=0.5, t_step=0.0),
        duration=8.0,
        initial_state=VehicleState(position=(0, 0, 0.5)),
    )
    result = run(scenario)
    assert not result.diverged
    late = [abs(r.z_ref - r.state.position[2]) for r in result.records if r.t > 5.0]
    assert max(late) < 1e-3


def test_step_scenario_zone_and_strategy_sequence():
    scenario = Scenario(reference=StepRef(0.5, -0.5, 2.0), duration=12.0,
                        initial_state=VehicleState(position=(0, 0, 0.5)))
    result = run(scenario)
    assert not result.diverged
    zones = [r.zone for r in result.records]
    strategies = [r.strategy for r in result.records]

    def order_of_first(seq, items):
        return [min(i for i, v in enumerate(seq) if v is item) for item in items]

    zi = order_of_first(zones, [Zone.AIR, Zone.HYBRID, Zone.WATER])
    assert zi == sorted(zi)
    si = order_of_first(strategies, [Strategy.S_A, Strategy.S_H, Strategy.S_W])
    assert si == sorted(si)
    # Strategy/zone consistency: PID strategies never run in the opposite medium.
    for r in result.records:
        if r.strategy is Strategy.S_A:
            assert r.zone is not Zone.WATER
        if r.strategy is Strategy.S_W:
            assert r.zone is not Zone.AIR


def test_switch_events_match_strategy_column():
    scenario = Scenario(reference=SineRef(0.5, 10.0), duration=10.0)
    result = run(scenario)
    changes = sum(
        1 for a, b in zip(result.records, result.records[1:])
        if a.strategy is not b.strategy
    )
    assert len(result.events) == changes == result.metrics.switch_count


def test_metrics_recomputation_is_identity():
    scenario = Scenario(reference=SineRef(0.5, 10.0), duration=6.0)
    result = run(scenario)
    again = compute_metrics(result.records, scenario)
    assert again == result.metrics


def test_run_is_deterministic():
    scenario = Scenario(reference=SineRef(0.5, 10.0), duration=4.0,
                        disturbances=(DisturbancePulse(1.0, 0.1, (0, 0, 0, 0.02, 0, 0)),))
    a = run(scenario)
    b = run(scenario)
    assert a.records == b.records
    assert a.events == b.events
    assert a.metrics == b.metrics


def test_disturbance_pulse_perturbs_trajectory():
    base = Scenario(reference=StepRef(0.5, 0.5, 0.0), duration=2.0,
                    initial_state=VehicleState(position=(0, 0, 0.5)))
    with_pulse = Scenario(
        reference=base.reference, duration=2.0,
        initial_state=base.initial_state,
        disturbances=(DisturbancePulse(0.5, 0.2, (0, 0, 0, 0.05, 0, 0)),),
    )
    quiet = run(base)
    pulsed = run(with_pulse)
    assert pulsed.metrics.max_roll > quiet.metrics.max_roll


def test_divergent_scenario_keeps_partial_log():
    # Absurd gain set: attitude authority gained down to nothing, so an
    # initial tumble carries the pitch into the gimbal-lock guard.
    gains = CascadeGains(
        attitude=PidGains(kp=0.0, ki=0.0, kd=0.0, out_limit=1e-9),
    )
    scenario = Scenario(
        reference=StepRef(0.5, 0.5, 0.0), duration=5.0,
        cascade_gains=gains,
        initial_state=VehicleState(position=(0, 0, 0.5),
                                   body_rates=(0.0, 20.0, 0.0)),
    )
    result = run(scenario)
    assert result.diverged
    assert result.divergence_time is not None
    assert len(result.records) >= 1
    assert result.records[-1].t <= result.divergence_time


def test_experiment_profile_metrics_fields():
    scenario = Scenario(reference=EXPERIMENT_PROFILE, duration=25.0)
    result = run(scenario)
    m = result.metrics
    assert not result.diverged
    assert len(m.steady_state_segments) == 3
    assert m.steady_state_z_error == max(m.steady_state_segments)
    assert len(m.crossing_times_down) == 1
    assert len(m.crossing_times_up) == 1
    assert m.crossing_times_down[0] > 0
    assert m.switch_count >= 4


def test_scenario_validation():
    good = Scenario(reference=SineRef(0.5, 10.0), duration=1.0)
    good.validate()
    with pytest.raises(ValueError):
        Scenario(reference=SineRef(0.5, 10.0), duration=0.0).validate()
    with pytest.raises(ValueError):
        Scenario(reference=SineRef(0.5, 10.0), duration=1.0,
                 physics_dt=0.004, control_dt=0.002).validate()
    with pytest.raises(ValueError):
        Scenario(reference=SineRef(0.5, 10.0), duration=1.0,
                 physics_dt=0.0015, control_dt=0.002).validate()
    with pytest.raises(ValueError):
        Scenario(reference=SineRef(0.5, 10.0), duration=1.0,
                 mode="fancy").validate()


def test_log_csv_schema(tmp_path):
    scenario = Scenario(reference=SineRef(0.5, 10.0), duration=1.0)
    result = run(scenario)
    path = tmp_path / "log.csv"
    write_log_csv(result.records, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(LOG_COLUMNS)
    assert len(lines) == 1 + len(result.records)
    first = lines[1].split(",")
    assert len(first) == len(LOG_COLUMNS)
    assert first[LOG_COLUMNS.index("zone")] in ("Air", "Hybrid", "Water")
    assert first[LOG_COLUMNS.index("strategy")] in ("S_A", "S_H", "S_W")


def test_metrics_json_round_trip(tmp_path):
    import json

    scenario = Scenario(reference=SineRef(0.5, 10.0), duration=1.0)
    result = run(scenario)
    path = tmp_path / "metrics.json"
    write_metrics_json(result, str(path))
    doc = json.loads(path.read_text())
    assert doc["diverged"] is False
    assert doc["rms_z_error"] == result.metrics.rms_z_error


def test_comparison_scenarios_cover_shapes_and_modes():
    base = Scenario(reference=StepRef(0.5, -0.5, 2.0), duration=4.0)
    scenarios = build_comparison_scenarios(base)
    assert len(scenarios) == 9
    shapes = {k[0] for k in scenarios}
    modes = {k[1] for k in scenarios}
    assert shapes == {"step", "sine", "cosine"}
    assert modes == {"pure-pid", "pure-twsmc", "hybrid"}
    for (shape, mode), sc in scenarios.items():
        assert sc.mode == mode
        z0 = sc.reference.evaluate(0.0)[0]
        assert sc.initial_state.position[2] == pytest.approx(z0 - 0.05)


def test_compare_writes_stable_table(tmp_path):
    base = Scenario(reference=StepRef(0.5, -0.5, 2.0), duration=3.0)
    results = compare(build_comparison_scenarios(base))
    path_a = tmp_path / "a.csv"
    path_b = tmp_path / "b.csv"
    write_comparison_csv(results, str(path_a))
    write_comparison_csv(compare(build_comparison_scenarios(base)), str(path_b))
    assert path_a.read_bytes() == path_b.read_bytes()
    header = path_a.read_text().splitlines()[0]
    assert header.startswith("shape,mode,diverged,rms_z_error")


def test_compare_parallelism_matches_serial(monkeypatch):
    base = Scenario(reference=StepRef(0.5, -0.5, 1.0), duration=2.0)
    scenarios = build_comparison_scenarios(base)
    monkeypatch.setenv("MHAUV_SIM_THREADS", "1")
    serial = compare(scenarios)
    monkeypatch.setenv("MHAUV_SIM_THREADS", "3")
    parallel = compare(scenarios)
    for key in serial:
        assert serial[key].records == parallel[key].records
        assert serial[key].metrics == parallel[key].metrics


def test_events_csv_schema(tmp_path):
    scenario = Scenario(reference=SineRef(0.5, 10.0), duration=6.0)
    result = run(scenario)
    path = tmp_path / "events.csv"
    write_events_csv(result.events, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,from,to,z,z_dot,phi,theta,phi_dot,theta_dot"
    assert len(lines) == 1 + len(result.events)
