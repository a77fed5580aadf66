import math

import pytest
from hypothesis import given, strategies as st

from mhauv_sim.propeller import (
    RotorCommand,
    ThrustModel,
    allocate,
    ct_curve,
    mix,
    net_rotor_rate,
    rotor_immersion,
    rotor_immersions,
    rotor_thrust,
    thrust_coefficient,
    wrench_from_command,
)
from mhauv_sim.types import ControlOutput, VehicleParams, VehicleState

MODEL = ThrustModel()
PARAMS = VehicleParams()


def test_ct_air_plateau():
    assert thrust_coefficient(-60.0, MODEL) == 1.5e-9
    assert thrust_coefficient(-500.0, MODEL) == 1.5e-9


def test_ct_water_plateau():
    assert thrust_coefficient(150.0, MODEL) == 1.3e-6
    assert thrust_coefficient(1000.0, MODEL) == 1.3e-6


def test_ct_bridge_midpoint_is_geometric_mean():
    # alpha = (100 - 25)/150 = 0.5, so C_T is the geometric mean of the
    # plateaus; oracle computed independently.
    expected = math.sqrt(1.5e-9 * 1.3e-6)
    assert thrust_coefficient(25.0, MODEL) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("breakpoint_h", [-50.0, 100.0])
def test_ct_continuity_at_breakpoints(breakpoint_h):
    eps = 1e-9
    lo = thrust_coefficient(breakpoint_h - eps, MODEL)
    hi = thrust_coefficient(breakpoint_h + eps, MODEL)
    assert lo == pytest.approx(hi, rel=1e-9)
    at = thrust_coefficient(breakpoint_h, MODEL)
    assert lo == pytest.approx(at, rel=1e-9)


@given(st.floats(-300, 300), st.floats(-300, 300))
def test_ct_monotone_non_decreasing(h1, h2):
    lo, hi = min(h1, h2), max(h1, h2)
    assert thrust_coefficient(lo, MODEL) <= thrust_coefficient(hi, MODEL) * (1 + 1e-12)


def test_log_ct_affine_on_bridge():
    n = 151
    hs = [-50 + 150 * i / (n - 1) for i in range(n)]
    logs = [math.log(thrust_coefficient(h, MODEL)) for h in hs]
    second_diffs = [
        logs[i + 1] - 2 * logs[i] + logs[i - 1] for i in range(1, n - 1)
    ]
    assert max(abs(d) for d in second_diffs) < 1e-9


def test_rotor_thrust_zero_speed():
    assert rotor_thrust(0.0, 50.0, MODEL) == 0.0


def test_rotor_thrust_water_example():
    model = ThrustModel(diameter=0.127)
    # 1.3e-6 * (2000)^2 * 0.127^4, evaluated by hand.
    expected = 1.3e-6 * 4.0e6 * 0.127**4
    assert expected == pytest.approx(1.3527e-3, rel=1e-4)
    assert rotor_thrust(2000.0, 150.0, model) == pytest.approx(expected, rel=1e-12)


def test_rotor_thrust_air_example():
    model = ThrustModel(diameter=0.127)
    expected = 1.5e-9 * 4.0e6 * 0.127**4
    assert rotor_thrust(2000.0, -60.0, model) == pytest.approx(expected, rel=1e-12)


def test_rotor_thrust_rejects_negative_speed():
    with pytest.raises(ValueError):
        rotor_thrust(-1.0, 0.0, MODEL)


def test_rotor_immersion_level_submerged():
    state = VehicleState(position=(0, 0, -0.1))
    # Rotor plane rides d_prop above the CG: z = -0.1 + 0.02 -> 80 mm deep.
    for i in range(4):
        assert rotor_immersion(state, i, PARAMS) == pytest.approx(80.0, abs=1e-9)


def test_rotor_immersion_high_air():
    state = VehicleState(position=(0, 0, 1.0))
    assert rotor_immersion(state, 0, PARAMS) == pytest.approx(-1020.0, abs=1e-9)


def test_rotor_immersion_roll_asymmetry():
    roll = math.radians(10.0)
    state = VehicleState(attitude=(roll, 0.0, 0.0))
    h = rotor_immersions(state, PARAMS)
    mean_13 = (h[0] + h[2]) / 2
    # Rotors 1 and 3 sit on the +-y arms: rolling offsets them symmetrically.
    assert h[0] - mean_13 == pytest.approx(-(h[2] - mean_13), abs=1e-9)
    # Rotors on the roll axis are unaffected.
    assert h[1] == pytest.approx(h[3], abs=1e-9)
    # With no rotor-plane offset the pair is exactly antisymmetric.
    params0 = VehicleParams(d_prop=0.0)
    h0 = rotor_immersions(state, params0)
    assert h0[0] == pytest.approx(-h0[2], abs=1e-9)


def test_mix_symmetric_hover():
    out = mix((1.0, 1.0, 1.0, 1.0), (0.01, 0.01, 0.01, 0.01), PARAMS)
    assert out.T_z == 4.0
    assert out.tau == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


def test_mix_roll_example():
    out = mix((2.0, 1.0, 0.0, 1.0), (0.0,) * 4, PARAMS)
    assert out.T_z == pytest.approx(4.0)
    assert out.tau[0] == pytest.approx(0.2, abs=1e-15)
    assert out.tau[1] == pytest.approx(0.0, abs=1e-15)


def test_mix_pitch_example():
    out = mix((1.0, 2.0, 1.0, 0.0), (0.0,) * 4, PARAMS)
    assert out.tau[1] == pytest.approx(-0.2, abs=1e-15)
    assert out.tau[0] == pytest.approx(0.0, abs=1e-15)


def test_mix_rejects_negative_thrust():
    with pytest.raises(ValueError):
        mix((1.0, -0.1, 1.0, 1.0), (0.0,) * 4, PARAMS)


@given(
    st.tuples(*[st.floats(0, 3)] * 4),
    st.tuples(*[st.floats(0, 3)] * 4),
    st.floats(0.1, 2.0),
    st.floats(0.1, 2.0),
)
def test_mix_is_linear(t_a, t_b, a, b):
    torques = (0.0, 0.0, 0.0, 0.0)
    mixed_a = mix(t_a, torques, PARAMS)
    mixed_b = mix(t_b, torques, PARAMS)
    combined = mix(tuple(a * x + b * y for x, y in zip(t_a, t_b)), torques, PARAMS)
    assert combined.T_z == pytest.approx(a * mixed_a.T_z + b * mixed_b.T_z, rel=1e-12, abs=1e-12)
    for i in range(3):
        assert combined.tau[i] == pytest.approx(
            a * mixed_a.tau[i] + b * mixed_b.tau[i], rel=1e-12, abs=1e-12
        )


def test_allocate_symmetric_collective():
    desired = ControlOutput(T_z=4.0, tau=(0.0, 0.0, 0.0))
    result = allocate(desired, (1.5e-9,) * 4, MODEL, PARAMS)
    assert not result.saturated
    assert len(set(result.command.omega)) == 1
    assert sum(result.thrusts) == pytest.approx(4.0, rel=1e-12)


def test_allocate_round_trips_feasible_wrenches():
    import random

    rng = random.Random(7)
    cts = (1.5e-9, 2e-9, 1.2e-8, 1.3e-6)
    for _ in range(100):
        tz = rng.uniform(0.5, 6.0)
        room = tz / 4 * 0.9
        tau = (
            rng.uniform(-room, room) * 2 * PARAMS.l * 0.45,
            rng.uniform(-room, room) * 2 * PARAMS.l * 0.45,
            rng.uniform(-room, room) * 4 * MODEL.torque_thrust_ratio * 0.05,
        )
        desired = ControlOutput(T_z=tz, tau=tau)
        result = allocate(desired, cts, MODEL, PARAMS)
        assert not result.saturated
        torques = tuple(MODEL.torque_thrust_ratio * t for t in result.thrusts)
        back = mix(result.thrusts, torques, PARAMS)
        assert back.T_z == pytest.approx(tz, rel=1e-9)
        for i in range(3):
            assert back.tau[i] == pytest.approx(tau[i], rel=1e-9, abs=1e-12)


def test_allocate_speed_inversion_consistent():
    state = VehicleState(position=(0, 0, -0.02), attitude=(0.05, -0.03, 0.2))
    imm = rotor_immersions(state, PARAMS)
    cts = tuple(thrust_coefficient(h, MODEL) for h in imm)
    desired = ControlOutput(T_z=3.0, tau=(0.02, -0.01, 0.001))
    result = allocate(desired, cts, MODEL, PARAMS)
    realized = wrench_from_command(result.command, imm, MODEL, PARAMS)
    assert realized.T_z == pytest.approx(3.0, rel=1e-9)
    for i in range(3):
        assert realized.tau[i] == pytest.approx(desired.tau[i], rel=1e-9, abs=1e-12)


def test_allocate_roll_beyond_feasibility_flags_saturation():
    desired = ControlOutput(T_z=2.0, tau=(0.11, 0.0, 0.0))  # > l*T_z/2 = 0.1
    result = allocate(desired, (1.3e-6,) * 4, MODEL, PARAMS)
    assert result.saturated
    assert min(result.thrusts) >= 0.0
    # Collective is preserved; the roll differential is shed.
    assert sum(result.thrusts) == pytest.approx(2.0, rel=1e-12)


def test_allocate_pure_torque_at_zero_collective_allocates_nothing():
    desired = ControlOutput(T_z=0.0, tau=(0.5, -0.5, 0.1))
    result = allocate(desired, (1.5e-9,) * 4, MODEL, PARAMS)
    assert result.saturated
    assert result.thrusts == (0.0, 0.0, 0.0, 0.0)


def test_allocate_yaw_cannot_starve_roll():
    # A railed yaw demand must not reduce the realizable roll torque.
    desired = ControlOutput(T_z=4.0, tau=(0.05, 0.0, 0.5))
    result = allocate(desired, (1.5e-9,) * 4, MODEL, PARAMS)
    torques = tuple(MODEL.torque_thrust_ratio * t for t in result.thrusts)
    back = mix(result.thrusts, torques, PARAMS)
    assert back.tau[0] == pytest.approx(0.05, rel=1e-9)
    assert result.saturated  # the yaw share was shed


def test_negative_collective_is_unrepresentable():
    # The wrench type itself refuses a negative collective, so allocation
    # can never be asked for one.
    with pytest.raises(ValueError):
        ControlOutput(T_z=-1.0, tau=(0.0, 0.0, 0.0))


def test_allocate_rejects_non_positive_coefficients():
    desired = ControlOutput(T_z=1.0, tau=(0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        allocate(desired, (1.5e-9, 0.0, 1.5e-9, 1.5e-9), MODEL, PARAMS)


def test_net_rotor_rate_vanishes_at_symmetric_hover():
    assert net_rotor_rate(RotorCommand(omega=(1000.0,) * 4)) == 0.0
    wg = net_rotor_rate(RotorCommand(omega=(1200.0, 1000.0, 1200.0, 1000.0)))
    assert wg == pytest.approx(400.0 * math.pi / 30.0, rel=1e-12)


def test_ct_curve_sampling():
    samples = ct_curve(-200.0, 200.0, 401, MODEL)
    assert len(samples) == 401
    assert samples[0] == (-200.0, 1.5e-9)
    assert samples[-1][1] == 1.3e-6
    values = [c for _, c in samples]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(values, values[1:]))


def test_ct_curve_rejects_bad_ranges():
    with pytest.raises(ValueError):
        ct_curve(0.0, 0.0, 2, MODEL)
    with pytest.raises(ValueError):
        ct_curve(-10.0, 10.0, 1, MODEL)


def test_thrust_model_validation():
    with pytest.raises(ValueError):
        ThrustModel(c_t_air=2e-6).validate()  # air above water coefficient
    with pytest.raises(ValueError):
        ThrustModel(h_air=200.0).validate()
    ThrustModel().validate()
