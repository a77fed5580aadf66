import pytest
from hypothesis import given, strategies as st

from mhauv_sim.fluid import fluid_effects, zone_weight
from mhauv_sim.types import Environment, VehicleParams, VehicleState

PARAMS = VehicleParams()
ENV = Environment()


def test_zone_weight_plateaus_and_midpoint():
    assert zone_weight(0.05, PARAMS) == 0.0
    assert zone_weight(0.0, PARAMS) == 0.5
    assert zone_weight(-0.05, PARAMS) == 1.0


def test_zone_weight_quarter_depth():
    # 0.5 - (-0.025)/0.1 evaluated by hand.
    assert zone_weight(-0.025, PARAMS) == pytest.approx(0.75, abs=1e-15)


@pytest.mark.parametrize("boundary", [0.05, -0.05])
@pytest.mark.parametrize("eps", [1e-6, 1e-9, 1e-12])
def test_zone_weight_continuity(boundary, eps):
    w0 = zone_weight(boundary, PARAMS)
    assert abs(zone_weight(boundary + eps, PARAMS) - w0) <= eps / PARAMS.H + 1e-15
    assert abs(zone_weight(boundary - eps, PARAMS) - w0) <= eps / PARAMS.H + 1e-15


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_zone_weight_monotone_non_increasing(z1, z2):
    lo, hi = min(z1, z2), max(z1, z2)
    assert zone_weight(lo, PARAMS) >= zone_weight(hi, PARAMS)


def test_zone_weight_rejects_non_finite():
    with pytest.raises(ValueError):
        zone_weight(float("nan"), PARAMS)


def test_air_zone_all_effects_vanish():
    state = VehicleState(position=(0, 0, 0.3), body_velocity=(1.0, -2.0, 0.5),
                         body_rates=(1.0, 1.0, 1.0))
    fx = fluid_effects(state, PARAMS, ENV)
    assert fx.added_mass == 0.0
    assert fx.buoyancy_force == 0.0
    assert fx.drag_force == (0.0, 0.0, 0.0)
    assert fx.drag_moment == (0.0, 0.0, 0.0)
    assert fx.effective_gravity == ENV.g0


def test_water_zone_at_rest_buoyancy_and_gravity():
    state = VehicleState(position=(0, 0, -1.0))
    fx = fluid_effects(state, PARAMS, ENV)
    assert fx.weight_coefficient == 1.0
    assert fx.buoyancy_force == pytest.approx(1.4715, abs=1e-12)
    assert fx.effective_gravity == pytest.approx(4.905, abs=1e-12)
    assert fx.drag_force == (0.0, 0.0, 0.0)


def test_water_zone_surge_drag_magnitude_and_sign():
    state = VehicleState(position=(0, 0, -1.0), body_velocity=(1.0, 0.0, 0.0))
    fx = fluid_effects(state, PARAMS, ENV)
    # 0.5 * 1.0 * 0.02 * 1000 * 1 * |1| = 10 N opposing +u.
    assert fx.drag_force[0] == pytest.approx(-10.0, abs=1e-12)
    assert fx.drag_force[1] == 0.0
    assert fx.drag_force[2] == 0.0


def test_buoyancy_equals_weighted_archimedes_exactly():
    for z in (-0.05, -0.02, 0.0, 0.02, 0.049):
        fx = fluid_effects(VehicleState(position=(0, 0, z)), PARAMS, ENV)
        c = zone_weight(z, PARAMS)
        assert fx.buoyancy_force == c * ENV.rho_water * ENV.g0 * PARAMS.V_0
        assert 0.0 <= fx.weight_coefficient <= 1.0


vel = st.floats(-3.0, 3.0)


@given(st.floats(-0.2, 0.2), vel, vel, vel, vel, vel, vel)
def test_drag_power_never_positive(z, u, v, w, p, q, r):
    state = VehicleState(position=(0, 0, z), body_velocity=(u, v, w),
                         body_rates=(p, q, r))
    fx = fluid_effects(state, PARAMS, ENV)
    nu = (u, v, w, p, q, r)
    power = sum(f * x for f, x in zip(fx.drag_force + fx.drag_moment, nu))
    assert power <= 1e-12


def test_drag_opposes_each_channel():
    state = VehicleState(position=(0, 0, -0.02),
                         body_velocity=(0.5, -0.3, 0.2),
                         body_rates=(-1.0, 2.0, -0.5))
    fx = fluid_effects(state, PARAMS, ENV)
    nu = state.body_velocity + state.body_rates
    for f, x in zip(fx.drag_force + fx.drag_moment, nu):
        assert f * x < 0.0


def test_assembled_effects_continuous_at_water_boundary():
    state_kwargs = dict(body_velocity=(0.4, -0.1, 0.2), body_rates=(0.3, 0.2, 0.1))
    at_boundary = fluid_effects(
        VehicleState(position=(0, 0, -0.05), **state_kwargs), PARAMS, ENV
    )
    near_boundary = fluid_effects(
        VehicleState(position=(0, 0, -0.05 + 1e-12), **state_kwargs), PARAMS, ENV
    )
    for name in ("added_mass", "buoyancy_force", "effective_gravity"):
        a, b = getattr(at_boundary, name), getattr(near_boundary, name)
        assert a == pytest.approx(b, rel=1e-9)
    for a, b in zip(
        at_boundary.drag_force + at_boundary.drag_moment,
        near_boundary.drag_force + near_boundary.drag_moment,
    ):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-15)
