from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cinewild.core import CameraInput, CameraState, DroneInput, DroneState, EulerAngles, TargetState
from cinewild.plant import (
    Limits,
    SimConfig,
    clamp_to_limits,
    forecast_target,
    step_camera,
    step_drone,
)

LIM = Limits()
big = st.floats(-100, 100)
vec = st.tuples(big, big, big)


def _close(a: DroneState, b: DroneState, tol=1e-12):
    np.testing.assert_allclose(a.p_d, b.p_d, atol=tol)
    np.testing.assert_allclose(a.v_d, b.v_d, atol=tol)
    np.testing.assert_allclose(a.gimbal.as_array(), b.gimbal.as_array(), atol=tol)


def test_step_drone_examples():
    x = DroneState((1, 2, 3), (0, 0, 0), EulerAngles(0.1, 0.2, 0.3))
    _close(step_drone(x, DroneInput(), 0.2), x)
    y = step_drone(DroneState((0, 0, 0)), DroneInput((1, 0, 0)), 0.2)
    np.testing.assert_allclose(y.p_d, [0, 0, 0])
    np.testing.assert_allclose(y.v_d, [0.2, 0, 0])


def test_constant_acceleration_closed_form():
    dt, a = 0.2, np.array([1.0, -0.5, 0.25])
    x = DroneState((0, 0, 0))
    for k in range(1, 11):
        x = step_drone(x, DroneInput(a), dt)
        np.testing.assert_allclose(x.v_d, k * dt * a, atol=1e-12)
        # explicit Euler: p_k = a dt^2 k(k-1)/2
        np.testing.assert_allclose(x.p_d, a * dt * dt * k * (k - 1) / 2, atol=1e-12)


def test_step_camera_examples():
    assert step_camera(CameraState(35), CameraInput(0), 0.2).f == 35
    assert step_camera(CameraState(35), CameraInput(10), 0.2).f == pytest.approx(37)
    f = CameraState(290)
    for _ in range(10):
        f = step_camera(f, CameraInput(60), 0.2)
    assert f.f > LIM.f_max


@given(vec, vec, vec, vec, st.floats(0, 1))
def test_step_is_affine(p1, p2, a1, a2, lam):
    x1, x2 = DroneState(p1, a2), DroneState(p2, a1)
    u1, u2 = DroneInput(a1, (0.1, 0.0, 0.2)), DroneInput(a2, (0.0, -0.3, 0.1))
    mix = lambda s, t: lam * np.asarray(s) + (1 - lam) * np.asarray(t)  # noqa: E731
    xm = DroneState(mix(x1.p_d, x2.p_d), mix(x1.v_d, x2.v_d))
    um = DroneInput(mix(u1.a_d, u2.a_d), mix(u1.omega, u2.omega))
    lhs = step_drone(xm, um, 0.2)
    r1, r2 = step_drone(x1, u1, 0.2), step_drone(x2, u2, 0.2)
    np.testing.assert_allclose(lhs.p_d, mix(r1.p_d, r2.p_d), atol=1e-9)
    np.testing.assert_allclose(lhs.v_d, mix(r1.v_d, r2.v_d), atol=1e-9)
    np.testing.assert_allclose(lhs.gimbal.as_array(), mix(r1.gimbal.as_array(), r2.gimbal.as_array()), atol=1e-9)
    fc = step_camera(CameraState(mix(40, 80)), CameraInput(mix(5, -7)), 0.2).f
    assert fc == pytest.approx(mix(step_camera(CameraState(40), CameraInput(5), 0.2).f,
                                   step_camera(CameraState(80), CameraInput(-7), 0.2).f))


def test_clamp_examples():
    x = DroneState((0, 0, 5), (1, 1, 0), EulerAngles(0, 0.2, 0))
    c, u, uc = CameraState(50), DroneInput((1, 0, 0), (0.1, 0.1, 0.1)), CameraInput(5)
    out = clamp_to_limits(x, c, u, uc, LIM)
    _close(out[0], x)
    assert out[1] == c and out[3] == uc
    np.testing.assert_allclose(out[2].a_d, u.a_d)

    fast = DroneInput((2 * LIM.a_max, 0, 0))
    a = clamp_to_limits(x, c, fast, uc, LIM)[2].a_d
    np.testing.assert_allclose(a, [LIM.a_max, 0, 0])
    assert clamp_to_limits(x, CameraState(LIM.f_max + 5), u, uc, LIM)[1].f == LIM.f_max


@given(vec, vec, st.tuples(*[st.floats(-3, 3)] * 3), vec, vec, st.floats(-500, 500), st.floats(-500, 500))
def test_clamp_idempotent_and_shrinking(p, v, g, a, w, f, vf):
    x, c = DroneState(p, v, EulerAngles(*g)), CameraState(f)
    u, uc = DroneInput(a, w), CameraInput(vf)
    once = clamp_to_limits(x, c, u, uc, LIM)
    twice = clamp_to_limits(*once, LIM)
    # Radial rescaling can land one ulp above the cap, so compare to rounding.
    _close(once[0], twice[0], 1e-12)
    assert once[1] == twice[1] and once[3] == twice[3]
    np.testing.assert_allclose(once[2].a_d, twice[2].a_d, rtol=1e-12)
    np.testing.assert_array_equal(once[2].omega, twice[2].omega)

    xd, xc, ud, ucc = once
    assert np.linalg.norm(xd.v_d) <= min(np.linalg.norm(v), LIM.v_max) + 1e-9
    assert np.linalg.norm(ud.a_d) <= min(np.linalg.norm(a), LIM.a_max) + 1e-9
    assert np.all(np.abs(ud.omega) <= np.minimum(np.abs(w), LIM.omega_max))
    assert abs(ucc.v_f) <= min(abs(vf), LIM.v_f_max)
    assert LIM.f_min <= xc.f <= LIM.f_max
    assert xd.p_d[2] >= LIM.world_z_min
    lo, hi = LIM.gimbal_pitch_range
    assert lo <= xd.gimbal.pitch <= hi


def test_clamp_keeps_direction():
    x = DroneState((0, 0, 5), (30, 40, 0))
    v = clamp_to_limits(x, CameraState(50), DroneInput(), CameraInput(0), LIM)[0].v_d
    np.testing.assert_allclose(v, [6, 8, 0])


def test_forecast_examples():
    t0 = TargetState((1, 2, 3), heading=EulerAngles(0, 0, 0.4))
    fc = forecast_target(t0, 0.2, 5)
    assert len(fc) == 5
    for s in fc:
        np.testing.assert_array_equal(s.p_t, t0.p_t)
        assert s.heading == t0.heading
    moving = forecast_target(TargetState((0, 0, 0), (1, 0, 0)), 0.2, 5)
    np.testing.assert_allclose([s.p_t[0] for s in moving], [0.2, 0.4, 0.6, 0.8, 1.0])
    with pytest.raises(ValueError):
        forecast_target(t0, 0.2, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        Limits(f_min=100, f_max=50)
    with pytest.raises(ValueError):
        Limits(gimbal_pitch_range=(1.0, -1.0))
    with pytest.raises(ValueError):
        SimConfig(dt=0)
    with pytest.raises(ValueError):
        SimConfig(horizon=0)
    assert Limits().gimbal_pitch_range == pytest.approx((-math.pi / 6, math.pi / 2))
