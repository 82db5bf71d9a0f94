import math

import numpy as np
import pytest

from archflow import (
    ArchSystem,
    CallableField,
    CrossingNotFound,
    IntegrationError,
    IntegratorConfig,
    Point2,
    StepUnderflowError,
    Trajectory,
    Window,
    arch_first_integral,
    crossing,
    integrate,
    rk4_step,
    rk45_step,
)

BOX = Window(-4.0, 4.0, -4.0, 4.0)


def test_config_requires_a_stop_condition():
    with pytest.raises(ValueError):
        IntegratorConfig()
    IntegratorConfig(stop_time=1.0)
    IntegratorConfig(stop_box=BOX)
    IntegratorConfig(equilibrium_radius=0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler", stop_time=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.0, stop_time=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=-1e-10, stop_time=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0, stop_time=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(direction="sideways", stop_time=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(stop_time=-2.0)
    with pytest.raises(ValueError):
        IntegratorConfig(equilibrium_radius=0.0, stop_time=1.0)


def test_trajectory_validation():
    p = Point2(0.0, 0.0)
    with pytest.raises(ValueError):
        Trajectory((), "time_horizon")
    with pytest.raises(ValueError):
        Trajectory(((0.0, p),), "because")
    with pytest.raises(ValueError):
        Trajectory(((0.0, p), (0.0, p)), "time_horizon")
    with pytest.raises(ValueError):
        Trajectory(((0.0, p), (1.0, p), (0.5, p)), "time_horizon")
    backward = Trajectory(((0.0, p), (-1.0, p)), "time_horizon")
    assert backward.times == (0.0, -1.0)


def test_rk4_step_single_step_frozen():
    s = ArchSystem(0.5)
    p = rk4_step(s, Point2(0.0, 1.0), 0.0, 0.01)
    assert p.x == pytest.approx(0.009999833334895835, abs=1e-14)
    assert p.y == pytest.approx(0.9999750002083321, abs=1e-14)
    drift = abs(arch_first_integral(0.5, p) - 1.0 / 3.0)
    assert drift <= 1e-10


def test_rk4_step_rejects_zero_h():
    with pytest.raises(ValueError):
        rk4_step(ArchSystem(0.5), Point2(0.0, 1.0), 0.0, 0.0)


def test_rk4_step_negative_h_reverses():
    s = ArchSystem(0.5)
    forward = rk4_step(s, Point2(0.0, 1.0), 0.0, 0.01)
    back = rk4_step(s, forward, 0.0, -0.01)
    assert back.x == pytest.approx(0.0, abs=1e-12)
    assert back.y == pytest.approx(1.0, abs=1e-12)


def test_rk45_step_result_fields():
    s = ArchSystem(5.0)
    r = rk45_step(s, Point2(0.0, 1.0), 0.0, 0.1)
    assert r.error_estimate <= 1.0
    assert 0.0 < r.step_taken <= 0.1
    assert 0.2 * r.step_taken <= r.next_step <= 5.0 * r.step_taken
    drift = abs(arch_first_integral(5.0, r.state) - 1.0 / 3.0)
    assert drift <= 1e-9


def test_rk45_step_rejects_bad_args():
    s = ArchSystem(0.5)
    with pytest.raises(ValueError):
        rk45_step(s, Point2(0.0, 1.0), 0.0, -0.1)
    with pytest.raises(ValueError):
        rk45_step(s, Point2(0.0, 1.0), 0.0, 0.1, rel_tol=0.0)


def test_time_horizon_lands_exactly():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_time=1.0))
    assert t.stop_reason == "time_horizon"
    assert t.final_time == 1.0
    assert t.times[0] == 0.0
    assert all(b > a for a, b in zip(t.times, t.times[1:]))


def test_rk4_fixed_step_times():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(method="rk4", step=0.1, stop_time=1.0))
    assert t.stop_reason == "time_horizon"
    assert len(t) == 11
    assert t.times[3] == pytest.approx(0.3, abs=1e-12)
    assert t.final_time == 1.0


def test_box_exit_lands_just_outside():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    assert t.stop_reason == "box_exit"
    final = t.final_point
    assert not BOX.contains_point(final)
    assert BOX.contains_point(final, pad=1e-6)
    assert final.x >= 3.0
    for p in t.points[:-1]:
        assert BOX.contains_point(p)


def test_box_exit_at_start_is_single_sample():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(10.0, 0.0), IntegratorConfig(stop_box=BOX))
    assert t.stop_reason == "box_exit"
    assert len(t) == 1


def test_equilibrium_stop_at_start():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 0.0), IntegratorConfig(equilibrium_radius=0.5))
    assert t.stop_reason == "equilibrium_reached"
    assert len(t) == 1


def test_equilibrium_reached_along_separatrix():
    s = ArchSystem(0.5)
    start = Point2(-2.0, s.separatrix_height(-2.0))
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12, equilibrium_radius=1e-2,
                           max_steps=500_000)
    t = integrate(s, start, cfg)
    assert t.stop_reason == "equilibrium_reached"
    assert math.hypot(t.final_point.x, t.final_point.y) <= 1e-2


def test_max_steps_stop():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(max_steps=5, stop_time=1e6))
    assert t.stop_reason == "max_steps"
    assert len(t) == 6


def test_backward_times_decrease():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(1.0, 1.0), IntegratorConfig(stop_time=1.0, direction="backward"))
    assert t.stop_reason == "time_horizon"
    assert t.final_time == -1.0
    assert all(b < a for a, b in zip(t.times, t.times[1:]))


def test_backward_retraces_forward():
    s = ArchSystem(0.5)
    start = Point2(-1.0, 0.5)
    fwd = integrate(s, start, IntegratorConfig(stop_time=2.0))
    back = integrate(s, fwd.final_point, IntegratorConfig(stop_time=2.0, direction="backward"))
    assert back.final_point.x == pytest.approx(start.x, abs=1e-9)
    assert back.final_point.y == pytest.approx(start.y, abs=1e-9)


def test_x_is_nondecreasing_forward():
    s = ArchSystem(0.5)
    for start in (Point2(-2.0, -1.0), Point2(0.0, 1.0), Point2(-3.0, 2.0)):
        t = integrate(s, start, IntegratorConfig(stop_box=BOX))
        for a, b in zip(t.points, t.points[1:]):
            assert b.x >= a.x - 1e-12


def test_conservation_along_trajectory():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    h0 = arch_first_integral(0.5, t.points[0])
    drift = max(abs(arch_first_integral(0.5, p) - h0) for p in t.points)
    assert drift <= 1e-8


def test_step_underflow_on_discontinuity():
    jump = CallableField(lambda x, y: (1.0, 0.0) if x < 1.0 else (1e12, 0.0))
    t = integrate(jump, Point2(0.0, 0.0), IntegratorConfig(stop_time=10.0))
    assert t.stop_reason == "step_underflow"
    assert t.final_point.x == pytest.approx(1.0, abs=1e-6)


def test_divergence_raises_with_partial_samples():
    s = ArchSystem(5.0)
    cfg = IntegratorConfig(method="rk4", step=0.5, stop_time=1000.0)
    with pytest.raises(IntegrationError) as info:
        integrate(s, Point2(0.0, 3.0), cfg)
    err = info.value
    assert not isinstance(err, StepUnderflowError)
    assert err.partial_samples is not None and len(err.partial_samples) >= 1
    assert err.state is not None


def test_crossing_exact_sample_returned_as_is():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    assert crossing(s, t, "vertical", 0.0) == Point2(0.0, 1.0)


def test_crossing_horizontal_matches_level_set():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    p = crossing(s, t, "horizontal", 0.5)
    assert p.y == pytest.approx(0.5, abs=1e-9)
    assert p.x == pytest.approx(math.sqrt(7.0 / 6.0), abs=1e-8)

    s5 = ArchSystem(5.0)
    t5 = integrate(s5, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    p5 = crossing(s5, t5, "horizontal", 0.5)
    assert p5.x == pytest.approx(math.sqrt(7.0 / 60.0), abs=1e-8)


def test_crossing_vertical_matches_level_set():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    p = crossing(s, t, "vertical", 1.0)
    assert p.x == pytest.approx(1.0, abs=1e-9)
    assert p.y == pytest.approx(0.25 ** (1.0 / 3.0), abs=1e-8)


def test_crossing_on_backward_trajectory():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(1.0, 0.5), IntegratorConfig(stop_time=3.0, direction="backward"))
    p = crossing(s, t, "vertical", 0.0)
    assert p.x == pytest.approx(0.0, abs=1e-9)
    # same level set as the forward run from (0,1): H = 1/3
    assert arch_first_integral(0.5, Point2(1.0, 0.5)) == pytest.approx(
        arch_first_integral(0.5, p), abs=1e-8
    )


def test_crossing_not_found():
    s = ArchSystem(0.5)
    t = integrate(s, Point2(0.0, 1.0), IntegratorConfig(stop_box=BOX))
    with pytest.raises(CrossingNotFound):
        crossing(s, t, "horizontal", 5.0)
    with pytest.raises(ValueError):
        crossing(s, t, "diagonal", 0.0)


def test_seeded_random_conservation_short_runs():
    rng = np.random.default_rng(7)
    s = ArchSystem(1.3)
    for _ in range(10):
        start = Point2(*rng.uniform(-1.5, 1.5, size=2))
        t = integrate(s, start, IntegratorConfig(stop_time=0.5))
        h0 = arch_first_integral(1.3, start)
        assert max(abs(arch_first_integral(1.3, p) - h0) for p in t.points) <= 1e-9
