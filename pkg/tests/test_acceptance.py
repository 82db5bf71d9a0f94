"""End-to-end checks for the arch flow engine.

Each test prints one `acceptance <name>: PASS` or `FAIL` line so a plain
pytest run doubles as a checklist. Expected numbers come from closed forms
written out locally in this file, never from the code under test.
"""

import math
import random
import subprocess
import sys
from pathlib import Path

from archflow import (
    ArchSystem,
    IntegratorConfig,
    Point2,
    PortraitSpec,
    Window,
    arch_first_integral,
    build_portrait,
    classify_arch,
    find_equilibria,
    integrate,
    opening_angle,
    render_svg,
    sector_census,
    trace_separatrix,
)

PRESET_THETAS = {"plain": 0.001, "tented": 0.5, "strong": 5.0}
GOLDEN = Path(__file__).parent / "golden"


def report(name):
    class Reporter:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            verdict = "PASS" if exc_type is None else "FAIL"
            print(f"acceptance {name}: {verdict}")
            return False

    return Reporter()


def test_equilibrium_analysis_matches_hand_linearization():
    with report("equilibrium analysis"):
        for theta in PRESET_THETAS.values():
            system = ArchSystem(theta)
            equilibria = find_equilibria(system, Window(-4, 4, -4, 4))
            assert len(equilibria) == 1
            eq = equilibria[0]
            assert eq.location.distance_to(Point2(0.0, 0.0)) <= 1e-10
            j = eq.jacobian
            assert (j.a11, j.a12, j.a21, j.a22) == (0.0, 0.0, -theta, 0.0)
            assert all(abs(v) <= 1e-12 for v in eq.eigen.values)
            assert eq.classification == "degenerate_nonhyperbolic"
            census = sector_census(system, eq)
            assert (
                census.hyperbolic,
                census.elliptic,
                census.parabolic,
                census.separatrices,
            ) == (2, 0, 0, 2)
            assert census.is_cusp


def test_first_integral_conserved_along_random_trajectories():
    with report("conservation oracle"):
        box = Window(-4.0, 4.0, -4.0, 4.0)
        for stream, theta in zip((11, 12, 13), PRESET_THETAS.values()):
            system = ArchSystem(theta)
            rng = random.Random(stream)
            cfg = IntegratorConfig(
                rel_tol=1e-10, abs_tol=1e-10, stop_box=box, max_steps=500_000
            )
            for _ in range(50):
                start = Point2(rng.uniform(-3, 3), rng.uniform(-3, 3))
                trajectory = integrate(system, start, cfg)
                assert trajectory.stop_reason == "box_exit"
                h0 = arch_first_integral(theta, start)
                drift = max(
                    abs(arch_first_integral(theta, p) - h0)
                    for p in trajectory.points
                )
                assert drift <= 1e-8


def test_fixed_step_method_shows_fifth_order_error_decay():
    with report("convergence order"):
        system = ArchSystem(0.5)
        start = Point2(0.0, 1.0)
        reference = integrate(
            system,
            start,
            IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12, stop_time=1.0),
        ).final_point
        errors = []
        for h in (0.1, 0.05, 0.025):
            end = integrate(
                system,
                start,
                IntegratorConfig(method="rk4", step=h, stop_time=1.0),
            ).final_point
            errors.append(end.distance_to(reference))
        for coarse, fine in zip(errors, errors[1:]):
            assert 12.0 <= coarse / fine <= 20.0


def test_separatrix_matches_closed_form_and_feeds_the_origin():
    with report("separatrix correctness"):
        window = Window(-4.0, 4.0, -4.0, 4.0)
        for theta in PRESET_THETAS.values():
            left, right = trace_separatrix(theta, window, resolution=99)
            assert len(left) == 100 and len(right) == 100
            for branch in (left, right):
                for p in branch:
                    assert abs(arch_first_integral(theta, p)) <= 1e-10
                    expected = -((1.5 * theta * p.x * p.x) ** (1.0 / 3.0))
                    assert abs(p.y - expected) <= 1e-10
            start = Point2(-2.0, -((1.5 * theta * 4.0) ** (1.0 / 3.0)))
            trajectory = integrate(
                ArchSystem(theta),
                start,
                IntegratorConfig(
                    rel_tol=1e-12,
                    abs_tol=1e-12,
                    stop_box=window,
                    equilibrium_radius=1e-3,
                ),
            )
            assert trajectory.stop_reason == "equilibrium_reached"
            assert trajectory.final_point.distance_to(Point2(0.0, 0.0)) <= 1e-3


def closed_form_angle(theta, apex=1.0, fraction=0.5):
    x_cross = math.sqrt(2.0 * apex ** 3 * (1.0 - fraction ** 3) / (3.0 * theta))
    slope = theta * x_cross / (fraction * apex) ** 2
    return 180.0 - 2.0 * math.degrees(math.atan(slope))


def test_opening_angle_regimes_and_monotonicity():
    with report("angle regimes"):
        assert opening_angle(0.001) > 150.0
        assert opening_angle(5.0) < 30.0
        sweep = (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
        angles = [opening_angle(t) for t in sweep]
        for theta, angle in zip(sweep, angles):
            assert abs(angle - closed_form_angle(theta)) <= 1e-4
        for wide, narrow in zip(angles, angles[1:]):
            assert wide > narrow


def test_category_presets():
    with report("category presets"):
        assert classify_arch(0.001).category == "plain"
        assert classify_arch(0.5).category == "tented"
        assert classify_arch(5.0).category == "strong"


def test_portrait_structure_and_byte_stability():
    with report("portrait fidelity"):
        for name, theta in PRESET_THETAS.items():
            scene = build_portrait(PortraitSpec(system=ArchSystem(theta)))
            roles = [p.role for p in scene.paths]
            assert roles == (
                ["separatrix"] * 2 + ["upper_sector"] * 8 + ["lower_sector"] * 4
            )
            for path in scene.paths:
                for p in path.points:
                    h = arch_first_integral(theta, p)
                    if path.role == "separatrix":
                        assert abs(h) <= 1e-10
                    elif path.role == "upper_sector":
                        assert h > -1e-9
                    else:
                        assert h < 1e-9
            for path in scene.paths:
                if path.role != "upper_sector":
                    continue
                ys = [p.y for p in path.points]
                xs = [abs(p.x) for p in path.points]
                assert abs(ys.index(max(ys)) - xs.index(min(xs))) <= 1
            svg = render_svg(scene)
            again = render_svg(build_portrait(PortraitSpec(system=ArchSystem(theta))))
            assert svg == again
            assert svg == (GOLDEN / f"{name}.svg").read_text()


def test_mirrored_flow_reverses_time():
    with report("reversal symmetry"):
        system = ArchSystem(0.5)
        rng = random.Random(1)
        cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-10, stop_time=1.0)
        for _ in range(20):
            start = Point2(rng.uniform(-2, 2), rng.uniform(-2, 2))
            end = integrate(system, start, cfg).final_point
            back = integrate(system, Point2(-end.x, end.y), cfg).final_point
            assert abs(back.x - (-start.x)) <= 1e-6
            assert abs(back.y - start.y) <= 1e-6


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "archflow", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def test_cli_black_box_contract(tmp_path):
    with report("cli black box"):
        for name in PRESET_THETAS:
            analyze = run_cli("analyze", "--preset", name, "--format", "machine")
            assert analyze.returncode == 0
            assert analyze.stdout == (GOLDEN / f"{name}_analyze.txt").read_text()
            classify = run_cli("classify", "--preset", name, "--format", "machine")
            assert classify.returncode == 0
            assert classify.stdout == (GOLDEN / f"{name}_classify.txt").read_text()
        ok = run_cli(
            "trace", "--theta", "1", "--tmax", "1", "--out", "t.csv", cwd=tmp_path
        )
        assert ok.returncode == 0
        runtime = run_cli(
            "trace", "--theta", "1", "--out", "no/dir/t.csv", cwd=tmp_path
        )
        assert runtime.returncode == 1 and runtime.stderr.strip()
        usage = run_cli("classify", "--theta", "-3")
        assert usage.returncode == 2 and usage.stderr.strip()
