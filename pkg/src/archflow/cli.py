"""Command line front end."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .analysis import classify_arch, find_equilibria, sector_census
from .integrate import IntegrationError, IntegratorConfig, integrate
from .portrait import PortraitSpec, build_portrait, export_trajectory_csv, render_svg
from .systems import ArchSystem, Point2, Window

PRESETS = {"plain": 0.001, "tented": 0.5, "strong": 5.0}


class UsageError(Exception):
    """Bad flag/config combination; maps to exit code 2."""


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _fmt_complex(v: complex) -> str:
    if v.imag == 0.0:
        return _fmt(v.real)
    return f"{_fmt(v.real)}{v.imag:+.12g}i"


def _to_window(text: str) -> Window:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"window needs four numbers x0,x1,y0,y1, got {text!r}")
    x0, x1, y0, y1 = (float(p) for p in parts)
    return Window(x0, x1, y0, y1)


def _to_point(text: str) -> Point2:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"point needs two numbers x,y, got {text!r}")
    return Point2(float(parts[0]), float(parts[1]))


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_method(text: str) -> str:
    if text not in ("rk4", "rk45"):
        raise ValueError(f"method must be rk4 or rk45, got {text!r}")
    return text


def _to_format(text: str) -> str:
    if text not in ("human", "machine"):
        raise ValueError(f"format must be human or machine, got {text!r}")
    return text


_DEFAULT_WINDOW = Window(-4.0, 4.0, -4.0, 4.0)

# Per-subcommand option tables: key -> (converter for config values, default).
_TABLES: dict[str, dict[str, tuple]] = {
    "analyze": {
        "window": (_to_window, _DEFAULT_WINDOW),
        "census_radius": (float, 0.5),
        "census_samples": (int, 360),
    },
    "trace": {
        "start": (_to_point, Point2(0.0, 1.0)),
        "tmax": (float, 10.0),
        "method": (_to_method, "rk45"),
        "step": (float, 0.01),
        "tol": (float, 1e-10),
        "window": (_to_window, None),
        "out": (str, "trace.csv"),
    },
    "portrait": {
        "window": (_to_window, _DEFAULT_WINDOW),
        "seeds_above": (int, 8),
        "seeds_below": (int, 4),
        "inset": (float, 0.05),
        "method": (_to_method, "rk45"),
        "step": (float, 0.01),
        "tol": (float, 1e-10),
        "width": (int, 800),
        "height": (int, 800),
        "arrows": (_to_bool, True),
        "resolution": (int, 256),
        "out": (str, "portrait.svg"),
    },
    "classify": {
        "apex": (float, 1.0),
        "fraction": (float, 0.5),
    },
    "sweep": {
        "theta_from": (float, 0.001),
        "theta_to": (float, 5.0),
        "steps": (int, 5),
        "apex": (float, 1.0),
        "fraction": (float, 0.5),
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archflow",
        description="Analyze, trace, and draw the planar arch ridge-flow system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, theta: bool = True) -> None:
        p.add_argument("--config", default=None, metavar="FILE",
                       help="key=value file; flags override it")
        p.add_argument("--format", type=_to_format, default=None,
                       help="human or machine")
        if theta:
            g = p.add_mutually_exclusive_group()
            g.add_argument("--theta", type=float, default=None,
                           help="stiffness parameter, > 0")
            g.add_argument("--preset", choices=sorted(PRESETS), default=None,
                           help="named stiffness: plain, tented, strong")

    p = sub.add_parser("analyze", help="equilibrium, eigenvalues, sector census")
    common(p)
    p.add_argument("--window", type=_to_window, default=None, metavar="X0,X1,Y0,Y1")
    p.add_argument("--census-radius", dest="census_radius", type=float, default=None)
    p.add_argument("--census-samples", dest="census_samples", type=int, default=None)

    p = sub.add_parser("trace", help="integrate one trajectory to CSV")
    common(p)
    p.add_argument("--start", type=_to_point, default=None, metavar="X,Y")
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--method", type=_to_method, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--window", type=_to_window, default=None, metavar="X0,X1,Y0,Y1",
                   help="optional stop box (inflated 5 percent)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("portrait", help="render a styled phase portrait to SVG")
    common(p)
    p.add_argument("--window", type=_to_window, default=None, metavar="X0,X1,Y0,Y1")
    p.add_argument("--seeds-above", dest="seeds_above", type=int, default=None)
    p.add_argument("--seeds-below", dest="seeds_below", type=int, default=None)
    p.add_argument("--inset", type=float, default=None)
    p.add_argument("--method", type=_to_method, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--arrows", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--resolution", type=int, default=None,
                   help="separatrix segments per branch")
    p.add_argument("--out", default=None)

    p = sub.add_parser("classify", help="arch category and opening angle")
    common(p)
    p.add_argument("--apex", type=float, default=None)
    p.add_argument("--fraction", type=float, default=None)

    p = sub.add_parser("sweep", help="classify a range of stiffness values")
    common(p, theta=False)
    p.add_argument("--theta-from", dest="theta_from", type=float, default=None)
    p.add_argument("--theta-to", dest="theta_to", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--apex", type=float, default=None)
    p.add_argument("--fraction", type=float, default=None)

    return parser


def _load_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    cfg: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {number}: expected key=value, got {stripped!r}")
        key, value = stripped.split("=", 1)
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _resolve_theta(ns: argparse.Namespace, cfg: dict[str, str]) -> float:
    if ns.theta is not None:
        theta = ns.theta
    elif ns.preset is not None:
        theta = PRESETS[ns.preset]
    elif "theta" in cfg and "preset" in cfg:
        raise UsageError("config sets both theta and preset")
    elif "theta" in cfg:
        try:
            theta = float(cfg["theta"])
        except ValueError as exc:
            raise UsageError(f"config theta: {exc}") from exc
    elif "preset" in cfg:
        if cfg["preset"] not in PRESETS:
            raise UsageError(f"unknown preset {cfg['preset']!r} in config")
        theta = PRESETS[cfg["preset"]]
    else:
        raise UsageError("theta is required: pass --theta or --preset")
    if not (math.isfinite(theta) and theta > 0):
        raise UsageError(f"theta must be finite and > 0, got {theta}")
    return theta


def parse_invocation(argv: list[str] | None = None) -> tuple[str, dict]:
    """Parse flags plus optional config file into (subcommand, options)."""
    ns = _build_parser().parse_args(argv)
    cfg = _load_config(ns.config) if ns.config else {}
    table = _TABLES[ns.command]
    needs_theta = ns.command != "sweep"

    known = set(table) | {"format"} | ({"theta", "preset"} if needs_theta else set())
    for key in cfg:
        if key not in known:
            raise UsageError(f"unknown config key {key!r} for {ns.command}")

    opts: dict = {}
    for key, (convert, default) in table.items():
        flag_value = getattr(ns, key, None)
        if flag_value is not None:
            opts[key] = flag_value
        elif key in cfg:
            try:
                opts[key] = convert(cfg[key])
            except ValueError as exc:
                raise UsageError(f"config {key}: {exc}") from exc
        else:
            opts[key] = default

    if needs_theta:
        opts["theta"] = _resolve_theta(ns, cfg)
    if ns.format is not None:
        opts["format"] = ns.format
    elif "format" in cfg:
        try:
            opts["format"] = _to_format(cfg["format"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        opts["format"] = "human"

    _validate(ns.command, opts)
    return ns.command, opts


def _validate(command: str, o: dict) -> None:
    def positive(key: str) -> None:
        v = o.get(key)
        if v is not None and not (math.isfinite(v) and v > 0):
            raise UsageError(f"{key} must be finite and > 0, got {v}")

    for key in ("census_radius", "tmax", "step", "tol", "apex", "theta_from", "theta_to"):
        if key in o:
            positive(key)
    if "census_samples" in o and o["census_samples"] < 8:
        raise UsageError(f"census_samples must be >= 8, got {o['census_samples']}")
    if "fraction" in o and not (0.0 < o["fraction"] < 1.0):
        raise UsageError(f"fraction must lie in (0, 1), got {o['fraction']}")
    if "inset" in o and not (0.0 <= o["inset"] < 0.5):
        raise UsageError(f"inset must lie in [0, 0.5), got {o['inset']}")
    for key in ("seeds_above", "seeds_below"):
        if key in o and o[key] < 0:
            raise UsageError(f"{key} must be >= 0, got {o[key]}")
    for key in ("width", "height", "resolution", "steps"):
        if key in o and o[key] < 1:
            raise UsageError(f"{key} must be >= 1, got {o[key]}")


def _run_analyze(o: dict) -> int:
    system = ArchSystem(o["theta"])
    equilibria = find_equilibria(system, o["window"])
    machine = o["format"] == "machine"
    out: list[str] = []
    if machine:
        out.append(f"theta={_fmt(o['theta'])}")
        out.append(f"equilibria={len(equilibria)}")
    else:
        out.append(f"theta {_fmt(o['theta'])}")
    if not equilibria:
        if not machine:
            out.append("no equilibria inside the window")
        print("\n".join(out))
        return 0
    eq = equilibria[0]
    census = sector_census(
        system, eq.location, radius=o["census_radius"], samples=o["census_samples"]
    )
    j = eq.jacobian
    l1, l2 = eq.eigen.values
    if machine:
        out.append(f"equilibrium_x={_fmt(eq.location.x)}")
        out.append(f"equilibrium_y={_fmt(eq.location.y)}")
        out.append(f"j11={_fmt(j.a11)}")
        out.append(f"j12={_fmt(j.a12)}")
        out.append(f"j21={_fmt(j.a21)}")
        out.append(f"j22={_fmt(j.a22)}")
        out.append(f"eigen_kind={eq.eigen.kind}")
        out.append(f"eigenvalue_1={_fmt_complex(l1)}")
        out.append(f"eigenvalue_2={_fmt_complex(l2)}")
        out.append(f"classification={eq.classification}")
        out.append(f"hyperbolic={census.hyperbolic}")
        out.append(f"elliptic={census.elliptic}")
        out.append(f"parabolic={census.parabolic}")
        out.append(f"separatrices={census.separatrices}")
        out.append(f"is_cusp={'true' if census.is_cusp else 'false'}")
    else:
        out.append(f"equilibrium at ({_fmt(eq.location.x)}, {_fmt(eq.location.y)})")
        out.append(
            f"jacobian [[{_fmt(j.a11)}, {_fmt(j.a12)}], [{_fmt(j.a21)}, {_fmt(j.a22)}]]"
        )
        out.append(
            f"eigenvalues {_fmt_complex(l1)}, {_fmt_complex(l2)} ({eq.eigen.kind})"
        )
        out.append(f"classification {eq.classification}")
        out.append(
            f"sectors: {census.hyperbolic} hyperbolic, {census.elliptic} elliptic, "
            f"{census.parabolic} parabolic; {census.separatrices} separatrices"
        )
        out.append(f"cusp: {'yes' if census.is_cusp else 'no'}")
    print("\n".join(out))
    return 0


def _run_classify(o: dict) -> int:
    result = classify_arch(o["theta"], apex=o["apex"], fraction=o["fraction"])
    if o["format"] == "machine":
        print(f"theta={_fmt(o['theta'])}")
        print(f"category={result.category}")
        print(f"opening_angle_deg={result.opening_angle_deg:.4f}")
    else:
        print(
            f"theta {_fmt(o['theta'])}: {result.category} arch, "
            f"opening angle {result.opening_angle_deg:.2f} degrees"
        )
    return 0


def _run_trace(o: dict) -> int:
    system = ArchSystem(o["theta"])
    cfg = IntegratorConfig(
        method=o["method"],
        step=o["step"],
        rel_tol=o["tol"],
        abs_tol=o["tol"],
        stop_time=o["tmax"],
        stop_box=o["window"].inflated(0.05) if o["window"] is not None else None,
    )
    trajectory = integrate(system, o["start"], cfg)
    Path(o["out"]).write_text(export_trajectory_csv(trajectory, o["theta"]))
    if o["format"] == "machine":
        print(f"out={o['out']}")
        print(f"samples={len(trajectory)}")
        print(f"stop_reason={trajectory.stop_reason}")
    else:
        print(
            f"wrote {o['out']}: {len(trajectory)} samples, "
            f"stopped by {trajectory.stop_reason}"
        )
    return 0


def _run_portrait(o: dict) -> int:
    integrator = IntegratorConfig(
        method=o["method"],
        step=o["step"],
        rel_tol=o["tol"],
        abs_tol=o["tol"],
        stop_time=10_000.0,
    )
    spec = PortraitSpec(
        system=ArchSystem(o["theta"]),
        window=o["window"],
        seeds_above=o["seeds_above"],
        seeds_below=o["seeds_below"],
        seed_inset=o["inset"],
        integrator=integrator,
        arrowheads=o["arrows"],
        separatrix_resolution=o["resolution"],
    )
    scene = build_portrait(spec)
    Path(o["out"]).write_text(render_svg(scene, o["width"], o["height"]))
    if o["format"] == "machine":
        print(f"out={o['out']}")
        print(f"paths={len(scene.paths)}")
    else:
        print(f"wrote {o['out']}: {len(scene.paths)} paths")
    return 0


def _run_sweep(o: dict) -> int:
    lo, hi, steps = o["theta_from"], o["theta_to"], o["steps"]
    if steps == 1:
        thetas = [lo]
    else:
        thetas = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    machine = o["format"] == "machine"
    for theta in thetas:
        result = classify_arch(theta, apex=o["apex"], fraction=o["fraction"])
        if machine:
            print(
                f"theta={_fmt(theta)} category={result.category} "
                f"opening_angle_deg={result.opening_angle_deg:.4f}"
            )
        else:
            print(
                f"theta {_fmt(theta)}: {result.category}, "
                f"{result.opening_angle_deg:.2f} deg"
            )
    return 0


_EXECUTORS = {
    "analyze": _run_analyze,
    "classify": _run_classify,
    "trace": _run_trace,
    "portrait": _run_portrait,
    "sweep": _run_sweep,
}


def main(argv: list[str] | None = None) -> int:
    try:
        command, opts = parse_invocation(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        return _EXECUTORS[command](opts)
    except (ValueError, IntegrationError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
