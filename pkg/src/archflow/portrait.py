"""Phase-portrait assembly and SVG rendering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .analysis import trace_separatrix
from .integrate import IntegrationError, IntegratorConfig, Trajectory, integrate
from .systems import ArchSystem, Point2, Window, arch_separatrix_height

DEFAULT_STYLE: dict[str, tuple[str, float]] = {
    "separatrix": ("#cc0000", 2.4),
    "upper_sector": ("#1a7f1a", 1.2),
    "lower_sector": ("#8b5a2b", 1.2),
}

_ROLES = ("separatrix", "upper_sector", "lower_sector")


@dataclass(frozen=True, slots=True)
class StyledPath:
    """A flow-ordered polyline with its stroke styling."""

    role: str
    points: tuple[Point2, ...]
    color: str
    width: float

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise ValueError(f"unknown path role {self.role!r}")
        if len(self.points) < 2:
            raise ValueError("a styled path needs at least 2 points")
        if not self.color:
            raise ValueError("color must be a nonempty string")
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError(f"width must be finite and > 0, got {self.width!r}")


@dataclass(frozen=True, slots=True)
class Scene:
    """Everything a renderer needs: window, styled paths, metadata strings."""

    window: Window
    paths: tuple[StyledPath, ...]
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class PortraitSpec:
    """Settings for one phase portrait."""

    system: ArchSystem
    window: Window = Window(-4.0, 4.0, -4.0, 4.0)
    seeds_above: int = 8
    seeds_below: int = 4
    seed_inset: float = 0.05
    integrator: IntegratorConfig = field(
        default_factory=lambda: IntegratorConfig(stop_time=10_000.0)
    )
    arrowheads: bool = True
    separatrix_resolution: int = 256
    style: dict[str, tuple[str, float]] = field(
        default_factory=lambda: dict(DEFAULT_STYLE)
    )

    def __post_init__(self) -> None:
        if self.seeds_above < 0 or self.seeds_below < 0:
            raise ValueError("seed counts must be >= 0")
        if not (0.0 <= self.seed_inset < 0.5):
            raise ValueError(f"seed_inset must lie in [0, 0.5), got {self.seed_inset!r}")
        if self.separatrix_resolution < 1:
            raise ValueError("separatrix_resolution must be >= 1")
        for role in _ROLES:
            if role not in self.style:
                raise ValueError(f"style is missing role {role!r}")


def _spread(segments: list[tuple[Point2, Point2]], count: int, inset: float) -> list[Point2]:
    """Midpoint-rule positions along a chain of segments, inset at both ends."""
    lengths = [a.distance_to(b) for a, b in segments]
    total = sum(lengths)
    if total == 0.0 or count == 0:
        return []
    out = []
    for i in range(count):
        s = total * (inset + (1.0 - 2.0 * inset) * (i + 0.5) / count)
        for (a, b), length in zip(segments, lengths):
            if s <= length or (a, b) == segments[-1]:
                f = min(1.0, s / length) if length > 0 else 0.0
                out.append(Point2(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)))
                break
            s -= length
    return out


def seed_points(spec: PortraitSpec) -> list[tuple[Point2, str]]:
    """Window-edge seeds for the two sectors.

    Upper seeds sit on the left edge above the separatrix and on the top
    edge. Lower seeds sit on the left edge below the separatrix when it
    exits that edge, otherwise on the bottom-edge span between the two
    separatrix crossings (large theta pushes the curve out the bottom).
    """
    w = spec.window
    theta = spec.system.theta
    sep_left = arch_separatrix_height(theta, w.x_min)

    seeds: list[tuple[Point2, str]] = []

    upper_segments: list[tuple[Point2, Point2]] = []
    y_lo = max(sep_left, w.y_min)
    if y_lo < w.y_max:
        upper_segments.append((Point2(w.x_min, y_lo), Point2(w.x_min, w.y_max)))
    upper_segments.append((Point2(w.x_min, w.y_max), Point2(w.x_max, w.y_max)))
    for p in _spread(upper_segments, spec.seeds_above, spec.seed_inset):
        seeds.append((p, "upper_sector"))

    if sep_left > w.y_min:
        lower_segments = [(Point2(w.x_min, w.y_min), Point2(w.x_min, sep_left))]
    else:
        cap = math.sqrt(2.0 * abs(w.y_min) ** 3 / (3.0 * theta)) if w.y_min < 0 else 0.0
        lo = max(w.x_min, -cap)
        hi = min(w.x_max, cap)
        if lo >= hi:
            lower_segments = []
        else:
            lower_segments = [(Point2(lo, w.y_min), Point2(hi, w.y_min))]
    for p in _spread(lower_segments, spec.seeds_below, spec.seed_inset):
        seeds.append((p, "lower_sector"))

    return seeds


def build_portrait(spec: PortraitSpec) -> Scene:
    """Assemble the scene: separatrix branches first, then seeded flow lines.

    Every path is flow ordered; each seed trajectory is integrated both ways
    inside the window inflated by 5 percent and the halves are joined at the
    seed. Raises IntegrationError naming the seed if one diverges.
    """
    system = spec.system
    window = spec.window
    box = window.inflated(0.05)

    left, right = trace_separatrix(system.theta, box, spec.separatrix_resolution)
    sep_color, sep_width = spec.style["separatrix"]
    paths: list[StyledPath] = [
        StyledPath("separatrix", left, sep_color, sep_width),
        StyledPath("separatrix", tuple(reversed(right)), sep_color, sep_width),
    ]

    for index, (seed, role) in enumerate(seed_points(spec)):
        halves = []
        for direction in ("backward", "forward"):
            cfg = replace(spec.integrator, stop_box=box, direction=direction)
            try:
                halves.append(integrate(system, seed, cfg))
            except IntegrationError as exc:
                raise IntegrationError(
                    f"seed {index} ({role}) at ({seed.x}, {seed.y}) diverged: {exc}",
                    state=exc.state,
                    partial_samples=exc.partial_samples,
                ) from exc
        backward, forward = halves
        pts = (*reversed(backward.points), *forward.points[1:])
        color, width = spec.style[role]
        paths.append(StyledPath(role, pts, color, width))

    cfg = spec.integrator
    metadata = {
        "theta": repr(system.theta),
        "window": f"[{window.x_min}, {window.x_max}] x [{window.y_min}, {window.y_max}]",
        "seeds": f"{spec.seeds_above} upper / {spec.seeds_below} lower",
        "integrator": f"{cfg.method} step={cfg.step} rel_tol={cfg.rel_tol} abs_tol={cfg.abs_tol}",
        "arrowheads": "true" if spec.arrowheads else "false",
    }
    return Scene(window, tuple(paths), metadata)


def _svg_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(scene: Scene, width_px: int = 800, height_px: int = 800) -> str:
    """Serialize a scene to a standalone SVG document.

    Purely a function of its inputs, so identical scenes give identical
    bytes. One polyline per path; arrowheads (when the scene asks for them)
    are small triangles at each path's middle vertex, oriented by vertex
    order.
    """
    if width_px < 1 or height_px < 1:
        raise ValueError("pixel dimensions must be >= 1")
    w = scene.window
    sx = width_px / w.width
    sy = height_px / w.height

    def to_px(p: Point2) -> tuple[float, float]:
        return (p.x - w.x_min) * sx, (w.y_max - p.y) * sy

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width_px}" height="{height_px}" viewBox="0 0 {width_px} {height_px}">',
    ]
    if scene.metadata:
        desc = "; ".join(f"{k}={v}" for k, v in scene.metadata.items())
        lines.append(f"<desc>{_svg_escape(desc)}</desc>")
    lines.append(
        f'<rect x="0" y="0" width="{width_px}" height="{height_px}" '
        f'fill="#ffffff" stroke="#333333" stroke-width="1"/>'
    )
    draw_arrows = scene.metadata.get("arrowheads") == "true"
    for path in scene.paths:
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in map(to_px, path.points))
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="{path.color}" '
            f'stroke-width="{path.width}"/>'
        )
        if draw_arrows:
            glyph = _arrow_glyph(path, to_px)
            if glyph is not None:
                lines.append(glyph)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _arrow_glyph(path: StyledPath, to_px) -> str | None:
    mid = len(path.points) // 2
    ax, ay = to_px(path.points[mid - 1])
    bx, by = to_px(path.points[min(mid + 1, len(path.points) - 1)])
    dx, dy = bx - ax, by - ay
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return None
    ux, uy = dx / norm, dy / norm
    px, py = -uy, ux
    mx, my = to_px(path.points[mid])
    size = 4.0 + path.width
    tip = (mx + 1.6 * size * ux, my + 1.6 * size * uy)
    base1 = (mx - 0.4 * size * ux + 0.8 * size * px, my - 0.4 * size * uy + 0.8 * size * py)
    base2 = (mx - 0.4 * size * ux - 0.8 * size * px, my - 0.4 * size * uy - 0.8 * size * py)
    return (
        f'<path d="M {tip[0]:.2f} {tip[1]:.2f} L {base1[0]:.2f} {base1[1]:.2f} '
        f'L {base2[0]:.2f} {base2[1]:.2f} Z" fill="{path.color}"/>'
    )


def export_trajectory_csv(trajectory: Trajectory, theta: float) -> str:
    """CSV text with header t,x,y,H and one row per sample, 17 digits."""
    if not (math.isfinite(theta) and theta > 0):
        raise ValueError(f"theta must be finite and > 0, got {theta!r}")
    rows = ["t,x,y,H"]
    for t, p in trajectory.samples:
        hv = 0.5 * theta * p.x * p.x + p.y**3 / 3.0
        rows.append(f"{t:.17g},{p.x:.17g},{p.y:.17g},{hv:.17g}")
    return "\n".join(rows) + "\n"
