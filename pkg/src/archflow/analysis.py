"""Equilibrium location, linear classification, sector census, and arch geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, crossing, integrate
from .systems import (
    ArchSystem,
    Mat2,
    Point2,
    VectorField2D,
    Window,
    arch_separatrix_height,
)

CLASSIFICATIONS = (
    "saddle",
    "stable_node",
    "unstable_node",
    "stable_focus",
    "unstable_focus",
    "center_linear",
    "degenerate_nonhyperbolic",
)

ARCH_CATEGORIES = ("plain", "tented", "strong")


@dataclass(frozen=True, slots=True)
class EigenPair:
    """Eigenvalues of a 2x2 matrix with their structural kind."""

    kind: str  # real_distinct | real_repeated | complex_conjugate
    values: tuple[complex, complex]


@dataclass(frozen=True, slots=True)
class Equilibrium:
    """An equilibrium with its local linear data."""

    location: Point2
    jacobian: Mat2
    eigen: EigenPair
    classification: str


@dataclass(frozen=True, slots=True)
class SectorCensus:
    """Counts of local sector types around an equilibrium."""

    hyperbolic: int
    elliptic: int
    parabolic: int
    separatrices: int

    @property
    def is_cusp(self) -> bool:
        return (
            self.hyperbolic == 2
            and self.elliptic == 0
            and self.parabolic == 0
            and self.separatrices == 2
        )


@dataclass(frozen=True, slots=True)
class ArchCategory:
    """Arch class for a stiffness value, with the measured opening angle."""

    category: str
    opening_angle_deg: float


def eigen_2x2(m: Mat2) -> EigenPair:
    """Eigenvalues via the numerically stable quadratic formula.

    Real eigenvalues are ordered ascending. The larger-magnitude root is
    computed first and the second recovered from the determinant, which
    avoids the cancellation of the textbook formula.
    """
    tr, det = m.trace, m.det
    disc = tr * tr - 4.0 * det
    if disc > 0.0:
        sq = math.sqrt(disc)
        q = 0.5 * (tr + math.copysign(sq, tr))
        if q == 0.0:  # tr == 0 with +0.0 sign handling
            l1, l2 = -0.5 * sq, 0.5 * sq
        else:
            l1, l2 = q, det / q
        lo, hi = (l1, l2) if l1 <= l2 else (l2, l1)
        return EigenPair("real_distinct", (complex(lo), complex(hi)))
    if disc == 0.0:
        lam = 0.5 * tr
        return EigenPair("real_repeated", (complex(lam), complex(lam)))
    im = 0.5 * math.sqrt(-disc)
    re = 0.5 * tr
    return EigenPair("complex_conjugate", (complex(re, im), complex(re, -im)))


def classify_linear(pair: EigenPair) -> str:
    """Classify a linearization by its eigenvalues.

    Any zero real part on a real eigenvalue means hyperbolicity fails and
    the label is degenerate_nonhyperbolic; purely imaginary pairs report
    center_linear since the linearization alone cannot settle the type.
    """
    l1, l2 = pair.values
    if pair.kind == "complex_conjugate":
        if l1.real == 0.0:
            return "center_linear"
        return "stable_focus" if l1.real < 0.0 else "unstable_focus"
    a, b = l1.real, l2.real
    if a == 0.0 or b == 0.0:
        return "degenerate_nonhyperbolic"
    if (a < 0.0) != (b < 0.0):
        return "saddle"
    return "stable_node" if a < 0.0 else "unstable_node"


def _refine_root(system: VectorField2D, x0: float, y0: float) -> tuple[float, float] | None:
    """Damped Gauss-Newton root polish; pinv tolerates singular Jacobians."""
    p = np.array([x0, y0], dtype=float)
    fx, fy = system.field_at(p[0], p[1])
    if not (math.isfinite(fx) and math.isfinite(fy)):
        return None
    r = np.array([fx, fy])
    cost = float(r @ r)
    for _ in range(80):
        if max(abs(float(r[0])), abs(float(r[1]))) <= 1e-12:
            break
        jm = system.jacobian(Point2(float(p[0]), float(p[1])))
        jac = np.array([[jm.a11, jm.a12], [jm.a21, jm.a22]])
        try:
            d = -np.linalg.pinv(jac, rcond=1e-12) @ r
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(d)) or float(d @ d) == 0.0:
            break
        alpha = 1.0
        improved = False
        while alpha >= 1e-12:
            q = p + alpha * d
            qx, qy = system.field_at(float(q[0]), float(q[1]))
            if math.isfinite(qx) and math.isfinite(qy):
                rq = np.array([qx, qy])
                cq = float(rq @ rq)
                if cq < cost:
                    p, r, cost = q, rq, cq
                    improved = True
                    break
            alpha *= 0.5
        if not improved:
            break
    if max(abs(float(r[0])), abs(float(r[1]))) <= 1e-10:
        return float(p[0]), float(p[1])
    return None


def find_equilibria(
    system: VectorField2D, window: Window, grid: int = 20
) -> list[Equilibrium]:
    """Equilibria of ``system`` inside ``window`` with their linear data.

    Systems that know their equilibria exactly report them directly; other
    fields are searched by Gauss-Newton refinement from a grid x grid seed
    lattice, deduplicated at 1e-6.
    """
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    analytic = system.analytic_equilibria()
    if analytic is not None:
        points = [p for p in analytic if window.contains_point(p)]
    else:
        found: list[tuple[float, float]] = []
        for sx in np.linspace(window.x_min, window.x_max, grid):
            for sy in np.linspace(window.y_min, window.y_max, grid):
                root = _refine_root(system, float(sx), float(sy))
                if root is None:
                    continue
                if not window.contains(root[0], root[1]):
                    continue
                if all(math.hypot(root[0] - fx, root[1] - fy) > 1e-6 for fx, fy in found):
                    found.append(root)
        points = [Point2(fx, fy) for fx, fy in sorted(found)]

    result = []
    for p in points:
        jac = system.jacobian(p)
        pair = eigen_2x2(jac)
        result.append(Equilibrium(p, jac, pair, classify_linear(pair)))
    return result


def _cyclic_runs(labels: list[int]) -> list[tuple[int, int]]:
    n = len(labels)
    start = 0
    for i in range(n):
        if labels[i] != labels[i - 1]:
            start = i
            break
    else:
        return [(labels[0], n)]
    runs: list[tuple[int, int]] = []
    cur = labels[start]
    count = 0
    for k in range(n):
        lab = labels[(start + k) % n]
        if lab == cur:
            count += 1
        else:
            runs.append((cur, count))
            cur, count = lab, 1
    runs.append((cur, count))
    return runs


def sector_census(
    system: VectorField2D,
    equilibrium: Point2 | Equilibrium,
    radius: float = 0.5,
    samples: int = 360,
) -> SectorCensus:
    """Census of local sectors from first-integral signs on a probe circle.

    The conserved quantity is sampled on a circle around the equilibrium.
    Each maximal same-sign arc is one hyperbolic sector and each sign change
    is one separatrix crossing; samples landing within |H| <= 1e-3 * r^3 of
    the zero level are treated as on-separatrix and attributed to a crossing
    only when flanked by opposite signs. A sign census cannot surface
    elliptic or parabolic sectors, which is faithful here: the level sets of
    the arch integral through any probe circle are unbounded, so every
    same-sign arc really is hyperbolic.
    """
    center = equilibrium.location if isinstance(equilibrium, Equilibrium) else equilibrium
    if not (math.isfinite(radius) and radius > 0):
        raise ValueError(f"radius must be finite and > 0, got {radius!r}")
    if samples < 8:
        raise ValueError(f"samples must be >= 8, got {samples}")
    integral = getattr(system, "first_integral", None)
    if integral is None:
        raise TypeError(
            "sector_census needs a system with a first_integral method"
        )
    h0 = integral(center)
    band = 1e-3 * radius**3
    labels: list[int] = []
    for k in range(samples):
        phi = 2.0 * math.pi * k / samples
        p = Point2(center.x + radius * math.cos(phi), center.y + radius * math.sin(phi))
        hv = integral(p) - h0
        if abs(hv) <= band:
            labels.append(0)
        elif hv > 0.0:
            labels.append(1)
        else:
            labels.append(-1)

    runs = _cyclic_runs(labels)
    if len(runs) == 1:
        lab = runs[0][0]
        return SectorCensus(1 if lab != 0 else 0, 0, 0, 0)
    hyperbolic = sum(1 for lab, _ in runs if lab != 0)
    separatrices = 0
    m = len(runs)
    for i, (lab, _) in enumerate(runs):
        nxt = runs[(i + 1) % m][0]
        if lab != 0:
            if nxt != 0 and nxt != lab:
                separatrices += 1
        else:
            prev = runs[i - 1][0]
            if prev != 0 and nxt != 0 and prev != nxt:
                separatrices += 1
    return SectorCensus(hyperbolic, 0, 0, separatrices)


def trace_separatrix(
    theta: float, window: Window, resolution: int = 256
) -> tuple[tuple[Point2, ...], tuple[Point2, ...]]:
    """Sample the two separatrix branches inside ``window``.

    Returns (left, right); each branch has resolution+1 vertices on the
    curve y = -(3*theta*x^2/2)^(1/3), ends at the origin, and extends as far
    in x as the window permits, shrunk when the curve leaves through the
    bottom edge first.
    """
    if not (math.isfinite(theta) and theta > 0):
        raise ValueError(f"theta must be finite and > 0, got {theta!r}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    if not window.contains(0.0, 0.0):
        raise ValueError("window must contain the origin")

    # Largest |x| whose separatrix height still clears the bottom edge.
    if window.y_min < 0.0:
        vertical_cap = math.sqrt(2.0 * abs(window.y_min) ** 3 / (3.0 * theta))
    else:
        vertical_cap = 0.0
    extent_left = min(-window.x_min, vertical_cap)
    extent_right = min(window.x_max, vertical_cap)

    def branch(extent: float, side: float) -> tuple[Point2, ...]:
        pts = []
        for i in range(resolution + 1):
            x = side * extent * (1.0 - i / resolution)
            y = arch_separatrix_height(theta, x)
            if y == 0.0:
                y = 0.0
            pts.append(Point2(x, y))
        return tuple(pts)

    return branch(extent_left, -1.0), branch(extent_right, 1.0)


def opening_angle(theta: float, apex: float = 1.0, fraction: float = 0.5) -> float:
    """Interior angle in degrees between the ridge flanks through (0, apex).

    The trajectory through the apex is integrated both ways until it falls
    to y = fraction * apex; the flank slopes at those crossings give the
    angle 180 - atan(m_left) - atan(m_right). Decreases strictly with theta:
    obtuse for small stiffness, acute for large.
    """
    if not (math.isfinite(theta) and theta > 0):
        raise ValueError(f"theta must be finite and > 0, got {theta!r}")
    if not (math.isfinite(apex) and apex > 0):
        raise ValueError(f"apex must be finite and > 0, got {apex!r}")
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"fraction must lie in (0, 1), got {fraction!r}")

    system = ArchSystem(theta)
    y_target = fraction * apex
    y_floor = 0.5 * y_target
    x_reach = math.sqrt(2.0 * (apex**3 - y_floor**3) / (3.0 * theta))
    box = Window(-1.5 * x_reach - 1.0, 1.5 * x_reach + 1.0, y_floor, apex + 1.0)
    start = Point2(0.0, apex)

    def flank_slope(direction: str) -> float:
        cfg = IntegratorConfig(
            method="rk45",
            step=0.01,
            rel_tol=1e-12,
            abs_tol=1e-12,
            max_steps=200_000,
            direction=direction,  # type: ignore[arg-type]
            stop_box=box,
        )
        traj = integrate(system, start, cfg)
        p = crossing(system, traj, "horizontal", y_target)
        return theta * abs(p.x) / (p.y * p.y)

    return 180.0 - math.degrees(math.atan(flank_slope("forward"))) - math.degrees(
        math.atan(flank_slope("backward"))
    )


def classify_arch(
    theta: float,
    plain_max: float = 0.1,
    strong_min: float = 2.0,
    apex: float = 1.0,
    fraction: float = 0.5,
) -> ArchCategory:
    """Arch category by stiffness thresholds, carrying the measured angle."""
    if not (math.isfinite(theta) and theta > 0):
        raise ValueError(f"theta must be finite and > 0, got {theta!r}")
    if not (0.0 < plain_max < strong_min):
        raise ValueError(
            f"thresholds must satisfy 0 < plain_max < strong_min, got {plain_max}, {strong_min}"
        )
    angle = opening_angle(theta, apex=apex, fraction=fraction)
    if theta < plain_max:
        category = "plain"
    elif theta < strong_min:
        category = "tented"
    else:
        category = "strong"
    return ArchCategory(category, angle)
