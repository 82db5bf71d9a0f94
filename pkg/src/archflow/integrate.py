"""Trajectory integration: classical RK4 and adaptive Dormand-Prince 5(4).

The adaptive path follows the standard embedded-pair recipe: the fifth order
solution propagates, the fourth order solution supplies the error estimate,
and the step size is rescaled by ``0.9 * (err / TARGET)**(-1/5)`` clamped to
[0.2, 5.0]. Steps are accepted whenever the scaled error is at most 1, but
the controller aims the estimate at TARGET = 0.05 of the tolerance scale:
conserved quantities of the flow are cubic in the state, so their gradient
amplifies per-step error roughly twentyfold near the frame edges, and the
tighter aim keeps first-integral drift within the package's conservation
promise at the default tolerances. Backward integration negates the field so
every stop condition runs through one code path; recorded times carry the
sign of the travel direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

from .systems import Point2, VectorField2D, Window, _require_finite

STOP_REASONS = (
    "time_horizon",
    "box_exit",
    "max_steps",
    "equilibrium_reached",
    "step_underflow",
)

SAFETY = 0.9
GROW_MIN = 0.2
GROW_MAX = 5.0
MIN_STEP = 1e-12
TARGET = 0.05

_FieldAt = Callable[[float, float], tuple[float, float]]


class IntegrationError(RuntimeError):
    """Raised when the state diverges to non-finite values.

    ``state`` holds the offending raw (x, y); ``partial_samples`` holds the
    samples recorded before the failure when integration context exists.
    """

    def __init__(
        self,
        message: str,
        state: tuple[float, float] | None = None,
        partial_samples: tuple[tuple[float, Point2], ...] | None = None,
    ) -> None:
        super().__init__(message)
        self.state = state
        self.partial_samples = partial_samples


class StepUnderflowError(IntegrationError):
    """Raised when error control pushes the step size below MIN_STEP."""


class CrossingNotFound(LookupError):
    """Raised when a trajectory never brackets the requested line."""


@dataclass(frozen=True, slots=True)
class IntegratorConfig:
    """Integration settings; at least one stop condition must be present."""

    method: Literal["rk4", "rk45"] = "rk45"
    step: float = 0.01
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_steps: int = 200_000
    direction: Literal["forward", "backward"] = "forward"
    stop_box: Window | None = None
    stop_time: float | None = None
    equilibrium_radius: float | None = None
    equilibrium: Point2 = Point2(0.0, 0.0)

    def __post_init__(self) -> None:
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"method must be 'rk4' or 'rk45', got {self.method!r}")
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be finite and > 0, got {self.step!r}")
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.direction not in ("forward", "backward"):
            raise ValueError(
                f"direction must be 'forward' or 'backward', got {self.direction!r}"
            )
        if self.stop_time is not None and not (
            math.isfinite(self.stop_time) and self.stop_time > 0
        ):
            raise ValueError(f"stop_time must be finite and > 0, got {self.stop_time!r}")
        if self.equilibrium_radius is not None and not (
            math.isfinite(self.equilibrium_radius) and self.equilibrium_radius > 0
        ):
            raise ValueError(
                f"equilibrium_radius must be finite and > 0, got {self.equilibrium_radius!r}"
            )
        if self.stop_box is None and self.stop_time is None and self.equilibrium_radius is None:
            raise ValueError(
                "at least one stop condition (stop_box, stop_time, equilibrium_radius) is required"
            )


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Recorded (time, point) samples with the reason integration stopped."""

    samples: tuple[tuple[float, Point2], ...]
    stop_reason: str

    def __post_init__(self) -> None:
        if self.stop_reason not in STOP_REASONS:
            raise ValueError(f"unknown stop_reason {self.stop_reason!r}")
        if not self.samples:
            raise ValueError("a trajectory needs at least one sample")
        ts = [t for t, _ in self.samples]
        for t in ts:
            _require_finite("sample time", t)
        if len(ts) >= 2:
            increasing = ts[1] > ts[0]
            for a, b in zip(ts, ts[1:]):
                if b == a or (b > a) != increasing:
                    raise ValueError("sample times must be strictly monotone")

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.samples)

    @property
    def points(self) -> tuple[Point2, ...]:
        return tuple(p for _, p in self.samples)

    @property
    def final_time(self) -> float:
        return self.samples[-1][0]

    @property
    def final_point(self) -> Point2:
        return self.samples[-1][1]

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True, slots=True)
class StepResult:
    """Outcome of one adaptive step.

    ``step_taken`` is the size actually accepted after any rejection retries;
    ``next_step`` is the controller's proposal for the following step.
    """

    state: Point2
    error_estimate: float
    step_taken: float
    next_step: float


# Dormand-Prince 5(4) tableau.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# Difference between the 5th and 4th order weights, for the error estimate.
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0


def _rk4_xy(field_at: _FieldAt, x: float, y: float, h: float) -> tuple[float, float]:
    k1x, k1y = field_at(x, y)
    k2x, k2y = field_at(x + 0.5 * h * k1x, y + 0.5 * h * k1y)
    k3x, k3y = field_at(x + 0.5 * h * k2x, y + 0.5 * h * k2y)
    k4x, k4y = field_at(x + h * k3x, y + h * k3y)
    sixth = h / 6.0
    return (
        x + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + sixth * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
    )


def _advance_rk45(
    field_at: _FieldAt,
    x: float,
    y: float,
    h: float,
    rel_tol: float,
    abs_tol: float,
) -> tuple[float, float, float, float, float]:
    """One accepted Dormand-Prince step; returns (x, y, h_taken, h_next, err)."""
    k1x, k1y = field_at(x, y)
    if not (math.isfinite(k1x) and math.isfinite(k1y)):
        raise IntegrationError(
            f"field is non-finite at ({x}, {y})", state=(x, y)
        )
    while True:
        k2x, k2y = field_at(x + h * _A21 * k1x, y + h * _A21 * k1y)
        k3x, k3y = field_at(
            x + h * (_A31 * k1x + _A32 * k2x), y + h * (_A31 * k1y + _A32 * k2y)
        )
        k4x, k4y = field_at(
            x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
            y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
        )
        k5x, k5y = field_at(
            x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
            y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
        )
        k6x, k6y = field_at(
            x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
            y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
        )
        nx = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        ny = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = field_at(nx, ny)
        err_x = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        err_y = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)

        finite = (
            math.isfinite(nx)
            and math.isfinite(ny)
            and math.isfinite(err_x)
            and math.isfinite(err_y)
        )
        if finite:
            err = max(
                abs(err_x) / (abs_tol + rel_tol * abs(nx)),
                abs(err_y) / (abs_tol + rel_tol * abs(ny)),
            )
        else:
            err = math.inf

        if err <= 1.0:
            if err == 0.0:
                factor = GROW_MAX
            else:
                factor = min(GROW_MAX, max(GROW_MIN, SAFETY * (err / TARGET) ** -0.2))
            return nx, ny, h, h * factor, err

        factor = max(GROW_MIN, SAFETY * (err / TARGET) ** -0.2) if err < math.inf else GROW_MIN
        h *= factor
        if h < MIN_STEP:
            raise StepUnderflowError(
                f"step size underflow below {MIN_STEP} at ({x}, {y})", state=(x, y)
            )


def rk4_step(system: VectorField2D, p: Point2, t: float, h: float) -> Point2:
    """One classical fourth order step of size h from p (h may be negative)."""
    if h == 0.0 or not math.isfinite(h):
        raise ValueError(f"h must be finite and nonzero, got {h!r}")
    nx, ny = _rk4_xy(system.field_at, p.x, p.y, h)
    if not (math.isfinite(nx) and math.isfinite(ny)):
        raise IntegrationError(
            f"non-finite state after RK4 step from ({p.x}, {p.y})", state=(nx, ny)
        )
    return Point2(nx, ny)


def rk45_step(
    system: VectorField2D,
    p: Point2,
    t: float,
    h: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
) -> StepResult:
    """One accepted adaptive step from p, retrying internally on rejection."""
    if not (math.isfinite(h) and h > 0):
        raise ValueError(f"h must be finite and > 0, got {h!r}")
    for name, v in (("rel_tol", rel_tol), ("abs_tol", abs_tol)):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be finite and > 0, got {v!r}")
    nx, ny, h_taken, h_next, err = _advance_rk45(
        system.field_at, p.x, p.y, h, rel_tol, abs_tol
    )
    return StepResult(Point2(nx, ny), error_estimate=err, step_taken=h_taken, next_step=h_next)


def _refine_box_exit(
    field_at: _FieldAt,
    x0: float,
    y0: float,
    h: float,
    x_out: float,
    y_out: float,
    box: Window,
) -> tuple[float, float, float]:
    """Bisect the step fraction so the final sample lands just past the box edge."""
    lo, hi = 0.0, h
    xh, yh = x_out, y_out
    for _ in range(60):
        if hi - lo <= 1e-13 * max(1.0, h):
            break
        mid = 0.5 * (lo + hi)
        xm, ym = _rk4_xy(field_at, x0, y0, mid)
        if box.contains(xm, ym):
            lo = mid
        else:
            hi, xh, yh = mid, xm, ym
    return xh, yh, hi


def integrate(system: VectorField2D, start: Point2, config: IntegratorConfig) -> Trajectory:
    """Integrate from ``start`` until a stop condition fires.

    Parameters
    ----------
    system : VectorField2D
        The field to flow along (negated internally for backward runs).
    start : Point2
        Initial state, recorded at time 0.
    config : IntegratorConfig
        Method, tolerances, direction and stop conditions.

    Returns
    -------
    Trajectory
        Samples with strictly monotone times (decreasing for backward runs)
        and the ``stop_reason`` of the first condition hit. Stop conditions
        already satisfied at ``start`` yield a single-sample trajectory.

    Raises
    ------
    IntegrationError
        If the state diverges to non-finite values; the samples recorded so
        far ride along as ``partial_samples``.
    """
    field_at: _FieldAt = system.field_at
    if config.direction == "backward":
        base = system.field_at

        def field_at(x: float, y: float) -> tuple[float, float]:
            dx, dy = base(x, y)
            return -dx, -dy

    sign = -1.0 if config.direction == "backward" else 1.0
    box = config.stop_box
    eq = config.equilibrium
    eq_radius = config.equilibrium_radius
    stop_time = config.stop_time
    time_snap = 1e-12 * max(1.0, abs(stop_time)) if stop_time is not None else 0.0

    samples: list[tuple[float, Point2]] = [(0.0, start)]
    x, y = start.x, start.y

    if box is not None and not box.contains(x, y):
        return Trajectory(tuple(samples), "box_exit")
    if eq_radius is not None and math.hypot(x - eq.x, y - eq.y) <= eq_radius:
        return Trajectory(tuple(samples), "equilibrium_reached")

    t = 0.0
    h = config.step
    use_rk4 = config.method == "rk4"
    reason = "max_steps"

    for _ in range(config.max_steps):
        h_try = h
        if stop_time is not None:
            rem = stop_time - t
            if rem <= time_snap:
                reason = "time_horizon"
                break
            if h_try > rem:
                h_try = rem
        try:
            if use_rk4:
                nx, ny = _rk4_xy(field_at, x, y, h_try)
                if not (math.isfinite(nx) and math.isfinite(ny)):
                    raise IntegrationError(
                        f"non-finite state after RK4 step from ({x}, {y})",
                        state=(nx, ny),
                    )
                h_taken, h_next = h_try, h
            else:
                nx, ny, h_taken, h_next, _err = _advance_rk45(
                    field_at, x, y, h_try, config.rel_tol, config.abs_tol
                )
        except StepUnderflowError:
            reason = "step_underflow"
            break
        except IntegrationError as exc:
            raise IntegrationError(
                str(exc), state=exc.state, partial_samples=tuple(samples)
            ) from exc

        if box is not None and not box.contains(nx, ny):
            ex, ey, s = _refine_box_exit(field_at, x, y, h_taken, nx, ny, box)
            t_exit = t + s
            if t_exit == t:
                t_exit = math.nextafter(t, math.inf)
            samples.append((sign * t_exit, Point2(ex, ey)))
            reason = "box_exit"
            break

        t_new = t + h_taken
        if stop_time is not None and abs(t_new - stop_time) <= time_snap:
            t_new = stop_time
        if t_new == t:
            reason = "step_underflow"
            break
        samples.append((sign * t_new, Point2(nx, ny)))
        x, y, t, h = nx, ny, t_new, h_next

        if eq_radius is not None and math.hypot(x - eq.x, y - eq.y) <= eq_radius:
            reason = "equilibrium_reached"
            break
        if stop_time is not None and t >= stop_time:
            reason = "time_horizon"
            break

    return Trajectory(tuple(samples), reason)


def crossing(
    system: VectorField2D,
    trajectory: Trajectory,
    axis: Literal["horizontal", "vertical"],
    value: float,
) -> Point2:
    """Locate where a trajectory crosses the line y=value or x=value.

    The first sample lying exactly on the line is returned as is; otherwise
    the first bracketing sample pair is refined by bisecting the flow time
    with short high-accuracy re-integrations from the bracket's left sample.
    The crossed coordinate of the result is within 1e-9 of ``value``.
    """
    if axis not in ("horizontal", "vertical"):
        raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")
    _require_finite("line value", value)
    horizontal = axis == "horizontal"

    def coord(p: Point2) -> float:
        return p.y if horizontal else p.x

    samples = trajectory.samples
    direction = "forward"
    if len(samples) >= 2 and samples[1][0] < samples[0][0]:
        direction = "backward"

    for i, (t0, p0) in enumerate(samples):
        c0 = coord(p0) - value
        if c0 == 0.0:
            return p0
        if i + 1 == len(samples):
            break
        t1, p1 = samples[i + 1]
        c1 = coord(p1) - value
        if c1 == 0.0:
            return p1
        if (c0 > 0.0) != (c1 > 0.0):
            return _refine_crossing(
                system, p0, abs(t1 - t0), direction, horizontal, value
            )
    raise CrossingNotFound(
        f"trajectory never brackets the {axis} line at {value}"
    )


def _refine_crossing(
    system: VectorField2D,
    p0: Point2,
    duration: float,
    direction: str,
    horizontal: bool,
    value: float,
) -> Point2:
    def endpoint(s: float) -> Point2:
        cfg = IntegratorConfig(
            method="rk45",
            step=s,
            rel_tol=1e-13,
            abs_tol=1e-13,
            max_steps=100_000,
            direction=direction,  # type: ignore[arg-type]
            stop_time=s,
        )
        return integrate(system, p0, cfg).final_point

    g_lo = (p0.y if horizontal else p0.x) - value
    lo, hi = 0.0, duration
    best: Point2 = p0
    best_g = abs(g_lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        p_mid = endpoint(mid)
        g_mid = (p_mid.y if horizontal else p_mid.x) - value
        if abs(g_mid) < best_g:
            best, best_g = p_mid, abs(g_mid)
        if abs(g_mid) <= 1e-10:
            return p_mid
        if (g_mid > 0.0) == (g_lo > 0.0):
            lo = mid
        else:
            hi = mid
    return best
