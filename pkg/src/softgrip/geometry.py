"""Closed-form kinematics of the slider-crank-driven two-finger gripper.

The motor angle theta drives a slider-crank whose slider coordinate y_b
moves the finger bases apart; each finger is a rigid isosceles triangle
with leg length l, so the fingertip rotation angle alpha and the fingertip
coordinates follow in closed form.  All lengths are millimeters, all
angles radians.  Motor angles are negative by convention (fully open
-0.8 rad, fully closed -1.4 rad for the default geometry); the chain is
even in theta, so the sign is a labeling choice.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, fields
from importlib import resources
from typing import IO, Iterable

from .errors import (
    ConfigError,
    DomainError,
    InvalidRangeError,
    OutOfRangeError,
)

DEFAULT_STEP = 0.015  # rad, the standard actuation increment

# How far past theta_closed the sliding regime may drive the motor.
SLIDE_OVERTRAVEL = 0.5  # rad


class OperatingRangeWarning(UserWarning):
    """Motor angle outside the declared operating window (soft check)."""


@dataclass(frozen=True)
class GripperGeometry:
    """Mechanism constants of the gripper.

    r1/r2 are the crank and connecting-rod lengths, e and c the frame
    offsets of the slider axis (only e - c enters the math; both are kept
    because they are separate physical measurements), d the lateral offset
    of the finger base, l the finger leg length, and delta_x/delta_y the
    offsets from the fingertip rotation point to the gripper center frame.
    """

    r1: float
    r2: float
    e: float
    c: float
    d: float
    l: float
    delta_x: float
    delta_y: float
    theta_open: float = -0.8
    theta_closed: float = -1.4

    def __post_init__(self):
        if not (self.r2 > self.r1 > 0):
            raise ConfigError(f"need r2 > r1 > 0, got r1={self.r1}, r2={self.r2}")
        if self.d <= 0 or self.l <= 0:
            raise ConfigError(f"need d > 0 and l > 0, got d={self.d}, l={self.l}")
        if not self.theta_closed < self.theta_open:
            raise ConfigError(
                f"need theta_closed < theta_open, got "
                f"[{self.theta_closed}, {self.theta_open}]"
            )
        # arccos domain of the fingertip angle must hold across the window;
        # delta is monotone in theta there, so checking a dense sweep plus
        # both endpoints is sufficient in practice.
        for i in range(65):
            th = self.theta_closed + (self.theta_open - self.theta_closed) * i / 64
            delta = self.e - self.c - slider_coordinate(self, th)
            if math.hypot(self.d, delta) > 2 * self.l:
                raise ConfigError(
                    f"base length exceeds 2*l at theta={th:.6f}; "
                    "geometry incompatible with the isosceles finger model"
                )

    @property
    def slide_floor(self) -> float:
        """Lowest motor angle the sliding regime is allowed to reach."""
        return self.theta_closed - SLIDE_OVERTRAVEL

    def window_contains(self, theta: float) -> bool:
        return self.theta_closed <= theta <= self.theta_open


@dataclass(frozen=True)
class FingerState:
    """Full kinematic snapshot at one motor angle.

    x_left and x_right are the fingertip x coordinates in the gripper
    center frame; the mirror symmetry x_left == -x_right is exact by
    construction.  Both fingertips share the same y coordinate y_tip.
    """

    theta: float
    y_b: float
    delta: float
    b: float
    alpha: float
    x_left: float
    x_right: float
    y_tip: float

    @property
    def aperture(self) -> float:
        """Lateral fingertip distance x_right - x_left (mm)."""
        return self.x_right - self.x_left


@dataclass(frozen=True)
class MotorTrajectory:
    """Strictly monotone sequence of motor angles with its nominal step.

    A single-sample trajectory is allowed (degenerate hold-in-place plan);
    sample_trajectory itself always produces at least two samples.
    """

    samples: tuple[float, ...]
    step: float = DEFAULT_STEP

    def __post_init__(self):
        if not self.samples:
            raise InvalidRangeError("a trajectory needs at least one sample")
        diffs = [b - a for a, b in zip(self.samples, self.samples[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise InvalidRangeError("trajectory samples must be strictly monotone")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def check_window(geom: GripperGeometry, theta: float, window: str = "warn") -> None:
    """Soft/strict operating-window check: "warn" emits OperatingRangeWarning,
    "strict" raises DomainError, "ignore" does nothing."""
    if window == "ignore" or geom.window_contains(theta):
        return
    msg = (
        f"theta={theta:.6f} outside operating window "
        f"[{geom.theta_closed}, {geom.theta_open}]"
    )
    if window == "strict":
        raise DomainError(msg)
    warnings.warn(msg, OperatingRangeWarning, stacklevel=3)


def slider_coordinate(geom: GripperGeometry, theta: float) -> float:
    """Slider coordinate y_b = r1*cos(theta) + sqrt(r2^2 - r1^2*sin^2(theta)).

    Even in theta; the radicand is strictly positive whenever r2 > r1.
    """
    s = geom.r1 * math.sin(theta)
    return geom.r1 * math.cos(theta) + math.sqrt(geom.r2 ** 2 - s * s)


def slider_displacement(geom: GripperGeometry, theta: float) -> float:
    """Slider displacement delta = e - c - y_b(theta)."""
    return geom.e - geom.c - slider_coordinate(geom, theta)


def base_length(geom: GripperGeometry, delta: float) -> float:
    """Finger base length b = sqrt(d^2 + delta^2); always >= d."""
    return math.hypot(geom.d, delta)


def fingertip_angle(geom: GripperGeometry, delta: float, b: float) -> float:
    """Fingertip rotation alpha = arcsin(delta/b) + arccos(b/(2*l)).

    Raises DomainError when b > 2*l (no isosceles triangle with leg l has
    that base) or b <= 0.
    """
    if b <= 0:
        raise DomainError(f"base length must be positive, got {b}")
    ratio = b / (2 * geom.l)
    if ratio > 1:
        raise DomainError(
            f"base length {b:.6f} exceeds 2*l = {2 * geom.l:.6f}; "
            "fingertip angle undefined"
        )
    return math.asin(delta / b) + math.acos(ratio)


def fingertip_positions(geom: GripperGeometry, alpha: float) -> tuple[float, float, float]:
    """Fingertip coordinates (x_left, x_right, y_tip) in the center frame.

    x_left = l*cos(alpha) - delta_x and x_right is its exact mirror; both
    tips sit at y_tip = l*sin(alpha) + delta_y.
    """
    reach = geom.l * math.cos(alpha)
    x_left = reach - geom.delta_x
    x_right = geom.delta_x - reach
    y_tip = geom.l * math.sin(alpha) + geom.delta_y
    return x_left, x_right, y_tip


def forward_kinematics(geom: GripperGeometry, theta: float, window: str = "warn") -> FingerState:
    """Evaluate the full chain at one motor angle.

    window: "warn" (default) warns outside the declared operating window,
    "strict" raises DomainError there, "ignore" skips the check.  The
    sliding regime deliberately exceeds theta_closed, so simulation code
    passes "ignore".
    """
    check_window(geom, theta, window)
    y_b = slider_coordinate(geom, theta)
    delta = geom.e - geom.c - y_b
    b = base_length(geom, delta)
    alpha = fingertip_angle(geom, delta, b)
    x_left, x_right, y_tip = fingertip_positions(geom, alpha)
    return FingerState(
        theta=theta, y_b=y_b, delta=delta, b=b, alpha=alpha,
        x_left=x_left, x_right=x_right, y_tip=y_tip,
    )


def aperture(geom: GripperGeometry, theta: float, window: str = "ignore") -> float:
    """Fingertip aperture x_right - x_left at one motor angle (mm)."""
    return forward_kinematics(geom, theta, window=window).aperture


def aperture_window(geom: GripperGeometry) -> tuple[float, float]:
    """(aperture at theta_closed, aperture at theta_open)."""
    return (
        aperture(geom, geom.theta_closed),
        aperture(geom, geom.theta_open),
    )


def inverse_kinematics(
    geom: GripperGeometry,
    target_aperture: float,
    tol_mm: float = 1e-6,
    max_iter: int = 200,
) -> float:
    """Motor angle whose aperture matches the target, by bisection.

    The aperture is strictly monotone in theta across the operating window
    (the slider coordinate is monotone there and the chain preserves it),
    which guarantees convergence.  Raises OutOfRangeError when the target
    lies outside the achievable [closed, open] aperture window.
    """
    lo, hi = geom.theta_closed, geom.theta_open
    ap_lo, ap_hi = aperture(geom, lo), aperture(geom, hi)
    if not (min(ap_lo, ap_hi) - tol_mm <= target_aperture <= max(ap_lo, ap_hi) + tol_mm):
        raise OutOfRangeError(
            f"target aperture {target_aperture:.6f} mm outside achievable "
            f"[{min(ap_lo, ap_hi):.6f}, {max(ap_lo, ap_hi):.6f}] mm"
        )
    increasing = ap_hi >= ap_lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        err = aperture(geom, mid) - target_aperture
        if abs(err) <= tol_mm and (hi - lo) <= 1e-12:
            return mid
        if (err < 0) == increasing:
            lo = mid
        else:
            hi = mid
        if (hi - lo) <= 1e-13:
            break
    return 0.5 * (lo + hi)


def fingertip_jacobian(geom: GripperGeometry, theta: float, window: str = "warn") -> tuple[float, float]:
    """Analytic (dx_left/dtheta, dy_tip/dtheta) in mm/rad.

    Differentiates the chain; raises DomainError at the b -> 2*l
    singularity where the fingertip angle's derivative blows up.
    """
    check_window(geom, theta, window)
    sin_t, cos_t = math.sin(theta), math.cos(theta)
    root = math.sqrt(geom.r2 ** 2 - (geom.r1 * sin_t) ** 2)
    dy_b = -geom.r1 * sin_t - (geom.r1 ** 2 * sin_t * cos_t) / root
    d_delta = -dy_b

    delta = geom.e - geom.c - slider_coordinate(geom, theta)
    b = base_length(geom, delta)
    spread = 4 * geom.l ** 2 - b * b
    if spread <= 0:
        raise DomainError(
            f"chain singular at theta={theta:.6f}: base length reaches 2*l"
        )
    d_alpha = (geom.d / (b * b) - delta / (b * math.sqrt(spread))) * d_delta

    alpha = fingertip_angle(geom, delta, b)
    dx_left = -geom.l * math.sin(alpha) * d_alpha
    dy_tip = geom.l * math.cos(alpha) * d_alpha
    return dx_left, dy_tip


def sample_trajectory(
    geom: GripperGeometry,
    theta_from: float,
    theta_to: float,
    step: float = DEFAULT_STEP,
    window: str = "warn",
) -> MotorTrajectory:
    """Inclusive monotone sampling from theta_from to theta_to.

    The final sample is clamped to theta_to exactly.  Raises
    InvalidRangeError for a zero span or non-positive step.
    """
    if step <= 0:
        raise InvalidRangeError(f"step must be positive, got {step}")
    span = theta_to - theta_from
    if span == 0:
        raise InvalidRangeError("theta_from and theta_to are equal")
    check_window(geom, theta_from, window)
    check_window(geom, theta_to, window)

    direction = 1.0 if span > 0 else -1.0
    n_full = int(math.floor(abs(span) / step + 1e-9))
    samples = [theta_from + direction * step * i for i in range(n_full + 1)]
    if abs(samples[-1] - theta_to) <= 1e-12:
        samples[-1] = theta_to
    else:
        samples.append(theta_to)
    return MotorTrajectory(samples=tuple(samples), step=step)


def fk_trace(
    geom: GripperGeometry,
    trajectory: MotorTrajectory,
    window: str = "ignore",
) -> tuple[FingerState, ...]:
    """Forward kinematics along a trajectory."""
    return tuple(forward_kinematics(geom, th, window=window) for th in trajectory)


FK_TRACE_HEADER = "theta,y_b,delta,b,alpha,x_left,x_right,y_tip"


def write_fk_trace_csv(states: Iterable[FingerState], stream: IO[str]) -> None:
    """Write finger states as CSV with the standard trace header."""
    stream.write(FK_TRACE_HEADER + "\n")
    for st in states:
        row = (st.theta, st.y_b, st.delta, st.b, st.alpha, st.x_left, st.x_right, st.y_tip)
        stream.write(",".join(repr(v) for v in row) + "\n")


_GEOMETRY_FIELDS = tuple(f.name for f in fields(GripperGeometry))


def geometry_from_dict(raw: dict) -> GripperGeometry:
    """Build a geometry from a mapping with exactly the field names."""
    missing = [k for k in _GEOMETRY_FIELDS if k not in raw]
    extra = [k for k in raw if k not in _GEOMETRY_FIELDS]
    if missing:
        raise ConfigError(f"geometry config missing fields: {', '.join(missing)}")
    if extra:
        raise ConfigError(f"geometry config has unknown fields: {', '.join(extra)}")
    values = {}
    for k in _GEOMETRY_FIELDS:
        v = raw[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"geometry field {k!r} must be a number, got {v!r}")
        values[k] = float(v)
    return GripperGeometry(**values)


def load_geometry(path) -> GripperGeometry:
    """Load a geometry JSON file (snake_case field names, mm/rad)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read geometry config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"geometry config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"geometry config {path} must be a JSON object")
    return geometry_from_dict(raw)


def default_geometry() -> GripperGeometry:
    """The illustrative geometry shipped with the package.

    The mechanism constants are not published for the physical gripper;
    these values satisfy every chain-domain and monotonicity constraint
    over [-1.9, -0.8] rad (see tools/fk_oracle.py) and give a ~103 mm
    maximum aperture with a ~7 mm fingertip height swing.
    """
    raw = json.loads(
        resources.files("softgrip.data").joinpath("geometry_default.json").read_text()
    )
    return geometry_from_dict(raw)
