"""Quasi-static simulation of the real gripper's deviation from the ideal
chain: backlash hysteresis and lateral bias for free motion, and the
compliant sliding contact with a synthetic flex-sensor signal.

The contact model is a kinematic clamp: when the ideal fingertip would
pass the support surface, the penetration is absorbed as finger bend and
the simulated tip rides the surface.  The flex signal is affine in the
running maximum of the bend, so it never decreases while contact develops
and settles once the gripper closes.  Every stochastic term is driven by
an explicit seed; the default simulation is fully deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import IO, Optional, Sequence

import numpy as np

from .errors import ConfigError, InsufficientDataError, InvariantViolationError
from .geometry import (
    DEFAULT_STEP,
    GripperGeometry,
    MotorTrajectory,
    OperatingRangeWarning,
    forward_kinematics,
    sample_trajectory,
)

X_BIAS_CAP_MM = 10.0  # deviations beyond ~1 cm are outside the modeled regime

PHASE_APPROACH = "approach"
PHASE_SLIDING = "sliding"
PHASE_CLOSED = "closed"


@dataclass(frozen=True)
class PerturbationModel:
    """Deviation of the physical mechanism from the ideal chain.

    x_bias_mm shifts the opening laterally: positive widens it beyond the
    model (unreinforced fingers overshoot the modeled maximum opening),
    negative narrows it (the hinge chain keeps the fingers from opening
    fully).  backlash_width_rad is the mechanism dead-band: the effective
    angle trails the command by the full width across a direction
    reversal.  Noise is a +-4 sigma clipped gaussian applied to the
    reported tip coordinates.
    """

    x_bias_mm: float = 0.0
    backlash_width_rad: float = 0.0
    noise_sd_mm: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if abs(self.x_bias_mm) > X_BIAS_CAP_MM:
            raise InvariantViolationError(
                f"|x_bias_mm| capped at {X_BIAS_CAP_MM:g} mm, got {self.x_bias_mm}"
            )
        if self.backlash_width_rad < 0:
            raise InvariantViolationError("backlash_width_rad must be >= 0")
        if self.noise_sd_mm < 0:
            raise InvariantViolationError("noise_sd_mm must be >= 0")

    @classmethod
    def from_dict(cls, raw: dict) -> "PerturbationModel":
        known = {"x_bias_mm", "backlash_width_rad", "noise_sd_mm", "seed"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown perturbation fields: {sorted(extra)}")
        return cls(**raw)


@dataclass(frozen=True)
class FreeRecord:
    """One free-motion sample: ideal chain vs perturbed mechanism."""

    theta: float
    theta_eff: float
    x_left_model: float
    y_tip_model: float
    x_left_sim: float
    y_tip_sim: float


@dataclass(frozen=True)
class FreeTrace:
    records: tuple[FreeRecord, ...]

    def __len__(self) -> int:
        return len(self.records)


def simulate_free(
    geom: GripperGeometry,
    trajectory: MotorTrajectory,
    perturbation: PerturbationModel = PerturbationModel(),
) -> FreeTrace:
    """Free (contactless) motion of the left fingertip along a trajectory.

    Backlash is the standard play operator with half-width w = width/2:
    theta_eff is dragged inside [theta - w, theta + w], so a sustained
    closing sweep rides theta + w, a sustained opening sweep rides
    theta - w, and a reversal freezes the mechanism for one full width of
    command travel.  With an all-zero perturbation the simulated columns
    equal the model columns bit for bit.
    """
    half_play = perturbation.backlash_width_rad / 2.0
    rng = (
        np.random.default_rng(perturbation.seed)
        if perturbation.noise_sd_mm > 0
        else None
    )
    sd = perturbation.noise_sd_mm

    records = []
    theta_eff = trajectory.samples[0]
    for theta in trajectory:
        theta_eff = min(max(theta_eff, theta - half_play), theta + half_play)
        model = forward_kinematics(geom, theta, window="ignore")
        state = (
            model
            if theta_eff == theta
            else forward_kinematics(geom, theta_eff, window="ignore")
        )
        x_sim = state.x_left - perturbation.x_bias_mm
        y_sim = state.y_tip
        if rng is not None:
            nx, ny = rng.normal(0.0, sd, 2)
            x_sim += float(np.clip(nx, -4 * sd, 4 * sd))
            y_sim += float(np.clip(ny, -4 * sd, 4 * sd))
        records.append(
            FreeRecord(
                theta=theta,
                theta_eff=theta_eff,
                x_left_model=model.x_left,
                y_tip_model=model.y_tip,
                x_left_sim=x_sim,
                y_tip_sim=y_sim,
            )
        )
    return FreeTrace(records=tuple(records))


@dataclass(frozen=True)
class SlideConfig:
    """Sliding-mode run configuration.

    surface_y_mm is the flat-surface coordinate along the finger axis in
    the gripper center frame (larger = farther from the gripper body);
    None resolves to the fingertip height at theta_to, which makes the
    sliding phase persist over the whole sweep and closure land exactly on
    theta_to.  flex_gain/flex_offset define the affine synthetic flex
    signal in reading units.
    """

    surface_y_mm: Optional[float] = None
    theta_from: float = -0.8
    theta_to: float = -1.9
    step: float = DEFAULT_STEP
    flex_gain: float = 1.0
    flex_offset: float = 0.0

    def __post_init__(self):
        if not self.theta_to < self.theta_from:
            raise ConfigError(
                f"need theta_to < theta_from, got [{self.theta_to}, {self.theta_from}]"
            )
        if self.step <= 0:
            raise ConfigError(f"step must be positive, got {self.step}")

    @classmethod
    def from_dict(cls, raw: dict) -> "SlideConfig":
        known = {"surface_y_mm", "theta_from", "theta_to", "step", "flex_gain", "flex_offset"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown slide fields: {sorted(extra)}")
        return cls(**raw)


@dataclass(frozen=True)
class SlideRecord:
    theta: float
    y_free: float
    y_sim: float
    bend: float
    flex: float
    phase: str


@dataclass(frozen=True)
class SlideTrace:
    """Per-step sliding-contact records plus run summary.

    Invariants: y_sim = min(y_free, surface) at every step; phases occur
    in the order approach -> sliding -> closed with each possibly empty;
    flex is non-decreasing until the closed event and constant after it.
    """

    records: tuple[SlideRecord, ...]
    surface_y_mm: float
    contact_theta: Optional[float]
    closure_theta: float
    peak_bend: float
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.records)


def simulate_slide(geom: GripperGeometry, cfg: SlideConfig) -> SlideTrace:
    """Close the motor against a flat surface and record the contact.

    Contact exists wherever the ideal tip coordinate would pass the
    surface (y_free > surface); the penetration becomes finger bend and
    the simulated tip stays on the surface.  The run ends closed at
    theta_to; if sliding ends earlier (the ideal tip retreats off the
    surface) the trace is closed from that sample on.  A run that never
    touches the surface carries a "no_contact" warning.
    """
    floor = geom.slide_floor
    if cfg.theta_from > geom.theta_open + 1e-12 or cfg.theta_to < floor - 1e-12:
        warnings.warn(
            f"slide range [{cfg.theta_to}, {cfg.theta_from}] exceeds the extended "
            f"window [{floor}, {geom.theta_open}]",
            OperatingRangeWarning,
            stacklevel=2,
        )

    trajectory = sample_trajectory(geom, cfg.theta_from, cfg.theta_to, cfg.step, window="ignore")
    surface = (
        cfg.surface_y_mm
        if cfg.surface_y_mm is not None
        else forward_kinematics(geom, cfg.theta_to, window="ignore").y_tip
    )

    records = []
    contact_theta = None
    closure_theta = None
    peak_bend = 0.0
    running_max = 0.0
    flex_at_close = None
    closed = False
    last = len(trajectory) - 1

    for i, theta in enumerate(trajectory):
        y_free = forward_kinematics(geom, theta, window="ignore").y_tip
        y_sim = min(y_free, surface)
        bend = y_free - y_sim
        if bend > 0 and contact_theta is None:
            contact_theta = theta
        if bend > peak_bend:
            peak_bend = bend
        if bend > running_max:
            running_max = bend

        if not closed and (i == last or (contact_theta is not None and bend == 0.0)):
            closed = True
            closure_theta = theta
            flex_at_close = cfg.flex_offset + cfg.flex_gain * running_max

        if closed:
            phase = PHASE_CLOSED
            flex = flex_at_close
        elif bend > 0.0:
            phase = PHASE_SLIDING
            flex = cfg.flex_offset + cfg.flex_gain * running_max
        else:
            phase = PHASE_APPROACH
            flex = cfg.flex_offset + cfg.flex_gain * running_max

        records.append(
            SlideRecord(theta=theta, y_free=y_free, y_sim=y_sim, bend=bend, flex=flex, phase=phase)
        )

    trace_warnings = () if contact_theta is not None else ("no_contact",)
    return SlideTrace(
        records=tuple(records),
        surface_y_mm=surface,
        contact_theta=contact_theta,
        closure_theta=closure_theta,
        peak_bend=peak_bend,
        warnings=trace_warnings,
    )


DIRECTION_DESCEND = "descend"
DIRECTION_HOLD = "hold"
DIRECTION_ASCEND = "ascend"


def flex_feedback_direction(
    records: Sequence[SlideRecord],
    flex_offset: float = 0.0,
    offset_atol: float = 1e-9,
    ascend_threshold: float = 1.0,
) -> str:
    """Manipulator guidance from a flex-trace suffix.

    "descend" when the flex signal never leaves its offset (no contact
    yet: keep approaching the surface); "ascend" when the per-step flex
    rate exceeds the max-contact threshold (back off); otherwise "hold",
    covering both a settled plateau (rates in the dead-band) and a
    contained rise.  Needs at least two records.
    """
    if len(records) < 2:
        raise InsufficientDataError(
            f"need at least 2 trace records, got {len(records)}"
        )
    flex = [r.flex for r in records]
    if all(abs(f - flex_offset) <= offset_atol for f in flex):
        return DIRECTION_DESCEND
    rates = [b - a for a, b in zip(flex, flex[1:])]
    if max(rates) > ascend_threshold:
        return DIRECTION_ASCEND
    return DIRECTION_HOLD


SLIDE_TRACE_HEADER = "theta,y_free,y_sim,bend,flex,phase"
FREE_TRACE_HEADER = "theta,x_left_model,y_tip_model,x_left_sim,y_tip_sim"


def write_slide_trace_csv(trace: SlideTrace, stream: IO[str]) -> None:
    stream.write(SLIDE_TRACE_HEADER + "\n")
    for r in trace.records:
        stream.write(f"{r.theta!r},{r.y_free!r},{r.y_sim!r},{r.bend!r},{r.flex!r},{r.phase}\n")


def write_free_trace_csv(trace: FreeTrace, stream: IO[str]) -> None:
    stream.write(FREE_TRACE_HEADER + "\n")
    for r in trace.records:
        stream.write(
            f"{r.theta!r},{r.x_left_model!r},{r.y_tip_model!r},"
            f"{r.x_left_sim!r},{r.y_tip_sim!r}\n"
        )
