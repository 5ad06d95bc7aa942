"""Grasp planning: enveloping grasps for large objects, pinch grasps for
small ones, and capacity validation of a plan.

Both planners emit an arm-compensation trajectory alongside the motor
trajectory.  An enveloping grasp must keep the root of the grasp (the
slider displacement) fixed in the world while the fingers wrap, so the arm
translates opposite the slider motion.  A pinch grasp must keep the
fingertip height fixed while closing, because the tips drop as the motor
closes.  Object estimates arrive in meters; everything here works in
millimeters, converted once on entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Optional

from .capacity import CapacityModel
from .errors import (
    ObjectTooLargeError,
    ObjectTooSmallError,
    SurfaceConflictError,
)
from .geometry import (
    DEFAULT_STEP,
    GripperGeometry,
    MotorTrajectory,
    aperture_window,
    forward_kinematics,
    inverse_kinematics,
    sample_trajectory,
    slider_displacement,
)
from .perception import APPROACH_HORIZONTAL, APPROACH_VERTICAL, ObjectEstimate

LARGE_OBJECT_THRESHOLD_MM = 80.0
SMALL_HEIGHT_THRESHOLD_MM = 10.0
DEFAULT_SQUEEZE_MARGIN_MM = 5.0

# Cloud-based sizing carries percent-level error, so the class boundary
# admits objects measured marginally under it.
CLASS_TOLERANCE_MM = 1.0


@dataclass(frozen=True)
class GraspPlan:
    """Motor trajectory plus arm compensation for one grasp.

    arm_compensation pairs (theta, displacement mm) along the grasp axis;
    the first displacement is always 0.  residual_uncompensated records
    the slider displacement deliberately left to the fingers.
    """

    approach: str
    motor_trajectory: MotorTrajectory
    arm_compensation: tuple[tuple[float, float], ...]
    residual_uncompensated: float
    target_theta: float
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "approach": self.approach,
            "target_theta": self.target_theta,
            "motor_trajectory": list(self.motor_trajectory.samples),
            "step": self.motor_trajectory.step,
            "arm_compensation": [[t, d] for t, d in self.arm_compensation],
            "residual_uncompensated_mm": self.residual_uncompensated,
            "warnings": list(self.warnings),
        }


def object_diameter_mm(est: ObjectEstimate) -> float:
    """Graspable lateral extent: the smaller horizontal dimension, in mm."""
    return min(est.extents[0], est.extents[1]) * 1000.0


def object_height_mm(est: ObjectEstimate) -> float:
    return est.extents[2] * 1000.0


def plan_envelope_grasp(
    geom: GripperGeometry,
    est: ObjectEstimate,
    squeeze_margin_mm: float = DEFAULT_SQUEEZE_MARGIN_MM,
    *,
    step: float = DEFAULT_STEP,
    residual_fraction: float = 0.0,
    large_object_threshold_mm: float = LARGE_OBJECT_THRESHOLD_MM,
) -> GraspPlan:
    """Enveloping grasp for a large object, closing from fully open.

    The target motor angle reaches an aperture of (object diameter -
    squeeze margin), clamped to the operating window.  Per sample, the arm
    compensation cancels the slider displacement change so the grasp root
    stays fixed while closing; residual_fraction > 0 leaves that share of
    the motion uncompensated (recorded in residual_uncompensated).

    Raises ObjectTooSmallError below the large-object class threshold
    (route those to the pinch planner) and ObjectTooLargeError when the
    object cannot fit inside the fully open fingers.
    """
    if not 0.0 <= residual_fraction <= 1.0:
        raise ValueError(f"residual_fraction must be in [0, 1], got {residual_fraction}")
    diameter = object_diameter_mm(est)
    ap_closed, ap_open = aperture_window(geom)
    if diameter < large_object_threshold_mm - CLASS_TOLERANCE_MM:
        raise ObjectTooSmallError(
            f"object diameter {diameter:.1f} mm below the {large_object_threshold_mm:g} mm "
            "envelope class; use the pinch planner"
        )
    if diameter > ap_open:
        raise ObjectTooLargeError(
            f"object diameter {diameter:.1f} mm exceeds the maximum aperture "
            f"{ap_open:.1f} mm"
        )

    plan_warnings: list[str] = []
    target_aperture = diameter - squeeze_margin_mm
    if target_aperture <= ap_closed:
        target_theta = geom.theta_closed
        plan_warnings.append("squeeze_clamped_to_closed")
    elif target_aperture >= ap_open:
        target_theta = geom.theta_open
        plan_warnings.append("squeeze_clamped_to_open")
    else:
        target_theta = inverse_kinematics(geom, target_aperture)

    theta_start = geom.theta_open
    if target_theta == theta_start:
        trajectory = MotorTrajectory(samples=(theta_start,), step=step)
    else:
        trajectory = sample_trajectory(geom, theta_start, target_theta, step, window="ignore")

    keep = 1.0 - residual_fraction
    delta_start = slider_displacement(geom, theta_start)
    compensation = tuple(
        (th, keep * (delta_start - slider_displacement(geom, th))) for th in trajectory
    )
    residual = residual_fraction * (
        slider_displacement(geom, target_theta) - delta_start
    )
    return GraspPlan(
        approach=APPROACH_HORIZONTAL,
        motor_trajectory=trajectory,
        arm_compensation=compensation,
        residual_uncompensated=residual,
        target_theta=target_theta,
        warnings=tuple(plan_warnings),
    )


def plan_pinch_grasp(
    geom: GripperGeometry,
    est: ObjectEstimate,
    surface_y_mm: float = float("-inf"),
    *,
    step: float = DEFAULT_STEP,
    small_height_threshold_mm: float = SMALL_HEIGHT_THRESHOLD_MM,
) -> GraspPlan:
    """Vertical pinch grasp for a small-height object on a surface.

    Closes fully; per sample the arm compensation restores the fingertip
    height lost while closing, so the tips hold a constant height above
    the surface.  The gripper is centered so the midpoint between the
    fingertips (x = 0 in the center frame) aligns with the object
    centroid, placing the object between the cushion centers.

    surface_y_mm is the support surface coordinate measured along the
    finger axis (larger = farther from the gripper body); the plan fails
    with SurfaceConflictError when the fingertips cannot reach it.
    """
    height = object_height_mm(est)
    if height > small_height_threshold_mm:
        raise ObjectTooLargeError(
            f"object height {height:.1f} mm exceeds the "
            f"{small_height_threshold_mm:g} mm pinch class; use the envelope planner"
        )
    _, ap_open = aperture_window(geom)
    diameter = object_diameter_mm(est)
    if diameter > ap_open:
        raise ObjectTooLargeError(
            f"object diameter {diameter:.1f} mm exceeds the maximum aperture "
            f"{ap_open:.1f} mm"
        )

    theta_start = geom.theta_open
    tip_start = forward_kinematics(geom, theta_start).y_tip
    if tip_start < surface_y_mm:
        raise SurfaceConflictError(
            f"fingertips reach y = {tip_start:.1f} mm but the surface sits at "
            f"{surface_y_mm:.1f} mm"
        )

    trajectory = sample_trajectory(geom, theta_start, geom.theta_closed, step, window="ignore")
    compensation = tuple(
        (th, tip_start - forward_kinematics(geom, th, window="ignore").y_tip)
        for th in trajectory
    )
    return GraspPlan(
        approach=APPROACH_VERTICAL,
        motor_trajectory=trajectory,
        arm_compensation=compensation,
        residual_uncompensated=0.0,
        target_theta=geom.theta_closed,
        warnings=(),
    )


@dataclass(frozen=True)
class ValidationReport:
    """Pass/fail verdicts of a plan against the capacity model."""

    payload_ok: bool
    payload_limit_kg: float
    payload_margin_kg: float
    predicted_deflection_mm: Optional[float]
    aperture_ok: bool
    messages: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.payload_ok and self.aperture_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "payload_ok": self.payload_ok,
            "payload_limit_kg": self.payload_limit_kg,
            "payload_margin_kg": self.payload_margin_kg,
            "predicted_deflection_mm": self.predicted_deflection_mm,
            "aperture_ok": self.aperture_ok,
            "messages": list(self.messages),
        }


def validate_plan(
    plan: GraspPlan,
    est: ObjectEstimate,
    mass_kg: float,
    capacity: CapacityModel,
    hinged: bool = True,
) -> ValidationReport:
    """Check a plan's payload against the capacity table.

    The payload limit is interpolated at the object diameter for the
    plan's approach direction.  Deflection is predicted for horizontal
    approaches only (it is not observed vertically).  Raises
    MissingCapacityDataError when the table has no covering entries.
    """
    if mass_kg < 0:
        raise ValueError(f"mass must be non-negative, got {mass_kg}")
    diameter = object_diameter_mm(est)
    limit = capacity.payload_limit(diameter, plan.approach, hinged)
    margin = limit - mass_kg
    payload_ok = mass_kg <= limit
    messages = []
    if not payload_ok:
        messages.append(
            f"mass {mass_kg:.3f} kg exceeds the {limit:.3f} kg limit "
            f"(margin {margin:.3f} kg)"
        )

    deflection = None
    if plan.approach == APPROACH_HORIZONTAL and limit > 0:
        deflection = capacity.predict_deflection(hinged, mass_kg / limit)

    aperture_ok = "squeeze_clamped_to_closed" not in plan.warnings
    if not aperture_ok:
        messages.append("squeeze target below the closed aperture; grip force marginal")

    return ValidationReport(
        payload_ok=payload_ok,
        payload_limit_kg=limit,
        payload_margin_kg=margin,
        predicted_deflection_mm=deflection,
        aperture_ok=aperture_ok,
        messages=tuple(messages),
    )


PLAN_TRAJECTORY_HEADER = "theta,arm_compensation_mm"


def write_plan_csv(plan: GraspPlan, stream: IO[str]) -> None:
    """Write the compensation trajectory as CSV."""
    stream.write(PLAN_TRAJECTORY_HEADER + "\n")
    for theta, disp in plan.arm_compensation:
        stream.write(f"{theta!r},{disp!r}\n")
