"""Point-cloud ingestion, calibrated merging, cropping, and object sizing.

Clouds are meters; the gripper geometry is millimeters.  The single unit
conversion happens where a decision needs the aperture (decide_approach)
or where the planner receives extents.  Parsing covers plain ASCII XYZ
(one "x y z" record per line, '#' comments) and the ASCII PCD v0.7 subset
with FIELDS x y z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import (
    EmptyCloudError,
    FrameMismatchError,
    InvalidPoseError,
    ParseError,
)
from .geometry import GripperGeometry, aperture

GLOBAL_FRAME = "global"
CAMERA_FRAME = "camera"

AXIS_NAMES = ("X", "Y", "Z")


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Immutable (N, 3) cloud of finite coordinates plus a frame label."""

    points: np.ndarray
    frame_id: str = CAMERA_FRAME

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def is_empty(self) -> bool:
        return len(self) == 0


@dataclass(frozen=True, eq=False)
class ScenePose:
    """Camera-to-global rigid transform as a 4x4 row-major matrix."""

    transform: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.transform, dtype=np.float64)
        if mat.shape != (4, 4):
            raise InvalidPoseError(f"transform must be 4x4, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise InvalidPoseError("transform contains non-finite values")
        if not np.allclose(mat[3], (0.0, 0.0, 0.0, 1.0), atol=1e-9):
            raise InvalidPoseError(f"bottom row must be (0,0,0,1), got {mat[3]}")
        rot = mat[:3, :3]
        if np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-6:
            raise InvalidPoseError("rotation block is not orthonormal within 1e-6")
        if np.linalg.det(rot) < 0:
            raise InvalidPoseError("rotation block is a reflection (det < 0)")
        mat = np.ascontiguousarray(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "transform", mat)

    @classmethod
    def identity(cls) -> "ScenePose":
        return cls(np.eye(4))

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "ScenePose":
        arr = np.asarray(list(values), dtype=np.float64)
        if arr.shape != (16,):
            raise InvalidPoseError(f"expected 16 row-major numbers, got {arr.shape}")
        return cls(arr.reshape(4, 4))

    @property
    def rotation(self) -> np.ndarray:
        return self.transform[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.transform[:3, 3]


@dataclass(frozen=True)
class RegionOfInterest:
    """Axis-aligned crop box in the global frame (meters, inclusive)."""

    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.min_corner)
        hi = tuple(float(v) for v in self.max_corner)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("corners must have 3 components")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError(f"need min < max per axis, got {lo} vs {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @classmethod
    def from_dict(cls, raw: dict) -> "RegionOfInterest":
        return cls(tuple(raw["min_corner"]), tuple(raw["max_corner"]))


@dataclass(frozen=True)
class ObjectEstimate:
    """Centroid and per-axis extents of a (trimmed) cloud, meters."""

    centroid: tuple[float, float, float]
    extents: tuple[float, float, float]
    point_count: int
    dominant_axis: str

    def __post_init__(self):
        if any(e < 0 for e in self.extents):
            raise ValueError(f"extents must be non-negative, got {self.extents}")
        if self.dominant_axis not in AXIS_NAMES:
            raise ValueError(f"dominant_axis must be one of {AXIS_NAMES}")

    def to_dict(self) -> dict:
        return {
            "centroid_m": list(self.centroid),
            "extents_m": list(self.extents),
            "point_count": self.point_count,
            "dominant_axis": self.dominant_axis,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ObjectEstimate":
        try:
            return cls(
                centroid=tuple(float(v) for v in raw["centroid_m"]),
                extents=tuple(float(v) for v in raw["extents_m"]),
                point_count=int(raw["point_count"]),
                dominant_axis=str(raw["dominant_axis"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad object estimate payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Parsing and writing
# ---------------------------------------------------------------------------

def _parse_xyz_record(tokens: list[str], line_no: int) -> tuple[float, float, float]:
    if len(tokens) != 3:
        raise ParseError(
            f"expected 3 fields per record, got {len(tokens)}",
            line=line_no,
            column=min(len(tokens) + 1, 4),
        )
    out = []
    for col, tok in enumerate(tokens, start=1):
        try:
            val = float(tok)
        except ValueError:
            raise ParseError(f"malformed number {tok!r}", line=line_no, column=col) from None
        if not math.isfinite(val):
            raise ParseError(f"non-finite coordinate {tok!r}", line=line_no, column=col)
        out.append(val)
    return tuple(out)


_PCD_HEADER_KEYS = {
    "VERSION", "FIELDS", "SIZE", "TYPE", "COUNT",
    "WIDTH", "HEIGHT", "VIEWPOINT", "POINTS", "DATA",
}


def _parse_pcd(lines: list[tuple[int, str]], frame_id: str) -> PointCloud:
    header: dict[str, list[str]] = {}
    header_lines: dict[str, int] = {}
    data_start = None
    for idx, (line_no, text) in enumerate(lines):
        tokens = text.split()
        key = tokens[0].upper()
        if key not in _PCD_HEADER_KEYS:
            raise ParseError(f"unexpected token {tokens[0]!r} in PCD header", line=line_no, column=1)
        header[key] = tokens[1:]
        header_lines[key] = line_no
        if key == "DATA":
            data_start = idx + 1
            break
    if data_start is None:
        raise ParseError("PCD header has no DATA line")

    fields = [f.lower() for f in header.get("FIELDS", [])]
    if fields != ["x", "y", "z"]:
        raise ParseError(
            f"unsupported fields {' '.join(fields) or '<none>'}; only 'x y z' is supported",
            line=header_lines.get("FIELDS"),
        )
    mode = [m.lower() for m in header.get("DATA", [])]
    if mode != ["ascii"]:
        raise ParseError(
            f"unsupported PCD mode {' '.join(mode) or '<none>'}; only 'ascii' is supported",
            line=header_lines.get("DATA"),
        )
    types = [t.upper() for t in header.get("TYPE", [])]
    if types and types != ["F", "F", "F"]:
        raise ParseError(f"unsupported TYPE {' '.join(types)}", line=header_lines.get("TYPE"))
    sizes = header.get("SIZE", [])
    if sizes and any(s not in ("4", "8") for s in sizes):
        raise ParseError(f"unsupported SIZE {' '.join(sizes)}", line=header_lines.get("SIZE"))

    declared = None
    if "POINTS" in header:
        try:
            declared = int(header["POINTS"][0])
        except (IndexError, ValueError):
            raise ParseError("malformed POINTS value", line=header_lines["POINTS"]) from None

    records = []
    for line_no, text in lines[data_start:]:
        records.append(_parse_xyz_record(text.split(), line_no))
    if declared is not None and declared != len(records):
        raise ParseError(
            f"POINTS declares {declared} records but data has {len(records)}",
            line=header_lines["POINTS"],
        )
    return PointCloud(np.array(records, dtype=np.float64).reshape(len(records), 3), frame_id)


def parse_cloud(data: bytes | str, frame_id: str = CAMERA_FRAME) -> PointCloud:
    """Parse ASCII XYZ or the ASCII PCD v0.7 x/y/z subset.

    Raises ParseError with the line/column of the first malformed record.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8 text: {exc}") from exc

    meaningful: list[tuple[int, str]] = []
    for line_no, raw in enumerate(data.splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        meaningful.append((line_no, text))

    if meaningful and meaningful[0][1].split()[0].upper() in ("VERSION",):
        return _parse_pcd(meaningful, frame_id)

    records = [_parse_xyz_record(text.split(), line_no) for line_no, text in meaningful]
    return PointCloud(np.array(records, dtype=np.float64).reshape(len(records), 3), frame_id)


def load_cloud(path, frame_id: str = CAMERA_FRAME) -> PointCloud:
    with open(path, "rb") as fh:
        return parse_cloud(fh.read(), frame_id)


def write_cloud_xyz(cloud: PointCloud, stream: IO[str]) -> None:
    """Write as plain XYZ using shortest-roundtrip floats, one point per line."""
    for x, y, z in cloud.points:
        stream.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")


# ---------------------------------------------------------------------------
# Transform / merge / crop / estimate
# ---------------------------------------------------------------------------

def transform_cloud(cloud: PointCloud, pose: ScenePose) -> PointCloud:
    """Apply p' = R p + t to every point and relabel to the global frame."""
    pts = cloud.points @ pose.rotation.T + pose.translation
    return PointCloud(pts, GLOBAL_FRAME)


def merge_clouds(clouds: Sequence[PointCloud]) -> PointCloud:
    """Concatenate clouds that share one frame."""
    if not clouds:
        raise EmptyCloudError("nothing to merge")
    frames = {c.frame_id for c in clouds}
    if len(frames) != 1:
        raise FrameMismatchError(f"clouds span multiple frames: {sorted(frames)}")
    pts = np.vstack([c.points for c in clouds])
    return PointCloud(pts, clouds[0].frame_id)


def crop_cloud(cloud: PointCloud, roi: RegionOfInterest) -> PointCloud:
    """Keep points inside the box, bounds inclusive.  Idempotent."""
    if cloud.is_empty:
        return cloud
    lo = np.array(roi.min_corner)
    hi = np.array(roi.max_corner)
    mask = np.all((cloud.points >= lo) & (cloud.points <= hi), axis=1)
    return PointCloud(cloud.points[mask], cloud.frame_id)


def estimate_object(cloud: PointCloud, trim_fraction: float = 0.01) -> ObjectEstimate:
    """Percentile-trimmed axis-aligned extents plus centroid.

    Per axis the [p, 1-p] percentile range defines the extent; the centroid
    is the mean of the points retained inside all three ranges.  With
    trim_fraction 0 this is the exact bounding box.  Ties for the dominant
    axis break deterministically X before Y before Z.
    """
    if not 0 <= trim_fraction < 0.5:
        raise ValueError(f"trim_fraction must be in [0, 0.5), got {trim_fraction}")
    if cloud.is_empty:
        raise EmptyCloudError("cannot estimate an empty cloud")

    pts = cloud.points
    if trim_fraction == 0.0:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
    else:
        lo, hi = np.percentile(pts, [100 * trim_fraction, 100 * (1 - trim_fraction)], axis=0)
    mask = np.all((pts >= lo) & (pts <= hi), axis=1)
    retained = pts[mask]
    if retained.shape[0] == 0:
        raise EmptyCloudError("no points remain after trimming")

    extents = hi - lo
    centroid = retained.mean(axis=0)
    dominant = AXIS_NAMES[int(np.argmax(extents))]
    return ObjectEstimate(
        centroid=tuple(float(v) for v in centroid),
        extents=tuple(float(v) for v in extents),
        point_count=int(retained.shape[0]),
        dominant_axis=dominant,
    )


# ---------------------------------------------------------------------------
# Approach decision
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorkspaceLimits:
    """Axis-aligned reachability box for the carrying manipulator (meters)."""

    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.min_corner)
        hi = tuple(float(v) for v in self.max_corner)
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError(f"need min < max per axis, got {lo} vs {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    def contains(self, point: Sequence[float]) -> bool:
        return all(a <= p <= b for a, p, b in zip(self.min_corner, point, self.max_corner))

    @classmethod
    def from_dict(cls, raw: dict) -> "WorkspaceLimits":
        return cls(tuple(raw["min_corner"]), tuple(raw["max_corner"]))


DEFAULT_WORKSPACE = WorkspaceLimits((-10.0, -10.0, -10.0), (10.0, 10.0, 10.0))

APPROACH_HORIZONTAL = "horizontal"
APPROACH_VERTICAL = "vertical"
APPROACH_UNGRASPABLE = "ungraspable"


@dataclass(frozen=True)
class ApproachDecision:
    approach: str
    reason: str

    def to_dict(self) -> dict:
        return {"approach": self.approach, "reason": self.reason}


def max_aperture_m(geom: GripperGeometry) -> float:
    """Fully-open fingertip aperture converted to meters."""
    return aperture(geom, geom.theta_open) / 1000.0


def decide_approach(
    est: ObjectEstimate,
    geom: GripperGeometry,
    limits: WorkspaceLimits = DEFAULT_WORKSPACE,
    small_height_threshold_m: float = 0.010,
) -> ApproachDecision:
    """Pick the grasp approach from the dominant object dimension.

    Total and deterministic.  Rules, in order: small-height objects are
    approached vertically (the manipulator must not hit the support
    surface); otherwise the object's smaller lateral extent must fit the
    aperture at all; a horizontally reachable object is approached
    horizontally (tall objects because their dominant extent is vertical);
    outside the workspace box the approach falls back to vertical.
    """
    ex, ey, ez = est.extents
    lateral = min(ex, ey)
    ap = max_aperture_m(geom)

    if ez <= small_height_threshold_m:
        if lateral <= ap:
            return ApproachDecision(APPROACH_VERTICAL, "small_height")
        return ApproachDecision(APPROACH_UNGRASPABLE, "exceeds_aperture")
    if lateral > ap:
        return ApproachDecision(APPROACH_UNGRASPABLE, "exceeds_aperture")
    if limits.contains(est.centroid):
        if est.dominant_axis == "Z":
            return ApproachDecision(APPROACH_HORIZONTAL, "dominant_vertical_extent")
        return ApproachDecision(APPROACH_HORIZONTAL, "fits_aperture")
    return ApproachDecision(APPROACH_VERTICAL, "workspace_limited")


# ---------------------------------------------------------------------------
# Scene manifests
# ---------------------------------------------------------------------------

def load_scene_manifest(path) -> list[tuple[str, ScenePose]]:
    """Read a scene manifest: {"views": [{"cloud": path, "transform": [16]}]}.

    Cloud paths are returned as given (the caller resolves them relative to
    the manifest location).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest {path} is not valid JSON: {exc}") from exc
    views = raw.get("views")
    if not isinstance(views, list) or not views:
        raise ParseError(f"manifest {path} must contain a non-empty 'views' list")
    out = []
    for i, view in enumerate(views):
        try:
            cloud_path = view["cloud"]
            pose = ScenePose.from_flat(view["transform"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"manifest view {i} malformed: {exc}") from exc
        out.append((cloud_path, pose))
    return out
