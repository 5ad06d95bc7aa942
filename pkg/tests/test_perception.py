import io

import numpy as np
import pytest

from softgrip import (
    EmptyCloudError,
    FrameMismatchError,
    InvalidPoseError,
    ObjectEstimate,
    ParseError,
    PointCloud,
    RegionOfInterest,
    ScenePose,
    WorkspaceLimits,
    crop_cloud,
    decide_approach,
    estimate_object,
    make_cylinder,
    max_aperture_m,
    merge_clouds,
    parse_cloud,
    transform_cloud,
    uniform_box_noise,
    write_cloud_xyz,
)
from softgrip.perception import GLOBAL_FRAME


def random_rigid_pose(seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    mat = np.eye(4)
    mat[:3, :3] = q
    mat[:3, 3] = rng.uniform(-1, 1, 3)
    return ScenePose(mat)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_plain_xyz():
    cloud = parse_cloud("0 0 0\n1 2 3\n")
    assert len(cloud) == 2
    assert cloud.points[1].tolist() == [1.0, 2.0, 3.0]


def test_parse_skips_comments_and_blank_lines():
    cloud = parse_cloud("# header\n\n0.5 0.5 0.5\n# trailing\n")
    assert len(cloud) == 1


def test_parse_reports_line_and_column():
    with pytest.raises(ParseError) as err:
        parse_cloud("0 0 0\n1 oops 3\n")
    assert err.value.line == 2
    assert err.value.column == 2

    with pytest.raises(ParseError) as err:
        parse_cloud("0 0\n")
    assert err.value.line == 1


def test_parse_rejects_non_finite():
    with pytest.raises(ParseError):
        parse_cloud("0 0 nan\n")


def test_parse_pcd_subset():
    text = (
        "# .PCD v0.7 - Point Cloud Data file format\n"
        "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
        "WIDTH 2\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS 2\nDATA ascii\n"
        "0.1 0.2 0.3\n1.0 1.0 1.0\n"
    )
    cloud = parse_cloud(text)
    assert len(cloud) == 2
    assert cloud.points[0].tolist() == [0.1, 0.2, 0.3]


def test_parse_pcd_rejects_extra_fields():
    text = (
        "VERSION 0.7\nFIELDS x y z rgb\nSIZE 4 4 4 4\nTYPE F F F F\n"
        "COUNT 1 1 1 1\nWIDTH 1\nHEIGHT 1\nPOINTS 1\nDATA ascii\n0 0 0 0\n"
    )
    with pytest.raises(ParseError, match="unsupported fields"):
        parse_cloud(text)


def test_parse_pcd_rejects_binary_mode():
    text = (
        "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\n"
        "WIDTH 1\nHEIGHT 1\nPOINTS 1\nDATA binary\n"
    )
    with pytest.raises(ParseError, match="unsupported PCD mode"):
        parse_cloud(text)


def test_parse_pcd_point_count_mismatch():
    text = (
        "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\n"
        "WIDTH 3\nHEIGHT 1\nPOINTS 3\nDATA ascii\n0 0 0\n"
    )
    with pytest.raises(ParseError, match="POINTS declares"):
        parse_cloud(text)


def test_generated_cylinder_roundtrips_bit_identically():
    cloud = make_cylinder(n_points=5000, seed=42)
    buf = io.StringIO()
    write_cloud_xyz(cloud, buf)
    text = buf.getvalue()
    assert len(text.splitlines()) == 5000
    reparsed = parse_cloud(text, frame_id=cloud.frame_id)
    assert np.array_equal(reparsed.points, cloud.points)


# ---------------------------------------------------------------------------
# transform / merge / crop
# ---------------------------------------------------------------------------

def test_transform_identity_keeps_points():
    cloud = parse_cloud("1 2 3\n4 5 6\n")
    out = transform_cloud(cloud, ScenePose.identity())
    assert np.array_equal(out.points, cloud.points)
    assert out.frame_id == GLOBAL_FRAME


def test_transform_pure_translation():
    cloud = parse_cloud("0 0 0\n")
    mat = np.eye(4)
    mat[:3, 3] = (1.0, 0.0, 0.0)
    out = transform_cloud(cloud, ScenePose(mat))
    assert out.points[0].tolist() == [1.0, 0.0, 0.0]


def test_transform_preserves_pairwise_distances():
    rng = np.random.default_rng(5)
    cloud = PointCloud(rng.uniform(-1, 1, size=(60, 3)))
    out = transform_cloud(cloud, random_rigid_pose(17))
    d_in = np.linalg.norm(cloud.points[:, None] - cloud.points[None, :], axis=-1)
    d_out = np.linalg.norm(out.points[:, None] - out.points[None, :], axis=-1)
    scale = np.maximum(d_in, 1e-12)
    assert np.max(np.abs(d_in - d_out) / scale) <= 1e-9


def test_pose_validation():
    bad = np.eye(4)
    bad[3, 3] = 2.0
    with pytest.raises(InvalidPoseError):
        ScenePose(bad)
    skewed = np.eye(4)
    skewed[0, 1] = 0.01
    with pytest.raises(InvalidPoseError):
        ScenePose(skewed)
    with pytest.raises(InvalidPoseError):
        ScenePose.from_flat([1.0] * 12)


def test_merge_single_cloud_is_identity():
    cloud = make_cylinder(n_points=100, seed=1)
    merged = merge_clouds([cloud])
    assert np.array_equal(merged.points, cloud.points)


def test_merge_is_order_free_for_extents():
    a = make_cylinder(n_points=300, seed=2)
    b = uniform_box_noise(50, side_m=0.2, seed=3)
    ab = estimate_object(merge_clouds([a, b]), trim_fraction=0.0)
    ba = estimate_object(merge_clouds([b, a]), trim_fraction=0.0)
    assert ab.extents == ba.extents


def test_merge_rejects_frame_mix():
    a = make_cylinder(n_points=10, seed=1, frame_id="global")
    b = make_cylinder(n_points=10, seed=1, frame_id="camera")
    with pytest.raises(FrameMismatchError):
        merge_clouds([a, b])


def test_crop_inclusive_and_idempotent():
    cloud = parse_cloud("0 0 0\n0.5 0.5 0.5\n2 2 2\n")
    roi = RegionOfInterest((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    once = crop_cloud(cloud, roi)
    assert len(once) == 2  # the corner point is retained
    twice = crop_cloud(once, roi)
    assert np.array_equal(once.points, twice.points)


def test_crop_monotone_in_roi():
    cloud = uniform_box_noise(500, side_m=1.0, seed=9)
    large = crop_cloud(cloud, RegionOfInterest((-0.4,) * 3, (0.4,) * 3))
    small = crop_cloud(cloud, RegionOfInterest((-0.2,) * 3, (0.2,) * 3))
    large_set = {tuple(p) for p in large.points}
    assert all(tuple(p) in large_set for p in small.points)


def test_crop_isolates_labeled_object():
    cylinder = make_cylinder(diameter_m=0.08, height_m=0.12, n_points=1500, seed=4,
                             center=(0.0, 0.0, 0.06))
    clutter = uniform_box_noise(400, side_m=1.0, seed=5, center=(0.6, 0.0, 0.2))
    scene = merge_clouds([cylinder, clutter])
    roi = RegionOfInterest((-0.06, -0.06, -0.01), (0.06, 0.06, 0.13))
    inside = crop_cloud(scene, roi)
    cylinder_set = {tuple(p) for p in cylinder.points}
    assert len(inside) >= 1500 * 0.99
    # nothing from the clutter block survives
    assert all(tuple(p) in cylinder_set for p in inside.points)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def test_estimate_single_point_zero_extents():
    est = estimate_object(parse_cloud("0.1 0.2 0.3\n"), trim_fraction=0.0)
    assert est.extents == (0.0, 0.0, 0.0)
    assert est.centroid == (0.1, 0.2, 0.3)
    assert est.dominant_axis == "X"  # deterministic tie-break


def test_estimate_empty_cloud_raises():
    with pytest.raises(EmptyCloudError):
        estimate_object(PointCloud(np.empty((0, 3))), trim_fraction=0.0)


def test_estimate_cylinder_extents_within_2_percent():
    cloud = make_cylinder(diameter_m=0.08, height_m=0.12, n_points=5000, seed=0)
    est = estimate_object(cloud, trim_fraction=0.0)
    assert est.extents[0] == pytest.approx(0.08, rel=0.02)
    assert est.extents[1] == pytest.approx(0.08, rel=0.02)
    assert est.extents[2] == pytest.approx(0.12, rel=0.02)
    assert est.dominant_axis == "Z"
    assert abs(est.centroid[2]) < 0.005


def test_estimate_with_outliers_and_trim_within_5_percent():
    cylinder = make_cylinder(diameter_m=0.08, height_m=0.12, n_points=5000, seed=0)
    outliers = uniform_box_noise(50, side_m=1.0, seed=8)
    noisy = merge_clouds([cylinder, outliers])
    est = estimate_object(noisy, trim_fraction=0.01)
    assert est.extents[0] == pytest.approx(0.08, rel=0.05)
    assert est.extents[1] == pytest.approx(0.08, rel=0.05)
    assert est.extents[2] == pytest.approx(0.12, rel=0.05)


def test_estimate_invariant_under_permutation():
    cloud = make_cylinder(n_points=800, seed=12)
    rng = np.random.default_rng(13)
    shuffled = PointCloud(rng.permutation(cloud.points), cloud.frame_id)
    a = estimate_object(cloud, trim_fraction=0.01)
    b = estimate_object(shuffled, trim_fraction=0.01)
    assert a.extents == b.extents
    assert a.centroid == pytest.approx(b.centroid, abs=1e-12)


def test_two_half_views_match_full_cloud_within_1_percent():
    full = make_cylinder(diameter_m=0.08, height_m=0.12, n_points=5000, seed=0)
    left = PointCloud(full.points[full.points[:, 0] <= 0.005], GLOBAL_FRAME)
    right = PointCloud(full.points[full.points[:, 0] >= -0.005], GLOBAL_FRAME)

    # Ship each half through a rigid camera pose and back.
    restored = []
    for half, seed in ((left, 21), (right, 22)):
        pose = random_rigid_pose(seed)
        inv = np.eye(4)
        inv[:3, :3] = pose.rotation.T
        inv[:3, 3] = -pose.rotation.T @ pose.translation
        camera_view = transform_cloud(half, ScenePose(inv))
        restored.append(transform_cloud(PointCloud(camera_view.points), pose))

    merged = merge_clouds(restored)
    est_full = estimate_object(full, trim_fraction=0.0)
    est_merged = estimate_object(merged, trim_fraction=0.0)
    for a, b in zip(est_merged.extents, est_full.extents):
        assert a == pytest.approx(b, rel=0.01)


# ---------------------------------------------------------------------------
# approach decision
# ---------------------------------------------------------------------------

def make_estimate(extents, centroid=(0.0, 0.0, 0.1)):
    axis = "XYZ"[int(np.argmax(extents))]
    return ObjectEstimate(centroid=centroid, extents=extents,
                          point_count=1000, dominant_axis=axis)


def test_small_height_goes_vertical(geom):
    decision = decide_approach(make_estimate((0.03, 0.03, 0.008)), geom)
    assert decision.approach == "vertical"
    assert decision.reason == "small_height"


def test_tall_object_goes_horizontal(geom):
    decision = decide_approach(make_estimate((0.06, 0.06, 0.20)), geom)
    assert decision.approach == "horizontal"
    assert decision.reason == "dominant_vertical_extent"
    assert max_aperture_m(geom) > 0.06


def test_oversized_object_ungraspable(geom):
    decision = decide_approach(make_estimate((0.3, 0.3, 0.3)), geom)
    assert decision.approach == "ungraspable"
    assert decision.reason == "exceeds_aperture"


def test_out_of_workspace_falls_back_vertical(geom):
    limits = WorkspaceLimits((-0.5, -0.5, 0.0), (0.5, 0.5, 0.5))
    decision = decide_approach(
        make_estimate((0.06, 0.06, 0.20), centroid=(2.0, 0.0, 0.1)), geom, limits
    )
    assert decision.approach == "vertical"
    assert decision.reason == "workspace_limited"


def test_medium_flat_object_goes_horizontal(geom):
    decision = decide_approach(make_estimate((0.06, 0.05, 0.04)), geom)
    assert decision.approach == "horizontal"
    assert decision.reason == "fits_aperture"


def test_decision_is_deterministic(geom):
    est = make_estimate((0.06, 0.06, 0.20))
    assert decide_approach(est, geom) == decide_approach(est, geom)


def test_wide_but_flat_object_ungraspable(geom):
    decision = decide_approach(make_estimate((0.4, 0.4, 0.005)), geom)
    assert decision.approach == "ungraspable"
