"""Identity-suite bundle: named residuals, suite reports, seeded determinism."""

import pytest

from akgeo.checks import (
    CHECK_NAMES,
    coefficient_relation_residual,
    point_checks,
    random_frame_suite,
    run_suite,
    scalar_anchor_defect,
)
from akgeo.frames import PerturbedFrame, frame_field, sample_points


def test_point_checks_cover_all_names():
    ff = frame_field("random", seed=3)
    x = sample_points("random", 1, seed=3)[0]
    out = point_checks(ff, x)
    assert set(out) == set(CHECK_NAMES)
    assert all(v >= 0.0 for v in out.values())


def test_point_checks_hold_on_random_frame():
    ff = PerturbedFrame.seeded(21, amplitude=0.1)
    x = sample_points("random", 1, seed=21)[0]
    for name, value in point_checks(ff, x, gauge_seed=21).items():
        assert value < 1e-8, name


@pytest.mark.parametrize("manifold", ["flat", "t4", "s2xr2", "cp2", "random"])
def test_run_suite_passes(manifold):
    report = run_suite(manifold, seed=0, points=5)
    assert report["pass"]
    assert {row["name"] for row in report["checks"]} == set(CHECK_NAMES) | {
        "coefficient_relation"
    }
    for row in report["checks"]:
        assert row["pass"], row


def test_run_suite_scalar_anchors():
    assert run_suite("flat", points=3)["scalar_curvature"]["target"] == 0.0
    cp2 = run_suite("cp2", points=5)["scalar_curvature"]
    assert cp2["target"] == 12.0
    assert cp2["max_defect"] <= 1e-6
    assert "scalar_curvature" not in run_suite("t4", points=3)


def test_run_suite_deterministic():
    assert run_suite("random", seed=7, points=4) == run_suite("random", seed=7, points=4)


def test_scalar_anchor_defect_matches_chart():
    assert scalar_anchor_defect("flat", points=3) < 1e-13
    assert scalar_anchor_defect("s2xr2", points=5) < 1e-8


def test_random_frame_suite_within_tolerance():
    worst = random_frame_suite(frames=8, seed=0)
    assert set(worst) == set(CHECK_NAMES)
    for name, value in worst.items():
        assert value <= 1e-8, name


def test_coefficient_relation_residual():
    assert coefficient_relation_residual(draws=200, seed=1) <= 1e-12
