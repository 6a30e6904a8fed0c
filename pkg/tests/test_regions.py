import numpy as np
import pytest

from fraclab.errors import NestingError
from fraclab.regions import (
    Ball,
    Box,
    DisjointUnion,
    nesting_margin,
    region_from_mapping,
    region_to_mapping,
    require_nested,
    separation,
)


def test_ball_membership_and_distance():
    b = Ball((0.0,), 1.0)
    pts = np.array([[0.0], [0.5], [0.999], [1.0], [1.5]])
    assert list(b.contains(pts)) == [True, True, True, False, False]
    d = b.boundary_distance(pts)
    assert d[1] == pytest.approx(0.5)
    assert d[3] == 0.0
    assert b.exterior_distance(pts)[4] == pytest.approx(0.5)


def test_box_membership_and_distance_2d():
    bx = Box((0.0, 0.0), (2.0, 1.0))
    pts = np.array([[1.0, 0.5], [0.25, 0.5], [3.0, 2.0]])
    assert list(bx.contains(pts)) == [True, True, False]
    assert bx.boundary_distance(pts)[0] == pytest.approx(0.5)
    assert bx.boundary_distance(pts)[1] == pytest.approx(0.25)
    assert bx.exterior_distance(pts)[2] == pytest.approx(np.hypot(1.0, 1.0))


def test_degenerate_regions_rejected():
    with pytest.raises(ValueError):
        Ball((0.0,), 0.0)
    with pytest.raises(ValueError):
        Box((1.0,), (1.0,))


def test_separation_ball_ball():
    assert separation(Ball((0.0,), 1.0), Ball((3.0,), 1.0)) == pytest.approx(1.0)
    assert separation(Ball((0.0,), 1.0), Ball((1.0,), 1.0)) < 0


def test_separation_ball_box():
    assert separation(Ball((0.0, 0.0), 1.0), Box((2.0, -1.0), (3.0, 1.0))) == pytest.approx(1.0)


def test_nesting_margin_cases():
    assert nesting_margin(Ball((0.0,), 0.5), Ball((0.0,), 1.0)) == pytest.approx(0.5)
    assert nesting_margin(Ball((0.2,), 0.5), Box((-1.0,), (1.0,))) == pytest.approx(0.3)
    assert nesting_margin(Box((-0.5, -0.5), (0.5, 0.5)), Ball((0.0, 0.0), 1.0)) == pytest.approx(
        1.0 - np.sqrt(0.5))
    with pytest.raises(NestingError):
        require_nested(Ball((0.0,), 1.0), Ball((0.0,), 1.0))


def test_union_requires_disjoint_members():
    with pytest.raises(ValueError):
        DisjointUnion((Ball((0.0,), 1.0), Ball((1.5,), 1.0)))
    u = DisjointUnion((Ball((-2.0,), 0.5), Ball((2.0,), 0.5)))
    pts = np.array([[-2.0], [0.0], [2.2]])
    assert list(u.contains(pts)) == [True, False, True]
    assert u.boundary_distance(pts)[0] == pytest.approx(0.5)
    assert u.exterior_distance(pts)[1] == pytest.approx(1.5)
    assert u.bounding_box()[0] == (-2.5, 2.5)


def test_region_mapping_round_trip():
    for region in (Ball((0.25, -1.0), 0.75), Box((-1.0, 0.0), (1.0, 2.0))):
        kv = region_to_mapping(region)
        back = region_from_mapping(kv)
        assert type(back) is type(region)
        assert back.describe() == region.describe()


def test_region_mapping_rejects_unknown_kind():
    from fraclab.errors import ConfigError

    with pytest.raises(ConfigError):
        region_from_mapping({"kind": "triangle"})
