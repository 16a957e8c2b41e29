"""Proposition algebra: membership, containment, intersection decidability."""

import numpy as np
import pytest

from conjrisk import (
    Ball,
    Complement,
    Ellipsoid,
    EllipsoidSet,
    FullSpace,
    HalfSpace,
    InputValidationError,
    Intersection,
    Union,
    UnsupportedPropositionError,
    contains_point,
    contains_region,
    intersects_region,
)

from conftest import random_ellipsoid


def _unit_ball_region(center=(0.0, 0.0, 0.0), radius=1.0):
    return Ball(center=np.asarray(center), radius=radius).as_ellipsoid()


class TestContainsPoint:
    def test_primitives(self):
        assert contains_point(FullSpace(), [5.0, 5.0, 5.0])
        ball = Ball(center=[0.0, 0.0, 0.0], radius=2.0)
        assert contains_point(ball, [1.0, 1.0, 1.0])
        assert not contains_point(ball, [2.0, 2.0, 0.0])
        hs = HalfSpace(normal=[1.0, 0.0, 0.0], offset=1.0)
        assert contains_point(hs, [0.5, 9.0, -3.0])
        assert not contains_point(hs, [1.5, 0.0, 0.0])

    def test_composites(self):
        ball = Ball(center=[0.0, 0.0, 0.0], radius=1.0)
        other = Ball(center=[3.0, 0.0, 0.0], radius=1.0)
        assert contains_point(Complement(ball), [2.0, 0.0, 0.0])
        assert not contains_point(Complement(ball), [0.0, 0.0, 0.0])
        assert contains_point(Union(members=(ball, other)), [3.0, 0.0, 0.0])
        assert not contains_point(Intersection(members=(ball, other)), [0.0, 0.0, 0.0])

    def test_ellipsoid_set(self):
        e = Ellipsoid(center=[0.0, 0.0, 0.0], axes=np.eye(3), semi_lengths=[2.0, 1.0, 1.0])
        assert contains_point(EllipsoidSet(e), [1.9, 0.0, 0.0])
        assert not contains_point(EllipsoidSet(e), [0.0, 1.1, 0.0])


class TestRegionPredicates:
    def test_full_space(self):
        region = _unit_ball_region()
        assert contains_region(FullSpace(), region)
        assert intersects_region(FullSpace(), region)

    def test_ball_proposition(self):
        region = _unit_ball_region()
        assert contains_region(Ball(center=[0.0, 0.0, 0.0], radius=1.5), region)
        assert not contains_region(Ball(center=[0.0, 0.0, 0.0], radius=0.9), region)
        assert intersects_region(Ball(center=[1.5, 0.0, 0.0], radius=0.6), region)
        assert not intersects_region(Ball(center=[3.0, 0.0, 0.0], radius=0.5), region)

    def test_halfspace_proposition(self):
        region = _unit_ball_region()
        assert contains_region(HalfSpace(normal=[1.0, 0.0, 0.0], offset=1.0), region)
        assert not contains_region(
            HalfSpace(normal=[1.0, 0.0, 0.0], offset=0.5), region
        )
        assert intersects_region(
            HalfSpace(normal=[1.0, 0.0, 0.0], offset=-0.5), region
        )
        assert not intersects_region(
            HalfSpace(normal=[1.0, 0.0, 0.0], offset=-1.5), region
        )

    def test_complement_duality(self):
        rng = np.random.default_rng(30)
        for _ in range(20):
            region = random_ellipsoid(rng, center=rng.standard_normal(3))
            prop = Ball(center=rng.standard_normal(3) * 2.0, radius=rng.uniform(0.5, 3.0))
            comp = Complement(prop)
            assert contains_region(comp, region) == (
                not intersects_region(prop, region)
            )
            assert intersects_region(comp, region) == (
                not contains_region(prop, region)
            )

    def test_union_exact_paths(self):
        region = _unit_ball_region()
        covering = Ball(center=[0.0, 0.0, 0.0], radius=2.0)
        disjoint_a = Ball(center=[5.0, 0.0, 0.0], radius=1.0)
        disjoint_b = Ball(center=[-5.0, 0.0, 0.0], radius=1.0)
        assert contains_region(Union(members=(covering, disjoint_a)), region)
        assert not contains_region(Union(members=(disjoint_a, disjoint_b)), region)
        assert intersects_region(Union(members=(disjoint_a, covering)), region)
        assert not intersects_region(Union(members=(disjoint_a, disjoint_b)), region)

    def test_union_joint_coverage_is_undecidable(self):
        region = _unit_ball_region()
        left = HalfSpace(normal=[1.0, 0.0, 0.0], offset=0.5)
        right = HalfSpace(normal=[-1.0, 0.0, 0.0], offset=0.5)
        # jointly the two half-spaces cover everything, individually neither
        # contains the region: the algebra refuses to guess
        with pytest.raises(UnsupportedPropositionError):
            contains_region(Union(members=(left, right)), region)

    def test_intersection_exact_paths(self):
        region = _unit_ball_region()
        big_a = Ball(center=[0.5, 0.0, 0.0], radius=3.0)
        big_b = Ball(center=[-0.5, 0.0, 0.0], radius=3.0)
        assert contains_region(Intersection(members=(big_a, big_b)), region)
        miss = Ball(center=[9.0, 0.0, 0.0], radius=1.0)
        assert not intersects_region(Intersection(members=(big_a, miss)), region)
        # witness via the region center
        assert intersects_region(Intersection(members=(big_a, big_b)), region)

    def test_intersection_without_witness_is_undecidable(self):
        region = _unit_ball_region()
        # lens formed away from every center and from the region center
        a = Ball(center=[2.4, 0.0, 0.0], radius=1.5)
        b = Ball(center=[-0.4, 0.0, 0.0], radius=1.5)
        shifted = Ball(center=[1.0, 2.2, 0.0], radius=1.5)
        with pytest.raises(UnsupportedPropositionError):
            intersects_region(Intersection(members=(a, shifted, b)), region)

    def test_validation(self):
        with pytest.raises(InputValidationError):
            Ball(center=[0.0, 0.0], radius=-1.0)
        with pytest.raises(InputValidationError):
            HalfSpace(normal=[0.0, 0.0, 0.0], offset=1.0)
        with pytest.raises(InputValidationError):
            Union(members=())
