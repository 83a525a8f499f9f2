"""Cones, fans, and the combinatorial predicates built on them."""

from fractions import Fraction

import pytest

from stackyfans.fgab import FgAbGroup, FgAbHom, free_group
from stackyfans.polyhedral import (
    Cone,
    Fan,
    ImageCone,
    NotStronglyConvex,
    PreconditionViolated,
    all_cones,
    canonicalize_cone,
    cone_contains,
    faces,
    fan_rays,
    halfspace_intersection,
    image_cone,
    intersect_cones,
    is_smooth_cone,
    is_unstable,
    minimal_face_containing,
    monoid_iso_on_cone,
    preimage_fan,
    primitive,
    validate_fan,
)
from stackyfans.zlinalg import IntMatrix

QUAD = canonicalize_cone([(1, 0), (0, 1)])
A1 = canonicalize_cone([(1, 0), (1, 2)])


def test_primitive():
    assert primitive((4, -6)) == (2, -3)
    assert primitive((0, 0)) is None
    assert primitive((0, -5)) == (0, -1)


def test_canonicalize_drops_redundant_generators():
    c = canonicalize_cone([(2, 0), (1, 2), (3, 2)])
    assert c.rays == ((1, 0), (1, 2))
    assert canonicalize_cone([], ambient_rank=2).rays == ()
    assert canonicalize_cone([(0, 0)], ambient_rank=2).rays == ()


def test_canonicalize_rejects_lines():
    with pytest.raises(NotStronglyConvex):
        canonicalize_cone([(1, 0), (-1, 0)])
    with pytest.raises(NotStronglyConvex):
        canonicalize_cone([(1, 0), (-1, 1), (0, -1)])


def test_halfspace_intersection_quadrant():
    lin, rays = halfspace_intersection(((1, 0), (0, 1)), 2)
    assert lin == []
    assert sorted(rays) == [(0, 1), (1, 0)]


def test_halfspace_intersection_with_lineality():
    lin, rays = halfspace_intersection(((1, 0),), 2)
    assert [primitive(v) for v in lin] == [(0, 1)] or [primitive(v) for v in lin] == [(0, -1)]
    assert rays == [(1, 0)]


def test_cone_contains():
    assert cone_contains(A1, (2, 2))
    assert cone_contains(A1, (1, 0))
    assert not cone_contains(A1, (0, 1))
    assert cone_contains(A1, (Fraction(1, 2), Fraction(1, 3)))
    assert cone_contains(A1, (1, 1), relative_interior=True)
    assert not cone_contains(A1, (1, 0), relative_interior=True)
    zero = canonicalize_cone([], ambient_rank=2)
    assert cone_contains(zero, (0, 0), relative_interior=True)
    assert not cone_contains(zero, (1, 0))


def test_faces_of_cone_over_square():
    c = canonicalize_cone([(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)])
    fs = faces(c)
    assert sorted(len(f.rays) for f in fs) == [0, 1, 1, 1, 1, 2, 2, 2, 2, 4]
    assert not is_smooth_cone(c)


def test_smoothness():
    assert is_smooth_cone(QUAD)
    assert not is_smooth_cone(A1)
    assert is_smooth_cone(canonicalize_cone([(1, 1)], ambient_rank=2))
    assert is_smooth_cone(canonicalize_cone([], ambient_rank=3))


def test_intersect_cones():
    lin, rays = intersect_cones(QUAD, canonicalize_cone([(1, 1), (-1, 1)]))
    assert lin == []
    assert sorted(rays) == [(0, 1), (1, 1)]
    lin2, rays2 = intersect_cones(QUAD, canonicalize_cone([(1, -1), (1, 1)]))
    assert lin2 == []
    assert sorted(rays2) == [(1, 0), (1, 1)]


def test_minimal_face_containing():
    assert minimal_face_containing(A1, (1, 0)) == ((1, 0),)
    assert minimal_face_containing(A1, (2, 1)) == ((1, 0), (1, 2))
    assert minimal_face_containing(A1, (0, 0)) == ()


def test_fan_sorts_maximal_cones():
    f1 = Fan(2, (QUAD, canonicalize_cone([(-1, 0)], ambient_rank=2)))
    f2 = Fan(2, (canonicalize_cone([(-1, 0)], ambient_rank=2), QUAD))
    assert f1 == f2
    assert [len(c.rays) for c in f1.maximal_cones] == [1, 2]


def test_validate_fan_accepts_p2():
    p2 = Fan(2, (canonicalize_cone([(1, 0), (0, 1)]),
                 canonicalize_cone([(1, 0), (-1, -1)]),
                 canonicalize_cone([(0, 1), (-1, -1)])))
    diag = validate_fan(p2)
    assert diag.valid and diag.problems == ()
    assert sorted(fan_rays(p2)) == [(-1, -1), (0, 1), (1, 0)]
    assert len(all_cones(p2)) == 7


def test_validate_fan_rejects_overlap():
    bad = Fan(2, (QUAD, canonicalize_cone([(1, 1), (-1, 1)])))
    diag = validate_fan(bad)
    assert not diag.valid
    assert any("common face" in p for p in diag.problems)


def test_validate_fan_rejects_contained_maximal_cone():
    bad = Fan(2, (QUAD, canonicalize_cone([(1, 1)], ambient_rank=2)))
    diag = validate_fan(bad)
    assert not diag.valid


def test_preimage_fan():
    fan = Fan(2, (QUAD,))
    m = IntMatrix.identity(2)
    pre = preimage_fan(m, fan, QUAD)
    assert pre.single_cone == QUAD
    # only the origin maps into the zero cone
    pre0 = preimage_fan(m, fan, canonicalize_cone([], ambient_rank=2))
    assert pre0.single_cone == canonicalize_cone([], ambient_rank=2)
    # collapse onto the x-axis: two rays compete, no single cone
    proj = IntMatrix.from_rows([[1, 0], [0, 0]])
    prex = preimage_fan(proj, fan, canonicalize_cone([(1, 0)], ambient_rank=2))
    assert prex.single_cone == QUAD


def test_image_cone_membership():
    img = image_cone(IntMatrix.from_rows([[1, 0], [0, 0]]), QUAD)
    assert isinstance(img, ImageCone)
    assert cone_contains(img, (3, 0))
    assert not cone_contains(img, (0, 1))


def test_monoid_iso_identity_and_index():
    assert monoid_iso_on_cone(IntMatrix.identity(2), QUAD, QUAD)
    assert not monoid_iso_on_cone(IntMatrix.from_rows([[2, 0], [0, 2]]),
                                  QUAD, QUAD)
    with pytest.raises(PreconditionViolated):
        monoid_iso_on_cone(IntMatrix.from_rows([[-1, 0], [0, 1]]), QUAD, QUAD)


def test_monoid_iso_needs_filled_image():
    # x-axis ray into the quadrant: injective but far from onto
    ray = canonicalize_cone([(1, 0)], ambient_rank=2)
    assert not monoid_iso_on_cone(IntMatrix.identity(2), ray, QUAD)
    # projection of the quadrant onto its ray is onto but not injective
    proj = IntMatrix.from_rows([[1, 1]])
    assert not monoid_iso_on_cone(proj, QUAD, canonicalize_cone([(1,)], ambient_rank=1))


def test_monoid_iso_a1_cone_vs_quadrant():
    m = IntMatrix.from_columns([(1, 0), (1, 2)], rows=2)
    # the quadrant maps onto the A1 cone but the lattice index is 2
    assert not monoid_iso_on_cone(m, QUAD, A1)


def test_unstable():
    line = FgAbHom(free_group(2), free_group(1), IntMatrix.from_rows([[1, -1]]))
    assert is_unstable(QUAD, line)
    half = FgAbHom(free_group(2), free_group(1), IntMatrix.from_rows([[1, 1]]))
    assert not is_unstable(QUAD, half)
    zero_cone = canonicalize_cone([], ambient_rank=2)
    assert is_unstable(zero_cone, half)
    to_point = FgAbHom(free_group(2), free_group(0), IntMatrix.zero(0, 2))
    assert is_unstable(QUAD, to_point)
    # torsion in the target is invisible to stability
    tor = FgAbHom(free_group(2), FgAbGroup(1, (2,)),
                  IntMatrix.from_rows([[1, 1], [1, 0]]))
    assert not is_unstable(QUAD, tor)
