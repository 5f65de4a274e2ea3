"""Growth layers, Wick rotation, mirror doubling, superposed growth."""

import math
import random
from fractions import Fraction

import pytest

from formalchain.errors import (
    EulerConstraintError,
    GeometryError,
    StructureError,
    SuperpositionForbiddenError,
    UnsupportedError,
)
from formalchain.growth import (
    Cobordism,
    GrowthConfig,
    double_cross,
    grow_layer,
    grow_superposed,
    mirror_double,
    wick_rotate,
)
from formalchain.topo import (
    LOWER,
    UPPER,
    Triangulation,
    circle,
    classify_0d,
    classify_curves,
    classify_surface,
    insert_vertex,
    point_set,
    remove_faces,
    sphere_triangulation,
)


def cfg(**kw):
    return GrowthConfig(**kw)


def test_grow_two_points_two_arcs():
    y = point_set(2)
    x = grow_layer(y, cfg(), random.Random(0))
    assert x.space.euler_characteristic() == 2 == y.euler_characteristic()
    up = x.upper_slice()
    assert len(up.vertex_sign) == 2


def test_grow_circle_full_layer_annulus():
    y = circle(6)
    x = grow_layer(y, cfg(), random.Random(0))
    assert x.space.euler_characteristic() == 0
    assert classify_curves(x.upper_slice()) == classify_curves(y)
    marks = set(x.space.boundary_mark.values())
    assert marks == {LOWER, UPPER}


def test_pair_of_pants_proposal_rejected():
    # a sphere with three pairwise-disjoint faces removed: chi = -1, three
    # boundary circles; as a cobordism over one circle it must be refused
    s = sphere_triangulation()
    for _ in range(2):
        for f in sorted(s.faces):
            s = insert_vertex(s, f)
    disjoint = []
    for f, (fv, _) in sorted(s.faces.items()):
        if all(not (set(fv) & set(s.faces[g][0])) for g in disjoint):
            disjoint.append(f)
        if len(disjoint) == 3:
            break
    assert len(disjoint) == 3, "need three vertex-disjoint faces"
    pants = remove_faces(s, disjoint)
    assert pants.euler_characteristic() == -1
    with pytest.raises(EulerConstraintError):
        Cobordism(pants, 0)


def test_wick_rotation_simple():
    y = point_set(1)
    x = grow_layer(y, cfg(alpha=(1, 1, 1)), random.Random(0))
    e = next(iter(x.space.edges))
    assert float(x.space.edge_len2[e]) == -1.0
    w = wick_rotate(x)
    assert float(w.edge_len2[e]) == 1.0


def test_wick_rotation_alpha_range():
    # alpha = 1 gives the equilateral (1,1,1) layer triangle, valid
    y = circle(4)
    x = grow_layer(y, cfg(alpha=(1, 1, 1)), random.Random(0))
    wick_rotate(x)
    # alpha <= 1/4 degenerates the (a, -alpha a, -alpha a) triangles
    x_bad = grow_layer(y, cfg(alpha=(1, 1, Fraction(1, 5))), random.Random(0))
    with pytest.raises(GeometryError) as err:
        wick_rotate(x_bad)
    assert "alpha" in str(err.value)


def test_alpha_must_be_positive():
    with pytest.raises(StructureError):
        GrowthConfig(alpha=(1, 0, 1))
    with pytest.raises(StructureError):
        GrowthConfig(alpha=(1, 1, -2))


def test_mirror_double_arc_is_circle():
    y = point_set(1)
    x = grow_layer(y, cfg(), random.Random(0))
    d = mirror_double(x)
    assert classify_curves(d) == classify_curves(circle(2))
    assert d.is_closed()


def test_mirror_double_annulus_is_torus():
    y = circle(5)
    x = grow_layer(y, cfg(), random.Random(0))
    d = mirror_double(x)
    assert d.is_closed()
    assert classify_surface(d).genera == (1,)
    # chi(double) = 2 chi(X) - chi(boundary); circles contribute 0
    assert d.euler_characteristic() == 2 * x.space.euler_characteristic()


def test_mirror_double_points():
    y = point_set(2)
    x = grow_layer(y, cfg(), random.Random(0))
    up = x.upper_slice()
    doubled = up.double()
    assert classify_0d(doubled) == classify_0d(up.disjoint_union(up.mirrored()))
    assert len(doubled.vertex_sign) == 4
    signs = sorted(doubled.vertex_sign.values())
    assert signs == [-1, -1, 1, 1]


def test_double_of_double_key_symmetric():
    # the double is invariant under swapping the layer with its mirror
    y = circle(4)
    x = grow_layer(y, cfg(), random.Random(0))
    from formalchain.topo import iso_key

    d1 = mirror_double(x)
    mirror_cob = Cobordism(x.space.mirrored(), x.lower_chi)
    d2 = mirror_double(mirror_cob)
    assert iso_key(d1) == iso_key(d2)


def test_collar_double_classification_matches_product():
    # doubling a collar over circles gives one torus per circle component
    y = circle(3).disjoint_union(circle(4))
    x = grow_layer(y, cfg(), random.Random(0))
    d = mirror_double(x)
    assert classify_surface(d).genera == (1, 1)


def test_grow_superposed_two_candidates():
    y = point_set(2)
    sg = grow_superposed(1.0, y, cfg(), 2, random.Random(0))
    assert len(sg.terms) == 2
    weights = [abs(complex(a)) ** 2 for a, _ in sg.terms]
    assert math.isclose(sum(weights), 1.0, abs_tol=1e-12)
    assert math.isclose(weights[0], 0.5, abs_tol=1e-12)


def test_grow_superposed_single_candidate():
    y = circle(4)
    sg = grow_superposed(1.0, y, cfg(), 1, random.Random(0))
    assert len(sg.terms) == 1
    assert abs(abs(complex(sg.terms[0][0])) - 1.0) < 1e-12


def test_grow_superposed_forbidden_above_dim1():
    y = circle(4)
    with pytest.raises(SuperpositionForbiddenError):
        grow_superposed(1.0, y, cfg(), 2, random.Random(0))


def test_cross_double_profiles():
    y = point_set(1)
    sg = grow_superposed(1.0, y, cfg(), 2, random.Random(0))
    (a1, c1), (a2, c2) = sg.terms
    from formalchain.topo import curve_profile

    assert curve_profile(double_cross(c1, c1)) == (("circle", "1", "1"),)
    assert curve_profile(double_cross(c1, c2)) == (("circle", "1", "1", "1"),)
    assert curve_profile(double_cross(c2, c2)) == (("circle", "1", "1", "1", "1"),)


def test_extra_circles_respect_chi():
    y = point_set(2)
    x = grow_layer(y, cfg(topology_change=True, p_circle=1.0), random.Random(3),
                   extra_closed=2)
    assert x.space.euler_characteristic() == y.euler_characteristic()
    d = mirror_double(x)
    # arcs double to one circle each, extra circles double to two each
    assert classify_curves(d).circles == 2 + 4


def test_extra_tori_respect_chi():
    y = circle(3)
    x = grow_layer(y, cfg(topology_change=True), random.Random(3), extra_closed=1)
    assert x.space.euler_characteristic() == 0
    d = mirror_double(x)
    assert classify_surface(d).genera == (1, 1, 1)


def test_partial_layer_chi_and_upper_slice():
    y = circle(8)
    rng = random.Random(12)
    found_partial = False
    for _ in range(20):
        x = grow_layer(y, cfg(layer="partial"), rng)
        assert x.space.euler_characteristic() == 0
        up = x.upper_slice()
        assert classify_curves(up).circles == 1
        if len(x.space.faces) < 16:
            found_partial = True
    assert found_partial, "random partial layers never skipped an edge"


def test_partial_layer_double_is_singular():
    y = circle(8)
    rng = random.Random(1)
    for _ in range(20):
        x = grow_layer(y, cfg(layer="partial"), rng)
        if len(x.space.faces) < 16:
            d = mirror_double(x)
            if not d.is_pure():
                from formalchain.topo import iso_key

                key = iso_key(d)
                assert key[0] == "mixed"
                return
    pytest.skip("no strictly partial layer drawn")


def test_growth_dim_cap():
    t = sphere_triangulation()
    with pytest.raises(UnsupportedError):
        grow_layer(t, cfg(), random.Random(0))
