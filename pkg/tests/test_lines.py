import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import foot_oracle, rand_rotation, rand_unit
from minitwistor import lines
from minitwistor.errors import DegenerateError, InputError, PreconditionError
from minitwistor.lines import OrientedLine

S2 = 1 / math.sqrt(2)

vec3 = st.lists(st.floats(-10, 10), min_size=3, max_size=3).map(np.array)


def test_oriented_line_validation():
    with pytest.raises(PreconditionError):
        OrientedLine([2, 0, 0], [0, 1, 0])
    with pytest.raises(PreconditionError):
        OrientedLine([1, 0, 0], [1, 1, 0])
    with pytest.raises(InputError):
        OrientedLine([1, 0, 0], [0, 1])
    with pytest.raises(InputError):
        OrientedLine([1, 0, math.nan], [0, 1, 0])
    L = OrientedLine([0, 0, 1], [1, 2, 0])
    assert L.n == 2
    assert np.allclose(L.point(3), [1, 2, 3])


def test_json_round_trip():
    L = OrientedLine([0, 0, 1], [1, 2, 0])
    assert OrientedLine.from_json(L.to_json()).allclose(L, atol=0)
    assert lines.EuclideanPoint.from_json({"p": [1, 2]}).p.tolist() == [1, 2]
    with pytest.raises(InputError):
        OrientedLine.from_json({"u": [1, 0]})


def test_normalize_line_examples():
    L = lines.normalize_line([2, 0, 0], [5, 1, 0])
    assert L.u.tolist() == [1, 0, 0] and L.v.tolist() == [0, 1, 0]
    L = lines.normalize_line([0, 0, 1], [0, 0, 0])
    assert L.u.tolist() == [0, 0, 1] and L.v.tolist() == [0, 0, 0]
    L = lines.normalize_line([S2, S2, 0], [1, 0, 0])
    assert np.allclose(L.v, [0.5, -0.5, 0], atol=1e-15)
    with pytest.raises(DegenerateError):
        lines.normalize_line([0, 0, 0], [1, 0, 0])


def test_laplace_section_examples():
    assert lines.laplace_section_eval([0, 0, 1], [0, 0, 1]).v.tolist() == [0, 0, 0]
    assert lines.laplace_section_eval([1, 0, 0], [0, 0, 1]).v.tolist() == [1, 0, 0]
    assert lines.laplace_section_eval([1, 1, 0], [1, 0, 0]).v.tolist() == [0, 1, 0]


def test_strict_and_lenient_directions():
    with pytest.raises(PreconditionError):
        lines.laplace_section_eval([1, 2, 3], [0, 0, 2])
    L = lines.laplace_section_eval([1, 2, 3], [0, 0, 2], strict=False)
    assert L.u.tolist() == [0, 0, 1] and L.v.tolist() == [1, 2, 0]


def test_reverse_orientation():
    L = lines.reverse_orientation(OrientedLine([1, 0, 0], [0, 1, 0]))
    assert L.u.tolist() == [-1, 0, 0] and L.v.tolist() == [0, 1, 0]


@given(vec3, vec3.filter(lambda u: np.linalg.norm(u) > 1e-3))
def test_tau_preserves_sections(p, u):
    u = u / np.linalg.norm(u)
    L = lines.laplace_section_eval(p, u)
    assert lines.reverse_orientation(lines.reverse_orientation(L)).allclose(L, atol=0)
    assert lines.reverse_orientation(L).allclose(lines.laplace_section_eval(p, -u), atol=1e-12)


def test_line_through_points_examples():
    L = lines.line_through_points([0, 0, 0], [1, 0, 0])
    assert L.u.tolist() == [1, 0, 0] and L.v.tolist() == [0, 0, 0]
    L = lines.line_through_points([1, 0], [0, 1])
    assert np.allclose(L.u, [-S2, S2], atol=1e-15) and np.allclose(L.v, [0.5, 0.5], atol=1e-15)
    with pytest.raises(DegenerateError):
        lines.line_through_points([1, 2], [1, 2])


def test_sections_intersect_examples():
    L1, L2 = lines.sections_intersect([1, 0, 0], [0, 0, 0])
    assert L1.u.tolist() == [1, 0, 0] and L2.u.tolist() == [-1, 0, 0]
    assert np.allclose(L1.v, 0, atol=0) and np.allclose(L2.v, 0, atol=0)
    L1, L2 = lines.sections_intersect([1, 0], [0, 1])
    assert np.allclose(L1.u, [S2, -S2]) and np.allclose(L2.u, [-S2, S2])
    assert np.allclose(L1.v, [0.5, 0.5], atol=1e-15)
    with pytest.raises(DegenerateError):
        lines.sections_intersect([1, 1], [1, 1])


def test_sections_intersect_matches_oracle_in_every_dimension(rng):
    for n in range(1, 8):
        for _ in range(30):
            p, q = 3 * rng.normal(size=n + 1), 3 * rng.normal(size=n + 1)
            for L in lines.sections_intersect(p, q):
                assert np.max(np.abs(L.v - foot_oracle(p, q))) <= 1e-12
                assert np.max(np.abs(L.v - lines.line_through_points(p, q).v)) <= 1e-12
                assert lines.incidence(p, L) and lines.incidence(q, L)


def test_printed_intersection_formula_misses_the_foot():
    (u, v), (u2, v2) = lines.sections_intersect([1, 0], [0, 1], printed_formula=True)
    assert np.allclose(v, [-S2, -S2])
    assert not np.allclose(v, foot_oracle(np.array([1.0, 0]), np.array([0, 1.0])))


def test_incidence_examples():
    L = OrientedLine([1, 0, 0], [0, 1, 0])
    assert lines.incidence([1, 1, 0], L)
    assert not lines.incidence([0, 0, 0], L)
    assert not lines.incidence([1, 1 + 1e-3, 0], L)


def test_correspondence_project(rng):
    w, L = lines.correspondence_project([0, 0, 1], [1, 2, 3])
    assert w.tolist() == [1, 2, 3] and L.v.tolist() == [1, 2, 0]
    for t in (-2.0, 0.0, 5.0):
        assert lines.correspondence_project([1, 0, 0], [t, 0, 0])[1].v.tolist() == [0, 0, 0]
    for _ in range(20):
        u, w = rand_unit(rng, 4), rng.normal(size=4)
        assert lines.correspondence_project(u, w + 5 * u)[1].allclose(lines.correspondence_project(u, w)[1])


def test_section_zeros():
    z1, z2 = lines.section_zeros([0, 0, 3])
    assert z1.tolist() == [0, 0, 1] and z2.tolist() == [0, 0, -1]
    z1, _ = lines.section_zeros([1, 1, 0])
    assert np.allclose(z1, [S2, S2, 0])
    with pytest.raises(DegenerateError):
        lines.section_zeros([0, 0, 0])


def test_common_point_of_three():
    L = lines.common_point_of_three([0, 0, 0], [1, 0, 0], [2, 0, 0])
    assert L.u.tolist() == [1, 0, 0] and L.v.tolist() == [0, 0, 0]
    assert lines.common_point_of_three([0, 0, 0], [1, 0, 0], [0, 1, 0]) is None
    with pytest.raises(DegenerateError):
        lines.common_point_of_three([0, 0, 0], [0, 0, 0], [1, 0, 0])


def test_euclidean_equivariance(rng):
    for n in range(1, 8):
        d = n + 1
        R, c = rand_rotation(rng, d), rng.normal(size=d)
        p, u = 3 * rng.normal(size=d), rand_unit(rng, d)
        moved = lines.transform_line(lines.laplace_section_eval(p, u), R, c)
        assert moved.allclose(lines.laplace_section_eval(R @ p + c, R @ u, strict=False))


def test_dimension_mismatch():
    with pytest.raises(InputError):
        lines.laplace_section_eval([1, 2], [0, 0, 1])
