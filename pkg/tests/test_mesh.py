import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mwgfem.mesh import (
    DOMAIN_AREA,
    DegenerateTriangleError,
    Mesh,
    bisect,
    build_initial,
    read_mesh,
    refine_uniform,
    write_mesh,
)


def shoelace(poly):
    x, y = np.asarray(poly, float).T
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def test_unit_square_counts(square):
    assert square.n_triangles == 2
    assert square.n_edges == 5
    assert square.boundary.sum() == 4
    assert np.all(square.generation == 0)


def test_lshape_counts_and_area():
    m = build_initial("lshape2d")
    assert m.n_triangles == 6
    outline = [(-1, -1), (0, -1), (0, 0), (1, 0), (1, 1), (-1, 1)]
    assert m.area == pytest.approx(shoelace(outline), abs=1e-12)
    assert shoelace(outline) == pytest.approx(3.0)


@pytest.mark.parametrize("domain", ["unit_square", "lshape2d"])
def test_initial_refinement_edge_is_longest(domain):
    m = build_initial(domain)
    ref_len = m.local_edge_lengths[np.arange(m.n_triangles), m.refedge]
    assert np.allclose(ref_len, m.local_edge_lengths.max(axis=1))
    assert abs(m.area - DOMAIN_AREA[domain]) <= 1e-12


def test_unknown_domain():
    with pytest.raises(ValueError):
        build_initial("disk")


def test_bisect_empty_is_noop(square):
    assert bisect(square, set()) is square


def test_bisect_both_triangles(square):
    m = bisect(square, {0, 1})
    assert m.n_triangles == 4
    assert m.is_conforming()


def test_bisect_one_triangle_closure(square):
    m = bisect(square, {0})
    assert m.n_triangles == 4
    assert m.is_conforming()
    assert np.all(m.generation == 1)


def test_child_areas_are_half():
    m = Mesh([(0, 0), (2, 0), (0.5, 1.3)], [(0, 1, 2)])
    child = bisect(m, [0])
    assert child.n_triangles == 2
    assert np.allclose(child.areas, m.areas[0] / 2, rtol=1e-14)
    assert np.all(child.generation == m.generation[0] + 1)


def test_untouched_triangles_keep_geometry():
    m = refine_uniform(build_initial("lshape2d"), 2)
    corner = m.triangles_touching((0, 0))
    new = bisect(m, corner[:1])
    old_set = {tuple(sorted(map(tuple, m.vertices[t]))) for t in m.triangles}
    new_set = {tuple(sorted(map(tuple, new.vertices[t]))) for t in new.triangles}
    assert len(old_set & new_set) >= m.n_triangles - 6


def test_geometry_reference(ref_mesh):
    area, h, edges = ref_mesh.geometry(0)
    assert area == pytest.approx(0.5)
    assert h == pytest.approx(np.sqrt(2))
    h_bottom, n_bottom = edges[2]      # edge opposite vertex (0, 1)
    assert h_bottom == pytest.approx(1.0)
    assert np.allclose(n_bottom, (0, -1))
    h_hyp, n_hyp = edges[0]
    assert h_hyp == pytest.approx(np.sqrt(2))
    assert np.allclose(n_hyp, (1 / np.sqrt(2), 1 / np.sqrt(2)))


def test_geometry_bad_id(ref_mesh):
    with pytest.raises(IndexError):
        ref_mesh.geometry(3)


@pytest.mark.parametrize("tri", [[(0, 0), (1, 0), (2, 0)], [(0, 0), (0, 1), (1, 0)]])
def test_degenerate_or_clockwise_rejected(tri):
    with pytest.raises(DegenerateTriangleError):
        Mesh(tri, [(0, 1, 2)])


def test_hanging_node_detected():
    verts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    # lower-right triangle split at the diagonal midpoint, upper-left not
    m = Mesh(verts, [(0, 1, 4), (4, 1, 2), (0, 2, 3)], [2, 0, 1])
    assert not m.is_conforming()


def _check_invariants(m):
    counts = np.bincount(m.tri_edges.ravel(), minlength=m.n_edges)
    assert np.all(counts[~m.boundary] == 2)
    assert np.all(counts[m.boundary] == 1)
    inner = np.flatnonzero(~m.boundary)
    n1 = m.normals[m.edge_tris[inner, 0], m.edge_local[inner, 0]]
    n2 = m.normals[m.edge_tris[inner, 1], m.edge_local[inner, 1]]
    assert np.abs(n1 + n2).max() <= 1e-14
    assert m.is_conforming()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["unit_square", "lshape2d"]), st.integers(0, 2**32 - 1))
def test_random_bisection_invariants(domain, seed):
    rng = np.random.default_rng(seed)
    m = build_initial(domain)
    theta0 = m.min_angles().min()
    for _ in range(10):
        k = rng.integers(1, max(2, m.n_triangles // 3) + 1)
        marked = rng.choice(m.n_triangles, size=k, replace=False)
        new = bisect(m, marked)
        # every marked triangle was split: its refinement-edge midpoint is a vertex
        mids = 0.5 * (m.vertices[m.edges[m.tri_edges[marked, m.refedge[marked]], 0]]
                      + m.vertices[m.edges[m.tri_edges[marked, m.refedge[marked]], 1]])
        d = np.linalg.norm(new.vertices[None] - mids[:, None], axis=2).min(axis=1)
        assert d.max() < 1e-14
        m = new
        _check_invariants(m)
        assert abs(m.area - DOMAIN_AREA[domain]) <= 1e-12
    assert m.min_angles().min() >= 0.4 * theta0


def test_write_read_roundtrip(tmp_path):
    m = bisect(build_initial("lshape2d"), [0, 3])
    path = tmp_path / "mesh.txt"
    write_mesh(m, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"{m.n_vertices} {m.n_triangles}"
    assert len(lines) == 1 + m.n_vertices + m.n_triangles
    assert len(lines[1 + m.n_vertices].split()) == 5
    back = read_mesh(path)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)
    assert np.array_equal(back.refedge, m.refedge)
    assert np.array_equal(back.generation, m.generation)
