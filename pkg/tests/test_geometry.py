import numpy as np
import pytest

import reachctl as rc
from reachctl.errors import DegenerateSimplex, EmptyIndexSet, PointOutsideSimplex
from reachctl.geometry import facet_vertex_indices

from .instance_gen import random_simplex


def normal_oracle(vertices, j):
    """Independent facet normal: solve orthogonality to the facet edges,
    normalize, orient away from the opposite vertex."""
    V = np.asarray(vertices, dtype=float)
    others = [k for k in range(len(V)) if k != j]
    base = V[others[0]]
    edges = V[others[1:]] - base
    _, _, vt = np.linalg.svd(edges, full_matrices=True)
    h = vt[-1] / np.linalg.norm(vt[-1])
    if h @ (V[j] - base) > 0:
        h = -h
    return h


class TestBuildSimplex:
    def test_paper_2d_exit_normal(self, ex1_simplex):
        assert np.allclose(ex1_simplex.normals[0], [0.0, -1.0], atol=1e-12)

    def test_unit_simplex_normals(self):
        for n in (2, 3, 4):
            S = rc.build_simplex(np.vstack([np.zeros(n), np.eye(n)]))
            for j in range(1, n + 1):
                e = np.zeros(n)
                e[j - 1] = -1.0
                assert np.allclose(S.normals[j], e, atol=1e-12)
            assert np.allclose(S.normals[0], np.ones(n) / np.sqrt(n), atol=1e-12)

    def test_2d_side_normals_match_oracle(self, ex1_simplex):
        V = ex1_simplex.vertices
        for j in (1, 2):
            assert np.allclose(ex1_simplex.normals[j], normal_oracle(V, j), atol=1e-9)
        # frozen from the oracle
        assert np.allclose(ex1_simplex.normals[1], -np.array([1.0, 1.0]) / np.sqrt(2))
        assert np.allclose(ex1_simplex.normals[2], np.array([1.0, 2.0]) / np.sqrt(5))

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateSimplex):
            rc.build_simplex([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError):
            rc.build_simplex([[0.0, 0.0], [1.0, 0.0]])

    def test_normals_immutable(self, ex1_simplex):
        with pytest.raises(ValueError):
            ex1_simplex.normals[0, 0] = 5.0

    def test_normal_reconstruction_random(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 5))
            S = random_simplex(rng, n)
            for j in range(n + 1):
                face = [k for k in range(n + 1) if k != j]
                w = S.vertices[face[0]]
                for k in face[1:]:
                    assert abs(S.normals[j] @ (S.vertices[k] - w)) < 1e-9
                centroid = S.vertices[face].mean(axis=0)
                assert S.normals[j] @ (S.vertices[j] - centroid) < 0


class TestBarycentric:
    def test_vertices(self, ex1_simplex):
        for i in range(3):
            lam = rc.barycentric(ex1_simplex, ex1_simplex.vertices[i])
            expect = np.zeros(3)
            expect[i] = 1.0
            assert np.allclose(lam, expect, atol=1e-12)

    def test_centroid(self, ex1_simplex):
        lam = rc.barycentric(ex1_simplex, ex1_simplex.centroid)
        assert np.allclose(lam, np.ones(3) / 3, atol=1e-12)

    def test_edge_point_from_interpolation(self, ex1_simplex):
        # 0.75 along the edge from the apex to the first exit vertex
        lam_mix = 0.75
        x = lam_mix * ex1_simplex.vertices[1] + (1 - lam_mix) * ex1_simplex.vertices[0]
        assert np.allclose(x, [0.5, 0.25])
        lam = rc.barycentric(ex1_simplex, x)
        assert np.allclose(lam, [0.25, 0.75, 0.0], atol=1e-12)

    def test_round_trip_random(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 5))
            S = random_simplex(rng, n)
            x = rng.normal(size=n)
            lam = rc.barycentric(S, x)
            assert abs(lam.sum() - 1.0) < 1e-9
            assert np.allclose(lam @ S.vertices, x, atol=1e-9)


class TestCones:
    def test_apex_cone_is_tangent_cone(self, ex1_simplex):
        c = rc.cone_at(ex1_simplex, ex1_simplex.vertices[0])
        assert c.active_normals == (1, 2)
        for i in (1, 2):
            edge = ex1_simplex.vertices[i] - ex1_simplex.vertices[0]
            assert rc.in_cone(c, edge)

    def test_exit_vertex_cones(self, ex1_simplex):
        c1 = rc.cone_at(ex1_simplex, ex1_simplex.vertices[1])
        assert c1.active_normals == (2,)
        c2 = rc.cone_at(ex1_simplex, ex1_simplex.vertices[2])
        assert c2.active_normals == (1,)

    def test_facet_interior_point(self, ex1_simplex):
        x = 0.5 * (ex1_simplex.vertices[0] + ex1_simplex.vertices[2])  # on facet 1
        c = rc.cone_at(ex1_simplex, x)
        assert c.active_normals == (1,)

    def test_interior_point_unconstrained(self, ex1_simplex):
        c = rc.cone_at(ex1_simplex, ex1_simplex.centroid)
        assert c.active_normals == ()
        assert rc.in_cone(c, np.array([3.0, -7.0]))

    def test_outside_raises(self, ex1_simplex):
        with pytest.raises(PointOutsideSimplex):
            rc.cone_at(ex1_simplex, np.array([5.0, 5.0]))

    def test_in_cone_zero_vector(self, ex1_simplex):
        c = rc.cone_at(ex1_simplex, ex1_simplex.vertices[0])
        assert rc.in_cone(c, np.zeros(2))

    def test_in_cone_4d_vertex_pair(self, ex2_simplex):
        b1 = np.array([-2.0, 1.0, 0.0, 0.0])
        c1 = rc.vertex_cone(ex2_simplex, 1)
        assert rc.in_cone(c1, b1)
        # oracle: explicit dot products against the unit-simplex normals
        for j in (2, 3, 4):
            assert ex2_simplex.normals[j] @ b1 <= 1e-12
        assert not rc.in_cone(c1, -b1)
        assert ex2_simplex.normals[2] @ (-b1) > 0

    def test_in_cone_scale_invariant(self, rng):
        S = random_simplex(rng, 3)
        c = rc.cone_at(S, S.vertices[0])
        for _ in range(60):
            y = rng.normal(size=3)
            alpha = float(rng.uniform(0.01, 100.0))
            assert rc.in_cone(c, y) == rc.in_cone(c, alpha * y)


class TestFaces:
    def test_singleton(self, ex1_simplex):
        f = rc.face_of(ex1_simplex, [1])
        assert f.vertex_indices == (1,)
        assert f.dim == 0

    def test_exit_facet(self, ex1_simplex):
        f = rc.face_of(ex1_simplex, [1, 2])
        assert f.vertex_indices == (1, 2)
        assert f.dim == 1
        assert f.vertex_indices == facet_vertex_indices(ex1_simplex, 0)

    def test_full_set(self, ex1_simplex):
        f = rc.face_of(ex1_simplex, [0, 1, 2])
        assert f.dim == 2

    def test_empty_raises(self, ex1_simplex):
        with pytest.raises(EmptyIndexSet):
            rc.face_of(ex1_simplex, [])

    def test_out_of_range(self, ex1_simplex):
        with pytest.raises(ValueError):
            rc.face_of(ex1_simplex, [7])
