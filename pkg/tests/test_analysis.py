import numpy as np
import pytest

import reachctl as rc
from reachctl.analysis import (
    ROUTE_B_CONE,
    ROUTE_G_EMPTY,
    ROUTE_INFEASIBLE,
    ROUTE_KAPPA_LT_MHAT,
    ROUTE_SUBDIVISION,
    brute_force_m_hat,
    cone_normals,
)
from reachctl.errors import AssumptionViolated
from reachctl.polylin import image_basis


class TestComputeO:
    def test_2d_line(self, ex1_system):
        eq = rc.compute_O(ex1_system)
        assert not eq.empty
        assert eq.dim == 1
        # the set is the x2 = 0 line
        for x1 in (-2.0, 0.0, 3.0):
            assert eq.contains(ex1_system, np.array([x1, 0.0]))
        assert not eq.contains(ex1_system, np.array([0.0, 0.5]))

    def test_4d_hyperplane(self, ex2_system):
        eq = rc.compute_O(ex2_system)
        assert eq.dim == 3
        # normal recovered up to scale: sum of coordinates = 1
        NA = eq.annihilator @ ex2_system.A
        for row, rhs in zip(NA, -eq.annihilator @ ex2_system.a):
            row = row / row[np.argmax(np.abs(row))]
            assert np.allclose(row, np.ones(4), atol=1e-9)
        for _ in range(5):
            x = np.random.default_rng(1).normal(size=4)
            x = x - (x.sum() - 1.0) / 4.0
            assert eq.contains(ex2_system, x)

    def test_full_input_rank(self):
        sys = rc.affine_system(np.eye(2), np.eye(2), np.zeros(2))
        eq = rc.compute_O(sys)
        assert not eq.empty
        assert eq.dim == 2
        assert eq.annihilator.shape[0] == 0

    def test_sampled_membership_residual(self, ex2_system, rng):
        eq = rc.compute_O(ex2_system)
        Bimg = image_basis(ex2_system.B)
        for _ in range(20):
            c = rng.normal(size=eq.directions.shape[1])
            x = eq.xbar + eq.directions @ c
            drift = ex2_system.drift(x)
            assert Bimg.project_residual(drift) <= 1e-8 * max(1.0, np.linalg.norm(drift))


class TestComputeG:
    def test_2d_face(self, ex1_instance):
        assert ex1_instance.g_face is not None
        assert ex1_instance.g_face.vertex_indices == (1, 2)
        assert ex1_instance.kappa == 1

    def test_4d_exit_facet(self, ex2_instance):
        assert ex2_instance.g_face.vertex_indices == (1, 2, 3, 4)
        assert ex2_instance.kappa == 3

    def test_disjoint_case(self, ex1_system):
        # shift the simplex so the equilibrium line misses it entirely
        S = rc.build_simplex(np.array([[-1.0, 3.0], [1.0, 2.0], [0.0, 2.0]]))
        inst = rc.ProblemInstance(system=ex1_system, simplex=S)
        inst.equilibrium_set = rc.compute_O(ex1_system)
        face, kappa = rc.compute_G(inst)
        assert face is None and kappa is None

    def test_slicing_violation(self):
        # equilibrium line through the interior, not a face
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        B = np.array([[0.0], [1.0]])
        sys = rc.affine_system(A, B, np.array([0.0, 0.0]))
        S = rc.build_simplex(np.array([[-1.0, 1.0], [1.0, -0.5], [0.0, -0.5]]))
        inst = rc.ProblemInstance(system=sys, simplex=S)
        inst.equilibrium_set = rc.compute_O(sys)
        with pytest.raises(AssumptionViolated):
            rc.compute_G(inst)


class TestCheckNecessary:
    def test_2d_all_pass(self, ex1_instance, ex1_system, ex1_simplex):
        rep = rc.check_necessary(ex1_instance)
        assert rep.all_ok
        # published control at the origin vertex also satisfies the rows
        h1 = ex1_simplex.normals[1]
        y = ex1_system.field(ex1_simplex.vertices[2], [1.0])
        assert h1 @ y <= 1e-12
        for i, u in rep.invariance_witnesses.items():
            v = ex1_simplex.vertices[i]
            for h in cone_normals(ex1_simplex, i):
                assert h @ ex1_system.field(v, u) <= 1e-7

    def test_4d_all_pass_with_witnesses(self, ex2_instance):
        rep = rc.check_necessary(ex2_instance)
        assert rep.all_ok
        assert set(rep.cone_witnesses) == {1, 2, 3, 4}
        b1 = rep.cone_witnesses[1]
        assert abs(b1 @ np.array([-2.0, 1.0, 0.0, 0.0])) / np.linalg.norm(b1) / np.sqrt(5) > 1 - 1e-9

    def test_input_parallel_to_exit_facet_fails(self):
        # input direction lies inside the exit facet plane
        A = np.array([[0.0, 0.0], [0.0, 1.0]])
        B = np.array([[1.0], [0.0]])
        sys = rc.affine_system(A, B, np.zeros(2))
        S = rc.build_simplex(np.array([[0.0, 1.0], [0.0, 0.0], [1.0, 0.0]]))
        inst = rc.analyze(sys, S)
        assert inst.g_face is not None
        rep = rc.check_necessary(inst)
        assert not rep.transversal_ok

    def test_group_level_check_with_indices(self, ex2_instance):
        idx = rc.reach_control_indices(ex2_instance)
        rep = rc.check_necessary(ex2_instance, indices=idx)
        assert rep.transversal_ok


class TestMaxIndependentSelection:
    def _cones(self, inst):
        return [cone_normals(inst.simplex, i) for i in inst.g_vertex_ids()]

    def test_2d_shared_direction(self, ex1_instance, ex1_system):
        m_hat, sel = rc.max_independent_selection(
            self._cones(ex1_instance), image_basis(ex1_system.B))
        assert m_hat == 1
        assert all(s is not None for s in sel)
        # both selections are collinear
        assert abs(np.linalg.det(np.column_stack(sel))) < 1e-9

    def test_4d_two_pairs(self, ex2_instance, ex2_system):
        m_hat, _ = rc.max_independent_selection(
            self._cones(ex2_instance), image_basis(ex2_system.B))
        assert m_hat == 2

    def test_single_nontrivial_cone(self):
        sub = image_basis(np.eye(3))
        cones = [[np.array([0.0, 0.0, 1.0])],
                 [np.array([1.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]),
                  np.array([0.0, 1.0, 0.0]), np.array([0.0, -1.0, 0.0]),
                  np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])]]
        m_hat, sel = rc.max_independent_selection(cones, sub)
        assert m_hat == 1
        assert sel[1] is None

    def test_matches_brute_force(self, rng):
        from .instance_gen import generate

        checked = 0
        for inst in generate(rng, 40):
            if inst.g_face is None or inst.kappa + 1 > 4:
                continue
            Bimg = image_basis(inst.system.B)
            cones = self._cones(inst)
            if inst.system.m > 3:
                continue
            m_hat, _ = rc.max_independent_selection(cones, Bimg)
            assert m_hat == brute_force_m_hat(cones, Bimg)
            checked += 1
        assert checked >= 10


class TestReachControlIndices:
    def test_2d_structure(self, ex1_instance):
        idx = rc.reach_control_indices(ex1_instance)
        assert idx.r == (2,)
        assert idx.m_starts == (1,)
        assert idx.p == 1
        b1 = idx.b_vectors[0]
        assert np.allclose(b1 / np.max(np.abs(b1)), [0.0, -1.0], atol=1e-9)
        b2 = idx.b_vectors[1]
        c = idx.c_coeffs[0]
        assert c.shape == (1,)
        assert c[0] < -1e-9
        assert np.allclose(b2, c[0] * b1, atol=1e-8)

    def test_4d_structure(self, ex2_instance):
        idx = rc.reach_control_indices(ex2_instance)
        assert idx.r == (2, 2)
        assert idx.m_starts == (1, 3)
        assert idx.p == 2
        # exit-aligned leading members: vertex 2 then vertex 4
        assert idx.group_ids(0) == [2, 1]
        assert idx.group_ids(1) == [4, 3]
        for c in idx.c_coeffs:
            assert np.all(c < -1e-9)

    def test_lemma_orthogonality(self, ex2_instance):
        idx = rc.reach_control_indices(ex2_instance)
        S = ex2_instance.simplex
        for k in range(idx.p):
            ids = idx.group_ids(k)
            outside = [j for j in range(1, 5) if j not in ids]
            for i in ids:
                for j in outside:
                    assert abs(S.normals[j] @ idx.b_by_id[i]) <= 1e-8

    def test_permutation_reproduces_ordering(self, ex2_instance):
        idx = rc.reach_control_indices(ex2_instance)
        V = idx.apply_to_vertices(ex2_instance.simplex)
        for k in range(idx.p):
            lead_pos = idx.m_starts[k]
            vid = idx.permutation[lead_pos]
            assert np.allclose(V[lead_pos], ex2_instance.simplex.vertices[vid])
            # exit-facet alignment of the leading member
            h0 = ex2_instance.simplex.normals[0]
            assert h0 @ idx.b_vectors[lead_pos - 1] > 1e-9

    def test_gate_when_independent(self, kappa_lt_mhat_instance):
        # independent cone vectors at both face vertices: m_hat = kappa + 1
        with pytest.raises(AssumptionViolated) as err:
            rc.reach_control_indices(kappa_lt_mhat_instance)
        assert err.value.tag == "A3"


class TestClassifyRoute:
    def test_2d_needs_subdivision(self, ex1_instance):
        assert ex1_instance.route == ROUTE_SUBDIVISION

    def test_4d_needs_subdivision(self, ex2_instance):
        assert ex2_instance.route == ROUTE_SUBDIVISION

    def test_g_empty(self, ex1_system):
        S = rc.build_simplex(np.array([[-1.0, 3.0], [1.0, 2.0], [0.0, 2.0]]))
        inst = rc.analyze(ex1_system, S)
        assert inst.route == ROUTE_G_EMPTY

    def test_b_cone_route(self):
        # the input direction points into the tangent cone at the apex
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        B = np.array([[0.0], [1.0]])
        sys = rc.affine_system(A, B, np.zeros(2))
        S = rc.build_simplex(np.array([[0.0, 1.0], [1.0, 0.0], [-1.0, 0.0]]))
        inst = rc.analyze(sys, S)
        assert inst.route == ROUTE_B_CONE

    def test_kappa_lt_mhat(self, kappa_lt_mhat_instance):
        inst = kappa_lt_mhat_instance
        assert inst.route == ROUTE_KAPPA_LT_MHAT
        assert inst.kappa == 1
        assert inst.m_hat == 2
