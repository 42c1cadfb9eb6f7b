"""Problem classification and reach control indices.

Given an affine system xdot = A x + B u + a on a simplex with exit facet
F_0, this module computes the possible-equilibrium set O, the face
G = S cap O, checks the structural assumptions (A1)-(A4), evaluates the
necessary conditions for solvability by open-loop controls, and builds
the reach control indices: a vertex reordering, group sizes r_1..r_p,
cone vectors b_i in B cap C(v_i) and the negative dependence coefficients
tying each group together.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from . import polylin
from .errors import (
    AssumptionViolated,
    ConstructionFailed,
    DimensionTooLarge,
    InfeasibleInvariance,
)
from .geometry import Face, Simplex, face_of, vertex_cone
from .polylin import (
    EQ,
    LEQ,
    LT,
    IneqSystem,
    SubspaceBasis,
    extreme_rays,
    feasible_point,
    feasible_point_with_margin,
    image_basis,
    null_basis,
    nonzero_cone_point,
    ray_candidates,
    rank,
)
from .validation import as_matrix, as_vector

# Absolute tolerance for the lemma-level assertions on unit-normalized data.
ASSERT_TOL = 1e-8

ROUTE_G_EMPTY = "G_EMPTY"
ROUTE_B_CONE = "B_CONE_NONTRIVIAL"
ROUTE_KAPPA_LT_MHAT = "KAPPA_LT_MHAT"
ROUTE_SUBDIVISION = "NEEDS_SUBDIVISION"
ROUTE_INFEASIBLE = "INFEASIBLE"

AFFINE_ROUTES = (ROUTE_G_EMPTY, ROUTE_B_CONE, ROUTE_KAPPA_LT_MHAT)


@dataclass(frozen=True)
class AffineSystem:
    """Affine control system xdot = A x + B u + a with rank(B) = m."""

    A: np.ndarray
    B: np.ndarray
    a: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def drift(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.a

    def field(self, x, u):
        return self.drift(x) + self.B @ np.asarray(u, dtype=float)


def affine_system(A, B, a) -> AffineSystem:
    A = as_matrix(A, "A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"A must be square, got {A.shape}")
    B = as_matrix(B, "B", rows=n)
    a = as_vector(a, "a", size=n)
    if rank(B) != B.shape[1]:
        raise ValueError("B must have full column rank")
    return AffineSystem(A=A, B=B, a=a)


@dataclass(frozen=True)
class EquilibriumSet:
    """O = { x : A x + a in Im(B) }, i.e. N (A x + a) = 0 with N the left
    annihilator of B.

    When nonempty, O = xbar + span(directions). ``annihilator`` has shape
    (n - m, n); an empty annihilator means O is all of R^n.
    """

    empty: bool
    annihilator: np.ndarray
    xbar: Optional[np.ndarray] = None
    directions: Optional[np.ndarray] = None  # n x dim(O), orthonormal columns

    @property
    def dim(self):
        if self.empty:
            return -1
        return self.directions.shape[1]

    def residual(self, sys: AffineSystem, x):
        if self.annihilator.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(self.annihilator @ sys.drift(x))))

    def contains(self, sys: AffineSystem, x, tol=1e-8):
        if self.empty:
            return False
        scale = max(1.0, float(np.max(np.abs(np.asarray(x)))))
        return self.residual(sys, x) <= tol * scale


def compute_O(sys: AffineSystem) -> EquilibriumSet:
    """Set of states where the drift can be cancelled by an input."""
    n = sys.n
    # rows spanning the left annihilator of B
    N = null_basis(sys.B.T).basis.T  # (n-m) x n
    if N.shape[0] == 0:
        return EquilibriumSet(
            empty=False, annihilator=N, xbar=np.zeros(n), directions=np.eye(n)
        )
    NA = N @ sys.A
    rhs = -N @ sys.a
    sol, residuals, rk, _ = np.linalg.lstsq(NA, rhs, rcond=None)
    if np.max(np.abs(NA @ sol - rhs)) > 1e-9 * max(1.0, float(np.max(np.abs(rhs)))):
        return EquilibriumSet(empty=True, annihilator=N)
    directions = null_basis(NA).basis
    return EquilibriumSet(empty=False, annihilator=N, xbar=sol, directions=directions)


@dataclass
class ProblemInstance:
    """System, simplex and the derived classification data."""

    system: AffineSystem
    simplex: Simplex
    tol: float = 1e-9
    equilibrium_set: Optional[EquilibriumSet] = None
    g_face: Optional[Face] = None
    kappa: Optional[int] = None
    m_hat: Optional[int] = None
    route: Optional[str] = None
    route_reason: str = ""
    input_image: Optional[SubspaceBasis] = None

    @property
    def n(self):
        return self.system.n

    @property
    def p(self):
        if self.kappa is None or self.m_hat is None:
            return None
        return self.kappa + 1 - self.m_hat

    def g_vertex_ids(self):
        return () if self.g_face is None else self.g_face.vertex_indices


def cone_normals(simplex: Simplex, vertex_id: int) -> np.ndarray:
    """Rows are the normals cutting out C(v_i): non-exit facets not opposite i."""
    rows = [j for j in range(1, simplex.dim + 1) if j != vertex_id]
    return simplex.normals[rows]


def invariance_system(inst_or_system, simplex: Simplex, vertex_id: int) -> IneqSystem:
    """Rows over the control u making A v + B u + a fall inside C(v)."""
    sys = inst_or_system.system if isinstance(inst_or_system, ProblemInstance) else inst_or_system
    v = simplex.vertices[vertex_id]
    drift = sys.drift(v)
    rows = IneqSystem(sys.m)
    for h in cone_normals(simplex, vertex_id):
        rows.add(h @ sys.B, LEQ, -float(h @ drift))
    return rows


def invariance_control(sys: AffineSystem, simplex: Simplex, vertex_id: int,
                       control_bound=1e3, margin_cap=1.0):
    """A control meeting the invariance conditions at one vertex, or None.

    Maximizes the shared slack of all rows, capped at margin_cap, with a
    small penalty on the control magnitude so the slack is not bought with
    needlessly large gains. Falls back to plain feasibility when no
    strictly interior point exists (rows forced to equality).
    """
    from scipy.optimize import linprog

    v = simplex.vertices[vertex_id]
    drift = sys.drift(v)
    normals = cone_normals(simplex, vertex_id)
    m = sys.m

    # variables (u, t, mu): rows h.B u + mu <= -h.drift, |u| <= t
    nvar = 2 * m + 1
    A_ub, b_ub = [], []
    for h in normals:
        A_ub.append(np.concatenate([h @ sys.B, np.zeros(m), [1.0]]))
        b_ub.append(-float(h @ drift))
    for i in range(m):
        e = np.zeros(nvar)
        e[i], e[m + i] = 1.0, -1.0
        A_ub.append(e.copy())
        b_ub.append(0.0)
        e[i] = -1.0
        A_ub.append(e)
        b_ub.append(0.0)
    cost = np.concatenate([np.zeros(m), np.full(m, 1e-3), [-1.0]])
    bounds = [(-control_bound, control_bound)] * m + [(0, control_bound)] * m + [(0.0, margin_cap)]
    res = linprog(cost, A_ub=np.array(A_ub), b_ub=np.array(b_ub), bounds=bounds,
                  method="highs")
    if res.status == 0 and res.x[-1] > 1e-12:
        return res.x[:m]

    plain = IneqSystem(m)
    for h in normals:
        plain.add(h @ sys.B, LEQ, -float(h @ drift))
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        plain.add(e, LEQ, control_bound)
        plain.add(-e, LEQ, control_bound)
    return feasible_point(plain)


def compute_G(inst: ProblemInstance) -> Tuple[Optional[Face], Optional[int]]:
    """G = S cap O as a face of S, with its dimension kappa.

    Raises AssumptionViolated when O meets the simplex outside the convex
    hull of the vertices it contains (G would not be a face).
    """
    sys, S = inst.system, inst.simplex
    eqset = inst.equilibrium_set if inst.equilibrium_set is not None else compute_O(sys)
    if eqset.empty:
        return None, None

    member = [i for i in range(S.dim + 1) if eqset.contains(sys, S.vertices[i], tol=1e-8)]

    # check the slice S cap O does not extend past co{member vertices}:
    # parameterize x = V^T lam, lam >= 0, sum lam = 1, N(Ax+a)=0 and try to
    # put weight on non-member vertices.
    N = eqset.annihilator
    if N.shape[0] > 0:
        npts = S.dim + 1
        from scipy.optimize import linprog

        V = S.vertices
        A_eq = [np.ones(npts)]
        b_eq = [1.0]
        NA = N @ sys.A
        for r in range(N.shape[0]):
            A_eq.append(NA[r] @ V.T)
            b_eq.append(-float(N[r] @ sys.a))
        cost = np.zeros(npts)
        for i in range(npts):
            if i not in member:
                cost[i] = -1.0
        res = linprog(cost, A_eq=np.array(A_eq), b_eq=np.array(b_eq),
                      bounds=[(0.0, 1.0)] * npts, method="highs")
        if res.status == 0:
            off_face_weight = -res.fun
            if off_face_weight > 1e-7:
                raise AssumptionViolated(
                    "A1", f"S cap O is not a vertex face (off-face weight {off_face_weight:.2e})"
                )
        elif res.status != 2:
            raise AssumptionViolated("A1", f"face test LP failed: {res.message}")
        else:
            # O does not meet S at all
            return None, None

    if not member:
        return None, None
    return face_of(S, member), len(member) - 1


@dataclass
class NecessaryReport:
    """Outcome of the open-loop necessary conditions with witnesses."""

    invariance_ok: bool
    invariance_witnesses: dict
    infeasible_vertices: tuple
    cone_ok: bool
    cone_witnesses: dict
    zero_cone_vertices: tuple
    transversal_ok: bool
    transversal_detail: str

    @property
    def all_ok(self):
        return self.invariance_ok and self.cone_ok and self.transversal_ok


def check_necessary(inst: ProblemInstance, indices=None) -> NecessaryReport:
    """Evaluate the three necessary conditions for open-loop solvability.

    (a) invariance conditions solvable at every vertex;
    (b) a nonzero b in B cap C(v_i) for each vertex of G;
    (c) the group spans are transversal to the exit facet plane H_0.
        Before indices exist only the coarse screen Im(B) not within H_0
        is applied; with indices, each group's leading vectors are tested.
    """
    sys, S = inst.system, inst.simplex
    Bimg = inst.input_image if inst.input_image is not None else image_basis(sys.B)

    witnesses, infeasible = {}, []
    for i in range(S.dim + 1):
        u = invariance_control(sys, S, i)
        if u is None:
            infeasible.append(i)
        else:
            witnesses[i] = u
    invariance_ok = not infeasible

    cone_witnesses, zero_cones = {}, []
    for i in inst.g_vertex_ids():
        b = nonzero_cone_point(cone_normals(S, i), Bimg)
        if b is None:
            zero_cones.append(i)
        else:
            cone_witnesses[i] = b
    cone_ok = not zero_cones

    h0 = S.normals[0]
    if indices is None:
        comp = float(np.max(np.abs(h0 @ Bimg.basis))) if Bimg.dim else 0.0
        transversal_ok = comp > 1e-9 or not inst.g_vertex_ids()
        detail = f"coarse screen: max |h0 . B basis| = {comp:.3e}"
    else:
        bad = []
        for k in range(len(indices.r)):
            lead = indices.group_leading_ids(k)
            comp = max(abs(float(h0 @ indices.b_by_id[i])) for i in lead)
            if comp <= 1e-9:
                bad.append(k + 1)
        transversal_ok = not bad
        detail = "groups parallel to exit facet: " + (",".join(map(str, bad)) if bad else "none")

    return NecessaryReport(
        invariance_ok=invariance_ok,
        invariance_witnesses=witnesses,
        infeasible_vertices=tuple(infeasible),
        cone_ok=cone_ok,
        cone_witnesses=cone_witnesses,
        zero_cone_vertices=tuple(zero_cones),
        transversal_ok=transversal_ok,
        transversal_detail=detail,
    )


def max_independent_selection(cones, subspace: SubspaceBasis, tol=1e-9):
    """Largest number of linearly independent vectors choosable one per cone.

    Each cone is a sequence of outward normals; candidate vectors per cone
    are its extreme rays (and +/- lines) plus one interior sample, which is
    exact for rank maximization because every minor is linear in each
    chosen vector. Exhaustive search with branch-and-bound pruning; guarded
    to at most 8 cones.

    Returns (m_hat, selection) where selection has one vector per cone
    (None for trivial cones).
    """
    if len(cones) > 8:
        raise DimensionTooLarge(f"{len(cones)} cones exceed the guard of 8")
    cand_lists = []
    for normals in cones:
        rays = extreme_rays(normals, subspace)
        cand_lists.append(ray_candidates(rays))

    cap = min(subspace.dim, sum(1 for c in cand_lists if c))
    best_rank = -1
    best_sel: List[Optional[np.ndarray]] = [None] * len(cones)

    def residual(v, basis_cols):
        r = v.astype(float).copy()
        for b in basis_cols:
            r -= (r @ b) * b
        return r

    def rec(i, basis_cols, sel):
        nonlocal best_rank, best_sel
        if best_rank == cap:
            return
        cur = len(basis_cols)
        if cur + (len(cones) - i) <= best_rank:
            return
        if i == len(cones):
            if cur > best_rank:
                best_rank = cur
                best_sel = list(sel)
            return
        cands = cand_lists[i]
        if not cands:
            sel.append(None)
            rec(i + 1, basis_cols, sel)
            sel.pop()
            return
        for c in cands:
            r = residual(c, basis_cols)
            nrm = np.linalg.norm(r)
            sel.append(c)
            if nrm > tol * max(1.0, np.linalg.norm(c)):
                basis_cols.append(r / nrm)
                rec(i + 1, basis_cols, sel)
                basis_cols.pop()
            else:
                rec(i + 1, basis_cols, sel)
            sel.pop()
            if best_rank == cap:
                return

    rec(0, [], [])
    return max(best_rank, 0), best_sel


def brute_force_m_hat(cones, subspace: SubspaceBasis, tol=1e-9):
    """Oracle for m_hat: full product enumeration over extreme rays only."""
    cand_lists = []
    for normals in cones:
        rays = extreme_rays(normals, subspace)
        cands = []
        for r in rays:
            cands.append(r.direction)
            if r.is_line:
                cands.append(-r.direction)
        cand_lists.append(cands)

    def rec(i, chosen):
        if i == len(cand_lists):
            if not chosen:
                return 0
            return rank(np.column_stack(chosen), tol)
        cands = cand_lists[i]
        if not cands:
            return rec(i + 1, chosen)
        return max(rec(i + 1, chosen + [c]) for c in cands)

    return rec(0, [])


@dataclass
class ReachControlIndices:
    """Reach control index data in the constructed vertex ordering.

    ``permutation`` maps position -> original vertex index over 0..n, with
    groups occupying positions m_k .. m_k + r_k - 1 and the unused
    independent vectors after them. ``b_vectors[pos-1]`` is the cone vector
    attached to the vertex at position pos (1-based, positions 1..kappa+1).
    """

    permutation: np.ndarray
    r: tuple
    m_starts: tuple
    b_vectors: list
    c_coeffs: list
    kappa: int
    m_hat: int

    @property
    def p(self):
        return len(self.r)

    @property
    def b_by_id(self):
        return {int(self.permutation[pos]): self.b_vectors[pos - 1]
                for pos in range(1, self.kappa + 2)}

    def group_positions(self, k):
        return range(self.m_starts[k], self.m_starts[k] + self.r[k])

    def group_ids(self, k):
        return [int(self.permutation[pos]) for pos in self.group_positions(k)]

    def group_leading_ids(self, k):
        return self.group_ids(k)[:-1]

    def apply_to_vertices(self, simplex: Simplex):
        """Vertices reordered by the stored permutation."""
        return simplex.vertices[self.permutation]


def _greedy_independent(vectors, tol=1e-9):
    """Indices of a maximal independent prefix-greedy subset."""
    picked, basis = [], []
    for idx, v in enumerate(vectors):
        if v is None:
            continue
        r = v.astype(float).copy()
        for b in basis:
            r -= (r @ b) * b
        nrm = np.linalg.norm(r)
        if nrm > tol * max(1.0, np.linalg.norm(v)):
            basis.append(r / nrm)
            picked.append(idx)
    return picked


def _span_contains_cone(span_vectors, rays, tol=ASSERT_TOL):
    """All generators of the cone lie in span{span_vectors}."""
    M = np.column_stack(span_vectors)
    q, _ = np.linalg.qr(M)
    for ray in rays:
        v = ray.direction
        res = v - q @ (q.T @ v)
        if np.linalg.norm(res) > tol * max(1.0, np.linalg.norm(v)):
            return False
    return True


def reach_control_indices(inst: ProblemInstance) -> ReachControlIndices:
    """Constructive decomposition of the exit-facet cones into index groups.

    Gates assumptions (A1)-(A4), then iterates: locate the unique minimal
    subspace of currently usable independent vectors containing the next
    dependent cone, renumber so the group is contiguous, and extract a
    dependent vector with strictly negative coefficients on the whole
    group. The final ordering additionally puts a vector with
    h0 . b > 0 first in every group (needed by the subdivision step).
    """
    sys, S = inst.system, inst.simplex
    n = S.dim
    eqset = inst.equilibrium_set if inst.equilibrium_set is not None else compute_O(sys)
    Bimg = inst.input_image if inst.input_image is not None else image_basis(sys.B)

    g_ids = list(inst.g_vertex_ids())
    if not g_ids:
        raise AssumptionViolated("A1", "G is empty")
    if 0 in g_ids:
        raise AssumptionViolated("A1", "exit-opposite vertex v0 lies in G")
    kappa = len(g_ids) - 1
    if kappa >= n:
        raise AssumptionViolated("A1", f"kappa = {kappa} must be < n = {n}")
    if kappa + 1 > 8:
        raise DimensionTooLarge("more than 8 vertices in G")

    all_I = S.normals[1:]
    if nonzero_cone_point(all_I, Bimg) is not None:
        raise AssumptionViolated("A2", "Im(B) meets cone(S) nontrivially")

    cones = [cone_normals(S, i) for i in g_ids]
    cone_rays = {}
    for vid, normals in zip(g_ids, cones):
        rays = extreme_rays(normals, Bimg)
        if not rays:
            raise AssumptionViolated("A4", f"B cap C(v_{vid}) is trivial")
        cone_rays[vid] = rays

    m_hat, selection = max_independent_selection(cones, Bimg)
    inst.m_hat = m_hat
    if m_hat >= kappa + 1:
        raise AssumptionViolated("A3", f"m_hat = {m_hat} is not < kappa+1 = {kappa + 1}")
    p = kappa + 1 - m_hat

    indep_slots = _greedy_independent(selection)
    pool_ids = [g_ids[s] for s in indep_slots]
    dep_ids = [g_ids[s] for s in range(kappa + 1) if s not in indep_slots]
    vec = {g_ids[s]: selection[s] for s in indep_slots}

    avail = list(pool_ids)  # spanning set, always m_hat independent vectors
    groups: List[List[int]] = []
    group_coeffs: List[np.ndarray] = []
    grouped: set = set()

    for k in range(p):
        d = dep_ids[k]
        rays_d = cone_rays[d]

        T = None
        for size in range(1, len(avail) + 1):
            for combo in combinations(range(len(avail)), size):
                span = [vec[avail[idx]] for idx in combo]
                if _span_contains_cone(span, rays_d):
                    T = [avail[idx] for idx in combo]
                    break
            if T is not None:
                break
        if T is None:
            raise ConstructionFailed(
                f"cone at vertex {d} is not contained in the independent span"
            )
        if grouped.intersection(T):
            raise ConstructionFailed(
                f"minimal subspace for vertex {d} reuses grouped vectors "
                f"{sorted(grouped.intersection(T))}; group index sets must be disjoint"
            )

        # dependent vector with all coefficients strictly negative
        Y = np.column_stack([vec[t] for t in T])
        active = cone_normals(S, d)
        lp = IneqSystem(len(T))
        for h in active:
            lp.add(h @ Y, LEQ, 0.0)
        for t in range(len(T)):
            e = np.zeros(len(T))
            e[t] = 1.0
            lp.add(e, LT, 0.0)     # c_t < 0 with shared margin
            lp.add(-e, LEQ, 1.0)   # normalization box c_t >= -1
        out = feasible_point_with_margin(lp)
        if out is None:
            raise ConstructionFailed(
                f"no dependent vector with uniformly negative coefficients at vertex {d}"
            )
        c, margin = out
        if np.max(c) >= -1e-9:
            raise ConstructionFailed(
                f"dependent coefficients not strictly negative at vertex {d}: {c}"
            )
        vec[d] = Y @ c
        groups.append(list(T) + [d])
        group_coeffs.append(np.asarray(c, dtype=float))
        grouped.update(T + [d])

        # the spanning set trades the first used vector for the new dependent
        avail[avail.index(T[0])] = d

    h0 = S.normals[0]
    ordered_groups, ordered_coeffs = [], []
    for ids, c in zip(groups, group_coeffs):
        # relation sum(beta_i b_i) = 0 with all beta positive
        beta = {i: -float(ci) for i, ci in zip(ids[:-1], c)}
        beta[ids[-1]] = 1.0
        positive = [i for i in ids if float(h0 @ vec[i]) > 1e-9]
        if not positive:
            raise ConstructionFailed(
                f"no group member satisfies h0 . b > 0 in group {ids}; "
                "the group span is parallel to the exit facet"
            )
        first = min(positive)
        rest = [i for i in ids if i != first]
        new_ids = [first] + rest
        last = new_ids[-1]
        new_c = np.array([-beta[i] / beta[last] for i in new_ids[:-1]])
        if np.max(new_c) >= -1e-9:
            raise ConstructionFailed(f"reordered coefficients lost negativity in group {ids}")
        resid = vec[last] - np.column_stack([vec[i] for i in new_ids[:-1]]) @ new_c
        if np.max(np.abs(resid)) > ASSERT_TOL:
            raise ConstructionFailed(
                f"dependence residual {np.max(np.abs(resid)):.2e} in group {ids}"
            )
        ordered_groups.append(new_ids)
        ordered_coeffs.append(new_c)

    leftovers = sorted(i for i in pool_ids if i not in grouped)
    order = [i for grp in ordered_groups for i in grp] + leftovers
    non_g = [i for i in range(1, n + 1) if i not in g_ids]
    perm = np.array([0] + order + non_g, dtype=int)

    r = tuple(len(grp) for grp in ordered_groups)
    m_starts = []
    s = 1
    for rk in r:
        m_starts.append(s)
        s += rk

    indices = ReachControlIndices(
        permutation=perm,
        r=r,
        m_starts=tuple(m_starts),
        b_vectors=[vec[i] for i in order],
        c_coeffs=ordered_coeffs,
        kappa=kappa,
        m_hat=m_hat,
    )
    _assert_index_laws(inst, indices)
    return indices


def _assert_index_laws(inst: ProblemInstance, indices: ReachControlIndices):
    """Orthogonality and M-matrix certificates for every group."""
    S = inst.simplex
    n = S.dim
    for k in range(indices.p):
        ids = indices.group_ids(k)
        outside = [j for j in range(1, n + 1) if j not in ids]
        for i in ids:
            b = indices.b_by_id[i]
            worst = max((abs(float(S.normals[j] @ b)) for j in outside), default=0.0)
            if worst > ASSERT_TOL:
                raise ConstructionFailed(
                    f"group {k + 1}: normal-orthogonality residual {worst:.2e} at vertex {i}"
                )
        lead = ids[:-1]
        M = np.array([[float(S.normals[j] @ indices.b_by_id[i]) for i in lead] for j in lead])
        if not polylin.is_nonsingular_m_matrix(M, tol=1e-9):
            raise ConstructionFailed(f"group {k + 1}: leading block is not a nonsingular M-matrix")


def classify_route(inst: ProblemInstance) -> str:
    """Elimination-order route tag for the synthesis strategy.

    Order: invariance solvable -> G empty -> B cap cone(S) nontrivial ->
    v0 in G (infeasible) -> kappa < m_hat -> all cones nontrivial ->
    subdivision.
    """
    sys, S = inst.system, inst.simplex
    Bimg = inst.input_image if inst.input_image is not None else image_basis(sys.B)

    for i in range(S.dim + 1):
        if invariance_control(sys, S, i) is None:
            inst.route_reason = f"invariance conditions infeasible at vertex {i}"
            return ROUTE_INFEASIBLE

    if inst.g_face is None:
        return ROUTE_G_EMPTY

    if nonzero_cone_point(S.normals[1:], Bimg) is not None:
        return ROUTE_B_CONE

    g_ids = inst.g_vertex_ids()
    if 0 in g_ids:
        inst.route_reason = "v0 lies in G while B cap cone(S) is trivial"
        return ROUTE_INFEASIBLE

    cones = [cone_normals(S, i) for i in g_ids]
    if inst.m_hat is None:
        inst.m_hat, _ = max_independent_selection(cones, Bimg)
    if inst.kappa < inst.m_hat:
        return ROUTE_KAPPA_LT_MHAT

    for i in g_ids:
        if nonzero_cone_point(cone_normals(S, i), Bimg) is None:
            inst.route_reason = f"B cap C(v_{i}) is trivial"
            return ROUTE_INFEASIBLE

    return ROUTE_SUBDIVISION


def analyze(system: AffineSystem, simplex: Simplex, tol=1e-9) -> ProblemInstance:
    """Build a fully classified problem instance."""
    inst = ProblemInstance(system=system, simplex=simplex, tol=tol)
    inst.input_image = image_basis(system.B)
    inst.equilibrium_set = compute_O(system)
    inst.g_face, inst.kappa = compute_G(inst)
    inst.route = classify_route(inst)
    return inst
