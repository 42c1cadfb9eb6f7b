"""Simplex geometry: facet normals, barycentric coordinates, cones and faces.

Conventions. A full-dimensional simplex in R^n has n+1 vertices v_0..v_n.
Facet F_j is the one *not* containing v_j, with unit outward normal h_j.
F_0 (opposite v_0) is the designated exit facet. The cone C(x) at a point
x in the simplex is cut out by the normals of the non-exit facets that
contain x; C(v_0) is the tangent cone at v_0, written cone(S).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateSimplex, EmptyIndexSet, PointOutsideSimplex
from .validation import as_matrix, readonly

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Simplex:
    """Immutable simplex with precomputed facet data.

    vertices : (n+1, n) array, row i is v_i
    normals  : (n+1, n) array, row j is the unit outward normal of F_j
    exit_index : always 0; the exit facet is opposite the first vertex
    """

    vertices: np.ndarray
    normals: np.ndarray
    exit_index: int = 0
    # inverse of [[V^T],[1..1]]; maps [x;1] to barycentric coordinates
    bary_transform: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def centroid(self):
        return self.vertices.mean(axis=0)

    @property
    def diameter(self):
        v = self.vertices
        d = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)
        return float(d.max())

    def volume(self):
        edges = self.vertices[1:] - self.vertices[0]
        return abs(float(np.linalg.det(edges))) / float(_factorial(self.dim))


def _factorial(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


@dataclass(frozen=True)
class Face:
    """Face of a simplex given by a subset of vertex indices."""

    parent: Simplex
    vertex_indices: tuple

    @property
    def dim(self):
        return len(self.vertex_indices) - 1

    @property
    def vertices(self):
        return self.parent.vertices[list(self.vertex_indices)]


@dataclass(frozen=True)
class Cone:
    """Cone C(x) = { y : h_j . y <= 0 for active j }.

    active_normals are indices into the parent simplex's facet list,
    always a subset of {1..n}; the exit facet never constrains the cone.
    """

    active_normals: tuple
    normals: np.ndarray  # rows are the active unit normals
    anchor_vertex: Optional[int] = None


def build_simplex(vertices) -> Simplex:
    """Construct a simplex from n+1 points; the exit facet is opposite the first.

    Raises DegenerateSimplex when the edge matrix fails a relative rank
    test at 1e-9.
    """
    V = as_matrix(vertices, "vertices")
    npts, n = V.shape
    if npts != n + 1:
        raise ValueError(f"need n+1 vertices in R^n, got {npts} points of dim {n}")
    edges = (V[1:] - V[0]).T
    svals = np.linalg.svd(edges, compute_uv=False)
    if svals[0] <= 0 or svals[-1] / svals[0] < 1e-9:
        raise DegenerateSimplex(f"edge matrix relative rank defect: sigma={svals}")

    normals = np.zeros((n + 1, n))
    for j in range(n + 1):
        others = [k for k in range(n + 1) if k != j]
        base = V[others[0]]
        span = V[others[1:]] - base  # (n-1) x n
        # h_j spans the 1-dim null space of the facet's edge span
        _, _, vt = np.linalg.svd(span, full_matrices=True)
        h = vt[-1]
        h = h / np.linalg.norm(h)
        if h @ (V[j] - base) > 0:
            h = -h
        normals[j] = h

    M = np.vstack([V.T, np.ones(n + 1)])
    try:
        T = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - caught by rank test
        raise DegenerateSimplex(str(exc)) from exc

    return Simplex(
        vertices=readonly(V.copy()),
        normals=readonly(normals),
        exit_index=0,
        bary_transform=readonly(T),
    )


def barycentric(s: Simplex, x) -> np.ndarray:
    """Barycentric coordinates of x: sum(lam)=1 and sum(lam_i v_i)=x.

    Returned for any x, inside the simplex or not; x is inside iff all
    coordinates are >= -tol.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    aug = np.append(x, 1.0)
    return s.bary_transform @ aug


def contains(s: Simplex, x, tol=DEFAULT_TOL) -> bool:
    return bool(np.min(barycentric(s, x)) >= -tol)


def cone_at(s: Simplex, x, tol=DEFAULT_TOL) -> Cone:
    """Cone C(x): active facets are the non-exit facets containing x.

    A point lies on facet F_j when its barycentric coordinate for the
    opposite vertex v_j is within tol of zero.
    """
    lam = barycentric(s, x)
    if np.min(lam) < -tol:
        raise PointOutsideSimplex(f"barycentric minimum {np.min(lam):.3e} < -{tol:.1e}")
    active = tuple(j for j in range(1, s.dim + 1) if abs(lam[j]) <= tol)
    anchor = None
    on_vertex = np.where(np.abs(lam - 1.0) <= tol)[0]
    if on_vertex.size == 1:
        anchor = int(on_vertex[0])
    return Cone(
        active_normals=active,
        normals=readonly(s.normals[list(active)].copy()),
        anchor_vertex=anchor,
    )


def vertex_cone(s: Simplex, i: int) -> Cone:
    """Cone C(v_i) by index; for i=0 this is cone(S)."""
    active = tuple(j for j in range(1, s.dim + 1) if j != i)
    return Cone(
        active_normals=active,
        normals=readonly(s.normals[list(active)].copy()),
        anchor_vertex=i,
    )


def in_cone(c: Cone, y, tol=DEFAULT_TOL) -> bool:
    """True iff h_j . y <= tol for every active normal.

    The tolerance is applied relative to max(1, ||y||_inf) so the test is
    invariant under positive scaling of y.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(c.active_normals) == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(y))))
    return bool(np.max(c.normals @ y) <= tol * scale)


def face_of(s: Simplex, indices) -> Face:
    """Face spanned by the given vertex indices."""
    idx = tuple(sorted(set(int(i) for i in indices)))
    if not idx:
        raise EmptyIndexSet("a face needs at least one vertex index")
    if idx[0] < 0 or idx[-1] > s.dim:
        raise ValueError(f"vertex indices out of range: {idx}")
    return Face(parent=s, vertex_indices=idx)


def facet_vertex_indices(s: Simplex, j: int) -> tuple:
    """Vertex indices of facet F_j (all vertices except v_j)."""
    return tuple(k for k in range(s.dim + 1) if k != j)
