"""Dense linear-algebra and polyhedral kernels.

Provides rank/image/null-space helpers, linear inequality feasibility with
a maximized shared margin for strict rows, nonzero points of polyhedral
cones intersected with a subspace, extreme rays of small cones, and the
nonsingular M-matrix test.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionTooLarge, NumericalFailure
from .validation import readonly

# Bounding box for feasibility variables; keeps every LP bounded.
M_BOX = 1e6
# Strict rows must achieve at least this shared margin to count as satisfied.
STRICT_MARGIN_MIN = 1e-7

LEQ = "<="
LT = "<"
EQ = "="


@dataclass
class IneqSystem:
    """Linear system of rows ``g . z (<=|<|=) c`` over an unknown z in R^d.

    Strict rows are handled through a single shared margin variable that is
    maximized by the solver; they count as satisfied only when the achieved
    margin exceeds STRICT_MARGIN_MIN.
    """

    dim: int
    rows: List[Tuple[np.ndarray, str, float]] = field(default_factory=list)

    def add(self, g, rel=LEQ, rhs=0.0):
        g = np.asarray(g, dtype=float).reshape(-1)
        if g.size != self.dim:
            raise ValueError(f"row has dimension {g.size}, system has {self.dim}")
        if rel not in (LEQ, LT, EQ):
            raise ValueError(f"unknown relation {rel!r}")
        self.rows.append((g, rel, float(rhs)))
        return self

    def residuals(self, z):
        """Signed residuals g.z - c per row; <= 0 means satisfied for inequalities."""
        z = np.asarray(z, dtype=float).reshape(-1)
        return np.array([g @ z - c for g, _, c in self.rows])


def _solve_margin_lp(sys: IneqSystem, box=M_BOX):
    """Maximize the shared strict margin mu subject to the system.

    Returns (z, mu) or None when infeasible. Raises NumericalFailure when
    the LP solver reports trouble.
    """
    d = sys.dim
    has_strict = any(rel == LT for _, rel, _ in sys.rows)
    nvar = d + (1 if has_strict else 0)

    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for g, rel, c in sys.rows:
        if rel == EQ:
            A_eq.append(np.append(g, 0.0) if has_strict else g)
            b_eq.append(c)
        elif rel == LEQ:
            A_ub.append(np.append(g, 0.0) if has_strict else g)
            b_ub.append(c)
        else:  # strict: g.z + mu <= c
            A_ub.append(np.append(g, 1.0))
            b_ub.append(c)

    cost = np.zeros(nvar)
    bounds = [(-box, box)] * d
    if has_strict:
        cost[-1] = -1.0  # maximize mu
        bounds.append((0.0, box))

    res = linprog(
        cost,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return None
    if res.status != 0:
        raise NumericalFailure(f"LP solve failed with status {res.status}: {res.message}")
    z = res.x[:d]
    mu = float(res.x[-1]) if has_strict else 0.0
    return z, mu


def feasible_point(sys: IneqSystem) -> Optional[np.ndarray]:
    """A point satisfying every row, or None.

    Strict rows must be met with shared margin > STRICT_MARGIN_MIN after
    margin maximization; otherwise the system counts as infeasible.
    """
    out = _solve_margin_lp(sys)
    if out is None:
        return None
    z, mu = out
    if any(rel == LT for _, rel, _ in sys.rows) and mu <= STRICT_MARGIN_MIN:
        return None
    return z


def feasible_point_with_margin(sys: IneqSystem):
    """Like feasible_point but also returns the achieved shared margin."""
    out = _solve_margin_lp(sys)
    if out is None:
        return None
    z, mu = out
    if any(rel == LT for _, rel, _ in sys.rows) and mu <= STRICT_MARGIN_MIN:
        return None
    return z, mu


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace of R^n, columns of ``basis`` (n x d)."""

    basis: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    def project_residual(self, y):
        """Norm of the component of y outside the subspace."""
        y = np.asarray(y, dtype=float).reshape(-1)
        return float(np.linalg.norm(y - self.basis @ (self.basis.T @ y)))

    def contains(self, y, tol=1e-9):
        scale = max(1.0, float(np.linalg.norm(y)))
        return self.project_residual(y) <= tol * scale


def _make_basis(cols) -> SubspaceBasis:
    cols = np.asarray(cols, dtype=float)
    if cols.ndim == 1:
        cols = cols.reshape(-1, 1)
    if cols.shape[1] > 1:
        gram = cols.T @ cols - np.eye(cols.shape[1])
        if np.max(np.abs(gram)) > 1e-10:
            raise ValueError("basis columns not orthonormal within 1e-10")
    return SubspaceBasis(basis=readonly(cols.copy()))


def rank(matrix, tol=1e-9) -> int:
    """Numerical rank; tolerance relative to the largest singular value."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def image_basis(matrix, tol=1e-9) -> SubspaceBasis:
    """Orthonormal basis of the column space."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return _make_basis(u[:, :r])


def null_basis(matrix, tol=1e-9) -> SubspaceBasis:
    """Orthonormal basis of the (right) null space."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    m, n = A.shape
    if A.size == 0 or not np.any(A):
        return _make_basis(np.eye(n))
    u, s, vt = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return _make_basis(vt[r:].T)


def full_space(n) -> SubspaceBasis:
    return _make_basis(np.eye(n))


def nonzero_cone_point(normals, subspace: SubspaceBasis, tol=1e-9) -> Optional[np.ndarray]:
    """A nonzero b in the subspace with h . b <= 0 for all normals, or None.

    Normalized to ||b||_inf = 1. Decided by 2*dim(subspace) feasibility
    problems, pinning each subspace coefficient to +1 and -1 in turn; any
    nonzero cone point has some nonzero coefficient, so the sweep is
    exhaustive up to scaling.
    """
    d = subspace.dim
    if d == 0:
        return None
    Q = subspace.basis
    H = np.atleast_2d(np.asarray(normals, dtype=float)) if len(normals) else np.zeros((0, Q.shape[0]))
    HQ = H @ Q  # cone rows in subspace coordinates

    for i in range(d):
        for sign in (1.0, -1.0):
            sys = IneqSystem(d)
            for row in HQ:
                sys.add(row, LEQ, 0.0)
            pin = np.zeros(d)
            pin[i] = 1.0
            sys.add(pin, EQ, sign)
            alpha = feasible_point(sys)
            if alpha is not None:
                b = Q @ alpha
                peak = np.max(np.abs(b))
                if peak <= tol:
                    continue
                return b / peak
    return None


@dataclass(frozen=True)
class Ray:
    """Generator of a polyhedral cone; is_line marks a full line (+/- direction)."""

    direction: np.ndarray
    is_line: bool = False


def extreme_rays(normals, subspace: SubspaceBasis, tol=1e-9) -> List[Ray]:
    """Minimal generators of { b in subspace : h . b <= 0 for all normals }.

    The lineality space is returned as Ray objects with is_line=True; the
    pointed remainder is generated by its extreme rays, found by exhaustive
    enumeration of active constraint sets (exact at the dim <= 6 guard).
    Ray directions are normalized to ||.||_inf = 1.
    """
    d = subspace.dim
    if d > 6:
        raise DimensionTooLarge(f"subspace dimension {d} exceeds the guard of 6")
    if d == 0:
        return []
    Q = subspace.basis
    n = Q.shape[0]
    H = np.atleast_2d(np.asarray(normals, dtype=float)) if len(normals) else np.zeros((0, n))
    A = H @ Q
    # drop numerically zero constraint rows
    if A.size:
        keep = np.linalg.norm(A, axis=1) > tol
        A = A[keep]

    out: List[Ray] = []

    # lineality space: A alpha = 0
    lin = null_basis(A if A.size else np.zeros((1, d)))
    for k in range(lin.dim):
        direction = Q @ lin.basis[:, k]
        out.append(Ray(direction=_inf_normalize(direction), is_line=True))

    dp = d - lin.dim
    if dp == 0:
        return out

    # pointed part: coordinates beta on the orthogonal complement of the lineality
    P = null_basis(lin.basis.T if lin.dim else np.zeros((1, d))).basis  # d x dp
    C = A @ P if A.size else np.zeros((0, dp))

    candidates = []
    if dp == 1:
        # half-line or origin, depending on constraint signs
        c = C.reshape(-1)
        if c.size == 0:
            pass  # no constraints with dp==1 cannot happen: the line would be lineality
        else:
            if np.all(c <= tol):
                candidates.append(np.array([1.0]))
            if np.all(-c <= tol):
                candidates.append(np.array([-1.0]))
    else:
        rows = list(range(C.shape[0]))
        for subset in combinations(rows, dp - 1):
            Msub = C[list(subset)]
            ns = null_basis(Msub if Msub.size else np.zeros((1, dp)))
            if ns.dim != 1:
                continue
            r = ns.basis[:, 0]
            for cand in (r, -r):
                if np.all(C @ cand <= tol * max(1.0, float(np.max(np.abs(cand))))):
                    candidates.append(cand)

    rays = []
    for cand in candidates:
        direction = Q @ (P @ cand)
        direction = _inf_normalize(direction)
        if not any(np.linalg.norm(direction - r.direction) <= 1e-8 for r in rays):
            rays.append(Ray(direction=direction, is_line=False))
    out.extend(rays)
    return out


def _inf_normalize(v):
    peak = np.max(np.abs(v))
    if peak == 0:
        return v
    return v / peak


def ray_candidates(rays: List[Ray], include_interior=True) -> List[np.ndarray]:
    """Generating vectors from a ray list: rays, +/- lines, optional interior sum."""
    cands = []
    for r in rays:
        cands.append(r.direction)
        if r.is_line:
            cands.append(-r.direction)
    if include_interior and len(cands) > 1:
        s = np.sum([r.direction for r in rays if not r.is_line], axis=0)
        if np.ndim(s) and np.max(np.abs(s)) > 1e-12:
            cands.append(_inf_normalize(np.asarray(s, dtype=float)))
    return cands


def is_nonsingular_m_matrix(M, tol=1e-9) -> bool:
    """Z-matrix with all eigenvalue real parts positive.

    Off-diagonal entries must be <= tol and every eigenvalue must satisfy
    Re(lambda) > tol.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    off = M - np.diag(np.diag(M))
    if np.max(off) > tol:
        return False
    eig = np.linalg.eigvals(M)
    return bool(np.min(eig.real) > tol)
