"""Piecewise affine feedback synthesis.

The subdivision loop inserts a point v' on the edge from v_0 toward the
group-leading vertex v_{m_k}, splitting off a simplex on which an affine
feedback solves the reach problem, and recurses on the remainder. The
final controller is an ordered list of affine pieces with a discrete
supervisor: at points shared by several pieces the highest-index piece's
law applies, which forces trajectories through pieces of decreasing index.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .analysis import (
    AFFINE_ROUTES,
    ROUTE_B_CONE,
    ROUTE_G_EMPTY,
    ROUTE_INFEASIBLE,
    ROUTE_KAPPA_LT_MHAT,
    ROUTE_SUBDIVISION,
    AffineSystem,
    ProblemInstance,
    ReachControlIndices,
    cone_normals,
    invariance_control,
    max_independent_selection,
    reach_control_indices,
)
from .errors import (
    ConstructionFailed,
    DegenerateSimplex,
    InfeasibleInvariance,
    PointOutsideDomain,
    SynthesisFailed,
)
from .geometry import Simplex, barycentric, build_simplex
from .polylin import image_basis, nonzero_cone_point

# search grid for the subdivision parameter, as fractions of (lambda*, 1)
_LAMBDA_GRID = (0.5, 0.75, 0.9, 0.99, 0.999, 0.9999, 0.99999)
# required strict margin, in units of |h0 . b|, on the unit-normalized h'
_LAMBDA_MARGIN = 0.1
# target slack for boosted invariance rows (on unit normals)
_BOOST_DELTA = 1e-3


@dataclass(frozen=True)
class AffinePiece:
    """One affine law u = K x + g on a sub-simplex, with its supervisor index."""

    simplex: Simplex
    K: np.ndarray
    g: np.ndarray
    index: int

    def control(self, x):
        return self.K @ np.asarray(x, dtype=float) + self.g


@dataclass
class SubdivisionStep:
    k: int
    edge_position: int          # m_k in the constructed ordering
    lam: float
    vprime: np.ndarray
    hprime: np.ndarray          # unit normal of the inserted facet, out of S^k
    gamma: np.ndarray
    margin: float               # achieved unit-normal margin h'.b


@dataclass
class SubdivisionRecord:
    steps: List[SubdivisionStep] = field(default_factory=list)


@dataclass
class PwaController:
    """Ordered affine pieces plus the highest-index supervisor rule."""

    pieces: List[AffinePiece]
    record: Optional[SubdivisionRecord] = None
    supervisor: str = "highest-index"

    @property
    def n_pieces(self):
        return len(self.pieces)

    @property
    def dim(self):
        return self.pieces[0].simplex.dim

    @property
    def control_dim(self):
        return self.pieces[0].K.shape[0]


def gamma_coefficients(s: Simplex) -> np.ndarray:
    """Positive weights with h_0 = -(gamma_1 h_1 + ... + gamma_n h_n).

    The exit normal of a simplex is always such a strictly negative
    combination of the other outward normals; a nonpositive weight signals
    geometric degeneracy.
    """
    H = s.normals[1:].T
    try:
        gamma = np.linalg.solve(H, -s.normals[0])
    except np.linalg.LinAlgError as exc:
        raise ConstructionFailed(f"normal system singular: {exc}") from exc
    if np.min(gamma) <= 1e-9:
        raise ConstructionFailed(f"nonpositive gamma coefficient: {gamma}")
    return gamma


def select_lambda(s: Simplex, b, gamma1, edge_index=1, lam=None):
    """Subdivision parameter and inserted-facet normal for one split.

    The inserted facet through v' = lam*v_e + (1-lam)*v_0 has normal
    h' = gamma_e (1-lam) h_e - lam h_0 (pointing out of the split-off
    piece), so h'.b crosses zero at lam* = gamma_e(h_e.b) /
    (gamma_e(h_e.b) + h_0.b). The default rule takes the midpoint of
    (lam*, 1) and refines toward 1 until the unit-normalized margin
    h'.b <= -0.1*|h0.b| holds. A caller-supplied lam is validated for
    strict negativity only.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    h0 = s.normals[0]
    he = s.normals[edge_index]
    heb = float(he @ b)
    h0b = float(h0 @ b)
    if heb <= 1e-12:
        raise ConstructionFailed(f"edge normal alignment h_e.b = {heb:.3e} not positive")
    if h0b <= 1e-12:
        raise ConstructionFailed(f"exit alignment h_0.b = {h0b:.3e} not positive")

    def hprime_at(l):
        return gamma1 * (1.0 - l) * he - l * h0

    if lam is not None:
        if not 0.0 < lam < 1.0:
            raise ConstructionFailed(f"pinned lambda {lam} outside (0,1)")
        hp = hprime_at(lam)
        margin = float(hp @ b) / np.linalg.norm(hp)
        if margin >= -1e-9:
            raise ConstructionFailed(
                f"pinned subdivision point gives h'.b = {margin:.3e}, not negative"
            )
        return lam, hp / np.linalg.norm(hp), margin

    lam_star = gamma1 * heb / (gamma1 * heb + h0b)
    for t in _LAMBDA_GRID:
        cand = lam_star + (1.0 - lam_star) * t
        hp = hprime_at(cand)
        nrm = np.linalg.norm(hp)
        if nrm <= 1e-14:
            continue
        margin = float(hp @ b) / nrm
        if margin <= -_LAMBDA_MARGIN * abs(h0b):
            return cand, hp / nrm, margin
    raise ConstructionFailed(
        "no lambda on the refinement grid achieves the h'.b margin; "
        "check the cone data of the instance"
    )


def subdivide(inst: ProblemInstance, indices: ReachControlIndices,
              pinned_points=None) -> Tuple[List[Simplex], SubdivisionRecord]:
    """Split the simplex into p+1 pieces along the index groups.

    Piece k keeps the current exit facet and replaces the apex by v'; the
    remainder (apex restored, v' replacing the edge vertex) carries on with
    the inserted facet as its new exit facet. Pinned points, when given,
    must lie on the scheduled edges.
    """
    S = inst.simplex
    eqset = inst.equilibrium_set
    perm = indices.permutation
    cur_verts = S.vertices[perm].copy()
    cur = build_simplex(cur_verts)
    p = indices.p

    pieces: List[Simplex] = []
    record = SubdivisionRecord()

    for k in range(1, p + 1):
        mk = indices.m_starts[k - 1]
        b = indices.b_vectors[mk - 1]
        gamma = gamma_coefficients(cur)

        lam_pin = None
        if pinned_points is not None and len(pinned_points) >= k:
            x = np.asarray(pinned_points[k - 1], dtype=float).reshape(-1)
            v0, vm = cur_verts[0], cur_verts[mk]
            edge = vm - v0
            t = float((x - v0) @ edge / (edge @ edge))
            if np.linalg.norm(x - (v0 + t * edge)) > 1e-8 * max(1.0, np.linalg.norm(edge)):
                raise SynthesisFailed(
                    f"pinned subdivision point {x} is not on the edge (v0, v_m{k})"
                )
            lam_pin = t

        lam, hprime, margin = select_lambda(cur, b, gamma[mk - 1], edge_index=mk, lam=lam_pin)
        vprime = lam * cur_verts[mk] + (1.0 - lam) * cur_verts[0]

        piece = build_simplex(np.vstack([vprime, cur_verts[1:]]))
        # the inserted facet of the piece sits opposite position mk
        if float(piece.normals[mk] @ hprime) < 0.99:
            raise SynthesisFailed(f"inserted facet normal mismatch at step {k}")
        cone_rows = piece.normals[1:]
        worst = float(np.max(cone_rows @ b)) / max(1.0, float(np.max(np.abs(b))))
        if worst > 1e-9:
            raise SynthesisFailed(
                f"b_m{k} left cone(S^{k}) after the split (worst row {worst:.2e})"
            )
        pieces.append(piece)
        record.steps.append(SubdivisionStep(
            k=k, edge_position=mk, lam=lam, vprime=vprime,
            hprime=hprime, gamma=gamma, margin=margin,
        ))

        cur_verts = cur_verts.copy()
        cur_verts[mk] = vprime
        cur = build_simplex(cur_verts)

    pieces.append(cur)

    in_o = sum(
        1 for i in range(1, S.dim + 1)
        if eqset is not None and eqset.contains(inst.system, cur_verts[i], tol=1e-8)
    )
    if in_o != indices.m_hat:
        raise SynthesisFailed(
            f"final piece keeps {in_o} equilibrium-face vertices, expected {indices.m_hat}"
        )
    return pieces, record


def affine_from_vertex_controls(s: Simplex, controls) -> Tuple[np.ndarray, np.ndarray]:
    """Unique affine map u = K x + g interpolating the vertex controls."""
    U = np.atleast_2d(np.asarray(controls, dtype=float))
    if U.shape[0] != s.dim + 1:
        U = U.T
    if U.shape[0] != s.dim + 1:
        raise ValueError("need one control per vertex")
    M = np.hstack([s.vertices, np.ones((s.dim + 1, 1))])
    try:
        sol = np.linalg.solve(M, U)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplex(str(exc)) from exc
    K = sol[:-1].T
    g = sol[-1]
    return K, g


def _piece_rows(piece: Simplex, i: int):
    """(facet index, normal) pairs constraining the field at piece vertex i."""
    return [(j, piece.normals[j]) for j in range(1, piece.dim + 1) if j != i]


def vertex_controls_for_piece(inst: ProblemInstance, piece: Simplex, xi=None, *,
                              strict_facets=(), base_controls=None,
                              frozen=(), delta=_BOOST_DELTA) -> np.ndarray:
    """Vertex controls satisfying the piece's invariance conditions.

    Base controls (one per vertex; solved by shared-margin feasibility when
    not supplied) are shifted by eps * w along an input direction w with
    B w = xi, where eps is the smallest value driving every strict-facet
    row of every boosted vertex to slack delta, then doubled. Vertices in
    ``frozen`` and vertices not touching a strict facet keep their base
    control, mirroring that the shift is only needed where the inserted
    facet constrains the field.
    """
    sys = inst.system
    npts = piece.dim + 1
    base = np.zeros((npts, sys.m))
    base_controls = base_controls or {}

    for i in range(npts):
        if i in base_controls:
            base[i] = np.asarray(base_controls[i], dtype=float)
            continue
        u = invariance_control(sys, piece, i)
        if u is None:
            raise InfeasibleInvariance(i, "no control satisfies the piece invariance rows")
        base[i] = u

    controls = base.copy()
    if xi is not None and strict_facets:
        xi = np.asarray(xi, dtype=float).reshape(-1)
        w, *_ = np.linalg.lstsq(sys.B, xi, rcond=None)
        if np.max(np.abs(sys.B @ w - xi)) > 1e-8 * max(1.0, float(np.max(np.abs(xi)))):
            raise SynthesisFailed("xi is not in the input image")
        eps_needed = 0.0
        boosted = []
        for i in range(npts):
            if i in frozen:
                continue
            rows = [(j, h) for j, h in _piece_rows(piece, i) if j in strict_facets]
            if not rows:
                continue
            boosted.append(i)
            y = sys.field(piece.vertices[i], base[i])
            for _, h in rows:
                slope = float(h @ xi)
                if slope >= -1e-12:
                    raise SynthesisFailed(
                        "boost direction does not strictly improve the inserted facet row"
                    )
                need = (float(h @ y) + delta) / (-slope)
                eps_needed = max(eps_needed, need)
        eps = 2.0 * max(eps_needed, 0.0)
        for i in boosted:
            controls[i] = base[i] + eps * w

    _validate_piece_controls(sys, piece, controls)
    return controls


def _validate_piece_controls(sys: AffineSystem, piece: Simplex, controls, tol=1e-6):
    for i in range(piece.dim + 1):
        y = sys.field(piece.vertices[i], controls[i])
        scale = max(1.0, float(np.max(np.abs(y))))
        for j, h in _piece_rows(piece, i):
            if float(h @ y) > tol * scale:
                raise SynthesisFailed(
                    f"invariance row violated at piece vertex {i}, facet {j}: "
                    f"h.y = {float(h @ y):.3e}"
                )


def _match_pins(piece: Simplex, pins, piece_index, tol=1e-7):
    """Pinned controls for this piece, keyed by vertex position."""
    out = {}
    if not pins:
        return out
    for entry in pins:
        k, point, u = entry
        if k != piece_index:
            continue
        point = np.asarray(point, dtype=float).reshape(-1)
        dists = np.linalg.norm(piece.vertices - point, axis=1)
        hit = int(np.argmin(dists))
        if dists[hit] > tol * max(1.0, piece.diameter):
            raise SynthesisFailed(
                f"pinned control point {point} matches no vertex of piece {k}"
            )
        out[hit] = np.asarray(u, dtype=float).reshape(-1)
    return out


def _equilibrium_vertex_ids(inst: ProblemInstance, piece: Simplex):
    eqset = inst.equilibrium_set
    if eqset is None or eqset.empty:
        return []
    return [i for i in range(piece.dim + 1)
            if eqset.contains(inst.system, piece.vertices[i], tol=1e-8)]


def _independent_velocity_controls(inst: ProblemInstance, piece: Simplex, o_ids):
    """Exact controls giving independent nonzero velocities on the
    equilibrium face, one per listed vertex."""
    sys = inst.system
    Bimg = image_basis(sys.B)
    cones = [cone_normals(piece, i) for i in o_ids]
    m_hat, selection = max_independent_selection(cones, Bimg)
    if m_hat < len(o_ids):
        raise SynthesisFailed(
            "cannot assign independent velocities on the equilibrium face "
            f"({m_hat} < {len(o_ids)})"
        )
    out = {}
    for i, b in zip(o_ids, selection):
        if b is None:
            raise SynthesisFailed(f"trivial cone at equilibrium vertex {i}")
        target = b - sys.drift(piece.vertices[i])
        u, *_ = np.linalg.lstsq(sys.B, target, rcond=None)
        if np.max(np.abs(sys.field(piece.vertices[i], u) - b)) > 1e-7:
            raise SynthesisFailed(f"velocity assignment failed at vertex {i}")
        out[i] = u
    return out


def _single_piece(inst: ProblemInstance, pins) -> PwaController:
    sys, S = inst.system, inst.simplex
    route = inst.route
    base = {}

    if route == ROUTE_KAPPA_LT_MHAT:
        base.update(_independent_velocity_controls(inst, S, _equilibrium_vertex_ids(inst, S)))

    pinned = _match_pins(S, pins, 1)
    base.update(pinned)
    controls = vertex_controls_for_piece(inst, S, base_controls=base)

    if route == ROUTE_B_CONE and not pinned:
        Bimg = image_basis(sys.B)
        xi = nonzero_cone_point(S.normals[1:], Bimg)
        if xi is None:
            raise SynthesisFailed("route expects a nontrivial B cap cone(S)")
        w, *_ = np.linalg.lstsq(sys.B, xi, rcond=None)
        speeds = [np.linalg.norm(sys.field(S.vertices[i], controls[i]))
                  for i in range(S.dim + 1)]
        eps = (2.0 * max(speeds) + 1.0) / np.linalg.norm(xi)
        controls = controls + eps * w
        _validate_piece_controls(sys, S, controls)

    K, g = affine_from_vertex_controls(S, controls)
    piece = AffinePiece(simplex=S, K=K, g=g, index=1)
    ctrl = PwaController(pieces=[piece])
    _verify_controller(inst, ctrl)
    return ctrl


def synthesize(inst: ProblemInstance, pinned_controls=None,
               pinned_subdivision=None) -> PwaController:
    """Controller for the instance's route.

    Affine routes produce a single piece. The subdivision route builds the
    reach control indices, subdivides, and assembles one affine law per
    piece; pinned vertex controls (piece index, vertex point, u) and pinned
    subdivision points override the defaults after validation.
    """
    if inst.route is None:
        raise SynthesisFailed("instance not classified; run analyze() first")
    if inst.route == ROUTE_INFEASIBLE:
        raise SynthesisFailed(f"instance infeasible: {inst.route_reason}")
    if inst.route in AFFINE_ROUTES:
        return _single_piece(inst, pinned_controls)

    assert inst.route == ROUTE_SUBDIVISION
    sys, S = inst.system, inst.simplex
    indices = reach_control_indices(inst)
    pieces_geo, record = subdivide(inst, indices, pinned_points=pinned_subdivision)
    p = indices.p

    # invariance controls for the evolving remainder, matched to Lemma-style
    # interpolation at the inserted vertex
    pieces: List[AffinePiece] = []
    cur = build_simplex(S.vertices[indices.permutation])
    for k in range(1, p + 1):
        step = record.steps[k - 1]
        mk = step.edge_position
        piece = pieces_geo[k - 1]
        b = indices.b_vectors[mk - 1]

        u0 = invariance_control(sys, cur, 0)
        if u0 is None:
            raise InfeasibleInvariance(0, "remainder apex lost invariance feasibility")
        target = b - sys.drift(cur.vertices[mk])
        u_edge, *_ = np.linalg.lstsq(sys.B, target, rcond=None)
        if np.max(np.abs(sys.field(cur.vertices[mk], u_edge) - b)) > 1e-7:
            raise SynthesisFailed(f"cannot realize the group vector at step {k}")

        base = {0: step.lam * u_edge + (1.0 - step.lam) * u0, mk: u_edge}
        for i in range(1, piece.dim + 1):
            if i == mk:
                continue
            u_i = invariance_control(sys, cur, i)
            if u_i is None:
                raise InfeasibleInvariance(i, f"invariance lost at step {k}")
            base[i] = u_i

        pinned = _match_pins(piece, pinned_controls, k)
        if pinned:
            base.update(pinned)
            frozen = tuple(pinned.keys())
            controls = np.zeros((piece.dim + 1, sys.m))
            for i in range(piece.dim + 1):
                controls[i] = base[i]
            _validate_piece_controls(sys, piece, controls)
        else:
            controls = vertex_controls_for_piece(
                inst, piece, xi=b, strict_facets=(mk,), base_controls=base,
                frozen=(mk,),
            )

        K, g = affine_from_vertex_controls(piece, controls)
        pieces.append(AffinePiece(simplex=piece, K=K, g=g, index=k))

        verts = cur.vertices.copy()
        verts[mk] = step.vprime
        cur = build_simplex(verts)

    # last piece: independent velocities on the remaining equilibrium face
    last = pieces_geo[-1]
    o_ids = _equilibrium_vertex_ids(inst, last)
    base = {} if len(o_ids) == 0 else _independent_velocity_controls(inst, last, o_ids)
    pinned = _match_pins(last, pinned_controls, p + 1)
    base.update(pinned)
    controls = vertex_controls_for_piece(inst, last, base_controls=base)
    K, g = affine_from_vertex_controls(last, controls)
    pieces.append(AffinePiece(simplex=last, K=K, g=g, index=p + 1))

    ctrl = PwaController(pieces=pieces, record=record)
    _verify_controller(inst, ctrl)
    return ctrl


def _verify_controller(inst: ProblemInstance, ctrl: PwaController):
    """Interpolation, invariance, crossing and partition certificates."""
    sys = inst.system
    for piece in ctrl.pieces:
        for i in range(piece.simplex.dim + 1):
            v = piece.simplex.vertices[i]
            u = piece.control(v)
            y = sys.field(v, u)
            scale = max(1.0, float(np.max(np.abs(y))))
            for j, h in _piece_rows(piece.simplex, i):
                if float(h @ y) > 1e-9 * scale:
                    raise SynthesisFailed(
                        f"piece {piece.index}: invariance fails at vertex {i}, "
                        f"facet {j} (h.y = {float(h @ y):.3e})"
                    )

    if ctrl.record is not None:
        for step, piece in zip(ctrl.record.steps, ctrl.pieces[:-1]):
            hp = step.hprime
            mk = step.edge_position
            for i in range(piece.simplex.dim + 1):
                if i == mk:
                    continue
                v = piece.simplex.vertices[i]
                y = sys.field(v, piece.control(v))
                if float(hp @ y) >= -1e-9:
                    raise SynthesisFailed(
                        f"piece {piece.index}: inserted-facet crossing not strict "
                        f"at vertex {i} (h'.y = {float(hp @ y):.3e})"
                    )

    total = sum(piece.simplex.volume() for piece in ctrl.pieces)
    ref = inst.simplex.volume()
    if abs(total - ref) > 1e-8 * ref:
        raise SynthesisFailed(
            f"piece volumes sum to {total!r}, simplex volume is {ref!r}"
        )


def supervisor_select(ctrl: PwaController, x, tol=1e-9) -> Tuple[int, np.ndarray]:
    """Highest-index piece containing x, with its control value."""
    x = np.asarray(x, dtype=float).reshape(-1)
    for piece in sorted(ctrl.pieces, key=lambda p: -p.index):
        lam = barycentric(piece.simplex, x)
        if float(np.min(lam)) >= -tol:
            return piece.index, piece.control(x)
    raise PointOutsideDomain(f"{x} is not in any controller piece")


def minimum_speed(inst: ProblemInstance, ctrl: PwaController, samples_per_piece=10000,
                  seed=0) -> float:
    """Minimum closed-loop speed over a random grid in every piece."""
    rng = np.random.default_rng(seed)
    sys = inst.system
    best = np.inf
    for piece in ctrl.pieces:
        npts = piece.simplex.dim + 1
        lam = rng.dirichlet(np.ones(npts), size=samples_per_piece)
        X = lam @ piece.simplex.vertices
        U = X @ piece.K.T + piece.g
        Y = X @ sys.A.T + U @ sys.B.T + sys.a
        best = min(best, float(np.min(np.linalg.norm(Y, axis=1))))
    return best


# ---------------------------------------------------------------------------
# controller serialization (plain text, 17 significant digits)

def _fmt(x):
    return format(float(x), ".17g")


def _fmt_vec(v):
    return " ".join(_fmt(x) for x in np.asarray(v, dtype=float).reshape(-1))


def serialize_controller(ctrl: PwaController) -> str:
    lines = ["# pwa controller"]
    lines.append(f"dim {ctrl.dim} {ctrl.control_dim}")
    lines.append(f"pieces {ctrl.n_pieces}")
    lines.append(f"supervisor {ctrl.supervisor}")
    for piece in ctrl.pieces:
        lines.append(f"piece {piece.index}")
        for v in piece.simplex.vertices:
            lines.append("vertex " + _fmt_vec(v))
        for row in piece.K:
            lines.append("K " + _fmt_vec(row))
        lines.append("g " + _fmt_vec(piece.g))
    if ctrl.record is not None:
        lines.append(f"subdivision {len(ctrl.record.steps)}")
        for step in ctrl.record.steps:
            lines.append(f"step {step.k} {step.edge_position}")
            lines.append("lambda " + _fmt(step.lam))
            lines.append("vprime " + _fmt_vec(step.vprime))
            lines.append("hprime " + _fmt_vec(step.hprime))
            lines.append("gamma " + _fmt_vec(step.gamma))
            lines.append("margin " + _fmt(step.margin))
    return "\n".join(lines) + "\n"


def parse_controller(text: str) -> PwaController:
    from .errors import ParseError

    tokens = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append((ln, line.split()))

    pos = 0

    def more():
        return pos < len(tokens)

    def take(expect=None):
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of controller file")
        ln, parts = tokens[pos]
        pos += 1
        if expect is not None and parts[0] != expect:
            raise ParseError(f"expected '{expect}', found '{parts[0]}'", line=ln)
        return ln, parts

    _, parts = take("dim")
    n, m = int(parts[1]), int(parts[2])
    _, parts = take("pieces")
    count = int(parts[1])
    _, parts = take("supervisor")
    supervisor = parts[1]

    pieces = []
    for _ in range(count):
        ln, parts = take("piece")
        idx = int(parts[1])
        verts = []
        for _ in range(n + 1):
            ln, parts = take("vertex")
            if len(parts) != n + 1:
                raise ParseError(f"vertex row needs {n} numbers", line=ln)
            verts.append([float(x) for x in parts[1:]])
        K = []
        for _ in range(m):
            ln, parts = take("K")
            K.append([float(x) for x in parts[1:]])
        ln, parts = take("g")
        g = [float(x) for x in parts[1:]]
        pieces.append(AffinePiece(
            simplex=build_simplex(np.array(verts)),
            K=np.array(K), g=np.array(g), index=idx,
        ))

    record = None
    if more():
        _, parts = take("subdivision")
        record = SubdivisionRecord()
        for _ in range(int(parts[1])):
            _, parts = take("step")
            k, edge_pos = int(parts[1]), int(parts[2])
            _, parts = take("lambda")
            lam = float(parts[1])
            _, parts = take("vprime")
            vp = np.array([float(x) for x in parts[1:]])
            _, parts = take("hprime")
            hp = np.array([float(x) for x in parts[1:]])
            _, parts = take("gamma")
            gm = np.array([float(x) for x in parts[1:]])
            _, parts = take("margin")
            margin = float(parts[1])
            record.steps.append(SubdivisionStep(
                k=k, edge_position=edge_pos, lam=lam, vprime=vp, hprime=hp,
                gamma=gm, margin=margin,
            ))

    return PwaController(pieces=pieces, record=record, supervisor=supervisor)
