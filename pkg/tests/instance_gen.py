"""Random well-posed problem instances for the property suite.

Builds a random nondegenerate simplex, picks a target face among the
exit-facet vertices, and samples (A, a) from the affine space that makes
the possible-equilibrium set contain that face. Instances that violate the
face assumption are rejected and resampled.
"""

import numpy as np

import reachctl as rc
from reachctl.errors import AssumptionViolated, DegenerateSimplex


def random_simplex(rng, n, tries=50):
    for _ in range(tries):
        V = rng.normal(size=(n + 1, n))
        edges = V[1:] - V[0]
        s = np.linalg.svd(edges, compute_uv=False)
        if s[-1] / s[0] > 5e-2:
            try:
                return rc.build_simplex(V)
            except DegenerateSimplex:
                continue
    raise RuntimeError("no nondegenerate simplex found")


def random_instance(rng, n=None, m=None, kappa=None, tries=60):
    """One analyzed instance, or None when rejection sampling fails."""
    n = n if n is not None else int(rng.integers(2, 5))
    m = m if m is not None else int(rng.integers(1, min(2, n - 1) + 1))
    kappa = kappa if kappa is not None else int(rng.integers(0, n))

    for _ in range(tries):
        S = random_simplex(rng, n)
        B = rng.normal(size=(n, m))
        if np.linalg.matrix_rank(B) < m:
            continue
        g_ids = 1 + rng.permutation(n)[: kappa + 1]

        # rows of the left annihilator of B
        N = rc.null_basis(B.T).basis.T
        if N.shape[0] == 0:
            continue
        # linear constraints N (A v + a) = 0 for each face vertex, unknowns (A, a)
        rows = []
        for vid in g_ids:
            v = S.vertices[vid]
            for r in range(N.shape[0]):
                row = np.zeros(n * n + n)
                for i in range(n):
                    row[i * n: (i + 1) * n] = N[r, i] * v
                row[n * n:] = N[r]
                rows.append(row)
        C = np.array(rows)
        null = rc.null_basis(C).basis
        if null.shape[1] == 0:
            continue
        coeffs = rng.normal(size=null.shape[1])
        vec = null @ coeffs
        A = vec[: n * n].reshape(n, n)
        a = vec[n * n:]
        if np.max(np.abs(A)) < 1e-6:
            continue
        scale = 1.0 / max(1.0, np.max(np.abs(A)))
        A, a = A * scale, a * scale

        try:
            system = rc.affine_system(A, B, a)
            inst = rc.analyze(system, S)
        except (AssumptionViolated, ValueError):
            continue
        return inst
    return None


def generate(rng, count, **kw):
    out = []
    guard = 0
    while len(out) < count and guard < 50 * count:
        guard += 1
        inst = random_instance(rng, **kw)
        if inst is not None:
            out.append(inst)
    return out
