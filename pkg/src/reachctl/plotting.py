"""Deterministic 2D plots of the closed-loop vector field and subdivision."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import UnsupportedDimension
from .simulation import simulate
from .synthesis import PwaController, supervisor_select


def plot_closed_loop(inst, ctrl: PwaController, out_path, grid=18,
                     trajectories=5, dt=None):
    """Write an SVG with the simplex outline, piece boundaries, quiver field
    and optional sample trajectories. 2D instances only; output bytes are
    deterministic for fixed inputs."""
    S = inst.simplex
    if S.dim != 2:
        raise UnsupportedDimension(f"plotting needs n = 2, got n = {S.dim}")

    plt.rcParams["svg.hashsalt"] = "reachctl"
    fig, ax = plt.subplots(figsize=(6, 6))

    for piece in ctrl.pieces:
        V = piece.simplex.vertices
        loop = np.vstack([V, V[:1]])
        ax.plot(loop[:, 0], loop[:, 1], color="0.3", lw=1.0)
    V = S.vertices
    loop = np.vstack([V, V[:1]])
    ax.plot(loop[:, 0], loop[:, 1], color="k", lw=1.8)
    exit_edge = S.vertices[1:]
    ax.plot(exit_edge[:, 0], exit_edge[:, 1], color="tab:red", lw=2.5)

    lo = V.min(axis=0)
    hi = V.max(axis=0)
    xs = np.linspace(lo[0], hi[0], grid)
    ys = np.linspace(lo[1], hi[1], grid)
    px, py, vx, vy = [], [], [], []
    sys = inst.system
    for x in xs:
        for y in ys:
            pt = np.array([x, y])
            try:
                _, u = supervisor_select(ctrl, pt, tol=1e-9)
            except Exception:
                continue
            f = sys.field(pt, u)
            px.append(x)
            py.append(y)
            vx.append(f[0])
            vy.append(f[1])
    if px:
        ax.quiver(px, py, vx, vy, color="tab:blue", width=0.003)

    if trajectories > 0:
        c = S.centroid
        for k in range(trajectories):
            w = (k + 1) / (trajectories + 1)
            x0 = w * S.vertices[0] + (1 - w) * c
            trace = simulate(inst, ctrl, x0, dt=dt)
            pts = np.array([s[1] for s in trace.samples])
            if len(pts) > 1:
                ax.plot(pts[:, 0], pts[:, 1], color="tab:green", lw=1.2)

    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
