"""Closed-loop integration under the supervised PWA feedback.

Fixed-step classical Runge-Kutta with the active piece re-selected at the
start of every (sub)step. Two events are localized by bisection on
barycentric coordinates: leaving the domain simplex (exit), and crossing
the active piece's own exit facet into the next-lower piece. Exit through
the domain's facet F_0 is the success condition; the report aggregates
statuses, speed floors, invariance margins and chattering over a grid of
starts.
"""

from collections import deque
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import List, Optional, Tuple

import numpy as np

from .analysis import ProblemInstance
from .errors import PointOutsideDomain
from .geometry import barycentric
from .synthesis import PwaController

STATUS_EXIT = "ExitedF0"
STATUS_WRONG = "ExitedWrongFacet"
STATUS_TIMEOUT = "TimedOut"
STATUS_STALLED = "Stalled"

_STALL_SPEED = 1e-9
_STALL_STEPS = 10
_EXIT_TOL = 1e-10
_POST_EXIT_STEPS = 10
# membership tolerance for supervisor selection
_MEMBER_TOL = 1e-9
# piece-exit events are localized past the membership band so the next
# selection genuinely drops to the lower piece
_SWITCH_DEPTH = 2e-9
_SWITCH_TRIGGER = 1e-8


@dataclass
class SimulationTrace:
    """Sampled closed-loop run: (t, x, active piece index, u) per step."""

    samples: List[Tuple[float, np.ndarray, int, np.ndarray]]
    status: str
    exit_time: Optional[float] = None
    exit_facet: Optional[int] = None
    exit_point: Optional[np.ndarray] = None
    chattering_events: int = 0
    post_exit_ok: Optional[bool] = None

    def __post_init__(self):
        self.speeds: List[float] = []

    @property
    def min_speed(self):
        return min(self.speeds) if self.speeds else float("inf")

    def piece_indices(self):
        return [piece for _, _, piece, _ in self.samples]

    def to_csv(self) -> str:
        if not self.samples:
            return ""
        n = self.samples[0][1].size
        m = self.samples[0][3].size
        header = "t," + ",".join(f"x{i+1}" for i in range(n)) + ",piece," + \
            ",".join(f"u{i+1}" for i in range(m))
        rows = [header]
        for t, x, piece, u in self.samples:
            rows.append(
                format(t, ".17g") + "," +
                ",".join(format(v, ".17g") for v in x) + "," +
                str(piece) + "," +
                ",".join(format(v, ".17g") for v in u)
            )
        return "\n".join(rows) + "\n"


class _Stepper:
    """Precomputed closed-loop data for fast piece selection and RK4 steps."""

    def __init__(self, inst: ProblemInstance, ctrl: PwaController):
        sys = inst.system
        self.pieces = sorted(ctrl.pieces, key=lambda p: p.index)
        self.F = [sys.A + sys.B @ p.K for p in self.pieces]
        self.c = [sys.B @ p.g + sys.a for p in self.pieces]
        self.T = [p.simplex.bary_transform for p in self.pieces]
        self.K = [p.K for p in self.pieces]
        self.g = [p.g for p in self.pieces]
        self.indices = [p.index for p in self.pieces]
        self.domain = inst.simplex

    def select(self, x, tol=_MEMBER_TOL):
        """Slot of the highest-index piece containing x, or None."""
        aug = np.append(x, 1.0)
        for slot in range(len(self.pieces) - 1, -1, -1):
            lam = self.T[slot] @ aug
            if lam.min() >= -tol:
                return slot
        return None

    def rk4(self, slot, x, h):
        F, c = self.F[slot], self.c[slot]
        k1 = F @ x + c
        k2 = F @ (x + 0.5 * h * k1) + c
        k3 = F @ (x + 0.5 * h * k2) + c
        k4 = F @ (x + h * k3) + c
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def speed(self, slot, x):
        return float(np.linalg.norm(self.F[slot] @ x + self.c[slot]))

    def control(self, slot, x):
        return self.K[slot] @ x + self.g[slot]

    def domain_bary(self, x):
        return barycentric(self.domain, x)

    def piece_exit_coord(self, slot, x):
        aug = np.append(x, 1.0)
        return float((self.T[slot] @ aug)[0])


def default_dt(inst: ProblemInstance, ctrl: PwaController) -> float:
    """1e-3 of the simplex diameter divided by the peak vertex speed."""
    sys = inst.system
    vmax = 0.0
    for piece in ctrl.pieces:
        for v in piece.simplex.vertices:
            vmax = max(vmax, float(np.linalg.norm(sys.field(v, piece.control(v)))))
    vmax = max(vmax, 1e-12)
    return 1e-3 * inst.simplex.diameter / vmax


def _bisect(stepper, slot, x, h, predicate):
    """Smallest tau in (0, h] with predicate(x(tau)) true, and that state.

    predicate must be false at tau=0 and true at tau=h; bisection narrows
    the interval until the crossing is located to 1e-13 of the step.
    """
    lo, hi = 0.0, h
    x_hi = stepper.rk4(slot, x, h)
    for _ in range(60):
        if hi - lo <= max(1e-16, 1e-13 * h):
            break
        mid = 0.5 * (lo + hi)
        x_mid = stepper.rk4(slot, x, mid)
        if predicate(x_mid):
            hi, x_hi = mid, x_mid
        else:
            lo = mid
    return hi, x_hi


def simulate(inst: ProblemInstance, ctrl: PwaController, x0, dt=None,
             t_max=None) -> SimulationTrace:
    """Integrate the supervised closed loop from x0 until exit or timeout.

    Status is ExitedF0 / ExitedWrongFacet / TimedOut / Stalled (speed below
    1e-9 for 10 consecutive steps). Exit events are bisected on the domain
    barycentric coordinates to 1e-10; after an exit, ten further steps
    confirm the state stays outside the simplex.
    """
    stepper = _Stepper(inst, ctrl)
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if stepper.domain_bary(x).min() < -_MEMBER_TOL:
        raise PointOutsideDomain(f"initial state {x} is outside the simplex")

    if dt is None:
        dt = default_dt(inst, ctrl)
    if t_max is None:
        t_max = 200000.0 * dt

    trace = SimulationTrace(samples=[], status=STATUS_TIMEOUT)
    t = 0.0
    stall_count = 0
    recent = deque(maxlen=10)

    while t <= t_max:
        slot = stepper.select(x)
        if slot is None:
            lam = stepper.domain_bary(x)
            facet = int(np.argmin(lam))
            trace.status = STATUS_EXIT if facet == 0 else STATUS_WRONG
            trace.exit_time = t
            trace.exit_point = x.copy()
            trace.exit_facet = facet
            break

        recent.append(stepper.indices[slot])
        if _is_chattering(recent):
            trace.chattering_events += 1
            recent.clear()

        u = stepper.control(slot, x)
        trace.samples.append((t, x.copy(), stepper.indices[slot], u.copy()))
        speed = stepper.speed(slot, x)
        trace.speeds.append(speed)

        if speed < _STALL_SPEED:
            stall_count += 1
            if stall_count >= _STALL_STEPS:
                trace.status = STATUS_STALLED
                break
        else:
            stall_count = 0

        x_next = stepper.rk4(slot, x, dt)
        lam_next = stepper.domain_bary(x_next)

        if lam_next.min() < -_EXIT_TOL:
            tau, x_cross = _bisect(
                stepper, slot, x, dt,
                lambda z: stepper.domain_bary(z).min() < -_EXIT_TOL,
            )
            # a piece handover strictly inside [0, tau] preempts the exit:
            # trajectories on a piece's exit facet switch laws first
            if (slot > 0 and
                    stepper.piece_exit_coord(slot, x_cross) < -_SWITCH_DEPTH):
                tau_p, x_p = _bisect(
                    stepper, slot, x, tau,
                    lambda z: stepper.piece_exit_coord(slot, z) < -_SWITCH_DEPTH,
                )
                t += tau_p
                x = x_p
                continue
            lam_cross = stepper.domain_bary(x_cross)
            facet = int(np.argmin(lam_cross))
            trace.exit_time = t + tau
            trace.exit_point = x_cross.copy()
            trace.exit_facet = facet
            trace.status = STATUS_EXIT if facet == 0 else STATUS_WRONG
            trace.samples.append((t + tau, x_cross.copy(), stepper.indices[slot],
                                  stepper.control(slot, x_cross)))
            ok = True
            z = x_cross
            for _ in range(_POST_EXIT_STEPS):
                z = stepper.rk4(slot, z, dt)
                if stepper.domain_bary(z).min() >= -1e-12:
                    ok = False
                    break
            trace.post_exit_ok = ok
            break

        if slot > 0 and stepper.piece_exit_coord(slot, x_next) < -_SWITCH_TRIGGER:
            # crossed the piece's exit facet into the next-lower piece;
            # restart just past the facet so the supervisor re-selects
            tau, x_cross = _bisect(
                stepper, slot, x, dt,
                lambda z: stepper.piece_exit_coord(slot, z) < -_SWITCH_DEPTH,
            )
            t += tau
            x = x_cross
            continue

        t += dt
        x = x_next

    return trace


def _is_chattering(recent, alternations=3):
    """At least `alternations` index increases inside the recent window."""
    ups = sum(1 for a, b in zip(recent, list(recent)[1:]) if b > a)
    return ups >= alternations


def barycentric_grid(n, density):
    """All barycentric combinations at resolution 1/density, C(density+n, n) points."""
    pts = []
    for combo in combinations_with_replacement(range(n + 1), density):
        counts = np.bincount(combo, minlength=n + 1)
        pts.append(counts / float(density))
    return np.array(pts)


@dataclass
class TrajectoryOutcome:
    x0: np.ndarray
    status: str
    exit_time: Optional[float]
    min_speed: float
    chattering_events: int
    piece_monotone: bool


@dataclass
class VerificationReport:
    """Aggregate check of finite-time exit, speed floor and invariance."""

    outcomes: List[TrajectoryOutcome]
    eps_obs: float
    min_speed_location: Optional[np.ndarray]
    invariance_violations: int
    invariance_worst: float
    boundary_samples: int
    wrong_facet_exits: int
    stalled: int
    timed_out: int
    chattering_events: int
    exit_time_min: float
    exit_time_mean: float
    exit_time_max: float
    grid_density: int
    dt: float
    t_max: float
    seed: int

    @property
    def all_exited(self):
        return bool(self.outcomes) and all(o.status == STATUS_EXIT for o in self.outcomes)

    @property
    def condition_i_ok(self):
        return self.all_exited and self.wrong_facet_exits == 0

    @property
    def condition_ii_ok(self):
        return self.eps_obs > 1e-6

    @property
    def condition_iii_ok(self):
        return self.invariance_violations == 0

    @property
    def passed(self):
        return self.condition_i_ok and self.condition_ii_ok and self.condition_iii_ok

    def to_text(self):
        loc = ("-" if self.min_speed_location is None else
               " ".join(format(v, ".17g") for v in self.min_speed_location))
        lines = [
            f"starts {len(self.outcomes)}",
            f"exited_f0 {sum(1 for o in self.outcomes if o.status == STATUS_EXIT)}",
            f"wrong_facet {self.wrong_facet_exits}",
            f"stalled {self.stalled}",
            f"timed_out {self.timed_out}",
            f"chattering {self.chattering_events}",
            f"eps_obs {self.eps_obs:.17g}",
            f"min_speed_location {loc}",
            f"invariance_violations {self.invariance_violations}",
            f"invariance_worst {self.invariance_worst:.17g}",
            f"boundary_samples {self.boundary_samples}",
            f"exit_time_min {self.exit_time_min:.17g}",
            f"exit_time_mean {self.exit_time_mean:.17g}",
            f"exit_time_max {self.exit_time_max:.17g}",
            f"condition_i {'pass' if self.condition_i_ok else 'fail'}",
            f"condition_ii {'pass' if self.condition_ii_ok else 'fail'}",
            f"condition_iii {'pass' if self.condition_iii_ok else 'fail'}",
            f"verdict {'pass' if self.passed else 'fail'}",
        ]
        return "\n".join(lines) + "\n"


def verify_rcp(inst: ProblemInstance, ctrl: PwaController, grid_density=10,
               dt=None, t_max=None, boundary_samples=100000,
               seed=0) -> VerificationReport:
    """Simulate a barycentric grid of starts and check the exit conditions.

    All starts must exit through F_0; the report carries the observed speed
    floor, closed-loop invariance margins at sampled boundary points of the
    non-exit facets, chattering counts and exit-time statistics.
    """
    S = inst.simplex
    n = S.dim
    if dt is None:
        dt = default_dt(inst, ctrl)
    if t_max is None:
        t_max = 50000.0 * dt

    grid = barycentric_grid(n, grid_density) if grid_density > 0 else np.zeros((0, n + 1))
    starts = grid @ S.vertices

    outcomes = []
    eps_obs = np.inf
    eps_loc = None
    wrong = stalled = timed = chatter = 0
    exit_times = []
    for x0 in starts:
        trace = simulate(inst, ctrl, x0, dt=dt, t_max=t_max)
        min_speed = trace.min_speed
        if trace.speeds and min_speed < eps_obs:
            eps_obs = min_speed
            k = int(np.argmin(trace.speeds))
            eps_loc = trace.samples[k][1]
        seq = trace.piece_indices()
        mono = all(b <= a for a, b in zip(seq, seq[1:]))
        outcomes.append(TrajectoryOutcome(
            x0=np.asarray(x0), status=trace.status, exit_time=trace.exit_time,
            min_speed=min_speed, chattering_events=trace.chattering_events,
            piece_monotone=mono,
        ))
        chatter += trace.chattering_events
        if trace.status == STATUS_WRONG:
            wrong += 1
        elif trace.status == STATUS_STALLED:
            stalled += 1
        elif trace.status == STATUS_TIMEOUT:
            timed += 1
        if trace.exit_time is not None and trace.status == STATUS_EXIT:
            exit_times.append(trace.exit_time)

    violations, worst = _boundary_invariance(inst, ctrl, boundary_samples, seed)

    times = np.array(exit_times) if exit_times else np.array([np.nan])
    return VerificationReport(
        outcomes=outcomes,
        eps_obs=float(eps_obs),
        min_speed_location=eps_loc,
        invariance_violations=violations,
        invariance_worst=worst,
        boundary_samples=boundary_samples,
        wrong_facet_exits=wrong,
        stalled=stalled,
        timed_out=timed,
        chattering_events=chatter,
        exit_time_min=float(np.nanmin(times)),
        exit_time_mean=float(np.nanmean(times)),
        exit_time_max=float(np.nanmax(times)),
        grid_density=grid_density,
        dt=dt,
        t_max=t_max,
        seed=seed,
    )


def _boundary_invariance(inst: ProblemInstance, ctrl: PwaController,
                         total_samples, seed, tol=1e-9):
    """Sample the non-exit facets and check h_j . field <= tol under the
    highest-index supervisor rule."""
    S = inst.simplex
    sys = inst.system
    n = S.dim
    if total_samples <= 0:
        return 0, 0.0
    rng = np.random.default_rng(seed)
    per_facet = max(1, total_samples // n)

    pieces = sorted(ctrl.pieces, key=lambda p: p.index)
    Ts = [p.simplex.bary_transform for p in pieces]

    violations = 0
    worst = -np.inf
    for j in range(1, n + 1):
        idx = [k for k in range(n + 1) if k != j]
        lam = rng.dirichlet(np.ones(n), size=per_facet)
        X = lam @ S.vertices[idx]
        aug = np.hstack([X, np.ones((X.shape[0], 1))])

        active = np.full(X.shape[0], -1)
        for slot in range(len(pieces)):
            inside = (aug @ Ts[slot].T).min(axis=1) >= -1e-8
            active[inside] = slot
        U = np.zeros((X.shape[0], sys.m))
        for slot in range(len(pieces)):
            mask = active == slot
            if not np.any(mask):
                continue
            U[mask] = X[mask] @ pieces[slot].K.T + pieces[slot].g
        covered = active >= 0
        Y = X @ sys.A.T + U @ sys.B.T + sys.a

        margins = (Y @ S.normals[j])[covered]
        scale = np.maximum(1.0, np.max(np.abs(Y[covered]), axis=1))
        rel = margins / scale
        if rel.size:
            violations += int(np.sum(rel > tol))
            worst = max(worst, float(np.max(rel)))
    return violations, worst
