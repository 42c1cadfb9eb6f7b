"""Estimator-style front end.

ReachControlSynthesizer wraps the analyze/synthesize/supervise pipeline in
the familiar fit/predict shape: fit ingests the problem data and builds
the piecewise affine feedback; predict evaluates the supervised control
law at query states.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .analysis import AffineSystem, analyze
from .geometry import Simplex, build_simplex
from .problemfile import Problem
from .simulation import verify_rcp
from .synthesis import supervisor_select, synthesize
from .validation import check_state_batch


class ReachControlSynthesizer(BaseEstimator):
    """Synthesizes a reach controller from problem data, then acts as the
    feedback map u = f(x).

    Parameters
    ----------
    tol : membership and assertion tolerance.
    grid_density : barycentric grid resolution used by score/verify.
    dt, t_max : integration controls for verification (None = auto).
    """

    def __init__(self, tol=1e-9, grid_density=10, dt=None, t_max=None):
        self.tol = tol
        self.grid_density = grid_density
        self.dt = dt
        self.t_max = t_max

    def fit(self, X, y=None):
        """Fit from a Problem, an (AffineSystem, Simplex) pair, or a dict
        with keys A, B, a, vertices."""
        problem = None
        if isinstance(X, Problem):
            problem = X
            system, simplex = X.system(), X.simplex()
        elif isinstance(X, tuple) and len(X) == 2 and isinstance(X[0], AffineSystem):
            system, simplex = X
        elif isinstance(X, dict):
            from .analysis import affine_system

            system = affine_system(X["A"], X["B"], X["a"])
            simplex = build_simplex(X["vertices"])
        else:
            raise TypeError(
                "fit expects a Problem, an (AffineSystem, Simplex) pair, or a dict"
            )
        if not isinstance(simplex, Simplex):
            raise TypeError("second element must be a Simplex")

        self.instance_ = analyze(system, simplex, tol=self.tol)
        self.route_ = self.instance_.route
        pins = problem.pinned_controls if problem is not None else None
        pin_sub = problem.pinned_subdivision if problem is not None else None
        self.controller_ = synthesize(self.instance_, pinned_controls=pins,
                                      pinned_subdivision=pin_sub)
        self.n_features_in_ = simplex.dim
        return self

    def _check_fitted(self):
        if not hasattr(self, "controller_"):
            raise NotFittedError("run fit() before using the controller")

    def predict(self, X):
        """Control values at query states, shape (N, m)."""
        self._check_fitted()
        X = check_state_batch(X, self.n_features_in_)
        out = np.zeros((X.shape[0], self.controller_.control_dim))
        for i, x in enumerate(X):
            _, u = supervisor_select(self.controller_, x, tol=self.tol)
            out[i] = u
        return out

    def transform(self, X):
        """Active piece index per query state, shape (N,)."""
        self._check_fitted()
        X = check_state_batch(X, self.n_features_in_)
        return np.array([supervisor_select(self.controller_, x, tol=self.tol)[0]
                         for x in X])

    def score(self, X=None, y=None):
        """Fraction of verification-grid starts that exit through F_0."""
        self._check_fitted()
        report = verify_rcp(self.instance_, self.controller_,
                            grid_density=self.grid_density,
                            dt=self.dt, t_max=self.t_max,
                            boundary_samples=0)
        if not report.outcomes:
            return 1.0
        good = sum(1 for o in report.outcomes if o.status == "ExitedF0")
        return good / len(report.outcomes)
