"""scikit-learn style front end for the consensus dynamics."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .problems import Problem, get_problem
from .scalarization import check_weights, generate_uniform_weights
from .solver import SolverConfig, make_rng, run


class MultiObjectiveCBO(BaseEstimator):
    """Approximate a Pareto front with one consensus-driven agent per sub-problem.

    Parameters
    ----------
    n_agents : int, default 100
        Number of agents, equal to the number of weight vectors.
    k_max : int, default 500
        Number of iterations.
    lam : float, default 1.0
        Drift strength towards the consensus point.
    sigma : float, default 4.0
        Strength of the anisotropic noise.
    dt : float, default 0.01
        Step size.
    alpha : float, default 1e5
        Sharpness of the exponential weighting in the consensus point.
    p : float or "inf", default inf
        Scalarization order; ``inf`` is the weighted Chebyshev approach.
    mode : {"plain", "greedy"}, default "plain"
        ``greedy`` keeps a move only when it improves the agent's own
        sub-problem.
    random_state : int, Generator, RandomState or None
        Seed source. An ``int`` in ``[0, 2**64)`` is used as is.

    Attributes
    ----------
    positions_ : ndarray of shape (n_agents, d)
    weights_ : ndarray of shape (n_agents, m)
    objectives_ : ndarray of shape (n_agents, m)
        Images of the final positions, i.e. the front approximation.
    n_iter_ : int
    n_accepted_ : ndarray of shape (n_agents,) or None
        Accepted moves per agent in greedy mode.
    trace_ : list
        Callback return values, ``k_max + 1`` entries.
    """

    def __init__(self, n_agents=100, k_max=500, lam=1.0, sigma=4.0, dt=0.01,
                 alpha=1e5, p=math.inf, mode="plain", random_state=None):
        self.n_agents = n_agents
        self.k_max = k_max
        self.lam = lam
        self.sigma = sigma
        self.dt = dt
        self.alpha = alpha
        self.p = p
        self.mode = mode
        self.random_state = random_state

    def _seed(self):
        rs = self.random_state
        if isinstance(rs, (int, np.integer)) and not isinstance(rs, bool):
            return int(rs)
        if isinstance(rs, np.random.Generator):
            return int(rs.integers(0, 2**63))
        return int(check_random_state(rs).randint(0, 2**31 - 1))

    def fit(self, problem, weights=None, callback=None):
        """Run the dynamics on ``problem`` (a :class:`Problem` or its name).

        ``weights`` defaults to the uniform grid on the simplex; ``callback``
        is called with the ensemble after initialization and every step.
        """
        if isinstance(problem, str):
            problem = get_problem(problem)
        if not isinstance(problem, Problem):
            raise TypeError(f"expected a Problem or a problem name, got {type(problem).__name__}")
        config = SolverConfig(
            n_agents=self.n_agents, k_max=self.k_max, lam=self.lam, sigma=self.sigma,
            dt=self.dt, alpha=self.alpha, p=self.p, mode=self.mode, seed=self._seed(),
        )
        if weights is None:
            weights = generate_uniform_weights(config.n_agents, problem.m)
        result = run(problem, config, weights, make_rng(config.seed), callback)
        ens = result.ensemble
        self.positions_ = ens.positions
        self.weights_ = ens.weights
        self.objectives_ = ens.objectives
        self.n_iter_ = ens.iteration
        self.n_accepted_ = result.n_accepted
        self.trace_ = result.trace
        self.seed_ = config.seed
        return self

    def predict(self, weights):
        """Position of the agent whose weight vector is closest to each query."""
        check_is_fitted(self, "positions_")
        w = check_weights(np.atleast_2d(weights), self.weights_.shape[1])
        dist = np.linalg.norm(w[:, None, :] - self.weights_[None, :, :], axis=-1)
        return self.positions_[np.argmin(dist, axis=1)]
