"""Multi-objective consensus-based optimization dynamics.

Agent ``i`` is tied to the weight vector ``w^i`` and drifts towards the
consensus point of its own sub-problem,

    x_alpha(w) = sum_j X_j exp(-alpha G_p(g(X_j), w)) / Z,

with anisotropic noise proportional to the per-coordinate distance to it.
All agents contribute to every consensus point, so one step costs ``N``
objective evaluations and ``N^2`` scalarizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

import numpy as np

from .problems import clip_to_domain, sample_uniform
from .scalarization import check_order, check_weights, generate_uniform_weights, scalarize

__all__ = [
    "MODES",
    "SolverConfig",
    "Ensemble",
    "SolverError",
    "SolverResult",
    "make_rng",
    "init_ensemble",
    "scalarized_values",
    "consensus_coefficients",
    "consensus_points",
    "propose",
    "step_plain",
    "step_greedy",
    "greedy_update",
    "step",
    "run",
]

MODES = ("plain", "greedy")


class SolverError(RuntimeError):
    """Failure inside the iteration loop; ``iteration`` is the failing step."""

    def __init__(self, message, iteration=None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverConfig:
    """Scalar parameters of the dynamics.

    ``lam`` is the drift strength (``lambda``), ``sigma`` the noise strength,
    ``dt`` the step size and ``alpha`` the Laplace sharpness. Defaults are
    ``lam=1``, ``dt=0.01``, ``alpha=1e5``, ``p=inf``.
    """

    n_agents: int = 100
    k_max: int = 500
    lam: float = 1.0
    sigma: float = 4.0
    dt: float = 0.01
    alpha: float = 1e5
    p: float = math.inf
    mode: str = "plain"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p", check_order(self.p))
        for name in ("n_agents", "k_max", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("lam", "sigma", "dt", "alpha"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.lam <= 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.lam * self.dt > 1.0:
            raise ValueError(f"lambda * dt must be <= 1, got {self.lam * self.dt}")
        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2, got {self.n_agents}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class Ensemble:
    """Agent positions paired with their weights, plus cached images ``g(X)``."""

    positions: np.ndarray
    weights: np.ndarray
    objectives: np.ndarray
    iteration: int = 0

    def __len__(self):
        return len(self.positions)


@dataclass
class SolverResult:
    ensemble: Ensemble
    trace: list = field(default_factory=list)
    n_accepted: Optional[np.ndarray] = None


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def init_ensemble(problem, config, weights=None, rng=None):
    """Uniform initial positions on the domain, weights attached one-to-one."""
    if weights is None:
        weights = generate_uniform_weights(config.n_agents, problem.m)
    weights = check_weights(np.atleast_2d(weights), problem.m)
    if len(weights) != config.n_agents:
        raise ValueError(f"got {len(weights)} weight vectors for {config.n_agents} agents")
    if rng is None:
        rng = make_rng(config.seed)
    positions = sample_uniform(problem.domain, config.n_agents, rng)
    return Ensemble(positions, weights, problem.objective(positions), 0)


def scalarized_values(ensemble, p):
    """Each agent's value on its own sub-problem, ``G_p(g(X^i), w^i)``."""
    return scalarize(ensemble.objectives, ensemble.weights, p)


def consensus_coefficients(ensemble, alpha, p):
    """Row-stochastic matrix ``C[i, j]`` of agent ``j``'s share in consensus point ``i``.

    Exponents are shifted by the row minimum before exponentiation so the
    best agent gets coefficient 1 prior to normalization and nothing
    underflows to an all-zero row.
    """
    values = scalarize(ensemble.objectives[None, :, :], ensemble.weights[:, None, :], p)
    bad = ~np.isfinite(values)
    if bad.any():
        agent = int(np.nonzero(bad.any(axis=0))[0][0])
        raise SolverError(f"non-finite scalarized value for agent {agent}")
    coef = np.exp(-alpha * (values - values.min(axis=1, keepdims=True)))
    return coef / coef.sum(axis=1, keepdims=True)


def consensus_points(ensemble, alpha, p):
    """Consensus point of every sub-problem, shape ``(N, d)``.

    Evaluated as offsets from the row's best agent, so a point that carries
    all the weight is reproduced exactly and coincident agents stay put.
    """
    coef = consensus_coefficients(ensemble, alpha, p)
    x = ensemble.positions
    anchor = x[np.argmax(coef, axis=1)]
    return anchor + np.einsum("ij,ijl->il", coef, x[None, :, :] - anchor[:, None, :])


def propose(ensemble, config, noise):
    """Unclipped Euler-Maruyama proposal from the current snapshot."""
    x = ensemble.positions
    drift = consensus_points(ensemble, config.alpha, config.p) - x
    return x + config.lam * config.dt * drift + config.sigma * math.sqrt(config.dt) * drift * noise


def _draw(ensemble, rng, noise):
    shape = ensemble.positions.shape
    if noise is None:
        # agent-major, coordinate-minor
        return rng.standard_normal(shape)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != shape or not np.all(np.isfinite(noise)):
        raise ValueError(f"noise must be a finite array of shape {shape}")
    return noise


def step_plain(ensemble, problem, config, rng=None, noise=None):
    """One synchronous update of all agents, clipped to the domain.

    ``noise`` may inject the ``(N, d)`` standard normal draws; otherwise they
    come from ``rng``.
    """
    noise = _draw(ensemble, rng, noise)
    x = clip_to_domain(problem.domain, propose(ensemble, config, noise))
    return Ensemble(x, ensemble.weights, problem.objective(x), ensemble.iteration + 1)


def step_greedy(ensemble, problem, config, rng=None, noise=None):
    """Like :func:`step_plain`, but an agent only moves if the clipped
    candidate strictly lowers its own scalarized value."""
    return greedy_update(ensemble, problem, config, rng, noise)[0]


def greedy_update(ensemble, problem, config, rng=None, noise=None):
    """Greedy step returning ``(new_ensemble, accepted_mask)``."""
    noise = _draw(ensemble, rng, noise)
    cand = clip_to_domain(problem.domain, propose(ensemble, config, noise))
    cand_obj = problem.objective(cand)
    accept = scalarize(cand_obj, ensemble.weights, config.p) < scalarized_values(ensemble, config.p)
    x = np.where(accept[:, None], cand, ensemble.positions)
    obj = np.where(accept[:, None], cand_obj, ensemble.objectives)
    return replace(ensemble, positions=x, objectives=obj, iteration=ensemble.iteration + 1), accept


def step(ensemble, problem, config, rng=None, noise=None):
    if config.mode == "greedy":
        return step_greedy(ensemble, problem, config, rng, noise)
    return step_plain(ensemble, problem, config, rng, noise)


def run(
    problem,
    config: SolverConfig,
    weights=None,
    rng: Optional[np.random.Generator] = None,
    observer: Optional[Callable[[Ensemble], Any]] = None,
) -> SolverResult:
    """Iterate the configured update rule ``k_max`` times.

    ``observer`` is called on the initial ensemble and after every step; its
    return values form the trace, so the trace has ``k_max + 1`` entries.
    ``rng`` defaults to a generator seeded with ``config.seed``.
    """
    if rng is None:
        rng = make_rng(config.seed)
    ens = init_ensemble(problem, config, weights, rng)
    trace = [observer(ens) if observer is not None else None]
    accepted = np.zeros(config.n_agents, dtype=int) if config.mode == "greedy" else None
    for k in range(config.k_max):
        try:
            if config.mode == "greedy":
                ens, acc = greedy_update(ens, problem, config, rng)
                accepted += acc
            else:
                ens = step_plain(ens, problem, config, rng)
        except SolverError as exc:
            raise SolverError(str(exc), k) from exc
        except (ValueError, FloatingPointError, ArithmeticError) as exc:
            raise SolverError(str(exc), k) from exc
        trace.append(observer(ens) if observer is not None else None)
    return SolverResult(ens, trace, accepted)
