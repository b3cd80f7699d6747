"""Bi-objective benchmark problems, box domains and a brute-force oracle.

All objective functions are vectorized: they take an array of shape
``(..., d)`` and return shape ``(..., m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .scalarization import check_order, check_weights, scalarize

__all__ = [
    "BoxDomain",
    "Problem",
    "ReferenceSolutionSet",
    "PROBLEM_NAMES",
    "get_problem",
    "problem1",
    "deb2dk",
    "uf4",
    "uf7",
    "eval_objectives",
    "clip_to_domain",
    "sample_uniform",
    "subproblem_oracle",
    "oracle_reference_set",
    "reference_front",
]


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned hypercube ``[lower_1, upper_1] x ... x [lower_d, upper_d]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).reshape(-1)
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or lower.size == 0:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("domain bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("lower must be strictly smaller than upper in every coordinate")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def d(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.lower) & (x <= self.upper)))


@dataclass(frozen=True)
class Problem:
    """A vector objective ``g: R^d -> R^m`` on a box search domain.

    Attributes
    ----------
    name : str
    d, m : int
        Input and output dimensions.
    domain : BoxDomain
    objective : callable
        Vectorized map ``(..., d) -> (..., m)``.
    front : callable, optional
        Vectorized map ``t in [0, 1] -> (m,)`` tracing the analytic weak
        Pareto front, with ``t`` equispaced along the first objective.
    """

    name: str
    d: int
    m: int
    domain: BoxDomain
    objective: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    front: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.domain.d != self.d:
            raise ValueError(f"domain has dimension {self.domain.d}, problem has d={self.d}")

    def __call__(self, x):
        return eval_objectives(self, x)


@dataclass(frozen=True)
class ReferenceSolutionSet:
    """Ground-truth sub-problem solutions, aligned row by row."""

    weights: np.ndarray
    positions: np.ndarray
    images: np.ndarray
    p: float = math.inf

    def __len__(self):
        return len(self.weights)


# -- objective formulas -------------------------------------------------------


def _problem1(x):
    x1, x2 = x[..., 0], x[..., 1]
    g1 = 5.0 * (x1 - 0.1) ** 2 + (x2 - 0.1) ** 2
    g2 = (x1 - 0.9) ** 2 + 5.0 * (x2 - 0.9) ** 2
    return np.stack([g1, g2], axis=-1)


def _deb2dk(x, k=1):
    d = x.shape[-1]
    x1 = x[..., 0]
    g = 1.0 + 9.0 / (d - 1) * np.sum(x[..., 1:], axis=-1)
    r = 5.0 + 10.0 * (x1 - 0.5) ** 2 + np.cos(2.0 * k * np.pi * x1) / k
    f1 = g * r * np.sin(0.5 * np.pi * x1)
    f2 = g * r * np.cos(0.5 * np.pi * x1)
    return np.stack([f1, f2], axis=-1)


def _uf_residuals(x):
    d = x.shape[-1]
    j = np.arange(2, d + 1)
    y = x[..., 1:] - np.sin(6.0 * np.pi * x[..., :1] + j * np.pi / d)
    odd = j % 2 == 1
    return y, odd


def _uf4(x):
    y, odd = _uf_residuals(x)
    h = np.abs(y) / (1.0 + np.exp(2.0 * np.abs(y)))
    x1 = x[..., 0]
    f1 = x1 + 2.0 * np.mean(h[..., odd], axis=-1)
    f2 = 1.0 - x1**2 + 2.0 * np.mean(h[..., ~odd], axis=-1)
    return np.stack([f1, f2], axis=-1)


def _uf7(x):
    y, odd = _uf_residuals(x)
    y2 = y**2
    root = np.power(np.abs(x[..., 0]), 0.2) * np.sign(x[..., 0])
    f1 = root + 2.0 * np.mean(y2[..., odd], axis=-1)
    f2 = 1.0 - root + 2.0 * np.mean(y2[..., ~odd], axis=-1)
    return np.stack([f1, f2], axis=-1)


def problem1():
    """Two convex quadratics on ``[0, 1]^2`` with minima at (0.1, 0.1) and (0.9, 0.9)."""
    return Problem("problem1", 2, 2, BoxDomain([0.0, 0.0], [1.0, 1.0]), _problem1)


def deb2dk(d=2, k=1):
    """DEB2DK knee problem on ``[0, 1]^d``."""
    if d < 2:
        raise ValueError(f"deb2dk needs d >= 2, got {d}")
    return Problem(
        "deb2dk", d, 2, BoxDomain(np.zeros(d), np.ones(d)), lambda x: _deb2dk(x, k)
    )


def _uf_domain(d, bound):
    lower = np.full(d, -bound)
    upper = np.full(d, bound)
    lower[0], upper[0] = 0.0, 1.0
    return BoxDomain(lower, upper)


def uf4(d=5):
    """CEC 2009 UF4; concave front ``f2 = 1 - f1^2``."""
    if d < 3:
        raise ValueError(f"uf4 needs d >= 3, got {d}")
    return Problem(
        "uf4", d, 2, _uf_domain(d, 2.0), _uf4,
        front=lambda t: np.stack([t, 1.0 - t**2], axis=-1),
    )


def uf7(d=5):
    """CEC 2009 UF7; linear front ``f2 = 1 - f1``."""
    if d < 3:
        raise ValueError(f"uf7 needs d >= 3, got {d}")
    return Problem(
        "uf7", d, 2, _uf_domain(d, 1.0), _uf7,
        front=lambda t: np.stack([t, 1.0 - t], axis=-1),
    )


_FACTORIES = {"problem1": problem1, "deb2dk": deb2dk, "uf4": uf4, "uf7": uf7}
PROBLEM_NAMES = tuple(_FACTORIES)


def get_problem(name, d=None):
    """Look up a built-in problem by name; ``d`` is ignored only for problem1."""
    key = name.strip().lower()
    if key not in _FACTORIES:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    if key == "problem1":
        if d not in (None, 2):
            raise ValueError(f"problem1 is fixed at d=2, got d={d}")
        return problem1()
    return _FACTORIES[key]() if d is None else _FACTORIES[key](int(d))


# -- domain helpers -----------------------------------------------------------


def eval_objectives(problem, x):
    """Evaluate ``g`` at one point ``(d,)`` or a batch ``(n, d)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != problem.d:
        raise ValueError(f"{problem.name} expects inputs of dimension {problem.d}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("objective inputs must be finite")
    return problem.objective(x)


def clip_to_domain(domain, x):
    """Project ``x`` coordinate-wise onto the box."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != domain.d:
        raise ValueError(f"point has dimension {x.shape[-1]}, domain has {domain.d}")
    return np.minimum(domain.upper, np.maximum(domain.lower, x))


def sample_uniform(domain, count, rng):
    """Draw ``count`` independent uniform points from the box, shape ``(count, d)``."""
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    u = rng.random((int(count), domain.d))
    return domain.lower + u * domain.width


# -- brute-force oracle -------------------------------------------------------

MIN_ORACLE_BUDGET = 1000


def _oracle_grid(problem, budget):
    if isinstance(budget, bool) or int(budget) != budget or budget < MIN_ORACLE_BUDGET:
        raise ValueError(f"oracle budget must be an integer >= {MIN_ORACLE_BUDGET}, got {budget!r}")
    per_axis = math.ceil(int(budget) ** (1.0 / problem.d) - 1e-9)
    if per_axis < 2:
        raise ValueError(f"budget {budget} too small for a grid in d={problem.d}")
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(problem.domain.lower, problem.domain.upper)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, problem.d)
    return mesh, problem.objective(mesh), problem.domain.width / (per_axis - 1)


def _directions(d):
    # coordinate and diagonal moves; diagonals let the search slide along kinks of max-type objectives
    grid = np.stack(np.meshgrid(*([[-1.0, 0.0, 1.0]] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return grid[np.any(grid != 0.0, axis=1)]


def _pattern_search(problem, w, p, x, fx, step, max_iter=200):
    dirs = _directions(problem.d)
    floor = 1e-15 * float(np.max(problem.domain.width))
    for _ in range(max_iter):
        trial = clip_to_domain(problem.domain, x + dirs * step)
        ft = scalarize(problem.objective(trial), w, p)
        best = int(np.argmin(ft))
        if ft[best] < fx:
            x, fx = trial[best], ft[best]
        else:
            step = step * 0.5
            if np.max(step) < floor:
                break
    return x, fx


def _polish(problem, w, p, x, fx):
    bounds = list(zip(problem.domain.lower, problem.domain.upper))
    opts = {"ftol": 1e-15, "maxiter": 500}
    if p == math.inf:
        # epigraph form: min t  s.t.  t >= w_k |g_k(x)|
        def cons(z):
            return z[-1] - w * np.abs(problem.objective(z[:-1]))

        z0 = np.append(x, fx)
        res = minimize(
            lambda z: z[-1], z0, method="SLSQP", bounds=bounds + [(None, None)],
            constraints=[{"type": "ineq", "fun": cons}], options=opts,
        )
        cand = res.x[:-1]
    else:
        res = minimize(
            lambda z: float(scalarize(problem.objective(z), w, p)), x,
            method="SLSQP", bounds=bounds, options=opts,
        )
        cand = res.x
    if not np.all(np.isfinite(cand)):
        return x, fx
    cand = clip_to_domain(problem.domain, cand)
    fc = float(scalarize(problem.objective(cand), w, p))
    return (cand, fc) if fc < fx else (x, fx)


def _oracle_from_grid(problem, w, p, grid):
    mesh, images, cell = grid
    values = scalarize(images, w, p)
    i = int(np.argmin(values))
    x, fx = _pattern_search(problem, w, p, mesh[i], values[i], cell.copy())
    x, fx = _polish(problem, w, p, x, fx)
    # a second pattern pass cleans up whatever the local solver left behind
    x, fx = _pattern_search(problem, w, p, x, fx, cell * 1e-3)
    return x


def subproblem_oracle(problem, w, p=math.inf, budget=10_000):
    """Approximate global minimizer of ``G_p(g(x), w)`` over the domain.

    A dense uniform grid with ``ceil(budget^(1/d))`` points per axis locates
    the basin; a pattern search over coordinate and diagonal moves, starting
    at one grid cell and halving on failure, refines it, followed by an SLSQP
    polish (epigraph form for ``p = inf``). Meant for small ``d``.

    Returns
    -------
    ndarray, shape (d,)
    """
    w = check_weights(w, problem.m)
    if w.ndim != 1:
        raise ValueError("subproblem_oracle takes a single weight vector")
    return _oracle_from_grid(problem, w, check_order(p), _oracle_grid(problem, budget))


def oracle_reference_set(problem, weights, p=math.inf, budget=10_000):
    """Solve every sub-problem in ``weights`` with the oracle (grid shared)."""
    weights = check_weights(np.atleast_2d(weights), problem.m)
    p = check_order(p)
    grid = _oracle_grid(problem, budget)
    positions = np.array([_oracle_from_grid(problem, w, p, grid) for w in weights])
    return ReferenceSolutionSet(weights, positions, problem.objective(positions), p)


def reference_front(problem, count, reference=None):
    """Discretized weak Pareto front in objective space, shape ``(n, m)``.

    Uses the analytic front (``count`` points, equispaced parameter) when the
    problem has one, otherwise the images of ``reference``.
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    if problem.front is not None:
        t = np.linspace(0.0, 1.0, int(count)) if count > 1 else np.array([0.5])
        return problem.front(t)
    if reference is not None:
        return np.asarray(reference.images, dtype=float)
    raise ValueError(f"{problem.name} has no analytic front; supply a ReferenceSolutionSet")
