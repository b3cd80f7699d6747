"""Weighted-norm scalarization of vector objectives.

A weight vector ``w`` lives on the probability simplex and selects one scalar
sub-problem ``min_x G_p(g(x), w)`` with

    G_p(g, w) = (sum_k w_k |g_k|^p)^(1/p)      for 1 <= p < inf
    G_inf(g, w) = max_k w_k |g_k|               (weighted Chebyshev)
"""

from __future__ import annotations

import itertools
import math

import numpy as np

__all__ = [
    "SIMPLEX_ATOL",
    "check_order",
    "check_weights",
    "evaluate_gp",
    "scalarize",
    "generate_uniform_weights",
]

SIMPLEX_ATOL = 1e-12


def check_order(p):
    """Validate a scalarization order and return it as a float.

    Accepts any real ``p >= 1`` as well as ``numpy.inf``, ``float("inf")``
    and the strings ``"inf"`` / ``"infinity"``.
    """
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        try:
            p = float(p)
        except ValueError:
            raise ValueError(f"p must be a real >= 1 or 'inf', got {p!r}") from None
    if isinstance(p, bool):
        raise ValueError(f"p must be a real >= 1 or 'inf', got {p!r}")
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def check_weights(w, m=None):
    """Validate one weight vector (1-D) or a stack of them (2-D).

    Parameters
    ----------
    w : array_like
        Weight vector(s); the last axis indexes objectives.
    m : int, optional
        Expected number of objectives.

    Returns
    -------
    ndarray of float
    """
    w = np.asarray(w, dtype=float)
    if w.ndim not in (1, 2) or w.shape[-1] < 1:
        raise ValueError(f"weights must be a 1-D or 2-D array, got shape {w.shape}")
    if m is not None and w.shape[-1] != m:
        raise ValueError(f"weights have {w.shape[-1]} components, expected {m}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0.0):
        raise ValueError("weights must be nonnegative")
    dev = np.abs(w.sum(axis=-1) - 1.0)
    if np.any(dev > SIMPLEX_ATOL):
        raise ValueError(
            f"weights must sum to 1 (max deviation {float(np.max(dev)):.3e})"
        )
    return w


def scalarize(objectives, weights, p):
    """Broadcasting core of ``G_p``; reduces over the last axis.

    No validation is done here; callers pass finite arrays and a checked
    ``p``. Finite orders are evaluated as ``M * (sum (a_k/M)^p)^(1/p)`` with
    ``a_k = w_k^(1/p) |g_k|`` and ``M = max_k a_k`` so large ``p`` cannot
    overflow, and zero-weight components drop out exactly.
    """
    absg = np.abs(objectives)
    if p == math.inf:
        return np.max(weights * absg, axis=-1)
    if p == 1.0:
        return np.sum(weights * absg, axis=-1)
    with np.errstate(invalid="ignore"):
        a = np.power(weights, 1.0 / p) * absg
        peak = np.max(a, axis=-1, keepdims=True)
        # NaN/inf must survive to the caller's finiteness check
        safe = np.where(peak == 0.0, 1.0, peak)
        inner = np.sum(np.power(a / safe, p), axis=-1)
        return np.where(peak[..., 0] == 0.0, 0.0, peak[..., 0] * np.power(inner, 1.0 / p))


def evaluate_gp(objective_values, w, p):
    """Weighted ``l_p`` scalarization of a single objective vector.

    Parameters
    ----------
    objective_values : array_like, shape (m,)
        Objective image ``g(x)``.
    w : array_like, shape (m,)
        Point of the probability simplex.
    p : float or "inf"
        Scalarization order, ``p >= 1``.

    Returns
    -------
    float
        Nonnegative scalar value.

    Examples
    --------
    >>> evaluate_gp([3.0, 7.0], [0.5, 0.5], "inf")
    3.5
    """
    g = np.asarray(objective_values, dtype=float)
    if g.ndim != 1:
        raise ValueError(f"objective_values must be 1-D, got shape {g.shape}")
    w = check_weights(w)
    if w.ndim != 1:
        raise ValueError("evaluate_gp takes a single weight vector")
    if g.shape != w.shape:
        raise ValueError(
            f"dimension mismatch: {g.shape[0]} objective values, {w.shape[0]} weights"
        )
    if not np.all(np.isfinite(g)):
        raise ValueError("objective values must be finite")
    return float(scalarize(g, w, check_order(p)))


def _lattice(m, h):
    # compositions of h into m nonnegative parts, via stars and bars
    for bars in itertools.combinations(range(h + m - 1), m - 1):
        parts = []
        prev = -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(h + m - 2 - prev)
        yield parts


def generate_uniform_weights(n, m=2):
    """Deterministic, uniformly spread weight vectors.

    For ``m == 2`` this is the arithmetic grid
    ``w^i = (i * dw, 1 - i * dw)``, ``dw = 1/(n-1)``, ``i = 0..n-1``.
    For ``m > 2`` a simplex-lattice design is returned: all points with
    coordinates in ``{0, 1/H, ..., 1}`` where ``H`` is the smallest integer
    giving at least ``n`` points, so the result may hold more than ``n``
    rows.

    Returns
    -------
    ndarray, shape (n_points, m)
    """
    if isinstance(n, bool) or int(n) != n:
        raise ValueError(f"n must be an integer, got {n!r}")
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    n, m = int(n), int(m)
    if m == 2:
        if n < 2:
            raise ValueError(f"need n >= 2 weight vectors for m = 2, got {n}")
        first = np.arange(n) / (n - 1)
        return np.column_stack([first, 1.0 - first])
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    h = 1
    while math.comb(h + m - 1, m - 1) < n:
        h += 1
    grid = np.array(list(_lattice(m, h)), dtype=float) / h
    # renormalize so each row sums to 1 in floating point as well
    grid[:, -1] = np.maximum(1.0 - grid[:, :-1].sum(axis=1), 0.0)
    return grid
