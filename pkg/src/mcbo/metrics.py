"""Convergence metrics for approximated Pareto fronts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "MetricRecord",
    "MetricTrace",
    "err2",
    "igd",
    "dominated_by",
    "nondominated_fraction",
]


@dataclass(frozen=True)
class MetricRecord:
    iteration: int
    err2: Optional[float] = None
    igd: Optional[float] = None


@dataclass
class MetricTrace:
    """Per-iteration metric values; iterations strictly increase from 0."""

    records: List[MetricRecord] = field(default_factory=list)

    def append(self, record):
        expected = self.records[-1].iteration + 1 if self.records else 0
        if record.iteration != expected:
            raise ValueError(f"expected iteration {expected}, got {record.iteration}")
        for name in ("err2", "igd"):
            value = getattr(record, name)
            if value is not None and not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name):
        """Values of one metric as a float array (NaN where not recorded)."""
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records]
        )


def err2(positions, references):
    """Average squared distance between agent ``i`` and the solution of its own sub-problem.

    ``references`` is either an array of positions or a ``ReferenceSolutionSet``;
    rows are matched by index.
    """
    x = np.asarray(positions, dtype=float)
    ref = np.asarray(getattr(references, "positions", references), dtype=float)
    if x.shape != ref.shape:
        raise ValueError(f"positions {x.shape} and references {ref.shape} do not align")
    if len(x) == 0:
        raise ValueError("err2 of an empty ensemble is undefined")
    return float(np.mean(np.sum((x - ref) ** 2, axis=-1)))


def igd(images, reference_front):
    """Inverted generational distance.

    Mean, over the reference points, of the Euclidean distance to the
    closest image::

        IGD = (1/|P*|) sum_{p in P*} min_a |p - a|
    """
    a = np.atleast_2d(np.asarray(images, dtype=float))
    ref = np.atleast_2d(np.asarray(reference_front, dtype=float))
    if a.size == 0 or ref.size == 0:
        raise ValueError("igd needs non-empty image and reference sets")
    if a.shape[1] != ref.shape[1]:
        raise ValueError(f"objective dimensions differ: {a.shape[1]} vs {ref.shape[1]}")
    return float(np.mean(cdist(ref, a).min(axis=1)))


def nondominated_fraction(images, tolerance=0.0):
    """Share of images that no other image beats by more than ``tolerance`` in every objective."""
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    a = np.atleast_2d(np.asarray(images, dtype=float))
    if a.size == 0:
        raise ValueError("nondominated_fraction needs at least one image")
    # dominated[i] iff some j has a[j, k] < a[i, k] - tol for all k
    beats = np.all(a[:, None, :] < a[None, :, :] - tolerance, axis=-1)
    dominated = beats.any(axis=0)
    return float(1.0 - dominated.mean())


def dominated_by(images, challengers, tolerance=0.0):
    """Mask of ``images`` strictly beaten in every objective by some challenger.

    Work is chunked over challengers so dense samples stay memory-bounded.
    """
    a = np.atleast_2d(np.asarray(images, dtype=float))
    c = np.atleast_2d(np.asarray(challengers, dtype=float))
    out = np.zeros(len(a), dtype=bool)
    for start in range(0, len(c), 4096):
        block = c[start:start + 4096]
        out |= np.all(block[:, None, :] < a[None, :, :] - tolerance, axis=-1).any(axis=0)
    return out
