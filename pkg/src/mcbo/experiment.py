"""Repeated seeded runs, aggregation and CSV output.

Config files are flat ``key = value`` text, one key per line, ``#`` starts a
comment. Recognized keys::

    problem     problem1 | deb2dk | uf4 | uf7          (required)
    n_agents    number of agents N                      (required)
    k_max       number of iterations                    (required)
    seed        master seed, 0 <= seed < 2**64          (required)
    d           input dimension (deb2dk, uf4, uf7)
    lambda, sigma, dt, alpha, p, mode
    runs        repetitions (default 1)
    metrics     comma list of err2, igd
    out         output directory (default "results")
    oracle_budget, reference_size

Run ``r`` uses seed ``master_seed XOR (r * 0x9E3779B97F4A7C15) mod 2**64``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, fields
from typing import Dict, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from .metrics import MetricRecord, MetricTrace, err2, igd
from .problems import get_problem, oracle_reference_set, reference_front
from .scalarization import check_order, generate_uniform_weights
from .solver import SolverConfig, make_rng, run

__all__ = [
    "SEED_MIX",
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "AggregateSummary",
    "run_seed",
    "parse_config",
    "format_config",
    "run_experiment",
    "write_outputs",
]

SEED_MIX = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
METRICS = ("err2", "igd")
MAX_ORACLE_DIM = 3


class ConfigError(ValueError):
    pass


def run_seed(master_seed, run_index):
    return (master_seed ^ (run_index * SEED_MIX)) & _MASK64


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    n_agents: int
    k_max: int
    seed: int
    d: Optional[int] = None
    lam: float = 1.0
    sigma: Optional[float] = None
    dt: float = 0.01
    alpha: float = 1e5
    p: float = math.inf
    mode: str = "plain"
    runs: int = 1
    metrics: Tuple[str, ...] = ()
    out: str = "results"
    oracle_budget: int = 10_000
    reference_size: int = 1000

    def __post_init__(self):
        try:
            prob = get_problem(self.problem, self.d)
        except ValueError as exc:
            raise ValueError(f"problem: {exc}") from None
        try:
            object.__setattr__(self, "p", check_order(self.p))
        except ValueError as exc:
            raise ValueError(f"p: {exc}") from None
        object.__setattr__(self, "problem", prob.name)
        object.__setattr__(self, "d", prob.d)
        if self.sigma is None:
            # default regime: sigma = 4 on the planar problems, 10 in higher dimension
            object.__setattr__(self, "sigma", 4.0 if prob.d == 2 else 10.0)
        if not self.metrics:
            object.__setattr__(self, "metrics", ("err2",) if prob.d <= MAX_ORACLE_DIM else ("igd",))
        metrics = tuple(dict.fromkeys(m.strip().lower() for m in self.metrics))
        for m in metrics:
            if m not in METRICS:
                raise ValueError(f"metrics: unknown metric {m!r}")
        if "err2" in metrics and prob.d > MAX_ORACLE_DIM:
            raise ValueError(f"metrics: err2 needs an oracle ground truth, only available for d <= {MAX_ORACLE_DIM}")
        object.__setattr__(self, "metrics", metrics)
        for name in ("runs", "oracle_budget", "reference_size"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        self.solver_config()  # enforce solver invariants eagerly

    def solver_config(self, seed=None):
        return SolverConfig(
            n_agents=self.n_agents, k_max=self.k_max, lam=self.lam, sigma=self.sigma,
            dt=self.dt, alpha=self.alpha, p=self.p, mode=self.mode,
            seed=self.seed if seed is None else seed,
        )

    def make_problem(self):
        return get_problem(self.problem, self.d)


@dataclass
class RunRecord:
    run: int
    seed: int
    trace: MetricTrace
    positions: np.ndarray
    weights: np.ndarray
    images: np.ndarray


@dataclass
class AggregateSummary:
    """Per-iteration mean of each requested metric over runs."""

    iterations: np.ndarray
    means: Dict[str, np.ndarray] = field(default_factory=dict)


# -- config text --------------------------------------------------------------

_KEYS = {
    "problem": ("problem", str),
    "d": ("d", int),
    "n_agents": ("n_agents", int),
    "k_max": ("k_max", int),
    "seed": ("seed", int),
    "lambda": ("lam", float),
    "sigma": ("sigma", float),
    "dt": ("dt", float),
    "alpha": ("alpha", float),
    "p": ("p", str),
    "mode": ("mode", str),
    "runs": ("runs", int),
    "metrics": ("metrics", str),
    "out": ("out", str),
    "oracle_budget": ("oracle_budget", int),
    "reference_size": ("reference_size", int),
}
_REQUIRED = ("problem", "n_agents", "k_max", "seed")
_FIELD_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}


def _convert(key, conv, raw, lineno):
    try:
        if conv is int:
            value = int(raw, 0)
        elif conv is float:
            value = float(raw)
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: cannot parse {raw!r}") from None
    if key == "metrics":
        value = tuple(v for v in (s.strip() for s in raw.split(",")) if v)
    return value


def parse_config(text, overrides=None):
    """Parse and validate an experiment config.

    ``overrides`` maps config keys (as in the file) to already-typed values
    and wins over the file content.
    """
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first set on line {lines[key]})")
        if not raw:
            raise ConfigError(f"line {lineno}: {key}: empty value")
        values[key] = _convert(key, _KEYS[key][1], raw, lineno)
        lines[key] = lineno
    for key, value in (overrides or {}).items():
        if key not in _KEYS:
            raise ConfigError(f"unknown override {key!r}")
        if value is not None:
            values[key] = value
            lines[key] = "<override>"
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    try:
        return ExperimentConfig(**{_KEYS[k][0]: v for k, v in values.items()})
    except ValueError as exc:
        key = _blame(str(exc))
        where = f"line {lines[key]}: " if key in lines else ""
        raise ConfigError(f"{where}{exc}") from None


def _blame(message):
    head = message.split(" ", 1)[0].rstrip(":")
    if head in _KEYS:
        return head
    return _FIELD_TO_KEY.get(head, head)


def _fmt(value):
    if isinstance(value, float):
        return "inf" if value == math.inf else repr(value)
    if isinstance(value, tuple):
        return ",".join(value)
    return str(value)


def format_config(config):
    """Render a config in the file format; ``parse_config`` inverts it."""
    out = []
    for f in fields(config):
        out.append(f"{_FIELD_TO_KEY[f.name]} = {_fmt(getattr(config, f.name))}")
    return "\n".join(out) + "\n"


# -- execution ----------------------------------------------------------------


def _references(config, problem):
    refs = {}
    if "err2" in config.metrics:
        weights = generate_uniform_weights(config.n_agents, problem.m)
        refs["err2"] = oracle_reference_set(problem, weights, config.p, config.oracle_budget)
    if "igd" in config.metrics:
        if problem.front is not None:
            refs["igd"] = reference_front(problem, config.reference_size)
        else:
            # the Chebyshev order reaches every weak Pareto point
            weights = generate_uniform_weights(config.reference_size, problem.m)
            refs["igd"] = oracle_reference_set(problem, weights, math.inf, config.oracle_budget).images
    return refs


def _single_run(config, problem, refs, run_index):
    seed = run_seed(config.seed, run_index)
    trace = MetricTrace()

    def observe(ens):
        rec = MetricRecord(
            ens.iteration,
            err2(ens.positions, refs["err2"]) if "err2" in refs else None,
            igd(ens.objectives, refs["igd"]) if "igd" in refs else None,
        )
        trace.append(rec)

    result = run(problem, config.solver_config(seed), rng=make_rng(seed), observer=observe)
    ens = result.ensemble
    return RunRecord(run_index, seed, trace, ens.positions, ens.weights, ens.objectives)


def run_experiment(config, n_jobs=1):
    """Execute ``config.runs`` independent runs and average their traces.

    Runs are independent given their seeds, so ``n_jobs > 1`` yields exactly
    the same records as a sequential execution.
    """
    problem = config.make_problem()
    refs = _references(config, problem)

    def guarded(r):
        try:
            return _single_run(config, problem, refs, r)
        except Exception as exc:
            raise RuntimeError(f"run {r} failed: {exc}") from exc

    if n_jobs == 1:
        records = [guarded(r) for r in range(config.runs)]
    else:
        records = Parallel(n_jobs=n_jobs)(delayed(guarded)(r) for r in range(config.runs))
    iterations = np.arange(config.k_max + 1)
    summary = AggregateSummary(iterations)
    for name in config.metrics:
        summary.means[name] = np.mean([rec.trace.column(name) for rec in records], axis=0)
    return records, summary


def _num(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_outputs(records, summary, config, out_dir=None):
    """Write trace.csv, final_positions.csv, summary.csv and manifest.txt.

    Returns the list of written paths.
    """
    out_dir = out_dir or config.out
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc.strerror or exc}") from exc
    paths = [os.path.join(out_dir, n) for n in ("trace.csv", "final_positions.csv", "summary.csv", "manifest.txt")]

    _write_csv(
        paths[0], ["run", "iter", "err2", "igd"],
        ([rec.run, r.iteration, _num(r.err2), _num(r.igd)] for rec in records for r in rec.trace),
    )

    m = records[0].weights.shape[1] if records else 0
    d = records[0].positions.shape[1] if records else config.d
    header = ["run", "agent"] + [f"w_{k + 1}" for k in range(m)] + [f"x_{k + 1}" for k in range(d)] + [f"g_{k + 1}" for k in range(m)]
    _write_csv(
        paths[1], header,
        (
            [rec.run, i] + [_num(v) for v in np.concatenate([rec.weights[i], rec.positions[i], rec.images[i]])]
            for rec in records for i in range(len(rec.positions))
        ),
    )

    _write_csv(
        paths[2], ["iter", "err2", "igd"],
        (
            [int(k)] + [_num(summary.means[name][j]) if name in summary.means else "" for name in METRICS]
            for j, k in enumerate(summary.iterations)
        ),
    )

    lines = [
        "# mcbo experiment manifest; parse with `mcbo run manifest.txt`",
        f"# run r uses seed = seed XOR (r * {SEED_MIX:#x}) mod 2**64",
    ]
    lines += [f"# run {rec.run} seed = {rec.seed}" for rec in records]
    try:
        with open(paths[3], "w") as fh:
            fh.write("\n".join(lines) + "\n" + format_config(config))
    except OSError as exc:
        raise OSError(f"cannot write {paths[3]}: {exc.strerror or exc}") from exc
    return paths
