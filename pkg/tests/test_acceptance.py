"""Acceptance criteria for the solver at its default settings.

Each test prints one PASS/FAIL line into the terminal summary. Tolerances
and thresholds are fixed here and never tuned per run.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from mcbo.experiment import ExperimentConfig, parse_config, run_experiment, write_outputs
from mcbo.metrics import dominated_by, err2, igd, nondominated_fraction
from mcbo.problems import (
    BoxDomain,
    deb2dk,
    eval_objectives,
    oracle_reference_set,
    problem1,
    sample_uniform,
    subproblem_oracle,
    uf7,
)
from mcbo.scalarization import evaluate_gp, generate_uniform_weights
from mcbo.solver import Ensemble, SolverConfig, consensus_points, run, scalarized_values, step_plain

pytestmark = pytest.mark.acceptance

ALPHAS = (1e2, 1e3, 1e4, 1e5)


def _log_distance(values, positions, best, alpha):
    """log |x_alpha - X_best| evaluated without underflow.

    All coefficients are rescaled by the runner-up's, so the log of the
    distance stays finite even when exp(-alpha * gap) is far below the
    smallest double.
    """
    gaps = values - values[best]
    others = np.arange(len(values)) != best
    runner_gap = gaps[others].min()
    scaled = np.exp(-alpha * (gaps[others] - runner_gap))
    offset = scaled @ (positions[others] - positions[best])
    log_z = np.log1p(np.exp(-alpha * gaps[others]).sum())
    return -alpha * runner_gap + np.log(np.linalg.norm(offset)) - log_z


def test_c1_laplace_limit(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    prob = problem1()
    checked = failures = 0
    worst = 0.0
    for _ in range(100):
        x = rng.random((50, 2))
        w = rng.dirichlet([1.0, 1.0])
        ens = Ensemble(x, np.tile(w, (50, 1)), eval_objectives(prob, x))
        values = scalarized_values(ens, math.inf)
        order = np.argsort(values)
        if values[order[1]] - values[order[0]] <= 1e-3:
            continue
        checked += 1
        best = order[0]
        logs = [_log_distance(values, x, best, a) for a in ALPHAS]
        lib = [np.linalg.norm(consensus_points(ens, a, math.inf)[0] - x[best]) for a in ALPHAS]
        strictly = all(b < a for a, b in zip(logs, logs[1:]))
        # the library value may hit exactly 0.0 once the true distance is below the double range
        lib_ok = all(b < a or b == 0.0 for a, b in zip(lib, lib[1:]))
        worst = max(worst, lib[-1])
        if not (strictly and lib_ok and lib[-1] < 1e-6 and logs[-1] < math.log(1e-6)):
            failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and checked > 0 and elapsed < 5.0
    acceptance_report(
        "C1 Laplace limit",
        ok,
        f"{checked} ensembles with gap > 1e-3, {failures} failing, max distance at 1e5 = {worst:.2e}, {elapsed:.2f}s",
    )
    assert ok


def test_c2_greedy_monotonicity(acceptance_report):
    start = time.perf_counter()
    prob = deb2dk(2)
    violations = 0
    for seed in range(10):
        history = []
        cfg = SolverConfig(n_agents=100, k_max=500, sigma=4.0, mode="greedy", p=math.inf, seed=seed)
        run(prob, cfg, observer=lambda e: history.append(scalarized_values(e, cfg.p)))
        h = np.array(history)
        assert h.shape == (501, 100)
        violations += int(np.sum(np.diff(h, axis=0) > 0.0))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 30.0
    acceptance_report("C2 greedy monotonicity", ok, f"{violations} increases over 10 seeds x 500 steps, {elapsed:.1f}s")
    assert ok


def _chebyshev_problem1(w):
    """Closed-form p = inf solution of Problem 1: the weighted-sum Pareto curve where w1 g1 = w2 g2."""
    if w[1] == 0:
        return np.array([0.1, 0.1])
    if w[0] == 0:
        return np.array([0.9, 0.9])

    def curve(t):
        return np.array([(t * 1.0 + (1 - t) * 1.8) / (10 * t + 2 * (1 - t)), (t * 0.2 + (1 - t) * 9.0) / (2 * t + 10 * (1 - t))])

    def gap(t):
        g = eval_objectives(problem1(), curve(t))
        return w[0] * g[0] - w[1] * g[1]

    return curve(brentq(gap, 0.0, 1.0, xtol=1e-15))


def _problem1_config(n_agents, runs):
    return ExperimentConfig(
        problem="problem1", n_agents=n_agents, k_max=500, seed=0, lam=1.0, sigma=4.0, dt=0.01,
        alpha=1e5, p=math.inf, mode="plain", runs=runs, metrics=("err2",),
    )


def test_c3_problem1_err2_decay(acceptance_report):
    start = time.perf_counter()
    weights = generate_uniform_weights(100)
    ref = oracle_reference_set(problem1(), weights, math.inf)
    oracle_err = max(np.linalg.norm(x - _chebyshev_problem1(w)) for w, x in zip(weights, ref.positions))
    _, summary = run_experiment(_problem1_config(100, 20))
    curve = summary.means["err2"]
    ratio = curve[-1] / curve[0]
    elapsed = time.perf_counter() - start
    ok = oracle_err <= 1e-6 and ratio <= 1 / 50 and elapsed < 120.0
    acceptance_report(
        "C3 Err2 decay, problem1 N=100",
        ok,
        f"Err2 {curve[0]:.3e} -> {curve[-1]:.3e} (ratio {ratio:.4f} <= 0.02), oracle error {oracle_err:.1e}, {elapsed:.1f}s",
    )
    assert ok


def test_c4_population_size(acceptance_report):
    start = time.perf_counter()
    final = {}
    for n in (100, 500):
        _, summary = run_experiment(_problem1_config(n, 5))
        final[n] = summary.means["err2"][-1]
    elapsed = time.perf_counter() - start
    ok = final[500] <= 1.2 * final[100] and elapsed < 300.0
    acceptance_report(
        "C4 population size",
        ok,
        f"final Err2 N=500 {final[500]:.3e} vs N=100 {final[100]:.3e} (slack 20%), {elapsed:.1f}s",
    )
    assert ok


def test_c5_uf_igd_decay(acceptance_report):
    start = time.perf_counter()
    ratios = {}
    for name, limit in (("uf7", 1 / 5), ("uf4", 1 / 3)):
        cfg = ExperimentConfig(
            problem=name, d=5, n_agents=300, k_max=500, seed=0, sigma=10.0, mode="greedy",
            p=math.inf, runs=5, metrics=("igd",), reference_size=1000,
        )
        _, summary = run_experiment(cfg)
        curve = summary.means["igd"]
        ratios[name] = (curve[-1] / curve[0], limit, curve[0], curve[-1])
    elapsed = time.perf_counter() - start
    ok = all(r <= lim for r, lim, _, _ in ratios.values()) and elapsed < 600.0
    detail = ", ".join(f"{k} IGD {a:.3e} -> {b:.3e} (ratio {r:.3f} <= {lim:.3f})" for k, (r, lim, a, b) in ratios.items())
    acceptance_report("C5 IGD decay, UF7/UF4 d=5", ok, f"{detail}, {elapsed:.1f}s")
    assert ok


def test_c6_oracle_weak_pareto(acceptance_report):
    start = time.perf_counter()
    prob = problem1()
    ref = oracle_reference_set(prob, generate_uniform_weights(50), math.inf)
    frac = nondominated_fraction(ref.images, 1e-8)
    axis = np.linspace(0.0, 1.0, 200)
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    beaten = int(dominated_by(ref.images, eval_objectives(prob, grid), 1e-8).sum())
    elapsed = time.perf_counter() - start
    ok = frac == 1.0 and beaten == 0 and elapsed < 60.0
    acceptance_report("C6 oracle weak Pareto", ok, f"nondominated fraction {frac}, {beaten} beaten by 200x200 grid, {elapsed:.1f}s")
    assert ok


def test_c7_formula_oracles(acceptance_report):
    start = time.perf_counter()
    checks = {}
    p1 = problem1()
    for x, expect in (((0.1, 0.1), (0.0, 3.84)), ((0.9, 0.9), (3.84, 0.0)), ((0.5, 0.5), (0.96, 0.96))):
        a, b = x
        naive = (5 * (a - 0.1) ** 2 + (b - 0.1) ** 2, (a - 0.9) ** 2 + 5 * (b - 0.9) ** 2)
        got = eval_objectives(p1, x)
        checks[f"problem1{x}"] = np.allclose(got, expect, rtol=0, atol=1e-12) and np.allclose(got, naive, atol=1e-12)
    x7 = np.array([1.0] + [math.sin(6 * math.pi + j * math.pi / 5) for j in range(2, 6)])
    checks["uf7 pareto point"] = np.allclose(eval_objectives(uf7(5), x7), (1.0, 0.0), atol=1e-12)
    checks["stationary point"] = np.allclose(subproblem_oracle(p1, [0.5, 0.5], 1, budget=2000), (7 / 30, 23 / 30), atol=1e-6)

    rng = np.random.default_rng(7)
    pos, ref = rng.random((30, 2)), rng.random((30, 2))
    naive_err = sum(sum((pos[i, l] - ref[i, l]) ** 2 for l in range(2)) for i in range(30)) / 30
    checks["err2 recomputation"] = abs(err2(pos, ref) - naive_err) <= 1e-14 * naive_err
    imgs, front = rng.random((20, 2)), rng.random((40, 2))
    naive_igd = sum(min(math.dist(p, a) for a in imgs) for p in front) / len(front)
    checks["igd recomputation"] = abs(igd(imgs, front) - naive_igd) <= 1e-14 * naive_igd

    two = Ensemble(np.array([[0.2, 0.3], [0.8, 0.9]]), np.full((2, 2), 0.5), np.array([[0.0, 0.0], [10.0, 10.0]]))
    checks["consensus alpha=1e5"] = np.allclose(consensus_points(two, 1e5, 1), [[0.2, 0.3]] * 2, rtol=1e-12, atol=0)

    ens = Ensemble(pos[:8], generate_uniform_weights(8), eval_objectives(p1, pos[:8]))
    cfg = SolverConfig(n_agents=8, sigma=4.0)
    noise = rng.standard_normal((8, 2))
    got = step_plain(ens, p1, cfg, noise=noise).positions
    naive = np.empty_like(got)
    for i in range(8):
        vals = [evaluate_gp(g, ens.weights[i], math.inf) for g in ens.objectives]
        c = [math.exp(-cfg.alpha * (v - min(vals))) for v in vals]
        xa = [sum(c[j] * ens.positions[j, l] for j in range(8)) / sum(c) for l in range(2)]
        for l in range(2):
            diff = xa[l] - ens.positions[i, l]
            y = ens.positions[i, l] + cfg.lam * cfg.dt * diff + cfg.sigma * math.sqrt(cfg.dt) * diff * noise[i, l]
            naive[i, l] = min(1.0, max(0.0, y))
    checks["update rule transcription"] = np.allclose(got, naive, rtol=0, atol=1e-14)

    samples = sample_uniform(BoxDomain([0.0], [1.0]), 10_000, np.random.default_rng(3))
    checks["uniform sampling mean"] = abs(samples.mean() - 0.5) < 0.02

    elapsed = time.perf_counter() - start
    failed = [k for k, v in checks.items() if not v]
    ok = not failed and elapsed < 1.0
    acceptance_report("C7 formula oracles", ok, f"{len(checks) - len(failed)}/{len(checks)} checks, {elapsed:.2f}s" + (f", failed: {failed}" if failed else ""))
    assert ok


@pytest.mark.parametrize(
    "text",
    [
        "problem = problem1\nn_agents = 30\nk_max = 100\nseed = 77\nruns = 4\nmetrics = err2, igd\nreference_size = 200\n",
        "problem = uf7\nd = 5\nn_agents = 60\nk_max = 100\nseed = 5\nruns = 3\nmode = greedy\n",
    ],
)
def test_c8_determinism(tmp_path, text, acceptance_report):
    start = time.perf_counter()
    cfg = parse_config(text, {"out": str(tmp_path / "first")})
    records, summary = run_experiment(cfg, n_jobs=1)
    write_outputs(records, summary, cfg)
    again = parse_config((tmp_path / "first" / "manifest.txt").read_text(), {"out": str(tmp_path / "second")})
    records2, summary2 = run_experiment(again, n_jobs=2)
    write_outputs(records2, summary2, again)
    same = {
        name: (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
        for name in ("trace.csv", "final_positions.csv", "summary.csv")
    }
    elapsed = time.perf_counter() - start
    ok = all(same.values())
    acceptance_report(
        f"C8 determinism ({cfg.problem}, {cfg.mode})", ok,
        f"sequential vs parallel rerun from manifest byte-identical: {same}, {elapsed:.1f}s",
    )
    assert ok
