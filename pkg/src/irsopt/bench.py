"""Benchmark experiments and their delimited output.

Four experiments share a fixed CSV schema (one schema keeps downstream
plotting trivial):

    experiment, method, M, realization, iteration, objective, metric_bits,
    step_size, backtracks, grad_norm, elapsed_ms

Row semantics per experiment:

    convergence  one row per (method, realization, iteration); objective is
                 the minimization-sense value, metric_bits the rate at that
                 iterate. elapsed_ms is 0.0 so identical (config, seed)
                 yields byte-identical files at any worker count.
    sweep        one row per (method, M) aggregated over realizations:
                 objective/metric_bits are means over successful runs,
                 step_size carries the metric standard deviation,
                 iteration the median iteration count, realization the
                 number of successes. elapsed_ms is 0.0 (see timing).
    timing       one row per (method, M); elapsed_ms is the median wall
                 time of the timed runs (warm-up excluded). This is the one
                 experiment whose time column is a real measurement.
    oracle       per realization, one row per reference (grid / aogd / bcd)
                 at desk sizes M <= 3.

Failed realizations produce a row with iteration -1 and NaN values; the run
continues. Headers record the tool version, the resolved scenario config and
the seed, never anything run-specific such as worker count, so re-running
with the same (config, seed) reproduces the file byte for byte.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import os
import time

import numpy as np

from . import __version__, secrecy, wsr
from .ao import FunctionProblem, SolverOptions, u_map
from .baselines import METHODS, run_ao
from .numerics import NumericError
from .sim import ScenarioConfig, child_rng, gen_instance
from .secrecy import SecrecyProblem, secrecy_rate
from .wsr import WsrProblem, elementwise_bcd_v, fp_inner_loop, \
    build_phase_quadratics, phase_gradient_theta, phase_objective

CSV_COLUMNS = ("experiment", "method", "M", "realization", "iteration",
               "objective", "metric_bits", "step_size", "backtracks",
               "grad_norm", "elapsed_ms")

EXPERIMENTS = ("convergence", "sweep", "timing", "oracle")

LN2 = float(np.log(2.0))


@dataclasses.dataclass
class ExperimentSpec:
    """Everything one experiment run needs, independent of the CLI."""

    experiment: str
    config: ScenarioConfig
    methods: tuple = ("aogd",)
    m_list: tuple = ()
    realizations: int = 100
    out: str = ""
    seed: int = 0
    threads: int = 1
    svg: bool = False
    grid_points: int = 360
    cold_start: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.methods:
            raise ValueError("need at least one method")
        for name in self.methods:
            if name not in METHODS:
                raise ValueError(f"unknown method {name!r}")
        if not self.m_list:
            self.m_list = (self.config.m,)
        if self.realizations < 1:
            raise ValueError("realization count must be >= 1")
        if self.threads < 1:
            raise ValueError("thread count must be >= 1")


def default_options(kind):
    return secrecy.default_options() if kind == "secrecy" else wsr.default_options()


def make_problem(cfg, instance, opts, cold_start=False):
    if cfg.kind == "secrecy":
        return SecrecyProblem(instance)
    return WsrProblem(instance, xi1=opts.xi1, warm_start=not cold_start)


def metric_bits(kind, objective):
    """Rate in bits from a minimization-sense objective value."""
    if kind == "secrecy":
        return secrecy_rate(-objective)
    return max(-objective, 0.0) / LN2


def _draw(cfg, m, seed, realization):
    """Instance and starting phases for one realization; every method sees
    the same draw."""
    cfg = dataclasses.replace(cfg, m=int(m))
    rng = child_rng(seed, realization)
    instance = gen_instance(cfg, rng)
    theta0 = rng.uniform(0.0, 2.0 * np.pi, cfg.m)
    return cfg, instance, theta0, rng


def _run_single(task):
    """Worker body: one (method, M, realization) run. Returns a summary
    dict; numeric failures are reported, not raised."""
    cfg_dict, experiment, method, m, realization, seed, opts_dict, cold = task
    cfg = ScenarioConfig(**cfg_dict)
    opts = SolverOptions(**opts_dict)
    try:
        cfg_m, instance, theta0, _ = _draw(cfg, m, seed, realization)
        problem = make_problem(cfg_m, instance, opts, cold)
        start = time.perf_counter()
        _, _, trace = run_ao(problem, theta0, opts, method)
        wall = time.perf_counter() - start
    except (NumericError, FloatingPointError) as exc:
        return {"ok": False, "method": method, "m": int(m),
                "realization": realization, "error": str(exc)}
    return {
        "ok": True, "method": method, "m": int(m), "realization": realization,
        "objective": list(trace.objective),
        "gamma": list(trace.gamma),
        "backtracks": list(trace.backtracks),
        "grad_norm": list(trace.grad_norm),
        "wall_s": wall,
    }


def _run_tasks(spec, tasks):
    """Run task tuples serially or on a process pool; order of results is
    normalized afterwards, so scheduling does not matter."""
    if spec.threads == 1:
        return [_run_single(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=spec.threads) as pool:
        return list(pool.map(_run_single, tasks, chunksize=1))


def _tasks_for(spec):
    cfg_dict = dataclasses.asdict(spec.config)
    opts = dataclasses.asdict(default_options(spec.config.kind))
    return [
        (cfg_dict, spec.experiment, method, m, r, spec.seed, opts, spec.cold_start)
        for method in spec.methods
        for m in spec.m_list
        for r in range(spec.realizations)
    ]


def _error_row(spec, method, m, realization):
    nan = float("nan")
    return (spec.experiment, method, int(m), realization, -1, nan, nan,
            nan, 0, nan, 0.0)


def run_convergence(spec):
    """Iteration-wise objective traces. Returns (rows, failures, tasks)."""
    kind = spec.config.kind
    results = _run_tasks(spec, _tasks_for(spec))
    rows = []
    failures = 0
    for res in results:
        if not res["ok"]:
            failures += 1
            rows.append(_error_row(spec, res["method"], res["m"], res["realization"]))
            continue
        for t, f_t in enumerate(res["objective"]):
            rows.append((
                "convergence", res["method"], res["m"], res["realization"], t,
                f_t, metric_bits(kind, f_t), res["gamma"][t],
                res["backtracks"][t], res["grad_norm"][t], 0.0,
            ))
    return rows, failures, len(results)


def run_m_sweep(spec):
    """Final-rate statistics per (method, M). Returns (rows, failures, tasks)."""
    kind = spec.config.kind
    results = _run_tasks(spec, _tasks_for(spec))
    rows = []
    failures = 0
    grouped = {}
    for res in results:
        if not res["ok"]:
            failures += 1
            rows.append(_error_row(spec, res["method"], res["m"], res["realization"]))
            continue
        grouped.setdefault((res["method"], res["m"]), []).append(res)
    for (method, m), runs in grouped.items():
        finals = np.array([r["objective"][-1] for r in runs])
        metrics = np.array([metric_bits(kind, f) for f in finals])
        iters = np.array([len(r["objective"]) for r in runs])
        grads = np.array([r["grad_norm"][-1] for r in runs])
        rows.append((
            "sweep", method, m, len(runs), int(round(float(np.median(iters)))),
            float(np.mean(finals)), float(np.mean(metrics)),
            float(np.std(metrics)), 0, float(np.mean(grads)), 0.0,
        ))
    return rows, failures, len(results)


def run_timing(spec):
    """Median wall time per (method, M), warm-up run excluded. Always runs
    serially; a worker pool would distort the measurement."""
    kind = spec.config.kind
    cfg_dict = dataclasses.asdict(spec.config)
    opts = dataclasses.asdict(default_options(kind))
    rows = []
    failures = 0
    tasks = 0
    for method in spec.methods:
        for m in spec.m_list:
            _run_single((cfg_dict, "timing", method, m, 0, spec.seed, opts,
                         spec.cold_start))  # warm-up, discarded
            walls, finals, iters = [], [], []
            for r in range(1, spec.realizations + 1):
                tasks += 1
                res = _run_single((cfg_dict, "timing", method, m, r,
                                   spec.seed, opts, spec.cold_start))
                if not res["ok"]:
                    failures += 1
                    rows.append(_error_row(spec, method, m, r))
                    continue
                walls.append(res["wall_s"])
                finals.append(res["objective"][-1])
                iters.append(len(res["objective"]))
            if walls:
                med_obj = float(np.median(finals))
                rows.append((
                    "timing", method, int(m), len(walls),
                    int(round(float(np.median(iters)))), med_obj,
                    metric_bits(kind, med_obj), 0.0, 0, 0.0,
                    float(np.median(walls)) * 1000.0,
                ))
    return rows, failures, tasks


# --- exhaustive phase-grid references ------------------------------------

def _grid_thetas(n, m, start, count):
    """Rows start..start+count-1 of the lexicographic n^m phase grid."""
    idx = np.arange(start, start + count, dtype=np.int64)
    theta = np.empty((count, m))
    for axis in range(m - 1, -1, -1):
        theta[:, axis] = (idx % n) * (2.0 * np.pi / n)
        idx //= n
    return theta


def rank_one_quotient_max(a, g, b, h):
    """Closed-form maximum of the generalized Rayleigh quotient of
    (I + a g g^H, I + b h h^H): the optimizer lies in span{g, h}, which
    reduces the problem to a two-by-two pencil solved by the quadratic
    formula. Independent of the iterative path in `numerics`."""
    g = np.atleast_2d(np.asarray(g, complex))
    h = np.atleast_2d(np.asarray(h, complex))
    ng2 = np.sum(np.abs(g) ** 2, axis=1)
    nh2 = np.sum(np.abs(h) ** 2, axis=1)
    ip = np.sum(np.conj(g) * h, axis=1)
    safe = np.maximum(ng2, 1e-300)
    h1sq = np.abs(ip) ** 2 / safe
    h2sq = np.maximum(nh2 - h1sq, 0.0)
    a11 = 1.0 + a * ng2
    b11 = 1.0 + b * h1sq
    b22 = 1.0 + b * h2sq
    detb = 1.0 + b * nh2
    s = a11 * b22 + b11
    disc = np.maximum(s * s - 4.0 * a11 * detb, 0.0)
    lam = (s + np.sqrt(disc)) / (2.0 * detb)
    lam = np.where(ng2 <= 0.0, 1.0, lam)
    return np.maximum(lam, 1.0)


def _secrecy_grid(instance, n, chunk=1 << 18):
    """Exhaustive phase grid with the beamformer re-optimized in closed form
    at every grid point. Returns (best ratio, best theta)."""
    m = instance.m
    a = instance.power / instance.sigma2_l
    b = instance.power / instance.sigma2_e
    gc = np.conj(instance.G)
    best_val = -np.inf
    best_theta = None
    total = n**m
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        thetas = _grid_thetas(n, m, start, count)
        v = np.exp(-1j * thetas)
        g_l = (v * instance.h_l) @ gc
        g_e = (v * instance.h_e) @ gc
        lam = rank_one_quotient_max(a, g_l, b, g_e)
        j = int(np.argmax(lam))
        if lam[j] > best_val:
            best_val = float(lam[j])
            best_theta = thetas[j].copy()
    return best_val, best_theta


def _wsr_grid(quad, n, chunk=1 << 18):
    """Exhaustive minimization of the phase quadratic. Returns
    (best value, best theta)."""
    m = quad.m
    best_val = np.inf
    best_theta = None
    total = n**m
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        thetas = _grid_thetas(n, m, start, count)
        v = np.exp(-1j * thetas)
        rv = v @ quad.R.T
        vals = np.real(np.sum(np.conj(v) * rv, axis=1)) \
            - 2.0 * np.real(v.conj() @ quad.e)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best_theta = thetas[j].copy()
    return best_val, best_theta


def brute_force_oracle(kind, payload, grid_points):
    """Exhaustive phase-grid reference for desk-sized problems.

    kind 'secrecy' takes a SecrecyInstance and returns (max ratio, theta)
    with the beamformer re-optimized at every grid point; kind 'wsr' takes a
    WsrQuadratics and returns (min quadratic value, theta). M > 3 is refused.
    """
    m = payload.m
    if m > 3:
        raise ValueError(f"exhaustive grid refused for M = {m} > 3")
    if grid_points < 2:
        raise ValueError("need at least two grid points per phase")
    if kind == "secrecy":
        return _secrecy_grid(payload, grid_points)
    if kind == "wsr":
        return _wsr_grid(payload, grid_points)
    raise ValueError(f"unknown oracle kind {kind!r}")


def _phase_only_solve(quad, theta0, restarts_rng, n_restarts=5):
    """Best-of-n tailored-rule minimization of a frozen phase quadratic."""
    opts = SolverOptions(gamma0=10.0, beta=0.5, c=1e-4, xi=1e-12,
                         max_iterations=3000)
    problem = FunctionProblem(
        lambda th: phase_objective(quad, u_map(th)),
        lambda th: phase_gradient_theta(quad, th),
    )
    best = (np.inf, None, 0)
    starts = [theta0] + [restarts_rng.uniform(0, 2 * np.pi, quad.m)
                         for _ in range(n_restarts - 1)]
    for start in starts:
        theta, _, trace = run_ao(problem, start, opts, "aogd")
        if trace.objective[-1] < best[0]:
            best = (trace.objective[-1], theta, len(trace))
    return best


def run_oracle(spec):
    """Grid-versus-solver comparison rows. Returns (rows, failures, tasks)."""
    cfg = spec.config
    kind = cfg.kind
    rows = []
    failures = 0
    for r in range(spec.realizations):
        cfg_m, instance, theta0, rng = _draw(cfg, cfg.m, spec.seed, r)
        m = cfg_m.m
        try:
            if kind == "secrecy":
                grid_val, _ = brute_force_oracle("secrecy", instance, spec.grid_points)
                opts = secrecy.default_options()
                opts.xi = 1e-10
                best = np.inf
                best_len = 0
                starts = [theta0] + [rng.uniform(0, 2 * np.pi, m) for _ in range(4)]
                for start in starts:
                    _, _, trace = run_ao(SecrecyProblem(instance), start, opts, "aogd")
                    if trace.objective[-1] < best:
                        best, best_len = trace.objective[-1], len(trace)
                rows.append(("oracle", "grid", m, r, spec.grid_points,
                             -grid_val, metric_bits(kind, -grid_val), 0.0, 0, 0.0, 0.0))
                rows.append(("oracle", "aogd", m, r, best_len, best,
                             metric_bits(kind, best), 0.0, 0, 0.0, 0.0))
            else:
                state, _ = fp_inner_loop(instance, u_map(theta0), None)
                quad = build_phase_quadratics(instance, state.p, state.q, state.W)
                grid_val, _ = brute_force_oracle("wsr", quad, spec.grid_points)
                ao_val, _, ao_len = _phase_only_solve(quad, theta0, rng)
                v = u_map(rng.uniform(0, 2 * np.pi, m))
                for _ in range(500):
                    v_next = elementwise_bcd_v(quad, v)
                    if np.max(np.abs(v_next - v)) < 1e-12:
                        v = v_next
                        break
                    v = v_next
                bcd_val = phase_objective(quad, v)
                rows.append(("oracle", "grid", m, r, spec.grid_points,
                             grid_val, float("nan"), 0.0, 0, 0.0, 0.0))
                rows.append(("oracle", "aogd", m, r, ao_len, ao_val,
                             float("nan"), 0.0, 0, 0.0, 0.0))
                rows.append(("oracle", "bcd", m, r, 0, bcd_val,
                             float("nan"), 0.0, 0, 0.0, 0.0))
        except (NumericError, FloatingPointError):
            failures += 1
            rows.append(_error_row(spec, "aogd", cfg.m, r))
    return rows, failures, spec.realizations


def run_experiment(spec):
    runner = {
        "convergence": run_convergence,
        "sweep": run_m_sweep,
        "timing": run_timing,
        "oracle": run_oracle,
    }[spec.experiment]
    return runner(spec)


# --- delimited output -----------------------------------------------------

def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, rows, cfg, seed):
    """Write sorted rows with a reproducibility header. Refuses to touch an
    existing file rather than append or overwrite."""
    if os.path.exists(path):
        raise FileExistsError(f"output file exists: {path}")
    ordered = sorted(rows, key=lambda row: (row[0], row[1], row[2], row[3], row[4]))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# tool: irsopt {__version__}\n")
        handle.write(f"# seed: {seed}\n")
        for line in cfg.to_text().splitlines():
            handle.write(f"# config: {line}\n")
        handle.write(",".join(CSV_COLUMNS) + "\n")
        for row in ordered:
            handle.write(",".join(_format_cell(cell) for cell in row) + "\n")


def read_rows(path):
    """Parse a file written by write_csv back into tuples (tests and plots)."""
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#") or line.startswith(CSV_COLUMNS[0] + ","):
                continue
            parts = line.rstrip("\n").split(",")
            rows.append((
                parts[0], parts[1], int(parts[2]), int(parts[3]), int(parts[4]),
                float(parts[5]), float(parts[6]), float(parts[7]),
                int(parts[8]), float(parts[9]), float(parts[10]),
            ))
    return rows
