"""Monte Carlo harness: error tables, moment traces, tolerance sweeps.

Realizations are the outer parallel loop; each one is seeded purely by
(master_seed, realization index), so tables are bit-identical for any worker
count. Problems are described by plain payload dicts so batches can cross
process boundaries.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import RunConfig, sparareal_solve
from .perturbations import PerturbationModel, state_independent_second_moment
from .problems import IVProblem, make_linear_problem, make_scalar_problem, serial_fine_solve


def build_problem(payload: dict) -> IVProblem:
    """Construct a benchmark problem from a plain payload dict."""
    kind = payload.get("kind")
    if kind == "linear":
        return make_linear_problem(
            d=int(payload["d"]), mode=payload["mode"], seed=int(payload["seed"]),
            t0=float(payload.get("t0", 0.0)), T=float(payload.get("T", 7.5)),
            N=int(payload.get("N", 20)))
    if kind == "scalar_nonlinear":
        return make_scalar_problem()
    raise ValueError(f"unknown problem kind {kind!r}")


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo run description shared by all experiment quantities."""

    problem: dict
    models: tuple[PerturbationModel, ...]
    R: int = 500
    k_max: int | None = None
    master_seed: int = 0
    eps_grid: tuple[float, ...] = ()
    workers: int = 1

    def __post_init__(self):
        if self.R < 1:
            raise ValueError(f"need at least one realization, got R={self.R}")
        if not self.models:
            raise ValueError("no perturbation models given")
        if self.eps_grid and not all(
                a > b for a, b in zip(self.eps_grid, self.eps_grid[1:])):
            raise ValueError("eps_grid must be strictly decreasing")


@dataclass
class RealizationBatch:
    """Raw per-realization statistics for one model."""

    sqerr: np.ndarray    # (R, K+1, N+1) squared inf-norm error vs exact
    xi_sq: np.ndarray    # (R, K+1, N+1) squared noise norms
    diffmax: np.ndarray  # (R, K+1) max_n ||U^k_n - U^{k-1}_n||


@dataclass
class ErrorTable:
    """Empirical mean-square errors over the (k, n) lattice."""

    mse: np.ndarray          # exact zeros for n <= k
    stderr: np.ndarray
    raw_mse: np.ndarray      # diagnostics: round-off residual kept
    ehat: np.ndarray         # max over 1 <= n <= N per k
    ehat_stderr: np.ndarray
    R: int
    model: str


@dataclass
class MomentTrace:
    """max_n E||xi^k_n||^2 per iteration, with the analytic level if any."""

    model: str
    trace: np.ndarray
    stderr: np.ndarray
    analytic: float | None


@dataclass
class SweepTable:
    """Expected iterations-to-tolerance per (model, eps)."""

    rows: list[dict] = field(default_factory=list)


def _realize_batch(problem_payload: dict, model: PerturbationModel,
                   k_max: int | None, master_seed: int,
                   realizations: list[int]) -> RealizationBatch:
    problem = build_problem(problem_payload)
    reference = serial_fine_solve(problem)
    config = RunConfig(problem=problem, k_max=k_max, eps=0.0,
                       perturbation=model, seed=master_seed,
                       record_xi_moments=True)
    K = config.iterations
    N = problem.mesh.N
    sqerr = np.empty((len(realizations), K + 1, N + 1))
    xi_sq = np.empty((len(realizations), K + 1, N + 1))
    diffmax = np.zeros((len(realizations), K + 1))
    for i, r in enumerate(realizations):
        history = sparareal_solve(config, realization=r)
        sqerr[i] = np.max(np.abs(history.states - reference), axis=2) ** 2
        xi_sq[i] = history.xi_sq
        diffmax[i, 1:] = history.diffs[1:, 1:].max(axis=1)
    return RealizationBatch(sqerr=sqerr, xi_sq=xi_sq, diffmax=diffmax)


def run_realizations(mc: MCConfig, model: PerturbationModel) -> RealizationBatch:
    """All R realizations for one model, deterministically ordered."""
    rs = list(range(mc.R))
    if mc.workers <= 1 or mc.R < 2 * mc.workers:
        return _realize_batch(mc.problem, model, mc.k_max, mc.master_seed, rs)
    chunks = np.array_split(rs, min(mc.workers * 4, mc.R))
    with ProcessPoolExecutor(max_workers=mc.workers) as pool:
        parts = list(pool.map(
            _realize_batch,
            [mc.problem] * len(chunks), [model] * len(chunks),
            [mc.k_max] * len(chunks), [mc.master_seed] * len(chunks),
            [list(c) for c in chunks]))
    return RealizationBatch(
        sqerr=np.concatenate([p.sqerr for p in parts]),
        xi_sq=np.concatenate([p.xi_sq for p in parts]),
        diffmax=np.concatenate([p.diffmax for p in parts]))


def _stderr(samples: np.ndarray) -> np.ndarray:
    if samples.shape[0] < 2:
        return np.zeros(samples.shape[1:])
    return samples.std(axis=0, ddof=1) / math.sqrt(samples.shape[0])


def error_table_from_batch(batch: RealizationBatch, model: PerturbationModel) -> ErrorTable:
    raw = batch.sqerr.mean(axis=0)
    stderr = _stderr(batch.sqerr)
    mse = raw.copy()
    K, N = mse.shape[0] - 1, mse.shape[1] - 1
    for k in range(K + 1):
        mse[k, :min(k, N) + 1] = 0.0  # exact nodes stored as clean zeros
    ehat = mse[:, 1:].max(axis=1)
    argmax = mse[:, 1:].argmax(axis=1) + 1
    ehat_stderr = stderr[np.arange(K + 1), argmax]
    return ErrorTable(mse=mse, stderr=stderr, raw_mse=raw, ehat=ehat,
                      ehat_stderr=ehat_stderr, R=batch.sqerr.shape[0],
                      model=model.label())


def mc_error_table(mc: MCConfig, model: PerturbationModel | None = None) -> ErrorTable:
    """Mean-square error lattice averaged over R realizations."""
    model = model if model is not None else mc.models[0]
    return error_table_from_batch(run_realizations(mc, model), model)


def moment_trace_from_batch(batch: RealizationBatch, model: PerturbationModel,
                            dt: float, d: int) -> MomentTrace:
    cell_mean = batch.xi_sq.mean(axis=0)
    cell_stderr = _stderr(batch.xi_sq)
    K = cell_mean.shape[0] - 1
    trace = cell_mean.max(axis=1)
    argmax = cell_mean.argmax(axis=1)
    stderr = cell_stderr[np.arange(K + 1), argmax]
    analytic = None
    if model.tag == "state_independent":
        analytic = state_independent_second_moment(model, dt, d)
    return MomentTrace(model=model.label(), trace=trace, stderr=stderr,
                       analytic=analytic)


def mc_moments(mc: MCConfig) -> list[MomentTrace]:
    """Largest (over n) second moments of the perturbations, per model."""
    problem = build_problem(mc.problem)
    return [
        moment_trace_from_batch(run_realizations(mc, model), model,
                                problem.mesh.dt, problem.dim)
        for model in mc.models
    ]


def iterations_to_tolerance(diffmax: np.ndarray, eps: float) -> np.ndarray:
    """Per-realization first k with max_n ||U^k - U^{k-1}|| < eps, capped at K."""
    R, K1 = diffmax.shape
    K = K1 - 1
    hits = diffmax[:, 1:] < eps
    ks = np.where(hits.any(axis=1), hits.argmax(axis=1) + 1, K)
    return ks


def mc_tolerance_sweep(mc: MCConfig) -> SweepTable:
    """E[iterations to tolerance] per (model, eps); one solve per realization.

    Convergence at a tolerance is a pure function of the recorded per-iteration
    difference norms, so all eps values reuse the same realizations.
    """
    if not mc.eps_grid:
        raise ValueError("tolerance sweep needs a non-empty eps_grid")
    table = SweepTable()
    for model in mc.models:
        batch = run_realizations(mc, model)
        for eps in mc.eps_grid:
            ks = iterations_to_tolerance(batch.diffmax, eps)
            stderr = ks.std(ddof=1) / math.sqrt(len(ks)) if len(ks) > 1 else 0.0
            table.rows.append({"model": model.label(), "eps": eps,
                               "mean_k": float(ks.mean()), "stderr": float(stderr)})
    return table


def compare_bounds(table: ErrorTable, bound_curves: dict[str, np.ndarray],
                   slack: float = 3.0) -> list[dict]:
    """Join empirical errors with bound curves; verdicts with stderr slack.

    1-D curves (length K+1, NaN where undefined) compare against ehat per k;
    2-D curves compare per lattice cell for 2 <= k < n.
    """
    rows = []
    K = table.mse.shape[0] - 1
    N = table.mse.shape[1] - 1
    for kind, curve in bound_curves.items():
        curve = np.asarray(curve, dtype=float)
        if curve.ndim == 1:
            for k in range(min(K, curve.shape[0] - 1) + 1):
                if not np.isfinite(curve[k]):
                    continue
                emp, se = table.ehat[k], table.ehat_stderr[k]
                rows.append({"k": k, "n": None, "empirical": float(emp),
                             "bound_kind": kind, "bound_value": float(curve[k]),
                             "dominated": int(emp - slack * se <= curve[k])})
        else:
            for k in range(2, min(K, curve.shape[0] - 1) + 1):
                for n in range(k + 1, min(N, curve.shape[1] - 1) + 1):
                    if not np.isfinite(curve[k, n]):
                        continue
                    emp, se = table.mse[k, n], table.stderr[k, n]
                    rows.append({"k": k, "n": n, "empirical": float(emp),
                                 "bound_kind": kind, "bound_value": float(curve[k, n]),
                                 "dominated": int(emp - slack * se <= curve[k, n])})
    return rows


# ---------------------------------------------------------------------------
# CSV output (the frozen contract consumed by the plotting component)

def fmt(value) -> str:
    """Full-precision decimal rendering of a scalar (round-trips exactly)."""
    return repr(float(value))


def _atomic_write_rows(path: str, header: list[str], rows) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_error_table_csv(path: str, table: ErrorTable) -> None:
    K, N = table.mse.shape[0] - 1, table.mse.shape[1] - 1
    rows = [[k, n, fmt(table.mse[k, n]), fmt(table.stderr[k, n]),
             table.R, fmt(table.raw_mse[k, n])]
            for k in range(K + 1) for n in range(N + 1)]
    _atomic_write_rows(path, ["k", "n", "mse", "stderr", "R", "raw_mse"], rows)


def write_ehat_csv(path: str, table: ErrorTable) -> None:
    rows = [[k, fmt(table.ehat[k]), fmt(table.ehat_stderr[k])]
            for k in range(table.ehat.shape[0])]
    _atomic_write_rows(path, ["k", "ehat", "stderr"], rows)


def write_moments_csv(path: str, traces: list[MomentTrace]) -> None:
    rows = []
    for trace in traces:
        for k in range(trace.trace.shape[0]):
            rows.append([trace.model, k, fmt(trace.trace[k]), fmt(trace.stderr[k])])
        if trace.analytic is not None:
            rows.append([trace.model, "", fmt(trace.analytic), fmt(0.0)])
    _atomic_write_rows(path, ["model", "k", "max_second_moment", "stderr"], rows)


def write_sweep_csv(path: str, table: SweepTable) -> None:
    rows = [[r["model"], fmt(r["eps"]), fmt(r["mean_k"]), fmt(r["stderr"])]
            for r in table.rows]
    _atomic_write_rows(path, ["model", "eps", "mean_k", "stderr"], rows)


def write_bounds_csv(path: str, curves: list[dict]) -> None:
    """curves: rows with kind, k (may be ''), n (may be ''), value."""
    rows = [[c["kind"], c.get("k", ""), c.get("n", ""),
             c["value"] if isinstance(c["value"], str) else fmt(c["value"])]
            for c in curves]
    _atomic_write_rows(path, ["kind", "k", "n", "value"], rows)


def write_comparison_csv(path: str, rows: list[dict]) -> None:
    out = [[r["k"], fmt(r["empirical"]), r["bound_kind"], fmt(r["bound_value"]),
            r["dominated"], "" if r["n"] is None else r["n"]]
           for r in rows]
    _atomic_write_rows(path, ["k", "empirical", "bound_kind",
                              "bound_value", "dominated", "n"], out)
