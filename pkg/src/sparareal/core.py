"""Parareal and stochastic parareal iteration engines.

Both schemes share one engine over the (iteration k, time node n) lattice:
a zeroth coarse sweep, then per iteration a fine propagation of every node
(the parallel stage) followed by a strictly serial predictor-corrector sweep.
The stochastic variant adds one noise draw per (k, n) with k >= 1 and n > k;
with no noise it reproduces plain parareal bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .perturbations import (
    KIND_ALPHA,
    NO_NOISE,
    PerturbationModel,
    draw_state_independent,
    sample_alpha,
    substream,
)
from .problems import IVProblem


class SolverError(RuntimeError):
    """Numeric failure inside the iteration engine."""


@dataclass(frozen=True)
class RunConfig:
    """One solver run: problem, iteration cap, tolerance, noise, seed.

    ``eps`` is the infinity-norm stopping tolerance; 0 disables stopping so
    the run always reaches ``k_max`` (useful for full-lattice experiments),
    while +inf makes the criterion fire at the first comparison.
    """

    problem: IVProblem
    k_max: int | None = None
    eps: float = math.inf
    perturbation: PerturbationModel = NO_NOISE
    seed: int = 0
    record_xi_moments: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.k_max is not None:
            if self.k_max < 1 or self.k_max > self.problem.mesh.N:
                raise ValueError(
                    f"k_max must be in [1, N={self.problem.mesh.N}], got {self.k_max}")
        if self.eps < 0:
            raise ValueError(f"tolerance must be >= 0, got {self.eps}")

    @property
    def iterations(self) -> int:
        return self.problem.mesh.N if self.k_max is None else self.k_max


@dataclass
class IterationHistory:
    """The full solver lattice plus convergence bookkeeping.

    ``states[k, n]`` is U^k_n; ``fine[k, n]`` holds F(U^k_n) and
    ``coarse[k, n]`` holds G(U^k_n) for n < N. ``diffs[k, n]`` is
    ||U^k_n - U^{k-1}_n|| for k >= 1. ``xi_sq[k, n]`` is the squared norm of
    the noise draw applied while building row k+1 (when recording is on).
    """

    states: np.ndarray
    fine: np.ndarray
    coarse: np.ndarray
    diffs: np.ndarray
    eps: float
    converged_k: int | None = None
    xi_sq: np.ndarray | None = None

    @property
    def iterations(self) -> int:
        return self.states.shape[0] - 1


def pc_update(g_new: np.ndarray, f_old: np.ndarray, g_old: np.ndarray,
              xi: np.ndarray) -> np.ndarray:
    """Predictor-corrector update; summation order fixed for reproducibility."""
    return g_new + f_old - g_old + xi


def check_convergence(history: IterationHistory, k: int, eps: float) -> int:
    """Largest I with ||U^k_n - U^{k-1}_n|| < eps for all n <= I."""
    if k < 1:
        raise ValueError("convergence check needs k >= 1")
    N = history.states.shape[1] - 1
    for n in range(1, N + 1):
        if not history.diffs[k, n] < eps:
            return n - 1
    return N


def _fine_stage(problem: IVProblem, row: np.ndarray, out: np.ndarray,
                workers: int) -> None:
    N = row.shape[0] - 1
    dt = problem.mesh.dt
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for n, val in enumerate(pool.map(lambda u: problem.exact_flow(u, dt), row[:N])):
                out[n] = val
    else:
        for n in range(N):
            out[n] = problem.exact_flow(row[n], dt)


def sparareal_solve(config: RunConfig, realization: int = 0) -> IterationHistory:
    """Run the stochastic parareal scheme (plain parareal when noise is off)."""
    problem = config.problem
    model = config.perturbation
    mesh = problem.mesh
    N, d, dt = mesh.N, problem.dim, mesh.dt
    K = config.iterations

    states = np.empty((K + 1, N + 1, d))
    fine = np.empty((K + 1, N, d))
    coarse = np.empty((K + 1, N, d))
    diffs = np.zeros((K + 1, N + 1))
    xi_sq = np.zeros((K + 1, N + 1)) if config.record_xi_moments else None
    zero = np.zeros(d)

    states[0, 0] = problem.u0
    for n in range(N):
        coarse[0, n] = problem.coarse_flow(states[0, n], dt)
        states[0, n + 1] = coarse[0, n]

    converged_k = None
    rows_done = 0
    for k in range(K):
        _fine_stage(problem, states[k], fine[k], config.workers)
        if not np.all(np.isfinite(fine[k])):
            bad = int(np.argwhere(~np.isfinite(fine[k]).all(axis=1))[0, 0])
            raise SolverError(f"non-finite fine propagation at iteration {k}, node {bad}")

        states[k + 1, 0] = problem.u0
        for n in range(N):
            g_new = problem.coarse_flow(states[k + 1, n], dt)
            coarse[k + 1, n] = g_new
            noisy = k >= 1 and n > k
            if model.tag == "sampling_rule" and noisy:
                if k < 1:
                    raise SolverError("sampling rule requested at iteration 0")
                # Marginal std from the freshest coarse pair at node n-1: the
                # serial sweep has already updated node n-1 of the new row, so
                # the current/previous coarse iterates there are rows k+1 and k.
                # Rules 1/3 likewise centre on the newest stored fine value,
                # F(U^k_{n-1}), computed during this iteration's parallel stage.
                sigma = np.abs(coarse[k + 1, n - 1] - coarse[k, n - 1])
                rng = substream(config.seed, realization, k, n, KIND_ALPHA)
                alpha = sample_alpha(model.rule, states[k, n], fine[k, n - 1],
                                     sigma, rng)
                f_alpha = problem.exact_flow(alpha, dt)
                g_alpha = problem.coarse_flow(alpha, dt)
                # alpha-form update: G(U^{k+1}_n) + F(alpha) - G(alpha)
                states[k + 1, n + 1] = g_new + f_alpha - g_alpha
                if xi_sq is not None:
                    xi = (f_alpha - g_alpha) - (fine[k, n] - coarse[k, n])
                    xi_sq[k, n] = np.max(np.abs(xi)) ** 2
            else:
                if model.tag == "state_independent" and noisy:
                    xi = draw_state_independent(model, config.seed, realization,
                                                k, n, dt, d)
                    if xi_sq is not None:
                        xi_sq[k, n] = np.max(np.abs(xi)) ** 2
                else:
                    xi = zero
                states[k + 1, n + 1] = pc_update(g_new, fine[k, n], coarse[k, n], xi)
            if not np.all(np.isfinite(states[k + 1, n + 1])):
                raise SolverError(f"non-finite state at iteration {k + 1}, node {n + 1}")

        diffs[k + 1] = np.max(np.abs(states[k + 1] - states[k]), axis=1)
        rows_done = k + 1
        if np.all(diffs[k + 1, 1:] < config.eps):
            converged_k = k + 1
            break

    rows = rows_done + 1
    return IterationHistory(
        states=states[:rows],
        fine=fine[:rows - 1] if rows > 1 else fine[:0],
        coarse=coarse[:rows],
        diffs=diffs[:rows],
        eps=config.eps,
        converged_k=converged_k,
        xi_sq=xi_sq[:rows] if xi_sq is not None else None,
    )


def parareal_solve(config: RunConfig) -> IterationHistory:
    """Deterministic parareal: the stochastic engine with noise switched off."""
    if config.perturbation.tag != "none":
        config = RunConfig(
            problem=config.problem, k_max=config.k_max, eps=config.eps,
            perturbation=NO_NOISE, seed=config.seed,
            record_xi_moments=config.record_xi_moments, workers=config.workers)
    return sparareal_solve(config)
