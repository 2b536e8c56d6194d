"""Benchmark initial value problems, flow maps, and Lipschitz constants.

Two built-in problems are provided: a seeded linear system u' = Qu with
diagonal Q (exact flow = matrix exponential, coarse flow = one forward-Euler
step) and a fixed scalar nonlinear equation u' = sqrt(u^2 + 2) with a
closed-form exact flow. All norms are the infinity norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FlowMap = Callable[[np.ndarray, float], np.ndarray]


class ProblemError(ValueError):
    """Invalid problem construction or unsupported problem kind."""


@dataclass(frozen=True)
class Mesh:
    """Uniform time mesh t_n = t0 + n*dt with the last node pinned to T."""

    t0: float
    T: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ProblemError(f"need at least one time slice, got N={self.N}")
        if not self.T > self.t0:
            raise ProblemError(f"empty time interval [{self.t0}, {self.T}]")

    @property
    def dt(self) -> float:
        return (self.T - self.t0) / self.N

    @property
    def nodes(self) -> np.ndarray:
        # linspace pins both endpoints exactly instead of accumulating dt
        return np.linspace(self.t0, self.T, self.N + 1)


@dataclass(frozen=True)
class IVProblem:
    """An autonomous ODE system with exact and coarse flow maps.

    ``exact_flow(u, dt)`` propagates a state exactly over one slice,
    ``coarse_flow(u, dt)`` is the cheap low-order propagator. ``domain_box``
    is a per-component (lo, hi) interval covering the states the solver is
    expected to visit; it is only used by empirical constant estimators.
    """

    dim: int
    field: Callable[[np.ndarray], np.ndarray]
    u0: np.ndarray
    exact_flow: FlowMap
    coarse_flow: FlowMap
    mesh: Mesh
    kind: str
    domain_box: np.ndarray = field(repr=False)
    qdiag: np.ndarray | None = field(default=None, repr=False)


def matrix_exponential(Q: np.ndarray, dt: float) -> np.ndarray:
    """exp(Q*dt) via the diagonal shortcut or scaling-and-squaring.

    Diagonal matrices take the exact elementwise path; dense matrices use a
    truncated Taylor series after scaling so that the scaled norm is <= 0.5,
    then repeated squaring.
    """
    Q = np.asarray(Q, dtype=float)
    if not np.all(np.isfinite(Q)):
        raise ProblemError("matrix exponential of non-finite matrix")
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ProblemError(f"expected a square matrix, got shape {Q.shape}")
    d = Q.shape[0]
    if np.count_nonzero(Q - np.diag(np.diag(Q))) == 0:
        return np.diag(np.exp(np.diag(Q) * dt))

    M = Q * dt
    norm = np.linalg.norm(M, np.inf)
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    M = M / (2 ** s)
    result = np.eye(d)
    term = np.eye(d)
    for i in range(1, 60):
        term = term @ M / i
        result = result + term
        if np.linalg.norm(term, np.inf) < 1e-20 * max(1.0, np.linalg.norm(result, np.inf)):
            break
    for _ in range(s):
        result = result @ result
    return result


def _domain_box(trajectory: np.ndarray) -> np.ndarray:
    """Componentwise min/max of a trajectory, inflated by 50%."""
    lo = trajectory.min(axis=0)
    hi = trajectory.max(axis=0)
    pad = np.where(hi > lo, 0.5 * (hi - lo), np.maximum(0.5 * np.abs(lo), 1.0))
    return np.stack([lo - pad, hi + pad], axis=1)


def _finish(dim, fieldfn, u0, exact, coarse, mesh, kind, qdiag=None) -> IVProblem:
    traj = _serial_fine(exact, u0, mesh)
    return IVProblem(
        dim=dim,
        field=fieldfn,
        u0=u0,
        exact_flow=exact,
        coarse_flow=coarse,
        mesh=mesh,
        kind=kind,
        domain_box=_domain_box(traj),
        qdiag=qdiag,
    )


def linear_problem_from_diag(qdiag: np.ndarray, u0: np.ndarray,
                             t0: float = 0.0, T: float = 7.5, N: int = 20) -> IVProblem:
    """Linear system u' = diag(q) u with exact exponential and Euler flows."""
    qdiag = np.asarray(qdiag, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if qdiag.shape != u0.shape:
        raise ProblemError("diagonal and initial condition shapes differ")
    mesh = Mesh(t0, T, N)

    def fieldfn(u):
        return qdiag * u

    def exact(u, dt):
        return u * np.exp(qdiag * dt)

    def coarse(u, dt):
        return u * (1.0 + qdiag * dt)

    return _finish(qdiag.size, fieldfn, u0, exact, coarse, mesh, "linear", qdiag)


def make_linear_problem(d: int, mode: str, seed: int,
                        t0: float = 0.0, T: float = 7.5, N: int = 20) -> IVProblem:
    """Seeded linear benchmark with the coarse contraction regime pinned.

    Diagonal entries are drawn so that the forward-Euler multipliers
    m_i = 1 + Q_ii*dt land in (0, L), with L chosen so that
    B = L^2 (1 + 2 dt) is ~0.95 (contractive) or ~1.2 (expansive). The
    largest multiplier is rescaled to hit L exactly, making L_G exact.
    """
    if d < 1:
        raise ProblemError(f"dimension must be positive, got {d}")
    if N < 2:
        raise ProblemError(f"need N >= 2 time slices, got {N}")
    mesh = Mesh(t0, T, N)
    dt = mesh.dt
    if mode == "contractive":
        target_B = 0.95
    elif mode == "expansive":
        target_B = 1.2
    else:
        raise ProblemError(f"unknown mode {mode!r}")
    L_target = math.sqrt(target_B / (1.0 + 2.0 * dt))

    rng = np.random.default_rng(seed)
    mult = rng.uniform(0.9, 1.0, size=d)
    mult *= L_target / np.max(np.abs(mult))
    qdiag = (mult - 1.0) / dt
    u0 = rng.uniform(-5.0, 5.0, size=d)

    L_G = float(np.max(np.abs(1.0 + qdiag * dt)))
    B = L_G ** 2 * (1.0 + 2.0 * dt)
    if mode == "contractive" and not B < 1.0:
        raise ProblemError(f"contractive mode unsatisfiable at dt={dt}: achieved B={B}")
    if mode == "expansive" and not B >= 1.0:
        raise ProblemError(f"expansive mode unsatisfiable at dt={dt}: achieved B={B}")
    return linear_problem_from_diag(qdiag, u0, t0, T, N)


def make_scalar_problem() -> IVProblem:
    """du/dt = sqrt(u^2 + 2) on [-1, 1] with u(-1) = 5 and N = 20."""
    mesh = Mesh(-1.0, 1.0, 20)
    sqrt2 = math.sqrt(2.0)

    def fieldfn(u):
        return np.sqrt(u * u + 2.0)

    def exact(u, dt):
        return sqrt2 * np.sinh(dt + np.arcsinh(u / sqrt2))

    def coarse(u, dt):
        return u + dt * np.sqrt(u * u + 2.0)

    u0 = np.array([5.0])
    return _finish(1, fieldfn, u0, exact, coarse, mesh, "scalar_nonlinear")


def lipschitz_constants(problem: IVProblem) -> tuple[float, float]:
    """(L_G, L_F) in the infinity norm, closed-form for the built-ins."""
    dt = problem.mesh.dt
    if problem.kind == "linear":
        L_G = float(np.max(np.abs(1.0 + problem.qdiag * dt)))
        L_F = float(np.max(np.exp(problem.qdiag * dt)))
        return L_G, L_F
    if problem.kind == "scalar_nonlinear":
        # |f'(u)| = |u|/sqrt(u^2+2) < 1, so one Euler step has L_G <= 1 + dt
        return 1.0 + dt, math.exp(dt)
    raise ProblemError(
        f"no closed-form Lipschitz constants for problem kind {problem.kind!r}; "
        "use estimate_lipschitz"
    )


def estimate_lipschitz(problem: IVProblem, samples: int = 10_000,
                       seed: int = 0) -> tuple[float, float]:
    """Empirical (L_G, L_F) from seeded pairs in the domain box, +10%."""
    rng = np.random.default_rng(seed)
    lo, hi = problem.domain_box[:, 0], problem.domain_box[:, 1]
    dt = problem.mesh.dt
    lg = lf = 0.0
    for _ in range(samples):
        u = rng.uniform(lo, hi)
        v = rng.uniform(lo, hi)
        duv = np.max(np.abs(u - v))
        if duv == 0.0:
            continue
        lg = max(lg, np.max(np.abs(problem.coarse_flow(u, dt) - problem.coarse_flow(v, dt))) / duv)
        lf = max(lf, np.max(np.abs(problem.exact_flow(u, dt) - problem.exact_flow(v, dt))) / duv)
    return 1.1 * lg, 1.1 * lf


def _serial_fine(exact: FlowMap, u0: np.ndarray, mesh: Mesh) -> np.ndarray:
    traj = np.empty((mesh.N + 1, u0.size))
    traj[0] = u0
    for n in range(mesh.N):
        traj[n + 1] = exact(traj[n], mesh.dt)
        if not np.all(np.isfinite(traj[n + 1])):
            raise ProblemError(f"non-finite state while propagating to node {n + 1}")
    return traj


def serial_fine_solve(problem: IVProblem) -> np.ndarray:
    """Reference trajectory: repeated serial application of the exact flow."""
    return _serial_fine(problem.exact_flow, problem.u0, problem.mesh)
