"""Command-line entry point: solve / experiment / bounds subcommands.

Run configuration is a flat key-value text file with dotted section keys
(``problem.kind = linear``). Parsing is strict: unknown keys are rejected and
seeds are never defaulted. Figure presets encode the experiment matrix of the
reference figures so a single command reproduces each figure's CSV set.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import bounds as bnd
from . import experiments as exp
from .core import RunConfig, SolverError, sparareal_solve
from .perturbations import NO_NOISE, PerturbationModel
from .problems import ProblemError, serial_fine_solve

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CAP = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    """Malformed or incomplete run configuration."""


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


KNOWN_KEYS = {
    "problem.kind": str,
    "problem.d": int,
    "problem.mode": str,
    "problem.seed": int,
    "problem.t0": float,
    "problem.T": float,
    "problem.N": int,
    "perturbation.model": str,
    "perturbation.family": str,
    "perturbation.q": float,
    "perturbation.rule": int,
    "solver.K_max": int,
    "solver.eps": float,
    "solver.seed": int,
    "mc.R": int,
    "mc.seed": int,
    "mc.quantities": _parse_str_list,
    "mc.eps_grid": _parse_float_list,
    "output.dir": str,
    "output.prefix": str,
}


def parse_config(path: str) -> dict:
    """Read a flat dotted-key config file; strict about unknown keys."""
    values: dict = {}
    try:
        with open(path) as handle:
            lines = handle.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = KNOWN_KEYS[key](raw)
        except ValueError as err:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {err}") from err
    return values


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing required key {key!r}")
    return cfg[key]


def problem_payload(cfg: dict) -> dict:
    kind = _require(cfg, "problem.kind")
    if kind == "linear":
        payload = {
            "kind": "linear",
            "d": _require(cfg, "problem.d"),
            "mode": _require(cfg, "problem.mode"),
            "seed": _require(cfg, "problem.seed"),
        }
        for key, name in (("problem.t0", "t0"), ("problem.T", "T"), ("problem.N", "N")):
            if key in cfg:
                payload[name] = cfg[key]
        return payload
    if kind == "scalar_nonlinear":
        return {"kind": "scalar_nonlinear"}
    raise ConfigError(f"unknown problem.kind {kind!r}")


def perturbation_model(cfg: dict) -> PerturbationModel:
    tag = _require(cfg, "perturbation.model")
    if tag == "none":
        return NO_NOISE
    if tag == "state_independent":
        return PerturbationModel("state_independent",
                                 family=_require(cfg, "perturbation.family"),
                                 q=_require(cfg, "perturbation.q"))
    if tag == "sampling_rule":
        return PerturbationModel("sampling_rule",
                                 rule=_require(cfg, "perturbation.rule"))
    raise ConfigError(f"unknown perturbation.model {tag!r}")


def _out_path(cfg: dict, out_dir: str | None, name: str) -> str:
    directory = out_dir or cfg.get("output.dir", ".")
    prefix = cfg.get("output.prefix", "")
    return os.path.join(directory, prefix + name)


# ---------------------------------------------------------------------------
# figure presets

_LINEAR_B_LT_1 = {"kind": "linear", "d": 100, "mode": "contractive",
                  "seed": 20220808, "t0": 0.0, "T": 7.5, "N": 20}
_LINEAR_B_GE_1 = dict(_LINEAR_B_LT_1, mode="expansive")
_SCALAR = {"kind": "scalar_nonlinear"}

_RULES = tuple(PerturbationModel("sampling_rule", rule=r) for r in (1, 2, 3, 4))


def _gauss(q):
    return PerturbationModel("state_independent", family="gaussian", q=q)


_SWEEP_GRID = tuple(10.0 ** -i for i in range(1, 11))


def _state_indep_preset(problem, q, k_max=10):
    return {"problem": problem, "models": (_gauss(q),), "k_max": k_max,
            "quantities": ("error_table", "bounds"), "mc_seed": 90210}


def _rule_pair_preset(problem, rules, k_max=None):
    return {"problem": problem,
            "models": tuple(PerturbationModel("sampling_rule", rule=r) for r in rules),
            "k_max": k_max, "quantities": ("error_table", "bounds"),
            "mc_seed": 90210}


PRESETS = {
    "fig2a": _state_indep_preset(_LINEAR_B_LT_1, 0),
    "fig2b": _state_indep_preset(_LINEAR_B_LT_1, 5),
    "fig2c": _state_indep_preset(_LINEAR_B_LT_1, 10),
    "fig3a": _state_indep_preset(_LINEAR_B_GE_1, 0),
    "fig3b": _state_indep_preset(_LINEAR_B_GE_1, 5),
    "fig3c": _state_indep_preset(_LINEAR_B_GE_1, 10),
    "fig4": {"problem": _LINEAR_B_LT_1,
             "models": _RULES + tuple(_gauss(q) for q in (0, 5, 10)),
             "k_max": 10, "quantities": ("moments",), "mc_seed": 90210},
    "fig5a": _rule_pair_preset(_LINEAR_B_LT_1, (2, 4)),
    "fig5b": _rule_pair_preset(_LINEAR_B_LT_1, (1, 3)),
    "fig6": {"problem": _LINEAR_B_LT_1,
             "models": _RULES + tuple(_gauss(q) for q in (0, 5, 10, 25)),
             "k_max": None, "quantities": ("tolerance_sweep",),
             "eps_grid": _SWEEP_GRID, "mc_seed": 90210},
    "fig7a": _state_indep_preset(_SCALAR, 1),
    "fig7b": _state_indep_preset(_SCALAR, 5),
    "fig7c": _state_indep_preset(_SCALAR, 10),
    "fig8a": _rule_pair_preset(_SCALAR, (2, 4)),
    "fig8b": _rule_pair_preset(_SCALAR, (1, 3)),
    "fig9": {"problem": _SCALAR,
             "models": _RULES + tuple(_gauss(q) for q in (0, 5, 10, 25)),
             "k_max": None, "quantities": ("tolerance_sweep",),
             "eps_grid": _SWEEP_GRID, "mc_seed": 90210},
}


# ---------------------------------------------------------------------------
# bound curve assembly

def state_independent_curves(problem, model, K: int) -> tuple[dict, list[dict]]:
    """Bound curves + CSV rows for a state-independent (or no-noise) run."""
    N = problem.mesh.N
    constants = bnd.constants_for(problem, model)
    curves: dict[str, np.ndarray] = {}
    rows: list[dict] = []

    lattice = np.full((K + 1, N + 1), np.nan)
    for k in range(2, K + 1):
        for n in range(k + 1, N + 1):
            lattice[k, n] = bnd.superlinear_bound(constants, k, n)
            rows.append({"kind": "superlinear", "k": k, "n": n,
                         "value": lattice[k, n]})
    curves["superlinear"] = lattice
    per_k = np.full(K + 1, np.nan)
    per_k[2:] = [lattice[k, N] for k in range(2, K + 1)]
    curves["superlinear_max"] = per_k

    linear = np.full(K + 1, np.nan)
    applicable = True
    for k in range(2, K + 1):
        value = bnd.linear_bound(constants, k)
        if isinstance(value, bnd.Inapplicable):
            applicable = False
            break
        linear[k] = value
        rows.append({"kind": "linear", "k": k, "n": "", "value": value})
    if applicable:
        curves["linear"] = linear
    else:
        rows.append({"kind": "linear", "k": "", "n": "", "value": "inapplicable"})

    for n in range(1, N + 1):
        rows.append({"kind": "k1", "k": 1, "n": n,
                     "value": bnd.k1_bound(constants, n)})
    floor = problem.mesh.dt ** (2 * constants.q + 1) if model.tag == "state_independent" else 0.0
    rows.append({"kind": "noise_floor", "k": "", "n": "", "value": floor})
    return curves, rows


def rule_curves(problem, variant: str, K: int) -> tuple[dict, list[dict]]:
    """Numeric-recursion lattice and linear rule bound for one rule family."""
    N = problem.mesh.N
    constants = bnd.constants_for(problem, NO_NOISE)
    _, _, e0_row, e1_row = bnd.empirical_e_hats(problem)
    recursion = bnd.solve_recursion_rules(constants, variant, e0_row, e1_row, K, N)
    lattice = np.full((K + 1, N + 1), np.nan)
    rows: list[dict] = []
    name = f"numeric_recursion_{variant[4:]}"
    for k in range(2, K + 1):
        for n in range(k + 1, N + 1):
            lattice[k, n] = recursion[k, n]
            rows.append({"kind": name, "k": k, "n": n, "value": recursion[k, n]})
    curves = {name: lattice}

    per_k = np.full(K + 1, np.nan)
    applicable = True
    for k in range(2, K + 1):
        value = bnd.rule_bound(constants, variant, k)
        if isinstance(value, bnd.Inapplicable):
            applicable = False
            break
        per_k[k] = value
        rows.append({"kind": variant, "k": k, "n": "", "value": value})
    if applicable:
        curves[variant] = per_k
    else:
        rows.append({"kind": variant, "k": "", "n": "", "value": "inapplicable"})
    return curves, rows


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(cfg: dict, out_dir: str | None, workers: int) -> int:
    payload = problem_payload(cfg)
    model = perturbation_model(cfg)
    problem = exp.build_problem(payload)
    seed = 0
    if model.tag != "none":
        seed = _require(cfg, "solver.seed")
    config = RunConfig(problem=problem, k_max=cfg.get("solver.K_max"),
                       eps=cfg.get("solver.eps", 1e-6), perturbation=model,
                       seed=seed, workers=workers)
    history = sparareal_solve(config)
    reference = serial_fine_solve(problem)

    rows = []
    for k in range(history.states.shape[0]):
        for n in range(problem.mesh.N + 1):
            for i in range(problem.dim):
                rows.append([k, n, i, exp.fmt(history.states[k, n, i])])
    for n in range(problem.mesh.N + 1):
        for i in range(problem.dim):
            rows.append(["", n, i, exp.fmt(reference[n, i])])
    exp._atomic_write_rows(_out_path(cfg, out_dir, "trajectory.csv"),
                           ["k", "n", "i", "value"], rows)
    if history.converged_k is None:
        print(f"iteration cap {config.iterations} reached without convergence")
        return EXIT_CAP
    print(f"converged at iteration {history.converged_k}")
    return EXIT_OK


def _mc_from_cfg(cfg: dict, models, k_max, eps_grid, workers) -> exp.MCConfig:
    return exp.MCConfig(problem=problem_payload(cfg), models=tuple(models),
                        R=cfg.get("mc.R", 500), k_max=k_max,
                        master_seed=_require(cfg, "mc.seed"),
                        eps_grid=tuple(eps_grid), workers=workers)


def cmd_experiment(cfg: dict, out_dir: str | None, workers: int,
                   preset: str | None) -> int:
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from "
                              + ", ".join(sorted(PRESETS)))
        plan = PRESETS[preset]
        cfg = dict(cfg)
        cfg.setdefault("mc.seed", plan["mc_seed"])
        models = plan["models"]
        quantities = plan["quantities"]
        k_max = plan["k_max"]
        eps_grid = plan.get("eps_grid", ())
        payload = plan["problem"]
        cfg["problem.kind"] = payload["kind"]
        for name in ("d", "mode", "seed", "t0", "T", "N"):
            if name in payload:
                cfg[f"problem.{name}"] = payload[name]
    else:
        models = [perturbation_model(cfg)]
        quantities = _require(cfg, "mc.quantities")
        k_max = cfg.get("solver.K_max")
        eps_grid = cfg.get("mc.eps_grid", ())

    for quantity in quantities:
        if quantity not in ("error_table", "moments", "tolerance_sweep", "bounds"):
            raise ConfigError(f"unknown quantity {quantity!r}")

    mc = _mc_from_cfg(cfg, models, k_max, eps_grid, workers)
    problem = exp.build_problem(mc.problem)
    K = mc.k_max if mc.k_max is not None else problem.mesh.N
    multi = len(models) > 1

    tables: dict[str, exp.ErrorTable] = {}
    if "error_table" in quantities:
        for model in models:
            table = exp.mc_error_table(mc, model)
            tables[model.label()] = table
            suffix = f"_{model.label()}" if multi else ""
            exp.write_error_table_csv(
                _out_path(cfg, out_dir, f"error_table{suffix}.csv"), table)
            exp.write_ehat_csv(_out_path(cfg, out_dir, f"ehat{suffix}.csv"), table)

    if "bounds" in quantities:
        all_rows: list[dict] = []
        curve_sets: dict[str, dict] = {}
        variant_cache: dict[str, dict] = {}
        for model in models:
            if model.tag == "sampling_rule":
                variant = "rule24" if model.rule in (2, 4) else "rule13"
                if variant not in variant_cache:
                    curves, rows = rule_curves(problem, variant, K)
                    variant_cache[variant] = curves
                    all_rows.extend(rows)
                curve_sets[model.label()] = variant_cache[variant]
            else:
                curves, rows = state_independent_curves(problem, model, K)
                all_rows.extend(rows)
                curve_sets[model.label()] = curves
        exp.write_bounds_csv(_out_path(cfg, out_dir, "bounds.csv"), all_rows)
        comparison_rows = []
        for label, table in tables.items():
            comparison_rows.extend(exp.compare_bounds(table, curve_sets[label]))
        if comparison_rows:
            exp.write_comparison_csv(_out_path(cfg, out_dir, "comparison.csv"),
                                     comparison_rows)

    if "moments" in quantities:
        exp.write_moments_csv(_out_path(cfg, out_dir, "moments.csv"), exp.mc_moments(mc))

    if "tolerance_sweep" in quantities:
        exp.write_sweep_csv(_out_path(cfg, out_dir, "sweep.csv"),
                            exp.mc_tolerance_sweep(mc))
    return EXIT_OK


def cmd_bounds(cfg: dict, out_dir: str | None) -> int:
    payload = problem_payload(cfg)
    model = perturbation_model(cfg)
    problem = exp.build_problem(payload)
    K = cfg.get("solver.K_max") or problem.mesh.N
    constants = bnd.constants_for(problem, model)
    provenance = bnd.constant_provenance(problem)

    rows: list[dict] = []
    if model.tag in ("none", "state_independent"):
        _, rows = state_independent_curves(problem, model, K)
    else:
        variant = "rule24" if model.rule in (2, 4) else "rule13"
        _, rows = rule_curves(problem, variant, K)
    exp.write_bounds_csv(_out_path(cfg, out_dir, "bounds.csv"), rows)

    named = [("C1", constants.C1), ("C2", constants.C2),
             ("L_G", constants.L_G), ("L_F", constants.L_F),
             ("A", constants.A), ("B", constants.B), ("Lambda", constants.Lam),
             ("Lambda1_24", constants.Lam1_24), ("Lambda2_24", constants.Lam2_24),
             ("Lambda1_13", constants.Lam1_13), ("Lambda2_13", constants.Lam2_13),
             ("Lambda3_13", constants.Lam3_13),
             ("e0_hat", constants.e0_hat), ("e1_hat", constants.e1_hat)]
    const_rows = [[name, exp.fmt(value), provenance.get(name, "derived")]
                  for name, value in named]
    exp._atomic_write_rows(_out_path(cfg, out_dir, "constants.csv"),
                           ["name", "value", "provenance"], const_rows)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sparareal",
        description="Parallel-in-time solver lab: parareal/SParareal runs, "
                    "error bounds, and Monte Carlo experiments.")
    parser.add_argument("command", choices=["solve", "experiment", "bounds"])
    parser.add_argument("--config", required=False, help="run-config file path")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--preset", default=None,
                        help="figure preset name (experiment only)")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            cfg = parse_config(args.config)
        elif args.preset is not None and args.command == "experiment":
            cfg = {}
        else:
            raise ConfigError("--config is required (or --preset for experiment)")
        if args.command == "solve":
            return cmd_solve(cfg, args.out, args.workers)
        if args.command == "experiment":
            return cmd_experiment(cfg, args.out, args.workers, args.preset)
        return cmd_bounds(cfg, args.out)
    except (ConfigError, ProblemError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
