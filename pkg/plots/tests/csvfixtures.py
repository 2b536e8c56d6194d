"""Synthetic CSV fixtures matching the solver lab's output schemas."""

import csv
import os

K, N = 4, 6


def _write(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def write_ehat(path, scale=1e-1, zero_tail=False):
    rows = []
    for k in range(K + 1):
        value = 0.0 if (zero_tail and k == K) else scale * 0.3 ** k
        rows.append([k, repr(value), repr(value * 0.05)])
    _write(path, ["k", "ehat", "stderr"], rows)


def write_state_indep_bounds(path, q=5.0, dt=0.375, linear_applicable=True):
    rows = []
    for k in range(2, K + 1):
        for n in range(k + 1, N + 1):
            rows.append(["superlinear", k, n, repr(10.0 ** -k * (1 + 0.01 * n))])
    if linear_applicable:
        for k in range(2, K + 1):
            rows.append(["linear", k, "", repr(2.0 * 10.0 ** -k)])
    else:
        rows.append(["linear", "", "", "inapplicable"])
    for n in range(1, N + 1):
        rows.append(["k1", 1, n, repr(0.5 * (1 + 0.01 * n))])
    rows.append(["noise_floor", "", "", repr(dt ** (2 * q + 1))])
    _write(path, ["kind", "k", "n", "value"], rows)


def write_rule_bounds(path, suffix, applicable=True):
    rows = []
    for k in range(2, K + 1):
        for n in range(k + 1, N + 1):
            rows.append([f"numeric_recursion_{suffix}", k, n,
                         repr(10.0 ** -k * (1 + 0.02 * n))])
    if applicable:
        for k in range(2, K + 1):
            rows.append([f"rule{suffix}", k, "", repr(3.0 * 10.0 ** -k)])
    else:
        rows.append([f"rule{suffix}", "", "", "inapplicable"])
    _write(path, ["kind", "k", "n", "value"], rows)


def write_moments(path):
    rows = []
    for rule in (1, 2, 3, 4):
        for k in range(K + 1):
            value = 10.0 ** -(k + rule * 0.2)
            rows.append([f"rule{rule}", k, repr(value), repr(value * 0.05)])
    for q in (0, 5, 10):
        level = 0.375 ** (2 * q + 1)
        for k in range(K + 1):
            rows.append([f"gaussian_q{q}", k, repr(level * (1 + 0.01 * k)),
                         repr(level * 0.02)])
        rows.append([f"gaussian_q{q}", "", repr(level), repr(0.0)])
    _write(path, ["model", "k", "max_second_moment", "stderr"], rows)


def write_sweep(path, empty=False):
    rows = []
    if not empty:
        models = ["rule1", "rule2", "rule3", "rule4",
                  "gaussian_q0", "gaussian_q5", "gaussian_q10", "gaussian_q25"]
        for m, model in enumerate(models):
            for i in range(1, 11):
                eps = 10.0 ** -i
                rows.append([model, repr(eps), repr(2.0 + 0.8 * i + 0.1 * m),
                             repr(0.05)])
    _write(path, ["model", "eps", "mean_k", "stderr"], rows)


def make_preset_dir(preset: str, base: str) -> str:
    """Lay out the CSV set a given preset expects under base/preset."""
    directory = os.path.join(base, preset)
    os.makedirs(directory, exist_ok=True)
    join = lambda name: os.path.join(directory, name)  # noqa: E731
    if preset.startswith(("fig2", "fig7")):
        write_ehat(join("ehat.csv"))
        write_state_indep_bounds(join("bounds.csv"), linear_applicable=True)
    elif preset.startswith("fig3"):
        write_ehat(join("ehat.csv"))
        write_state_indep_bounds(join("bounds.csv"), linear_applicable=False)
    elif preset in ("fig5a", "fig8a"):
        write_ehat(join("ehat_rule2.csv"))
        write_ehat(join("ehat_rule4.csv"), scale=1.2e-1)
        write_rule_bounds(join("bounds.csv"), "24", applicable=preset == "fig5a")
    elif preset in ("fig5b", "fig8b"):
        write_ehat(join("ehat_rule1.csv"))
        write_ehat(join("ehat_rule3.csv"), scale=1.2e-1)
        write_rule_bounds(join("bounds.csv"), "13", applicable=preset == "fig5b")
    elif preset == "fig4":
        write_moments(join("moments.csv"))
    elif preset in ("fig6", "fig9"):
        write_sweep(join("sweep.csv"))
    else:
        raise ValueError(f"no fixture layout for preset {preset!r}")
    return directory
