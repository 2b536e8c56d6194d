"""Figure construction: series content, styling, and log-axis masking."""

import matplotlib.pyplot as plt
import pytest

from sparareal_plots import style
from sparareal_plots.data import PlotDataError
from sparareal_plots.figures import PRESETS, build_figure, build_spec

from csvfixtures import write_ehat, write_state_indep_bounds


def _labels(fig):
    return [line.get_label() for line in fig.axes[0].get_lines()]


def _line(fig, label):
    for line in fig.axes[0].get_lines():
        if line.get_label() == label:
            return line
    raise AssertionError(f"no series labelled {label!r}")


def test_every_preset_has_a_panel():
    assert set(PRESETS) == {
        "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig4",
        "fig5a", "fig5b", "fig6", "fig7a", "fig7b", "fig7c",
        "fig8a", "fig8b", "fig9"}


def test_unknown_preset_rejected(tmp_path):
    with pytest.raises(PlotDataError, match="unknown preset"):
        build_spec("fig99", str(tmp_path), str(tmp_path / "x.png"))


def test_state_independent_panel_series(preset_dir, tmp_path):
    spec = build_spec("fig2a", preset_dir("fig2a"), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        labels = _labels(fig)
        for expected in ("superlinear bound", "linear bound", "empirical error",
                         "noise floor"):
            assert expected in labels
        floor = _line(fig, "noise floor")
        assert floor.get_linestyle() == "--"
        assert fig.axes[0].get_yscale() == "log"
    finally:
        plt.close(fig)


def test_expansive_panel_drops_inapplicable_linear_bound(preset_dir, tmp_path):
    spec = build_spec("fig3a", preset_dir("fig3a"), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        labels = _labels(fig)
        assert "linear bound" not in labels
        assert "superlinear bound" in labels
    finally:
        plt.close(fig)


def test_rule_pair_panel_uses_style_table_colors(preset_dir, tmp_path):
    spec = build_spec("fig5a", preset_dir("fig5a"), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        assert _line(fig, "rule 2").get_color() == style.RULE_STYLES["rule2"]["color"]
        assert _line(fig, "rule 4").get_color() == style.RULE_STYLES["rule4"]["color"]
        assert "numeric recursion" in _labels(fig)
        assert "linear rule bound" in _labels(fig)
    finally:
        plt.close(fig)


def test_rule_pair_panel_drops_inapplicable_rule_bound(preset_dir, tmp_path):
    spec = build_spec("fig8b", preset_dir("fig8b"), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        assert "linear rule bound" not in _labels(fig)
        assert _line(fig, "rule 1").get_color() == style.RULE_STYLES["rule1"]["color"]
    finally:
        plt.close(fig)


def test_zero_cells_masked_on_log_axis(tmp_path):
    directory = tmp_path / "csv"
    directory.mkdir()
    write_ehat(str(directory / "ehat.csv"), zero_tail=True)
    write_state_indep_bounds(str(directory / "bounds.csv"))
    spec = build_spec("fig2a", str(directory), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        empirical = _line(fig, "empirical error")
        # the fixture writes 5 iterations but the last value is exactly zero
        assert len(empirical.get_xdata()) == 4
    finally:
        plt.close(fig)


def test_moments_panel_styles_rules_and_state_independent(preset_dir, tmp_path):
    spec = build_spec("fig4", preset_dir("fig4"), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        assert _line(fig, "rule3").get_color() == style.RULE_STYLES["rule3"]["color"]
        gauss = _line(fig, "gaussian_q5")
        assert gauss.get_color() == "black"
        assert gauss.get_linestyle() == "--"
    finally:
        plt.close(fig)


def test_sweep_panel_linear_y_and_log_x(preset_dir, tmp_path):
    spec = build_spec("fig6", preset_dir("fig6"), str(tmp_path / "f.png"))
    fig = build_figure(spec)
    try:
        ax = fig.axes[0]
        assert ax.get_xscale() == "log"
        assert ax.get_yscale() == "linear"
        assert len(ax.get_lines()) == 8
    finally:
        plt.close(fig)


def test_missing_column_propagates_from_build(preset_dir, tmp_path):
    directory = preset_dir("fig2a")
    with open(f"{directory}/ehat.csv", "w", newline="") as handle:
        handle.write("k,stderr\n0,0.1\n")
    spec = build_spec("fig2a", directory, str(tmp_path / "f.png"))
    with pytest.raises(PlotDataError, match="'ehat'"):
        build_figure(spec)
