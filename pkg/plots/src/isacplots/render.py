"""Render sweep CSVs from the beamforming harness into figures.

This is a pure view layer: every plotted value comes straight from the CSV
with no smoothing or recomputation, so the figures are exactly as trustworthy
as the data files.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


class PlotDataError(ValueError):
    """Missing file, missing columns, or no rows to plot."""


class FigureKind(Enum):
    RHO_TRADEOFF = "rho-tradeoff"
    ERROR_SENSITIVITY = "error-sensitivity"
    POWER_UTILITY = "power-utility"


REQUIRED_COLUMNS = {
    FigureKind.RHO_TRADEOFF: {"sweep", "sweep_param", "method",
                              "worst_sum_rate", "worst_bp_gain"},
    FigureKind.ERROR_SENSITIVITY: {"sweep", "sweep_param", "method",
                                   "worst_sum_rate", "worst_bp_gain"},
    FigureKind.POWER_UTILITY: {"sweep", "sweep_param", "method",
                               "error_setting", "utility"},
}

_METHOD_STYLE = {
    "robust": {"color": "tab:blue", "marker": "o"},
    "nonrobust": {"color": "tab:orange", "marker": "s"},
    "svm": {"color": "tab:green", "marker": "^"},
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: Path
    figure_kind: FigureKind
    output: Path


def load_rows(path, kind: FigureKind) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise PlotDataError(f"input CSV not found: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise PlotDataError(f"cannot parse {path}: {exc}") from exc
    missing = REQUIRED_COLUMNS[kind] - set(frame.columns)
    if missing:
        raise PlotDataError(f"{path} lacks required columns {sorted(missing)}")
    if frame.empty:
        raise PlotDataError(f"{path} contains no data rows")
    return frame


def _style(method: str) -> dict:
    return _METHOD_STYLE.get(method, {"marker": "x"})


def _plot_rho_tradeoff(frame: pd.DataFrame):
    fig, ax_rate = plt.subplots(figsize=(7.0, 4.5), dpi=120)
    ax_gain = ax_rate.twinx()
    rows = frame[frame["sweep"] == "rho"]
    if rows.empty:
        raise PlotDataError("no rho-sweep rows in the CSV")
    for method, chunk in rows.groupby("method", sort=True):
        chunk = chunk.sort_values("sweep_param")
        style = _style(method)
        ax_rate.plot(chunk["sweep_param"], chunk["worst_sum_rate"],
                     label=f"{method} rate", linestyle="-", **style)
        ax_gain.plot(chunk["sweep_param"], chunk["worst_bp_gain"],
                     label=f"{method} gain", linestyle="--", **style)
    ax_rate.set_xlabel("rate weight rho")
    ax_rate.set_ylabel("worst-case sum rate (bit/s/Hz)")
    ax_gain.set_ylabel("worst-case beampattern gain (W)")
    lines = ax_rate.get_lines() + ax_gain.get_lines()
    ax_rate.legend(lines, [l.get_label() for l in lines], fontsize=8)
    ax_rate.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def _plot_error_sensitivity(frame: pd.DataFrame):
    fig, (ax_rate, ax_gain) = plt.subplots(1, 2, figsize=(9.0, 4.0), dpi=120)
    varpi = frame[frame["sweep"] == "varpi"]
    dtheta = frame[frame["sweep"] == "dtheta"]
    if varpi.empty and dtheta.empty:
        raise PlotDataError("no varpi or dtheta sweep rows in the CSV")
    for method, chunk in varpi.groupby("method", sort=True):
        chunk = chunk.sort_values("sweep_param")
        ax_rate.plot(chunk["sweep_param"], chunk["worst_sum_rate"],
                     label=method, **_style(method))
    for method, chunk in dtheta.groupby("method", sort=True):
        chunk = chunk.sort_values("sweep_param")
        ax_gain.plot(chunk["sweep_param"], chunk["worst_bp_gain"],
                     label=method, **_style(method))
    ax_rate.set_xlabel("CSI error coefficient")
    ax_rate.set_ylabel("worst-case sum rate (bit/s/Hz)")
    ax_gain.set_xlabel("angle uncertainty (deg)")
    ax_gain.set_ylabel("worst-case beampattern gain (W)")
    for ax in (ax_rate, ax_gain):
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _plot_power_utility(frame: pd.DataFrame):
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=120)
    rows = frame[frame["sweep"] == "power_dbm"]
    if rows.empty:
        raise PlotDataError("no power-sweep rows in the CSV")
    linestyles = ["-", "--", ":", "-."]
    settings = sorted(rows["error_setting"].unique())
    for i, setting in enumerate(settings):
        for method, chunk in rows[rows["error_setting"] == setting].groupby(
                "method", sort=True):
            chunk = chunk.sort_values("sweep_param")
            ax.plot(chunk["sweep_param"], chunk["utility"],
                    label=f"{method} ({setting})",
                    linestyle=linestyles[i % len(linestyles)],
                    **_style(method))
    ax.set_xlabel("transmit power budget (dBm)")
    ax.set_ylabel("worst-case utility")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


_BUILDERS = {
    FigureKind.RHO_TRADEOFF: _plot_rho_tradeoff,
    FigureKind.ERROR_SENSITIVITY: _plot_error_sensitivity,
    FigureKind.POWER_UTILITY: _plot_power_utility,
}


def build_figure(frame: pd.DataFrame, kind: FigureKind):
    """Figure object for a validated data frame; exposed for tests that
    check the plotted values verbatim."""
    return _BUILDERS[kind](frame)


def render(spec: FigureSpec) -> Path:
    """Load, validate, plot, and save. The output file is only written once
    the figure has been fully built."""
    frame = load_rows(spec.input_csv, spec.figure_kind)
    fig = build_figure(frame, spec.figure_kind)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out
