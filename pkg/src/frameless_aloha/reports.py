"""CSV emission and figure rendering for experiment outputs.

CSV files are written byte-stably: '.' decimal separator, floats at 6
significant digits, '\n' line endings, no locale or clock dependence.
Figures are rendered straight to files through the Agg backend.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .asymptotic import AsymptoticCurve
from .experiments import AggregateStats, SensitivityResult, SweepResult
from .simulator import RunStats


def format_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(format_value(v) for v in row) + "\n")


_AGG_FIELDS = (
    "mean_throughput", "se_throughput", "mean_fraction", "se_fraction",
    "mean_slots_norm", "se_slots_norm", "mean_replicas", "se_replicas", "run_count",
)


def _agg_row(stats: AggregateStats) -> list[object]:
    return [getattr(stats, f) for f in _AGG_FIELDS]


def write_aggregate_csv(path, config_cols: Sequence[str],
                        rows: Sequence[tuple[Sequence[object], AggregateStats]]) -> None:
    header = list(config_cols) + list(_AGG_FIELDS)
    write_csv(path, header, [list(cfg) + _agg_row(st) for cfg, st in rows])


def write_sweep_csv(path, result: SweepResult) -> None:
    header = ["target_degree", "throughput_threshold", "fraction_threshold",
              *_AGG_FIELDS, "best"]
    rows = [
        [cell.target_degree, cell.throughput_threshold, cell.fraction_threshold,
         *_agg_row(cell.stats), cell is result.best]
        for cell in result.cells
    ]
    write_csv(path, header, rows)


def write_curve_csv(path, curve: AsymptoticCurve) -> None:
    write_csv(path, ["ratio", "p_resolve", "throughput"],
              [[p.ratio, p.p_resolve, p.throughput] for p in curve.points])


def write_sensitivity_csv(path, n_users: int, result: SensitivityResult) -> None:
    write_csv(
        path,
        ["n_users", "loss_budget", "alpha_ub", "g_at_ub", "v_at_ub",
         "baseline_throughput", "throughput_at_zero"],
        [[n_users, result.loss_budget, result.alpha_ub, result.g_at_ub, result.v_at_ub,
          result.baseline_throughput, result.throughput_at_zero]],
    )


def write_sensitivity_ladder_csv(path, result: SensitivityResult) -> None:
    write_csv(
        path,
        ["alpha_bound", "target_degree", "fraction_threshold", "worst_throughput",
         "within_budget"],
        [[r.alpha_bound, r.target_degree, r.fraction_threshold, r.worst_throughput,
          r.within_budget] for r in result.rungs],
    )


def render_trajectory(path, stats: RunStats, n_users: int, beacon_len: int = 1) -> None:
    """Resolved fraction and instantaneous throughput of one run, per slot."""
    if not stats.trajectory:
        raise ValueError("run stats carry no trajectory")
    slots = [m for m, _ in stats.trajectory]
    fraction = [nr / n_users for _, nr in stats.trajectory]
    throughput = [nr / (m + beacon_len - 1) for m, nr in stats.trajectory]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(slots, fraction, label="resolved fraction")
    ax.plot(slots, throughput, label="instantaneous throughput")
    ax.set_xlabel("slots")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_curve(path, curve: AsymptoticCurve) -> None:
    ratios = [p.ratio for p in curve.points]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(ratios, [p.p_resolve for p in curve.points], label="resolution probability")
    ax.plot(ratios, [p.throughput for p in curve.points], label="throughput")
    ax.axvline(curve.best_ratio, color="gray", ls=":", lw=1)
    ax.set_xlabel("slots per user")
    ax.set_title(f"target degree {curve.target_degree:g}")
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(path, result: SweepResult, value: str = "mean_throughput") -> None:
    """Mean throughput across the sweep grid; heatmap over (degree, fraction
    threshold) when both axes have several values, line plot otherwise."""
    fig, ax = plt.subplots(figsize=(6.0, 3.9))
    gs, vs = result.g_values, result.v_values
    if len(gs) > 1 and len(vs) > 1:
        grid = [[float("nan")] * len(gs) for _ in vs]
        for cell in result.cells:
            if cell.target_degree in gs and cell.fraction_threshold in vs:
                grid[vs.index(cell.fraction_threshold)][gs.index(cell.target_degree)] = \
                    getattr(cell.stats, value)
        im = ax.imshow(grid, origin="lower", aspect="auto",
                       extent=(min(gs), max(gs), min(vs), max(vs)))
        fig.colorbar(im, ax=ax, label=value)
        ax.plot([result.best.target_degree], [result.best.fraction_threshold], "r*", ms=10)
        ax.set_xlabel("target degree")
        ax.set_ylabel("fraction threshold")
    else:
        xs = [c.target_degree if len(gs) > 1 else c.fraction_threshold for c in result.cells]
        ax.plot(xs, [getattr(c.stats, value) for c in result.cells], marker="o")
        ax.set_xlabel("target degree" if len(gs) > 1 else "fraction threshold")
        ax.set_ylabel(value)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sensitivity(path, result: SensitivityResult) -> None:
    """Worst-case throughput per candidate as the error bound grows."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    by_cand: dict[tuple[float, float], list[tuple[float, float]]] = {}
    for r in result.rungs:
        by_cand.setdefault((r.target_degree, r.fraction_threshold), []).append(
            (r.alpha_bound, r.worst_throughput))
    for (g, v), pts in sorted(by_cand.items()):
        pts.sort()
        ax.plot([a for a, _ in pts], [w for _, w in pts], marker="o",
                label=f"degree {g:g}, threshold {v:g}")
    floor = (1.0 - result.loss_budget) * result.baseline_throughput
    ax.axhline(floor, color="gray", ls="--", lw=1, label="budget floor")
    ax.axvline(result.alpha_ub, color="red", ls=":", lw=1)
    ax.set_xlabel("estimation error bound")
    ax.set_ylabel("worst-case mean throughput")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
