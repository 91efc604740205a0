"""Monte-Carlo aggregation, parameter sweeps, and robustness studies.

All experiments draw per-run seeds 0..runs-1 from the base seed, so grid
cells share random numbers; paired comparisons between cells (different
target degree, threshold, or estimation error) are therefore much tighter
than their individual standard errors suggest.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ParameterError
from .simulator import RunConfig, derive_seed, genie_run, run_contention
from .termination import DualThreshold, FractionOnly, GenieAided

__all__ = [
    "AggregateStats",
    "LadderRung",
    "SweepCell",
    "SweepResult",
    "SensitivityResult",
    "monte_carlo",
    "sweep_optimize",
    "sensitivity_alpha",
    "beacon_experiment",
]


@dataclass(frozen=True)
class AggregateStats:
    """Sample means over runs with their standard errors (std / sqrt(n))."""

    mean_throughput: float
    se_throughput: float
    mean_fraction: float
    se_fraction: float
    mean_slots_norm: float
    se_slots_norm: float
    mean_replicas: float
    se_replicas: float
    run_count: int


def _mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def _run_values(config: RunConfig, seed: int) -> tuple[float, float, float, float]:
    runner = genie_run if isinstance(config.policy, GenieAided) else run_contention
    stats = runner(config, seed, record_trajectory=False)
    return (
        stats.throughput,
        stats.fraction_resolved,
        stats.slots / config.n_users,
        stats.replicas_per_user,
    )


def _run_chunk(config: RunConfig, seeds: list[int]) -> list[tuple[float, float, float, float]]:
    return [_run_values(config, s) for s in seeds]


def _aggregate(values: list[tuple[float, float, float, float]]) -> AggregateStats:
    cols = list(zip(*values))
    (mt, st), (mf, sf), (ms, ss), (mr, sr) = (_mean_se(list(c)) for c in cols)
    return AggregateStats(mt, st, mf, sf, ms, ss, mr, sr, run_count=len(values))


def monte_carlo(config: RunConfig, runs: int, jobs: int = 1) -> AggregateStats:
    """Average `runs` independent contention periods.

    Per-run seeds are derived from `config.seed`; the aggregate is identical
    for any `jobs` because runs are reduced in seed order.
    """
    if runs < 1:
        raise ParameterError(f"runs must be a positive count, got {runs}")
    seeds = [derive_seed(config.seed, r) for r in range(runs)]
    if jobs <= 1 or runs < 4:
        values = [_run_values(config, s) for s in seeds]
    else:
        step = math.ceil(len(seeds) / (jobs * 4))
        chunks = [seeds[i:i + step] for i in range(0, len(seeds), step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = pool.map(_run_chunk, [config] * len(chunks), chunks)
            values = [v for chunk in out for v in chunk]
    return _aggregate(values)


@dataclass(frozen=True)
class SweepCell:
    target_degree: float
    throughput_threshold: float | None
    fraction_threshold: float
    stats: AggregateStats


@dataclass(frozen=True)
class SweepResult:
    g_values: tuple[float, ...]
    s_values: tuple[float, ...]
    v_values: tuple[float, ...]
    cells: tuple[SweepCell, ...]
    best: SweepCell


def _check_grid(name: str, grid: Sequence[float]) -> tuple[float, ...]:
    vals = tuple(float(x) for x in grid)
    if not vals:
        raise ParameterError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ParameterError(f"{name} must be strictly increasing")
    return vals


def _eval_cells(base: RunConfig, cells: list[tuple[float, float | None, float]],
                runs: int, jobs: int) -> list[SweepCell]:
    out = []
    for g, s, v in cells:
        policy = FractionOnly(v) if s is None else DualThreshold(s, v)
        config = replace(base, target_degree=g, policy=policy)
        out.append(SweepCell(g, s, v, monte_carlo(config, runs, jobs=jobs)))
    return out


def _argmax_cell(cells: Sequence[SweepCell]) -> SweepCell:
    best = cells[0]
    for c in cells[1:]:
        if c.stats.mean_throughput > best.stats.mean_throughput:
            best = c
    return best


def sweep_optimize(n_users: int, g_grid: Sequence[float], s_grid: Sequence[float],
                   v_grid: Sequence[float], runs: int, *, erasure_prob: float = 0.0,
                   alpha: float = 0.0, beacon_len: int = 1, horizon_factor: float = 10.0,
                   seed: int = 1, jobs: int = 1, refine_step: float | None = None,
                   refine_radius: float = 0.04) -> SweepResult:
    """Grid-search the dual-threshold rule for mean throughput.

    With `refine_step` a second, finer pass is run around the coarse
    incumbent (over target degree and fraction threshold, within the coarse
    grid's span); ties keep the earliest cell in grid order.
    """
    gs = _check_grid("g_grid", g_grid)
    ss = _check_grid("s_grid", s_grid)
    vs = _check_grid("v_grid", v_grid)
    base = RunConfig(n_users=n_users, target_degree=gs[0], policy=DualThreshold(ss[0], vs[0]),
                     erasure_prob=erasure_prob, alpha=alpha, beacon_len=beacon_len,
                     horizon_factor=horizon_factor, seed=seed)
    coarse = [(g, s, v) for g in gs for s in ss for v in vs]
    cells = _eval_cells(base, coarse, runs, jobs)
    best = _argmax_cell(cells)
    if refine_step is not None:
        if not refine_step > 0:
            raise ParameterError(f"refine_step must be positive, got {refine_step}")
        steps = int(round(refine_radius / refine_step))
        fine_g = _refine_axis(best.target_degree, refine_step, steps, gs)
        fine_v = _refine_axis(best.fraction_threshold, refine_step, steps, vs)
        seen = {(c.target_degree, c.throughput_threshold, c.fraction_threshold) for c in cells}
        fine = [(g, best.throughput_threshold, v) for g in fine_g for v in fine_v
                if (g, best.throughput_threshold, v) not in seen]
        cells.extend(_eval_cells(base, fine, runs, jobs))
        best = _argmax_cell(cells)
    return SweepResult(gs, ss, vs, tuple(cells), best)


def _refine_axis(center: float, step: float, steps: int, grid: tuple[float, ...]) -> list[float]:
    lo, hi = grid[0], grid[-1]
    vals = [round(center + k * step, 12) for k in range(-steps, steps + 1)]
    return [v for v in vals if lo <= v <= hi]


def beacon_experiment(n_users: int, beacon_len: int, g_grid: Sequence[float],
                      v_grid: Sequence[float], runs: int, *, erasure_prob: float = 0.0,
                      alpha: float = 0.0, horizon_factor: float = 10.0, seed: int = 1,
                      jobs: int = 1) -> SweepResult:
    """Grid-search the fraction-only rule under an L-slot beacon.

    Throughput charges the beacon: resolved / (slots + L - 1).  With L = 1
    this reduces exactly to the fraction-only variant of the plain setup.
    """
    gs = _check_grid("g_grid", g_grid)
    vs = _check_grid("v_grid", v_grid)
    base = RunConfig(n_users=n_users, target_degree=gs[0], policy=FractionOnly(vs[0]),
                     erasure_prob=erasure_prob, alpha=alpha, beacon_len=beacon_len,
                     horizon_factor=horizon_factor, seed=seed)
    cells = _eval_cells(base, [(g, None, v) for g in gs for v in vs], runs, jobs)
    return SweepResult(gs, (), vs, tuple(cells), _argmax_cell(cells))


@dataclass(frozen=True)
class LadderRung:
    """Worst-case mean throughput of one candidate up to one error bound."""

    alpha_bound: float
    target_degree: float
    fraction_threshold: float
    worst_throughput: float
    within_budget: bool


@dataclass(frozen=True)
class SensitivityResult:
    alpha_ub: float
    g_at_ub: float
    v_at_ub: float
    loss_budget: float
    baseline_throughput: float
    throughput_at_zero: float
    rungs: tuple[LadderRung, ...]


def sensitivity_alpha(n_users: int, loss_budget: float, g_grid: Sequence[float],
                      v_grid: Sequence[float], alpha_step: float, runs: int, *,
                      alpha_max: float = 0.2, baseline_throughput: float | None = None,
                      genie_runs: int | None = None, beacon_len: int = 1,
                      horizon_factor: float = 10.0, seed: int = 1,
                      jobs: int = 1) -> SensitivityResult:
    """Largest symmetric population-estimate error the scheme tolerates.

    For each candidate (target degree, fraction threshold) the worst-case
    mean throughput over errors in {-a, ..., 0, ..., +a} is tracked while the
    bound a climbs in `alpha_step` increments up to `alpha_max`; the reported
    bound is the largest a at which some candidate stays within
    `loss_budget` of the genie baseline, together with that candidate.

    The baseline is the genie benchmark's mean throughput; when not supplied
    it is computed as the best genie mean over `g_grid`.
    """
    if not 0.0 < loss_budget <= 1.0:
        raise ParameterError(f"loss_budget must lie in (0, 1], got {loss_budget}")
    if not alpha_step > 0:
        raise ParameterError(f"alpha_step must be positive, got {alpha_step}")
    if not alpha_max > 0:
        raise ParameterError(f"alpha_max must be positive, got {alpha_max}")
    gs = _check_grid("g_grid", g_grid)
    vs = _check_grid("v_grid", v_grid)
    if baseline_throughput is None:
        gruns = genie_runs if genie_runs is not None else runs
        baseline_throughput = max(
            monte_carlo(RunConfig(n_users=n_users, target_degree=g, policy=GenieAided(),
                                  beacon_len=beacon_len, seed=seed),
                        gruns, jobs=jobs).mean_throughput
            for g in gs
        )
    floor = (1.0 - loss_budget) * baseline_throughput

    def cell_mean(g: float, v: float, a: float) -> float:
        config = RunConfig(n_users=n_users, target_degree=g, policy=DualThreshold(1.0, v),
                           alpha=a, beacon_len=beacon_len, horizon_factor=horizon_factor,
                           seed=seed)
        return monte_carlo(config, runs, jobs=jobs).mean_throughput

    candidates = [(g, v) for g in gs for v in vs]
    worst = {cand: cell_mean(*cand, 0.0) for cand in candidates}
    at_zero = dict(worst)
    rungs: list[LadderRung] = [
        LadderRung(0.0, g, v, worst[(g, v)], worst[(g, v)] >= floor) for g, v in candidates
    ]
    survivors = [c for c in candidates if worst[c] >= floor]
    if not survivors:
        best = max(candidates, key=lambda c: worst[c])
        return SensitivityResult(0.0, best[0], best[1], loss_budget, baseline_throughput,
                                 at_zero[best], tuple(rungs))
    alpha_ub = 0.0
    winner = max(survivors, key=lambda c: worst[c])
    k = 1
    while k * alpha_step <= alpha_max + 1e-12:
        bound = k * alpha_step
        for cand in candidates:
            g, v = cand
            worst[cand] = min(worst[cand], cell_mean(g, v, bound), cell_mean(g, v, -bound))
            rungs.append(LadderRung(bound, g, v, worst[cand], worst[cand] >= floor))
        survivors = [c for c in candidates if worst[c] >= floor]
        if not survivors:
            break
        alpha_ub = bound
        winner = max(survivors, key=lambda c: worst[c])
        k += 1
    return SensitivityResult(alpha_ub, winner[0], winner[1], loss_budget,
                             baseline_throughput, at_zero[winner], tuple(rungs))
