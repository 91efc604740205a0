"""Experiment-harness tests: aggregation identities, common-random-number
invariance across worker counts, sweep bookkeeping, and the sensitivity
ladder's edge cases.
"""

import math

import pytest

from frameless_aloha import (
    DualThreshold,
    FractionOnly,
    GenieAided,
    ParameterError,
    RunConfig,
    beacon_experiment,
    derive_seed,
    monte_carlo,
    run_contention,
    sensitivity_alpha,
    sweep_optimize,
)


def small_config(**overrides):
    base = dict(n_users=40, target_degree=2.7, policy=DualThreshold(1.0, 0.85), seed=17)
    base.update(overrides)
    return RunConfig(**base)


class TestMonteCarlo:
    def test_single_run_aggregation(self):
        config = small_config()
        agg = monte_carlo(config, 1)
        stats = run_contention(config, seed=derive_seed(config.seed, 0))
        assert agg.run_count == 1
        assert agg.mean_throughput == stats.throughput
        assert agg.mean_fraction == stats.fraction_resolved
        assert agg.se_throughput == 0.0

    def test_matches_manual_aggregation(self):
        config = small_config()
        runs = 25
        agg = monte_carlo(config, runs)
        values = [run_contention(config, seed=derive_seed(config.seed, r)).throughput
                  for r in range(runs)]
        mean = math.fsum(values) / runs
        var = math.fsum((v - mean) ** 2 for v in values) / (runs - 1)
        assert agg.mean_throughput == pytest.approx(mean, rel=1e-15)
        assert agg.se_throughput == pytest.approx(math.sqrt(var / runs), rel=1e-12)

    def test_worker_count_does_not_change_results(self):
        config = small_config()
        assert monte_carlo(config, 24, jobs=1) == monte_carlo(config, 24, jobs=3)

    def test_genie_policy_dispatch(self):
        agg = monte_carlo(small_config(policy=GenieAided()), 10)
        assert agg.mean_throughput > 0.5  # hindsight rule performs well

    def test_rejects_zero_runs(self):
        with pytest.raises(ParameterError):
            monte_carlo(small_config(), 0)


class TestSweepOptimize:
    def test_single_cell_grid(self):
        result = sweep_optimize(40, [2.7], [1.0], [0.85], runs=20, seed=17)
        assert len(result.cells) == 1
        assert result.best is result.cells[0]
        direct = monte_carlo(small_config(), 20)
        assert result.best.stats == direct

    def test_best_is_argmax_over_cells(self):
        result = sweep_optimize(40, [2.5, 2.8], [1.0], [0.8, 0.87], runs=30, seed=3)
        assert len(result.cells) == 4
        top = max(c.stats.mean_throughput for c in result.cells)
        assert result.best.stats.mean_throughput == top

    def test_refinement_adds_cells_and_never_worsens(self):
        coarse = sweep_optimize(40, [2.5, 2.7, 2.9], [1.0], [0.85], runs=20, seed=5)
        fine = sweep_optimize(40, [2.5, 2.7, 2.9], [1.0], [0.85], runs=20, seed=5,
                              refine_step=0.05)
        assert len(fine.cells) > len(coarse.cells)
        assert fine.best.stats.mean_throughput >= coarse.best.stats.mean_throughput
        # refined degrees stay within the coarse grid's span
        assert all(2.5 <= c.target_degree <= 2.9 for c in fine.cells)

    def test_grid_validation(self):
        with pytest.raises(ParameterError):
            sweep_optimize(40, [], [1.0], [0.85], runs=5)
        with pytest.raises(ParameterError):
            sweep_optimize(40, [2.8, 2.7], [1.0], [0.85], runs=5)
        with pytest.raises(ParameterError):
            sweep_optimize(40, [2.7], [1.0], [0.85], runs=5, refine_step=-0.1)


class TestBeaconExperiment:
    def test_cells_are_fraction_only_runs(self):
        result = beacon_experiment(40, 3, [2.8], [0.85], runs=20, seed=9)
        cell = result.cells[0]
        assert cell.throughput_threshold is None
        direct = monte_carlo(
            RunConfig(n_users=40, target_degree=2.8, policy=FractionOnly(0.85),
                      beacon_len=3, seed=9),
            20)
        assert cell.stats == direct

    def test_unit_beacon_reduces_to_plain_fraction_rule(self):
        with_beacon = beacon_experiment(40, 1, [2.8], [0.85], runs=20, seed=9)
        plain = monte_carlo(
            RunConfig(n_users=40, target_degree=2.8, policy=FractionOnly(0.85), seed=9), 20)
        assert with_beacon.cells[0].stats == plain

    def test_longer_beacon_cannot_help(self):
        short = beacon_experiment(60, 1, [2.8], [0.85], runs=40, seed=9)
        long = beacon_experiment(60, 4, [2.8], [0.85], runs=40, seed=9)
        assert long.best.stats.mean_throughput <= short.best.stats.mean_throughput


class TestSensitivityAlpha:
    def test_generous_budget_reaches_alpha_max(self):
        result = sensitivity_alpha(40, 0.9, [2.7], [0.85], alpha_step=0.05, runs=15,
                                   alpha_max=0.1, baseline_throughput=0.8, seed=21)
        assert result.alpha_ub == pytest.approx(0.1)
        assert result.baseline_throughput == 0.8

    def test_impossible_budget_yields_zero_bound(self):
        result = sensitivity_alpha(40, 0.01, [2.7], [0.85], alpha_step=0.05, runs=15,
                                   alpha_max=0.1, baseline_throughput=1.0, seed=21)
        assert result.alpha_ub == 0.0
        assert not result.rungs[0].within_budget

    def test_winner_fields_are_consistent(self):
        result = sensitivity_alpha(40, 0.2, [2.6, 2.8], [0.8, 0.85], alpha_step=0.1,
                                   runs=15, alpha_max=0.1, baseline_throughput=0.8, seed=21)
        zero_rungs = {(r.target_degree, r.fraction_threshold): r.worst_throughput
                      for r in result.rungs if r.alpha_bound == 0.0}
        assert result.throughput_at_zero == zero_rungs[(result.g_at_ub, result.v_at_ub)]
        assert (result.g_at_ub, result.v_at_ub) in zero_rungs

    def test_worst_throughput_is_non_increasing_in_bound(self):
        result = sensitivity_alpha(40, 0.9, [2.7], [0.85], alpha_step=0.05, runs=15,
                                   alpha_max=0.15, baseline_throughput=0.8, seed=21)
        mine = [r.worst_throughput for r in result.rungs
                if (r.target_degree, r.fraction_threshold) == (2.7, 0.85)]
        assert all(a >= b for a, b in zip(mine, mine[1:]))

    def test_validation(self):
        with pytest.raises(ParameterError):
            sensitivity_alpha(40, 0.0, [2.7], [0.85], alpha_step=0.05, runs=5)
        with pytest.raises(ParameterError):
            sensitivity_alpha(40, 0.05, [2.7], [0.85], alpha_step=0.0, runs=5)
        with pytest.raises(ParameterError):
            sensitivity_alpha(40, 0.05, [], [0.85], alpha_step=0.05, runs=5)


class TestCommonRandomNumbers:
    def test_cells_share_their_run_seeds(self):
        # paired cells differ only through the threshold, so a lower fraction
        # threshold can never stop later on any seed
        config_hi = small_config(policy=DualThreshold(1.0, 0.9))
        config_lo = small_config(policy=DualThreshold(1.0, 0.7))
        for r in range(40):
            seed = derive_seed(17, r)
            hi = run_contention(config_hi, seed=seed)
            lo = run_contention(config_lo, seed=seed)
            assert lo.slots <= hi.slots
