import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from scipy.stats import chisquare

from src.bounds import BoundKind, CodeParams, bound_region
from src.montecarlo import (
    RateRectangle,
    SweepConfig,
    TrialConfig,
    boundary_distance,
    build_priors,
    failure_points,
    failure_rate_sweep,
    rate_points,
    records_to_dataframe,
    run_split_logical_trial,
    run_sweep,
    run_trial,
    sample_error,
    scatter_experiment,
    summarize_scatter,
    trial_rng,
    wilson_interval,
)


class TestStreams:
    def test_same_key_same_draws(self):
        a = trial_rng(42, 3).integers(0, 1 << 30, size=8)
        b = trial_rng(42, 3).integers(0, 1 << 30, size=8)
        np.testing.assert_array_equal(a, b)

    def test_different_keys_differ(self):
        a = trial_rng(42, 3).integers(0, 1 << 30, size=8)
        b = trial_rng(42, 4).integers(0, 1 << 30, size=8)
        c = trial_rng(43, 3).integers(0, 1 << 30, size=8)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestSampleError:
    def test_identity_pattern(self):
        pattern = sample_error(5, 0, 0, trial_rng(0, 0))
        assert pattern.t_l == 0
        assert pattern.t_u == 0
        assert not pattern.assignment.any()

    def test_full_unlocated_support(self):
        pattern = sample_error(5, 5, 0, trial_rng(0, 1))
        assert np.all(pattern.assignment > 0)

    @pytest.mark.parametrize('n,t_u,t_l', [(25, 3, 7), (125, 20, 40), (5, 2, 3)])
    def test_weights_and_disjointness(self, n, t_u, t_l):
        for index in range(20):
            pattern = sample_error(n, t_u, t_l, trial_rng(5, index))
            assert pattern.t_l == t_l
            assert pattern.t_u == t_u
            assert len(set(pattern.located.tolist())) == t_l
            assert list(pattern.located) == sorted(pattern.located)
            assert pattern.to_pauli().n == n
            assert len(pattern.located_set()) == t_l

    @pytest.mark.parametrize('t_u,t_l', [(-1, 0), (0, 6), (3, 3)])
    def test_infeasible_weights(self, t_u, t_l):
        with pytest.raises(ValueError):
            sample_error(5, t_u, t_l, trial_rng(0))

    def test_uniform_over_positions_and_letters(self):
        rng = trial_rng(2024)
        samples = 100_000
        counts = np.zeros((5, 5, 3))
        located_letters = np.zeros(4)
        for _ in range(samples):
            pattern = sample_error(5, 1, 1, rng)
            loc = int(pattern.located[0])
            outside = np.ones(5, dtype=bool)
            outside[loc] = False
            unloc = int(np.flatnonzero(outside & (pattern.assignment > 0))[0])
            counts[loc, unloc, pattern.assignment[unloc] - 1] += 1
            located_letters[pattern.assignment[loc]] += 1

        cells = np.array([counts[a, b, c] for a in range(5) for b in range(5) if a != b for c in range(3)])
        assert len(cells) == 60
        expected = samples / 60
        sigma = math.sqrt(expected * (1 - 1 / 60))
        assert np.all(np.abs(cells - expected) < 5 * sigma)
        assert chisquare(located_letters).pvalue > 1e-6


class TestPriors:
    def test_no_located_positions(self):
        pattern = sample_error(5, 1, 0, trial_rng(1))
        priors = build_priors(pattern, 0.3)
        np.testing.assert_allclose(priors, np.tile([0.7, 0.1, 0.1, 0.1], (5, 1)))

    def test_all_located(self):
        pattern = sample_error(5, 0, 5, trial_rng(1))
        np.testing.assert_allclose(build_priors(pattern, 0.3), np.full((5, 4), 0.25))

    def test_zero_rate_is_floored(self):
        pattern = sample_error(5, 1, 0, trial_rng(1))
        with pytest.warns(UserWarning, match="floored"):
            priors = build_priors(pattern, 0.0)
        assert np.all(priors[:, 1:] > 0.0)

    def test_rate_out_of_range(self):
        pattern = sample_error(5, 0, 0, trial_rng(1))
        with pytest.raises(ValueError):
            build_priors(pattern, 1.0)


class TestConfig:
    def test_levels_beyond_desk_scale_need_flag(self):
        with pytest.raises(ValueError, match="large-scale"):
            TrialConfig(levels=7)
        assert TrialConfig(levels=7, large_scale=True).n == 5 ** 7

    def test_fixed_weights_must_fit(self):
        with pytest.raises(ValueError):
            TrialConfig(levels=1, mode='fixed', t_u=3, t_l=3)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            TrialConfig(mode='iid')

    def test_rectangle_validation(self):
        with pytest.raises(ValueError):
            RateRectangle(p_lo=0.5, p_hi=0.1)
        with pytest.raises(ValueError):
            RateRectangle(q_hi=1.5)

    def test_rectangle_integer_bounds(self):
        rect = RateRectangle(0.0, 0.4, 0.0, 0.7)
        assert rect.located_bounds(3125) == (0, 2187)
        assert rect.unlocated_bounds(3125, 2187) == (0, 375)
        assert rect.unlocated_bounds(10, 0) == (0, 4)

    def test_empty_p_range_at_t_l(self):
        rect = RateRectangle(p_lo=0.1, p_hi=0.15, q_lo=0.0, q_hi=0.0)
        with pytest.raises(ValueError, match="no integer t_u"):
            rect.unlocated_bounds(5, 0)
        with pytest.raises(ValueError, match="holds no integer"):
            rect.located_choices(5)
        with pytest.raises(ValueError, match="holds no integer"):
            TrialConfig(levels=1, trials=20, rectangle=rect)

    def test_located_choices_skip_empty_p_ranges(self):
        rect = RateRectangle(p_lo=0.1, p_hi=0.15, q_lo=0.0, q_hi=1.0)
        choices = rect.located_choices(25).tolist()
        expected = []
        for t_l in range(26):
            remaining = 25 - t_l
            if remaining and math.ceil(0.1 * remaining - 1e-9) <= math.floor(0.15 * remaining + 1e-9):
                expected.append(t_l)
        assert choices == expected
        assert 0 in choices
        assert 12 not in choices and 25 not in choices
        assert RateRectangle(q_hi=1.0).located_choices(25).tolist() == list(range(26))

    def test_config_dict(self):
        data = TrialConfig(levels=2, trials=10, master_seed=9).to_dict()
        assert data['n'] == 25
        assert data['master_seed'] == 9
        assert data['rectangle'] == [0.0, 0.4, 0.0, 0.7]


class TestRunTrial:
    def test_no_error_always_succeeds(self):
        config = TrialConfig(levels=2, mode='fixed', trials=5)
        assert all(run_trial(config, i).success for i in range(5))

    def test_two_located_errors_always_corrected(self):
        config = TrialConfig(levels=1, mode='fixed', t_u=0, t_l=2)
        assert all(run_trial(config, i).success for i in range(100))

    def test_one_unlocated_error_always_corrected(self):
        config = TrialConfig(levels=1, mode='fixed', t_u=1, t_l=0)
        assert all(run_trial(config, i).success for i in range(100))

    def test_reproducible(self):
        config = TrialConfig(levels=3, trials=10, master_seed=17)
        assert run_trial(config, 4) == run_trial(config, 4)

    def test_record_fields(self):
        record = run_trial(TrialConfig(levels=2, master_seed=1), 6)
        assert record.trial == 6
        assert record.stream == '6'
        assert isinstance(record.success, bool)


class TestScatter:
    def test_zero_trials(self):
        assert scatter_experiment(TrialConfig(levels=1, trials=0)) == []

    def test_requires_uniform_mode(self):
        with pytest.raises(ValueError):
            scatter_experiment(TrialConfig(levels=1, mode='fixed', trials=3))

    def test_records_respect_rectangle(self):
        config = TrialConfig(levels=2, trials=200, master_seed=3)
        records = scatter_experiment(config)
        assert [r.trial for r in records] == list(range(200))
        rect = config.rectangle
        df = records_to_dataframe(records, config.n)
        assert df['q'].between(rect.q_lo - 1e-9, rect.q_hi + 1e-9).all()
        assert df['p'].between(rect.p_lo - 1e-9, rect.p_hi + 1e-9).all()

    @pytest.mark.parametrize('rect', [
        RateRectangle(p_lo=0.1, p_hi=0.15, q_lo=0.0, q_hi=1.0),
        RateRectangle(p_lo=0.2, p_hi=0.25, q_lo=0.1, q_hi=0.5),
        RateRectangle(p_lo=0.3, p_hi=0.3, q_lo=0.0, q_hi=0.2),
    ])
    def test_narrow_rectangle_rates(self, rect):
        config = TrialConfig(levels=2, trials=150, master_seed=5, rectangle=rect)
        df = records_to_dataframe(scatter_experiment(config), config.n)
        outside = df[~(df['p'].between(rect.p_lo - 1e-9, rect.p_hi + 1e-9)
                       & df['q'].between(rect.q_lo - 1e-9, rect.q_hi + 1e-9))]
        assert outside.empty, outside[['t_u', 't_l', 'p', 'q']].values.tolist()

    def test_serial_and_parallel_agree(self):
        config = TrialConfig(levels=2, trials=60, master_seed=11)
        assert scatter_experiment(config, threads=1) == scatter_experiment(config, threads=3)

    def test_record_tables(self):
        config = TrialConfig(levels=1, trials=100, master_seed=7)
        records = scatter_experiment(config)
        df = records_to_dataframe(records)
        assert list(df.columns) == ['trial', 't_u', 't_l', 'success']
        failures = failure_points(records, config.n)
        assert list(failures.columns) == ['trial', 't_u', 't_l', 'p', 'q']
        failed = set(df.loc[df['success'] == 0, 'trial'])
        assert set(failures['trial']) == failed


class TestWilson:
    def test_extremes(self):
        lo, hi = wilson_interval(0, 50)
        assert lo == pytest.approx(0.0, abs=1e-15)
        assert 0.0 < hi < 0.1
        lo, hi = wilson_interval(50, 50)
        assert hi == pytest.approx(1.0, abs=1e-15)
        assert 0.9 < lo < 1.0

    def test_symmetric_and_contains_estimate(self):
        lo, hi = wilson_interval(5, 10)
        assert lo + hi == pytest.approx(1.0)
        assert lo < 0.5 < hi

    def test_known_value(self):
        # z = 1.959964, n = 100, 20 failures
        lo, hi = wilson_interval(20, 100)
        assert lo == pytest.approx(0.1334, abs=1e-4)
        assert hi == pytest.approx(0.2888, abs=1e-4)

    def test_no_trials(self):
        assert wilson_interval(0, 0) == (0.0, 0.0)


class TestSweep:
    def test_guaranteed_points(self):
        table = failure_rate_sweep('five', 1, [(0, 0), (0, 2), (1, 0)], 30, master_seed=5)
        assert list(table.columns) == ['t_u', 't_l', 'failures', 'trials', 'rate', 'ci_lo', 'ci_hi']
        assert len(table) == 3
        assert table['rate'].tolist() == [0.0, 0.0, 0.0]
        assert table['trials'].tolist() == [30, 30, 30]

    def test_invalid_point(self):
        with pytest.raises(ValueError):
            failure_rate_sweep('five', 1, [(4, 2)], 5, master_seed=0)

    def test_deterministic_and_parallel_safe(self):
        points = [(10, 5), (15, 10)]
        a = failure_rate_sweep('five', 2, points, 20, master_seed=8)
        b = failure_rate_sweep('five', 2, points, 20, master_seed=8, threads=2)
        pd.testing.assert_frame_equal(a, b)

    def test_sweep_config(self):
        config = SweepConfig(levels=1, points=((0, 0), (1, 0)), trials_per_point=10)
        table = run_sweep(config)
        assert len(table) == 2
        assert config.to_dict()['points'] == [[0, 0], [1, 0]]
        with pytest.raises(ValueError):
            SweepConfig(points=())

    def test_monotone_within_intervals(self):
        grid = [(80, 0), (80, 150), (140, 0), (140, 150)]
        table = failure_rate_sweep('five', 4, grid, 100, master_seed=21).set_index(['t_u', 't_l'])
        for small, large in [((80, 0), (80, 150)), ((80, 0), (140, 0)), ((80, 150), (140, 150)),
                             ((140, 0), (140, 150))]:
            assert table.loc[small, 'ci_lo'] <= table.loc[large, 'ci_hi']

    def test_rate_points(self):
        assert rate_points(3125, [(0.15, 0.0), (0.0, 0.45)]) == [(469, 0), (0, 1406)]


class TestBoundaryComparison:
    @pytest.fixture
    def line(self):
        return pd.DataFrame({'q': [0.0, 0.5], 'p': [0.2, 0.0]})

    def test_signed_distance(self, line):
        points = pd.DataFrame({'q': [0.0, 0.5], 'p': [0.0, 0.5]})
        dist = boundary_distance(points, line)
        norm = math.hypot(0.4, 1.0)
        assert dist[0] == pytest.approx(0.2 / norm)
        assert dist[1] == pytest.approx(-0.5 / norm)

    def test_beyond_curve_is_outside(self, line):
        dist = boundary_distance(pd.DataFrame({'q': [0.7], 'p': [0.0]}), line)
        assert dist[0] == pytest.approx(-0.2)

    def test_summary(self, line):
        records = pd.DataFrame({
            'q': [0.0, 0.05, 0.6, 0.5],
            'p': [0.0, 0.02, 0.3, 0.4],
            'success': [1, 1, 0, 1],
        })
        summary = summarize_scatter(records, line, line, margin=0.05)
        assert summary['inside_trials'] == 2
        assert summary['inside_failure_fraction'] == 0.0
        assert summary['outside_trials'] == 2
        assert summary['outside_failure_fraction'] == 0.5


def test_split_logical_regression_trial():
    outcome = run_split_logical_trial('five', 2, p_dec=0.1)
    assert not outcome.success


@pytest.mark.slow
class TestDeskScaleReplication:
    def test_failure_region_tracks_bounds(self):
        config = TrialConfig(levels=5, trials=2000, master_seed=2024)
        records = scatter_experiment(config, threads=8)
        params = CodeParams(config.n, 1)
        combined = bound_region(params, BoundKind.COMBINED).to_rate_dataframe()
        generalized = bound_region(params, BoundKind.GENERALIZED).to_rate_dataframe()
        summary = summarize_scatter(records_to_dataframe(records, config.n), combined, generalized)
        assert summary['inside_failure_fraction'] < 0.05
        assert summary['outside_failure_fraction'] > 0.5

    def test_axis_thresholds(self):
        n = 5 ** 5
        points = rate_points(n, [(0.15, 0.0), (0.23, 0.0), (0.0, 0.45), (0.0, 0.55)])
        table = failure_rate_sweep('five', 5, points, 200, master_seed=99, threads=8)
        rates = table['rate'].tolist()
        assert rates[0] < 0.1
        assert rates[1] > 0.5
        assert rates[2] < 0.1
        assert rates[3] > 0.5


def test_sweep_rows_follow_point_order():
    config = replace(SweepConfig(levels=1), points=((1, 0), (0, 0), (0, 2)), trials_per_point=3)
    table = run_sweep(config)
    assert list(zip(table['t_u'], table['t_l'])) == [(1, 0), (0, 0), (0, 2)]
