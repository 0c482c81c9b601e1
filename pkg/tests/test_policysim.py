from __future__ import annotations

import json
import math
import random
from collections import Counter

import pytest

from leadplan.errors import (
    IndexOutOfRange,
    NotEnoughProjects,
    UnknownPolicy,
    ZeroTotalValue,
)
from leadplan.policysim import (
    Policy,
    cumulative_curve,
    parse_policy,
    policy_ordering,
    quantile_table,
    simulate,
    trajectories_json,
    trajectory_csv_rows,
)
from leadplan.synth import generate_portfolio

from conftest import make_project


class TestPolicyType:
    def test_stochastic_requires_seed(self):
        with pytest.raises(ValueError):
            Policy("uniform_random")
        Policy("uniform_random", seed=1)

    def test_deterministic_rejects_seed(self):
        with pytest.raises(ValueError):
            Policy("by_value", seed=1)

    def test_unknown_kind(self):
        with pytest.raises(UnknownPolicy):
            Policy("by_vibes")

    def test_alias_accepted(self):
        assert Policy("by_length_excavated").kind == "by_length"

    def test_parse_defaults_seed_for_stochastic(self):
        assert parse_policy("uniform_random").seed == 0
        assert parse_policy("by_value").seed is None


def portfolio():
    return [
        make_project("a", 40.0, 4.0, lines=4, length=50.0),
        make_project("b", 10.0, 1.0, lines=1, length=200.0),
        make_project("c", 0.0, 2.0, lines=2, length=120.0),
        make_project("d", 24.0, 8.0, lines=8, length=80.0),
    ]


class TestPolicyOrdering:
    def test_by_value_full_sort(self):
        order = policy_ordering(Policy("by_value"), portfolio(), 4)
        assert order == ["a", "d", "b", "c"]

    def test_by_bcr_matches_ranking(self):
        from leadplan.prioritize import rank_projects

        order = policy_ordering(Policy("by_bcr"), portfolio(), 4)
        assert order == [r.project_id for r in rank_projects(portfolio())]

    def test_by_length_descending(self):
        order = policy_ordering(Policy("by_length"), portfolio(), 4)
        assert order == ["b", "c", "d", "a"]

    def test_by_lead_per_meter(self):
        projects = portfolio()
        order = policy_ordering(Policy("by_lead_per_meter"), projects, 4)
        density = {p.project_id: p.lead_line_count / p.segment.length_m
                   for p in projects}
        assert order == sorted(density, key=lambda k: (-density[k], k))

    def test_not_enough_projects(self):
        with pytest.raises(NotEnoughProjects):
            policy_ordering(Policy("by_value"), portfolio(), 5)

    def test_uniform_is_reproducible(self):
        p = Policy("uniform_random", seed=42)
        first = policy_ordering(p, portfolio(), 4)
        second = policy_ordering(p, portfolio(), 4)
        assert first == second

    def test_weighted_positive_before_zeros(self):
        projects = [make_project("zero1", 0.0, 1.0), make_project("pos", 5.0, 1.0),
                    make_project("zero2", 0.0, 1.0)]
        for seed in range(10):
            order = policy_ordering(Policy("weighted_by_exposure", seed=seed),
                                    projects, 3)
            assert order[0] == "pos"
            assert set(order[1:]) == {"zero1", "zero2"}

    def test_uniform_permutation_frequencies(self):
        """Chi-square over all 6 orderings of 3 projects, 60k trials."""
        from scipy import stats

        projects = [make_project(k, 1.0, 1.0) for k in ("x", "y", "z")]
        counts = Counter()
        trials = 60_000
        for i in range(trials):
            order = policy_ordering(Policy("uniform_random", seed=i), projects, 3)
            counts[tuple(order)] += 1
        assert len(counts) == 6
        observed = [counts[p] for p in sorted(counts)]
        _, pvalue = stats.chisquare(observed)
        assert pvalue > 1e-3
        # and every ordering lands within 5 sigma of the uniform expectation
        expected = trials / 6
        sigma = math.sqrt(trials * (1 / 6) * (5 / 6))
        assert all(abs(c - expected) < 5 * sigma for c in observed)


class TestSimulate:
    def test_deterministic_single_run_median_equals_run(self):
        outcomes = simulate([Policy("by_value")], portfolio(), n=4, iterations=7)
        out = outcomes[0]
        assert len(out.runs) == 1
        assert out.median_per_step == out.runs[0].per_step

    def test_stochastic_gets_iterations_runs(self):
        outcomes = simulate([Policy("uniform_random", seed=3)], portfolio(),
                            n=4, iterations=5)
        assert len(outcomes[0].runs) == 5
        seeds = {r.policy.seed for r in outcomes[0].runs}
        assert len(seeds) == 5  # independent derived seeds, recorded for replay

    def test_zero_value_portfolio_flat(self):
        projects = [make_project(f"p{i}", 0.0, 1.0) for i in range(5)]
        outcomes = simulate([Policy("by_value"), Policy("uniform_random", seed=1)],
                            projects, n=5, iterations=3)
        for out in outcomes:
            assert all(step.exposure_years == 0.0 for step in out.median_per_step)

    def test_by_value_trajectory_dominates_pointwise(self):
        projects, child_counts = generate_portfolio(seed=5)
        n = 20
        outcomes = simulate(
            [Policy("by_value"), Policy("by_length"),
             Policy("uniform_random", seed=2)],
            projects, n=n, iterations=9, child_counts=child_counts,
        )
        by_value = outcomes[0].median_per_step
        # greedy argmax prefix: no ordering can beat it at any step
        for other in outcomes[1:]:
            for k in range(n):
                assert by_value[k].exposure_years >= \
                    other.median_per_step[k].exposure_years - 1e-9

    def test_trajectories_monotone(self):
        projects, child_counts = generate_portfolio(seed=6)
        outcomes = simulate(
            [Policy("by_bcr"), Policy("weighted_by_exposure", seed=4)],
            projects, n=len(projects), iterations=4, child_counts=child_counts,
        )
        for out in outcomes:
            for run in out.runs:
                for a, b in zip(run.per_step, run.per_step[1:]):
                    assert b.exposure_years >= a.exposure_years
                    assert b.children >= a.children
                    assert b.lines >= a.lines
                    assert b.cost >= a.cost

    def test_identical_seeds_bit_identical(self):
        projects, child_counts = generate_portfolio(seed=7)
        kwargs = dict(n=15, iterations=6, child_counts=child_counts)
        first = simulate([Policy("weighted_by_exposure", seed=9)], projects, **kwargs)
        second = simulate([Policy("weighted_by_exposure", seed=9)], projects, **kwargs)
        assert first == second
        assert json.dumps(trajectories_json(first)) == \
            json.dumps(trajectories_json(second))


class TestWeightedSampling:
    def test_first_draw_distribution(self):
        """Empirical first-draw frequencies track the value weights."""
        from scipy import stats

        weights = {"a": 5.0, "b": 3.0, "c": 1.5, "d": 0.5}
        projects = [make_project(k, v, 1.0) for k, v in weights.items()]
        trials = 20_000
        counts = Counter()
        for i in range(trials):
            order = policy_ordering(Policy("weighted_by_exposure", seed=i),
                                    projects, 1)
            counts[order[0]] += 1
        total = sum(weights.values())
        expected = [trials * weights[k] / total for k in sorted(weights)]
        observed = [counts[k] for k in sorted(weights)]
        _, pvalue = stats.chisquare(observed, expected)
        assert pvalue > 1e-3


class TestCumulativeCurve:
    def test_uniform_values(self):
        projects = [make_project(f"p{i}", 5.0, 1.0) for i in range(10)]
        ordering = [p.project_id for p in projects]
        curve = cumulative_curve(ordering, projects)
        for k, point in enumerate(curve, start=1):
            assert point.fraction == pytest.approx(k / 10)
        assert curve[-1].fraction == pytest.approx(1.0)

    def test_zero_total_value(self):
        projects = [make_project("a", 0.0, 1.0)]
        with pytest.raises(ZeroTotalValue):
            cumulative_curve(["a"], projects)

    def test_value_sorted_curve_concave(self):
        projects, _ = generate_portfolio(seed=8)
        ordering = policy_ordering(Policy("by_value"), projects, len(projects))
        curve = cumulative_curve(ordering, projects)
        fractions = [p.fraction for p in curve]
        assert all(b >= a - 1e-12 for a, b in zip(fractions, fractions[1:]))
        increments = [fractions[0]] + [
            b - a for a, b in zip(fractions, fractions[1:])
        ]
        assert all(b <= a + 1e-9 for a, b in zip(increments, increments[1:]))


class TestQuantileTable:
    def curve(self):
        projects = [make_project(f"p{i}", float(10 - i), 1.0) for i in range(10)]
        ordering = [p.project_id for p in projects]
        return cumulative_curve(ordering, projects)

    def test_final_is_hundred(self):
        assert quantile_table(self.curve(), [10]) == [(10, 100.0)]

    def test_empty_indices(self):
        assert quantile_table(self.curve(), []) == []

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            quantile_table(self.curve(), [11])
        with pytest.raises(IndexOutOfRange):
            quantile_table(self.curve(), [0])

    def test_one_decimal_rendering(self):
        table = quantile_table(self.curve(), [1, 5])
        assert table == [(1, pytest.approx(18.2)), (5, pytest.approx(72.7))]


class TestExports:
    def test_csv_rows_cover_runs_and_median(self):
        projects, child_counts = generate_portfolio(seed=9)
        outcomes = simulate([Policy("uniform_random", seed=1)], projects, n=5,
                            iterations=3, child_counts=child_counts)
        rows = trajectory_csv_rows(outcomes)
        assert rows[0] == ["policy", "iteration", "step", "exposure_years",
                           "children", "lines", "cost"]
        iterations = {r[1] for r in rows[1:]}
        assert iterations == {0, 1, 2, "median"}

    def test_json_shape(self):
        projects, child_counts = generate_portfolio(seed=10)
        outcomes = simulate([Policy("by_value")], projects, n=3,
                            child_counts=child_counts)
        payload = trajectories_json(outcomes)
        assert payload[0]["policy"] == "by_value"
        assert len(payload[0]["median"]) == 3
        assert {"step", "exposure_years", "children", "lines", "cost"} \
            <= payload[0]["median"][0].keys()
