import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trialbandit.environment import (
    MissingCellError,
    OutcomeModel,
    TrialRecord,
    draw_outcome,
    estimate_model,
    optimal_arm,
)


def records_from(triples, d=None):
    out = []
    for i, (ctx, arm, c) in enumerate(triples):
        out.append(TrialRecord(tuple(ctx), arm, c, i))
    return out


def full_cover(k=2, ctx=()):
    return [(ctx, u, 1) for u in range(k)]


def test_empirical_fraction():
    recs = records_from([((), 0, 1), ((), 0, 1), ((), 0, 1), ((), 0, 0), ((), 1, 0)])
    model = estimate_model(recs)
    assert model.theta_at(0, 0) == 0.75
    assert model.counts[(0, 0)] == (3, 4)


def test_empty_cell_without_smoothing_names_cell():
    recs = records_from([((1,), 0, 1), ((1,), 1, 1), ((1,), 3, 0)])
    with pytest.raises(MissingCellError) as err:
        estimate_model(recs, k=4)
    assert (err.value.context, err.value.arm) == (1, 2)
    assert "context=1, arm=2" in str(err.value)


def test_empty_cell_with_smoothing_is_half():
    recs = records_from([((1,), 0, 1), ((1,), 0, 1)])
    model = estimate_model(recs, smoothing=True, k=4)
    assert model.theta_at(1, 3) == 0.5
    assert model.theta_at(0, 0) == 0.5
    assert model.theta_at(1, 0) == (2 + 1) / (2 + 2)


def test_estimate_rejects_mixed_dimensions_and_empty():
    with pytest.raises(ValueError):
        estimate_model([])
    with pytest.raises(ValueError):
        estimate_model(records_from([((1,), 0, 1), ((1, 0), 0, 1)]))


@pytest.mark.parametrize("theta, expected", [(1.0, {1}), (0.0, {0})])
def test_degenerate_draws(theta, expected):
    model = OutcomeModel.from_table([[theta]])
    rng = np.random.default_rng(1)
    assert {draw_outcome(model, [], 0, rng) for _ in range(1000)} == expected


def test_draw_frequency():
    model = OutcomeModel.from_table([[0.3]])
    rng = np.random.default_rng(2)
    freq = np.mean([draw_outcome(model, [], 0, rng) for _ in range(100_000)])
    assert 0.29 <= freq <= 0.31


def test_draw_undefined_cell():
    model = estimate_model(records_from([((0,), 0, 1), ((0,), 1, 0)]))
    with pytest.raises(MissingCellError):
        draw_outcome(model, [1], 0, np.random.default_rng(0))


def test_optimal_arm_rows():
    model = OutcomeModel.from_table([[0.2, 0.6, 0.4, 0.5], [0.7, 0.1, 0.1, 0.1]])
    assert optimal_arm(model, [0]) == (1, 0.6)
    assert optimal_arm(model, [1]) == (0, 0.7)
    tie = OutcomeModel.from_table([[0.5, 0.5]])
    assert optimal_arm(tie, []) == (0, 0.5)


def test_optimal_arm_missing_cell():
    model = estimate_model(records_from([((0,), 0, 1), ((0,), 1, 0)]))
    with pytest.raises(MissingCellError):
        optimal_arm(model, [1])


def test_from_table_validation():
    with pytest.raises(ValueError):
        OutcomeModel.from_table([[0.1], [0.2], [0.3]])
    with pytest.raises(ValueError):
        OutcomeModel.from_table([[1.2]])
    with pytest.raises(ValueError):
        OutcomeModel.from_table([[0.1, 0.2], [0.3]])


def test_estimation_consistency_on_generated_outcomes():
    truth = OutcomeModel.from_table([[0.2, 0.55, 0.9], [0.65, 0.35, 0.05]])
    rng = np.random.default_rng(123)
    n = 4000
    recs = []
    for m in range(2):
        for u in range(3):
            for _ in range(n):
                recs.append(TrialRecord((m,), u, truth.draw(m, u, rng), len(recs)))
    est = estimate_model(recs)
    for (m, u), p in truth.theta.items():
        assert abs(est.theta_at(m, u) - p) <= 4 * math.sqrt(p * (1 - p) / n)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 2), st.integers(0, 1)), min_size=1, max_size=40))
def test_zero_bit_estimate_equals_pooled_fraction(rows):
    rows = rows + [(0, u, 0) for u in range(3)]
    recs = records_from([((), u, c) for _, u, c in rows])
    model = estimate_model(recs)
    for u in range(3):
        succ = sum(c for _, a, c in rows if a == u)
        n = sum(1 for _, a, _ in rows if a == u)
        assert Fraction(model.theta_at(0, u)).limit_denominator(1000) == Fraction(succ, n)
        assert model.counts[(0, u)] == (succ, n)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4))
def test_optimal_arm_invariant_under_proportional_append(copies):
    base = [((), 0, 1), ((), 0, 0), ((), 1, 1), ((), 1, 1), ((), 1, 0), ((), 2, 0)]
    before = optimal_arm(estimate_model(records_from(base)), [])
    after = optimal_arm(estimate_model(records_from(base * (copies + 1))), [])
    assert before == after == (1, 2 / 3)
