import numpy as np
import pytest
from hypothesis import given, strategies as st

from selrisk.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NonPositiveProbability,
    ProbabilitiesDoNotSumToOne,
)
from selrisk.prob_core import (
    RandomVariable,
    RandomVector,
    event_probability,
    expectation,
    indicator,
    make_space,
    quantile_function,
    uniform_space,
)


def test_make_space_accepts_valid_tables():
    assert make_space([0.5, 0.5]).is_uniform
    sp = make_space([0.25, 0.75])
    assert sp.n == 2 and not sp.is_uniform


def test_make_space_renormalizes_tiny_drift():
    sp = make_space([0.5, 0.5 + 5e-10])
    assert abs(sp.probs.sum() - 1.0) < 1e-15


@pytest.mark.parametrize(
    "probs, err",
    [([0.5, 0.6], ProbabilitiesDoNotSumToOne), ([1.0, 0.0], NonPositiveProbability), ([], ValueError)],
)
def test_make_space_rejects(probs, err):
    with pytest.raises(err):
        make_space(probs)


def test_expectation_examples():
    assert expectation(RandomVariable([-1, 1]), uniform_space(2)) == 0
    assert expectation(RandomVariable([2, 1]), make_space([0.5, 0.5])) == 1.5
    assert expectation(RandomVariable([3.5] * 3), make_space([0.2, 0.3, 0.5])) == 3.5
    with pytest.raises(DimensionMismatch):
        expectation(RandomVariable([1, 2, 3]), uniform_space(2))


def test_quantile_examples():
    q = quantile_function(RandomVariable([1, -1]), uniform_space(2))
    assert q.breakpoints == ((-1.0, 0.5), (1.0, 1.0))
    sp = make_space([0.3, 0.7])
    q = quantile_function(indicator([0], sp), sp)
    assert q.breakpoints == ((0.0, 0.7), (1.0, 1.0))
    q = quantile_function(RandomVariable([2.0, 2.0]), uniform_space(2))
    assert q.breakpoints == ((2.0, 1.0),)
    assert q(0.0) == 2.0 and q(1.0) == 2.0


def test_quantile_is_first_value_reaching_level():
    q = quantile_function(RandomVariable([3, 1, 2, 1]), uniform_space(4))
    assert [q(t) for t in (0.1, 0.5, 0.51, 0.75, 0.76, 1.0)] == [1, 1, 2, 2, 3, 3]


def test_indicator_examples():
    sp = uniform_space(2)
    assert indicator([0], sp).values.tolist() == [1, 0]
    assert indicator([], sp).values.tolist() == [0, 0]
    assert indicator([0, 1], sp).values.tolist() == [1, 1]
    assert event_probability([1], make_space([0.25, 0.75])) == 0.75
    with pytest.raises(IndexOutOfRange):
        indicator([2], sp)


def test_random_vector_columns_and_totals():
    C = RandomVector([[1, 1], [2, -1]])
    assert C.n == 2 and C.d == 2
    assert C.column(1).values.tolist() == [1, -1]
    assert C.total().values.tolist() == [2, 1]
    with pytest.raises(DimensionMismatch):
        RandomVector([[1, 2], [3]])


values = st.lists(st.integers(-20, 20).map(lambda v: v / 4), min_size=1, max_size=8)


@given(values, st.randoms(use_true_random=False))
def test_quantile_ignores_atom_order_on_uniform_spaces(vals, rnd):
    sp = uniform_space(len(vals))
    shuffled = list(vals)
    rnd.shuffle(shuffled)
    assert quantile_function(RandomVariable(vals), sp) == quantile_function(RandomVariable(shuffled), sp)


@given(values, st.lists(st.integers(1, 5), min_size=8, max_size=8))
def test_expectation_integrates_quantile(vals, weights):
    w = np.array(weights[: len(vals)], dtype=float)
    sp = make_space(w / w.sum())
    q = quantile_function(RandomVariable(vals), sp)
    prev, total = 0.0, 0.0
    for v, c in q.breakpoints:
        total += v * (c - prev)
        prev = c
    assert abs(total - expectation(RandomVariable(vals), sp)) <= 1e-12
    ts = np.linspace(0, 1, 41)
    qs = [q(t) for t in ts]
    assert all(a <= b for a, b in zip(qs, qs[1:]))
