import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selrisk.errors import (
    DimensionMismatch,
    EmptyScenarioSet,
    InvalidAlpha,
    InvalidDistortion,
    NegativeDensity,
)
from selrisk.prob_core import RandomVariable, RandomVector, indicator, make_space, uniform_space
from selrisk.scalar_risk import (
    AVaR,
    Distortion,
    DistortionFunction,
    EssInf,
    NegExpectation,
    ScenarioMax,
    VectorRiskSpec,
    avar_distortion,
    avar_risk,
    distortion_risk,
    ess_inf_risk,
    is_coherent,
    is_convex,
    neg_expectation_risk,
    risk,
    risk_batch,
    scenario_max_risk,
    vector_risk,
)


# Independent oracles -------------------------------------------------------


def avar_minimization(vals, probs, alpha):
    """Expected shortfall of the loss ``-xi`` via its minimization formula,
    evaluated at every atom value (the minimum is attained at one)."""
    loss = -np.asarray(vals, dtype=float)
    return min(c + float(probs @ np.maximum(loss - c, 0.0)) / alpha for c in loss)


def choquet(vals, probs, g):
    """``-(int_0^inf g(P(xi > x)) dx - int_-inf^0 (1 - g(P(xi > x))) dx)``."""
    vals = np.asarray(vals, dtype=float)
    cuts = np.unique(np.concatenate([vals, [0.0]]))
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        tail = float(probs[vals > a].sum())
        gv = float(g.g(tail))
        total += (b - a) * (gv if a >= 0 else gv - 1.0)
    return -total


# Examples ------------------------------------------------------------------


def test_ess_inf_examples():
    sp = uniform_space(2)
    assert ess_inf_risk(RandomVariable([3, 3]), sp) == -3
    assert ess_inf_risk(RandomVariable([-1, 2]), sp) == 1
    assert ess_inf_risk(indicator([0], sp), sp) == 0


def test_avar_indicator_values():
    sp = uniform_space(2)
    one_a = indicator([0], sp)
    assert math.isclose(avar_risk(one_a, sp, 0.75), -1 / 3, abs_tol=1e-12)
    assert math.isclose(avar_risk(-one_a, sp, 0.75), 2 / 3, abs_tol=1e-12)


def test_avar_one_is_negative_mean():
    sp = make_space([0.2, 0.3, 0.5])
    xi = RandomVariable([1.5, -2.0, 0.25])
    assert math.isclose(avar_risk(xi, sp, 1.0), neg_expectation_risk(xi, sp), abs_tol=1e-12)


def test_avar_rejects_bad_alpha():
    with pytest.raises(InvalidAlpha):
        AVaR(0.0)
    with pytest.raises(InvalidAlpha):
        avar_risk(RandomVariable([1.0]), uniform_space(1), 1.5)


def test_avar_distortion_knots():
    assert avar_distortion(1.0).knots == ((0.0, 0.0), (1.0, 1.0))
    assert math.isclose(float(avar_distortion(0.75).g(0.5)), 1 / 3, abs_tol=1e-15)
    assert float(avar_distortion(0.5).g(0.5)) == 0.0


def test_distortion_indicator_values():
    g = DistortionFunction(((0, 0), (0.4, 0.1), (1, 1)))
    sp = make_space([0.3, 0.7])
    beta = 0.3
    one_a = indicator([0], sp)
    assert math.isclose(distortion_risk(one_a, sp, g), -float(g.g(beta)), abs_tol=1e-12)
    assert math.isclose(distortion_risk(-one_a, sp, g), float(g.dual(beta)), abs_tol=1e-12)


def test_distortion_three_point_display():
    g = avar_distortion(0.75)
    sp = make_space([0.2, 0.5, 0.3])
    x1, x3 = -2.0, 1.5
    xi = RandomVariable([x1, 0.0, x3])
    want = -x1 * float(g.dual(0.2)) - x3 * float(g.g(0.3))
    assert math.isclose(distortion_risk(xi, sp, g), want, abs_tol=1e-12)


@pytest.mark.parametrize(
    "knots",
    [((0, 0.1), (1, 1)), ((0, 0), (0.5, 0.6), (0.4, 0.7), (1, 1)), ((0, 0), (0.5, 0.6), (0.7, 0.5), (1, 1)), ((0, 0),)],
)
def test_distortion_validation(knots):
    with pytest.raises(InvalidDistortion):
        DistortionFunction(knots)


def test_scenario_max_examples():
    sp = uniform_space(2)
    xi = RandomVariable([-1.0, 1.0])
    one = ScenarioMax((np.ones(2),), (0.0,))
    assert scenario_max_risk(xi, sp, one) == neg_expectation_risk(xi, sp)
    two = ScenarioMax((np.array([2.0, 0.0]), np.array([0.0, 2.0])), (0.0, 0.0))
    assert scenario_max_risk(xi, sp, two) == 1.0
    assert scenario_max_risk(RandomVariable([0.5, 0.5]), sp, two) == -0.5
    with pytest.raises(EmptyScenarioSet):
        ScenarioMax((), ())
    with pytest.raises(NegativeDensity):
        ScenarioMax((np.array([-1.0, 3.0]),), (0.0,))
    with pytest.raises(NegativeDensity):
        ScenarioMax((np.array([1.0, 3.0]),), (0.0,)).check_space(sp)


def test_vector_risk_examples():
    sp = uniform_space(2)
    C = RandomVector([[1.0, -2.0], [1.0, -2.0]])
    spec = VectorRiskSpec((EssInf(), NegExpectation()))
    assert vector_risk(C, sp, spec).tolist() == [-1.0, 2.0]
    x, y = 2.0, -1.0
    xi = RandomVector([[x, y], [0.0, 0.0]])
    a = AVaR(0.75)
    got = vector_risk(xi, sp, VectorRiskSpec.identical(a, 2))
    one_a = indicator([0], sp)
    want = [x * avar_risk(one_a, sp, 0.75), -y * avar_risk(-one_a, sp, 0.75)]
    assert np.allclose(got, want, atol=1e-12, rtol=0)
    with pytest.raises(DimensionMismatch):
        vector_risk(C, sp, VectorRiskSpec((EssInf(),)))


def test_convexity_and_coherence_flags():
    concave_dual = DistortionFunction(((0, 0), (0.5, 0.2), (1, 1)))
    convex_dual = DistortionFunction(((0, 0), (0.5, 0.8), (1, 1)))
    assert is_convex(Distortion(concave_dual)) and not is_convex(Distortion(convex_dual))
    assert is_coherent(AVaR(0.3)) and is_coherent(EssInf())
    assert not is_coherent(ScenarioMax((np.ones(2),), (0.5,)))
    assert is_convex(ScenarioMax((np.ones(2),), (0.5,)))


# Properties ----------------------------------------------------------------

atom_values = st.lists(st.integers(-12, 12).map(lambda v: v / 4), min_size=1, max_size=7)
weights = st.lists(st.integers(1, 6), min_size=7, max_size=7)
alphas = st.sampled_from([0.05, 0.2, 0.25, 0.5, 0.6, 0.75, 0.9, 1.0])


def _space(vals, w):
    w = np.array(w[: len(vals)], dtype=float)
    return make_space(w / w.sum())


def _specs(sp):
    n = sp.n
    z = np.linspace(0.5, 1.5, n)
    z = z / float(sp.probs @ z)
    return [
        EssInf(),
        NegExpectation(),
        AVaR(0.3),
        Distortion(DistortionFunction(((0, 0), (0.3, 0.05), (0.8, 0.4), (1, 1)))),
        ScenarioMax((z, np.ones(n)), (0.0, 0.1)),
    ]


@given(atom_values, weights, alphas)
def test_avar_matches_minimization_formula(vals, w, alpha):
    sp = _space(vals, w)
    got = avar_risk(RandomVariable(vals), sp, alpha)
    assert abs(got - avar_minimization(vals, sp.probs, alpha)) <= 1e-12


@given(atom_values, weights, alphas)
def test_avar_equals_its_distortion(vals, w, alpha):
    sp = _space(vals, w)
    xi = RandomVariable(vals)
    assert abs(avar_risk(xi, sp, alpha) - distortion_risk(xi, sp, avar_distortion(alpha))) <= 1e-12


@given(atom_values, weights, st.lists(st.integers(0, 10), min_size=3, max_size=3))
def test_distortion_matches_choquet_integral(vals, w, raw):
    ts = [0.0, 0.25, 0.5, 0.75, 1.0]
    gs = np.cumsum([0] + raw + [1])
    gs = gs / gs[-1]
    g = DistortionFunction(tuple(zip(ts, gs)))
    sp = _space(vals, w)
    assert abs(distortion_risk(RandomVariable(vals), sp, g) - choquet(vals, sp.probs, g)) <= 1e-12


@given(atom_values, weights, st.integers(-8, 8).map(lambda v: v / 4))
def test_cash_invariance(vals, w, c):
    sp = _space(vals, w)
    xi = RandomVariable(vals)
    for r in _specs(sp):
        assert abs(risk(xi + c, sp, r) - (risk(xi, sp, r) - c)) <= 1e-12


@given(atom_values, weights, st.lists(st.integers(0, 8), min_size=7, max_size=7))
def test_monotonicity(vals, w, bumps):
    sp = _space(vals, w)
    xi = RandomVariable(vals)
    eta = RandomVariable(np.asarray(vals) + np.array(bumps[: len(vals)]) / 4)
    for r in _specs(sp):
        assert risk(xi, sp, r) >= risk(eta, sp, r) - 1e-12


@given(atom_values, weights, st.sampled_from([0.5, 2.0, 3.0]))
def test_positive_homogeneity(vals, w, c):
    sp = _space(vals, w)
    xi = RandomVariable(vals)
    for r in _specs(sp)[:4]:
        assert abs(risk(xi * c, sp, r) - c * risk(xi, sp, r)) <= 1e-12


@given(atom_values, atom_values, weights)
def test_subadditivity(v1, v2, w):
    n = min(len(v1), len(v2))
    sp = _space(v1[:n], w)
    a, b = RandomVariable(v1[:n]), RandomVariable(v2[:n])
    for r in (AVaR(0.3), AVaR(0.8), Distortion(DistortionFunction(((0, 0), (0.5, 0.1), (1, 1))))):
        assert risk(a + b, sp, r) <= risk(a, sp, r) + risk(b, sp, r) + 1e-12


@given(st.lists(st.integers(-12, 12).map(lambda v: v / 4), min_size=4, max_size=4), alphas)
def test_dilatation_monotone(vals, alpha):
    # conditioning on the partition {0, 1} | {2, 3} of a uniform space
    sp = uniform_space(4)
    v = np.array(vals)
    cond = np.repeat([v[:2].mean(), v[2:].mean()], 2)
    for r in (AVaR(alpha), Distortion(DistortionFunction(((0, 0), (0.6, 0.3), (1, 1))))):
        assert risk(RandomVariable(cond), sp, r) <= risk(RandomVariable(v), sp, r) + 1e-12


@settings(max_examples=50)
@given(st.lists(atom_values.filter(lambda v: len(v) == 5), min_size=1, max_size=6))
def test_batch_matches_scalar(rows):
    sp = make_space([0.1, 0.2, 0.3, 0.15, 0.25])
    values = np.array(rows)
    for r in _specs(sp):
        batch = risk_batch(values, sp, r)
        single = [risk(RandomVariable(row), sp, r) for row in values]
        assert np.allclose(batch, single, atol=1e-12, rtol=0)
