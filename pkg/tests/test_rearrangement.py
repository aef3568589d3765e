import numpy as np
from hypothesis import given, strategies as st
from pytest import approx, mark, raises

from envlab.classical import lp_norm
from envlab.domain import StepFunction, TensorGrid
from envlab.errors import InvalidProfile, ValidationError
from envlab.rearrangement import (AnalyticProfile, ValueMassProfile, distribution, rearrange,
                                  sample_analytic)

from .strategies import step_functions


def two_plateau():
    # 3 on measure 0.2, 1 on measure 0.5, 0 on the remaining 0.3
    g = TensorGrid([[0, 0.1, 0.3, 0.5, 0.7, 1.0]])
    return StepFunction(g, [1, 3, 1, 1, 0])


def inf_definition(f, t):
    """f*(t) = inf{s > 0 : mu_f(s) <= t}; the inf is attained at 0 or a value."""
    cands = np.concatenate([[0.0], np.unique(f.values)])
    for s in cands:
        if distribution(f, s) <= t:
            return s
    raise AssertionError("unreachable")


@mark.parametrize("s, expected", [(2, 0.2), (0.5, 0.7), (3, 0.0), (10, 0.0)])
def test_distribution_two_plateau(s, expected):
    assert distribution(two_plateau(), s) == approx(expected, abs=1e-15)


def test_rearrange_two_plateau():
    prof = rearrange(two_plateau())
    assert prof.values.tolist() == [3.0, 1.0]
    assert prof.widths.tolist() == approx([0.2, 0.5], abs=1e-15)


def test_rearrange_indicator():
    g = TensorGrid([[0, 0.25, 0.6, 1]])
    prof = rearrange(StepFunction(g, [0, 1, 1]))
    assert list(prof) == [(1.0, approx(0.75))]


def test_rearrange_constant():
    g = TensorGrid([[0, 1, 2], [0, 3]])
    prof = rearrange(StepFunction.constant(g, 2.0))
    assert list(prof) == [(2.0, 6.0)]


def test_rearrange_zero():
    g = TensorGrid([[0, 1]])
    assert rearrange(StepFunction(g, [0.0])).is_empty


@given(step_functions(max_dim=3, max_cells=5), st.lists(st.floats(0, 1e3), min_size=5, max_size=20))
def test_equimeasurable(f, levels):
    prof = rearrange(f)
    for s in levels + list(f.values.ravel()):
        assert prof.distribution(s) == distribution(f, s)
        naive = np.sum(f.grid.cell_measures[f.values > s])
        assert distribution(f, s) == approx(naive, rel=1e-14, abs=1e-300)


@given(step_functions(max_dim=2, max_cells=6))
def test_matches_inf_definition(f):
    prof = rearrange(f)
    ts = np.concatenate([prof.edges * (1 + 1e-9), prof.edges * (1 - 1e-9),
                         np.linspace(0, f.grid.volume, 17)[:-1]])
    for t in ts:
        assert prof.evaluate(t) == inf_definition(f, t)


@given(step_functions())
def test_profile_monotone_and_mass(f):
    prof = rearrange(f)
    assert np.all(np.diff(prof.values) < 0)
    assert prof.total_mass == approx(f.supp_measure, rel=1e-12)


@given(step_functions(), st.sampled_from([0.5, 1.0, 2.0, 3.7]))
def test_lp_equals_direct_integral(f, p):
    direct = np.sum(f.values ** p * f.grid.cell_measures) ** (1 / p)
    assert lp_norm(rearrange(f), p) == approx(direct, rel=1e-12)


def test_profile_evaluation_right_continuous():
    prof = ValueMassProfile([3, 1], [0.2, 0.5])
    assert prof.evaluate(0.0) == 3
    assert prof.evaluate(0.2) == 1
    assert prof.evaluate_left(0.2) == 3
    assert prof.evaluate(0.7) == 0
    assert prof.evaluate(5) == 0


@mark.parametrize("values, widths", [([1, 2], [1, 1]), ([1, 1], [1, 1]), ([2, 1], [1, 0]),
                                     ([-1], [1]), ([2, np.inf], [1, 1])])
def test_profile_validation(values, widths):
    with raises(ValidationError):
        ValueMassProfile(values, widths)


def test_profile_csv_round_trip():
    prof = ValueMassProfile([3, 1 / 3], [0.2, 0.1])
    text = prof.to_csv()
    assert text.splitlines()[0] == "value,width"
    assert ValueMassProfile.from_csv(text) == prof


def test_profile_restrict():
    prof = ValueMassProfile([3, 2, 1], [0.2, 0.3, 0.5])
    assert list(prof.restrict(0.35)) == [(3, 0.2), (2, approx(0.15))]


def test_sample_analytic_dyadic_example():
    lower, upper = sample_analytic(AnalyticProfile(1.0), 2)
    assert list(lower) == [(4.0, 0.25), (2.0, 0.25), (1.0, 0.5)]
    assert list(upper) == [(np.inf, 0.25), (4.0, 0.25), (2.0, 0.5)]


@mark.parametrize("r, gamma, s", [(1, 0, 1), (2, 0, 0.5), (1.5, 0.5, 0.3), (1, 1.2, 0.5), (3, -0.2, 2)])
def test_sample_analytic_brackets(r, gamma, s):
    prof = AnalyticProfile(r, gamma, s)
    J = 8
    lower, upper = sample_analytic(prof, J)
    t = np.geomspace(s * 2.0 ** -J, s * (1 - 1e-9), 500)
    f = prof.evaluate(t)
    assert np.all(lower.evaluate(t) <= f * (1 + 1e-12))
    assert np.all(upper.evaluate(t) >= f * (1 - 1e-12))


def test_sample_analytic_nested():
    # J -> J+1 tightens both brackets pointwise
    prof = AnalyticProfile(1.5, 0.3, 0.8)
    t = np.geomspace(1e-6, 0.8 * (1 - 1e-9), 2000)
    prev_lo, prev_up = sample_analytic(prof, 3)
    for J in range(4, 12):
        lo, up = sample_analytic(prof, J)
        assert np.all(lo.evaluate(t) >= prev_lo.evaluate(t))
        assert np.all(up.evaluate(t) <= prev_up.evaluate(t))
        prev_lo, prev_up = lo, up


def test_sample_analytic_lp_lower_converges():
    # f = t^{-1/2}: the right-endpoint steps sum to sum_j 2^{-(j+1)/2} = 1/(2 - sqrt 2)
    prof = AnalyticProfile(2.0, 0.0, 1.0)
    lows = np.array([lp_norm(sample_analytic(prof, J)[0], 1) for J in range(2, 40)])
    assert np.all(np.diff(lows) > 0)
    assert lows[-1] == approx(1 / (2 - np.sqrt(2)), rel=1e-5)
    assert lows[-1] < 2.0


@mark.parametrize("r, gamma, s", [(0, 0, 1), (-1, 1, 1), (1, 1.5, 1), (1, -2, 4)])
def test_analytic_profile_rejected(r, gamma, s):
    with raises(InvalidProfile):
        AnalyticProfile(r, gamma, s)


def test_analytic_profile_values():
    prof = AnalyticProfile(2.0, 0.5, 0.5)
    t = np.exp(-3.0)
    assert prof.evaluate(t) == approx(t ** -0.5 / 2.0, rel=1e-14)
    assert prof.evaluate(0.5) == 0.0
    assert prof.kind == "power_log"
    assert AnalyticProfile(1.0).kind == "power"
