import math

import numpy as np
from pytest import approx, mark, raises

from envlab.classical import lp_norm
from envlab.domain import BoxDomain, StepFunction, TensorGrid, dyadic_breakpoints
from envlab.envelope import (ClassicalSpace, HardyInterval, MixedSpace, VariableSpace,
                             candidate_sets, classify_growth, embedding_ratio_test,
                             envelope_lower, fit_envelope_exponent, hardy_functional,
                             index_probe, non_embedding_witness, power_log_depth,
                             witness_alphas)
from envlab.errors import (GridMismatch, InsufficientSamples, InvalidExponent, InvalidWitness,
                           ValidationError, WitnessOutOfDomain)
from envlab.rearrangement import AnalyticProfile, ValueMassProfile, rearrange, sample_analytic
from envlab.variable import ExponentField, variable_norm

T_DYADIC = 2.0 ** -np.arange(4, 12.5, 0.5)


def dyadic_grid(dim, levels=14):
    return TensorGrid([dyadic_breakpoints(0.0, 1.0, levels)] * dim)


def unit_grid(n, dim=1):
    return TensorGrid.uniform(BoxDomain.unit(dim), n)


def test_l2_envelope_example():
    curve = envelope_lower(ClassicalSpace(2, unit_grid(64)), [1 / 16])
    assert curve.estimate[0] == approx(4.0, rel=1e-12)


def test_mixed_slab_example():
    sp = MixedSpace((1, 2), unit_grid(16, 2))
    curve = envelope_lower(sp, [1 / 16], families=["slabs"])
    assert curve.estimate[0] == approx(16.0, rel=1e-12)


@mark.parametrize("q", [0.5, 1.0, 3.0])
def test_mixed_lorentz_slab_constant(q):
    sp = MixedSpace((1, 2), unit_grid(16, 2), q)
    curve = envelope_lower(sp, [1 / 16, 1 / 4], families=["slabs"])
    assert curve.estimate == approx(q ** (1 / q) * np.array([16.0, 4.0]), rel=1e-12)


def test_envelope_validation():
    sp = ClassicalSpace(2, unit_grid(8))
    with raises(ValidationError):
        envelope_lower(sp, [0.0])
    with raises(ValidationError):
        envelope_lower(sp, [2.0])
    with raises(ValidationError):
        envelope_lower(sp, [0.5], families=[])
    with raises(ValidationError):
        envelope_lower(sp, [0.5], families=["spheres"])


def test_certificates_reproduce_samples():
    g = dyadic_grid(2, 8)
    p = ExponentField.from_function(g, lambda x, y: 1.5 + x + y)
    sp = VariableSpace(p)
    t = np.geomspace(2.0 ** -12, 0.5, 12)
    curve = envelope_lower(sp, t, families=["normalized_indicators", "lh0_balls"])
    assert np.all(np.diff(curve.estimate) <= 0)
    for i, ti in enumerate(t):
        f = curve.certificate_function(i)
        assert sp.norm(f) <= 1 + 1e-9
        prof = rearrange(f)
        assert prof.total_mass >= ti * (1 - 1e-12)
        # left limit of f* at t is the plateau value
        assert prof.evaluate_left(min(ti, prof.total_mass)) == curve.estimate[i]


def test_fundamental_function_relation():
    g = dyadic_grid(1, 10)
    p = ExponentField.from_function(g, lambda x: 1.2 + x)
    sp = VariableSpace(p)
    t = np.geomspace(2.0 ** -10, 1.0, 9)
    curve = envelope_lower(sp, t)
    sets = candidate_sets(sp, "normalized_indicators")
    for ti, est in zip(t, curve.estimate):
        best = max(1 / variable_norm(A.indicator(), p) for A in sets if A.measure >= ti * (1 - 1e-12))
        assert est == best


@mark.parametrize("p", [0.7, 2.0, 3.5])
def test_consistency_ladder(p):
    g = unit_grid(32, 2)
    t = 2.0 ** -np.arange(1, 10)
    a = envelope_lower(ClassicalSpace(p, g), t).estimate
    b = envelope_lower(MixedSpace((p, p), g), t).estimate
    c = envelope_lower(VariableSpace(ExponentField.constant(g, p), tol=1e-13), t).estimate
    assert b == approx(a, rel=1e-9)
    assert c == approx(a, rel=1e-9)


def test_fit_exact_power():
    t = 2.0 ** -np.arange(1, 9)
    fit = fit_envelope_exponent((t, t ** -0.5), t.min(), t.max())
    assert fit.alpha == approx(0.5, abs=1e-12)
    assert fit.stderr < 1e-12
    assert fit.n == 8


def test_fit_needs_five_samples():
    t = 2.0 ** -np.arange(1, 9)
    with raises(InsufficientSamples):
        fit_envelope_exponent((t, 1 / t), 2.0 ** -4, 0.5)


def test_mixed_envelope_slope():
    sp = MixedSpace((1, 2), dyadic_grid(2))
    curve = envelope_lower(sp, T_DYADIC, families=["slabs"])
    fit = fit_envelope_exponent(curve, 2.0 ** -12, 2.0 ** -4)
    assert fit.alpha == approx(1.0, abs=0.02)
    assert curve.fit is fit
    assert "fit" in curve.to_dict()


def test_piecewise_variable_slope():
    g = TensorGrid([dyadic_breakpoints(0.0, 1.0, 14)])
    p = ExponentField.from_function(g, lambda x: np.where(x < 0.5, 1.5, 3.0))
    curve = envelope_lower(VariableSpace(p), T_DYADIC)
    assert fit_envelope_exponent(curve, 2.0 ** -12, 2.0 ** -4).alpha == approx(2 / 3, abs=0.02)


def test_curve_csv():
    curve = envelope_lower(ClassicalSpace(2, unit_grid(4)), [0.25, 0.5])
    lines = curve.to_csv().splitlines()
    assert lines[0] == "t,estimate,family"
    assert lines[1] == "0.25,2,normalized_indicators"


# -- Hardy functional -------------------------------------------------------

@mark.parametrize("tau, p, v", [(0.1, 2, 3), (0.3, 1.5, 1), (0.01, 4, 0.5)])
def test_hardy_indicator(tau, p, v):
    got = hardy_functional(ValueMassProfile([1.0], [tau]), 1 / p, v, eps=0.5)
    assert got == approx((p / v) ** (1 / v) * tau ** (1 / p), rel=1e-13)


def test_hardy_frozen():
    # scipy quad of (t^{1/2})^3 dt/t over (0, 0.1)
    assert hardy_functional(ValueMassProfile([1.0], [0.1]), 0.5, 3, eps=1.0) == \
        approx(0.27625039879951085, rel=1e-12)


def test_hardy_eps_cut_and_sup():
    prof = ValueMassProfile([3.0, 1.0], [0.2, 0.5])
    # v = inf: sup_t t^{1/2} f*(t) over (0, 0.5)
    assert hardy_functional(prof, 0.5, math.inf, eps=0.5) == approx(max(3 * 0.2 ** 0.5, 0.5 ** 0.5))
    cut = hardy_functional(prof, 0.5, 2, eps=0.2)
    assert cut == approx(3 * (0.2 / 1.0) ** 0.5, rel=1e-13)


def test_hardy_divergent_alpha():
    prof = ValueMassProfile([1.0], [0.1])
    assert hardy_functional(prof, 0.0, 2, eps=1) == math.inf
    assert hardy_functional(prof, -0.5, 2, eps=1) == math.inf


def test_hardy_validation():
    prof = ValueMassProfile([1.0], [0.1])
    with raises(ValidationError):
        hardy_functional(prof, 0.5, 0, eps=1)
    with raises(ValidationError):
        hardy_functional(prof, 0.5, 1, eps=0)


def test_hardy_kappa():
    prof = ValueMassProfile([3.0, 1.0], [0.2, 0.5])
    plain = hardy_functional(prof, 0.5, 2, eps=1)
    assert hardy_functional(prof, 0.5, 2, eps=1, kappa=[2.0, 2.0]) == approx(2 * plain)


def test_hardy_bracket_log_divergent():
    # gamma v < 1 at alpha = 1/r: upper is infinite, lower grows without bound
    prof = AnalyticProfile(2.0, 0.2, 1.0)
    lows = []
    for J in (10, 40, 160, 640):
        iv = hardy_functional(sample_analytic(prof, J), 0.5, 2.0, eps=1.0)
        assert isinstance(iv, HardyInterval)
        assert iv.upper == math.inf
        lows.append(iv.lower)
    assert all(b > 1.2 * a for a, b in zip(lows, lows[1:]))


def test_hardy_bracket_convergent():
    # gamma v > 1: the upper end is finite and the interval narrows as J grows
    s = math.exp(1 - 1.6)
    prof = AnalyticProfile(2.0, 0.8, s)
    widths = []
    for J in (8, 16, 32, 64):
        iv = hardy_functional(sample_analytic(prof, J), 0.5, 2.0, eps=s)
        assert iv.lower <= iv.upper < math.inf
        widths.append(iv.upper - iv.lower)
    assert all(b <= a for a, b in zip(widths, widths[1:]))
    # exact value: int_0^s (1 - log t)^{-1.6} dt/t = (1 - log s)^{-0.6} / 0.6
    exact = (1.6 ** -0.6 / 0.6) ** 0.5
    iv = hardy_functional(sample_analytic(prof, 64), 0.5, 2.0, eps=s)
    assert iv.lower <= exact <= iv.upper


# -- probes -----------------------------------------------------------------

def test_classify_growth():
    ks = np.arange(2, 12)
    assert classify_growth(ks, ks.astype(float))[0] == "divergent"
    assert classify_growth(ks, np.ones(10))[0] == "bounded"
    assert classify_growth(ks, np.linspace(1, 1.3, 10))[0] == "inconclusive"
    assert classify_growth(ks, [1.0] * 9 + [math.inf])[0] == "divergent"


def test_power_log_depth():
    assert power_log_depth(2, 2.0) == 4
    assert power_log_depth(40, 2.0) == 921
    assert power_log_depth(40, 0.5) == 495


@mark.parametrize("p, q", [(2.0, 2.0), (1.5, 3.0)])
def test_classical_lorentz_probe(p, q):
    g = unit_grid(1)
    assert index_probe(ClassicalSpace(p, g, q), q / 2).classification == "divergent"
    assert index_probe(ClassicalSpace(p, g, q), 2 * q).classification == "bounded"


def test_weak_lorentz_mixed_probe():
    g = unit_grid(2, 2)
    rep = index_probe(MixedSpace((1, 2), g, math.inf), 3.0, k_range=range(2, 25))
    assert rep.classification == "divergent"
    assert rep.witness["family"] == "power_log"
    assert 0 < rep.witness["gamma"] < 1 / 3


def test_variable_constant_probe():
    g = unit_grid(8)
    sp = VariableSpace(ExponentField.constant(g, 2.0))
    rep = index_probe(sp, 1.5)
    assert 1 < rep.alpha < 4 / 3
    assert rep.classification == "divergent"
    # norms of the cascade stay bounded
    assert max(rep.norms) / min(rep.norms) < 3
    assert index_probe(sp, 2.5).classification == "bounded"


def test_probe_report_serialization():
    g = unit_grid(8)
    rep = index_probe(VariableSpace(ExponentField.constant(g, 2.0)), 1.5, k_range=range(3, 8))
    assert rep.to_csv().splitlines()[0] == "k,ratio"
    assert len(rep.to_csv().splitlines()) == 6
    d = rep.to_dict()
    assert d["theoretical_index"] == 2.0 and d["k"] == [3, 4, 5, 6, 7]


def test_probe_errors():
    g = unit_grid(8)
    sp = VariableSpace(ExponentField.constant(g, 2.0))
    with raises(ValidationError):
        index_probe(sp, 0)
    with raises(ValidationError):
        index_probe(sp, 1.5, k_range=[5])
    with raises(WitnessOutOfDomain):
        index_probe(sp, 1.5, x0=(2.0,), k_range=range(3, 6))
    with raises(WitnessOutOfDomain):
        index_probe(sp, 1.5, k_range=range(3, 60))
    with raises(WitnessOutOfDomain):
        index_probe(ClassicalSpace(2, g), 1.0, s=2.0)


# -- witnesses --------------------------------------------------------------

def test_witness_alphas():
    assert witness_alphas((1, 2), 0.5) == approx((0.999, 0.4))
    assert witness_alphas((1, 2), 0.5, (2 / 3, 0.4)) == approx((2 / 3, 0.4))
    with raises(InvalidWitness):
        witness_alphas((1, 2), 0.5, (0.5, 0.4))
    with raises(InvalidWitness):
        witness_alphas((1, 2), 0.5, (0.9, 0.5))
    with raises(ValidationError):
        witness_alphas((1, 2), 1.5)
    with raises(InvalidExponent):
        witness_alphas((math.inf, math.inf), 0.5)


@mark.parametrize("p", [(1, 2), (2, 3)])
def test_non_embedding_witness(p):
    rep = non_embedding_witness(p, 0.5, [2.0 ** k for k in range(10, 21, 2)])
    assert rep.verdict == "non-embedding confirmed"
    assert rep.mixed_variation < 1e-12
    assert rep.target_growth > 3


def test_witness_constant_exponent():
    # no axis has p_j > p_min: reduces to L_p not inside L_{p+eps}
    rep = non_embedding_witness((2, 2), 0.5, [2.0 ** k for k in range(10, 21, 2)])
    assert rep.verdict == "non-embedding confirmed"


def test_witness_csv():
    rep = non_embedding_witness((1, 2), 0.5, [2.0 ** 4, 2.0 ** 6])
    assert rep.to_csv().splitlines()[0] == "truncation,mixed_norm,target_norm"
    with raises(ValidationError):
        non_embedding_witness((1, 2), 0.5, [16.0])


# -- ratio test -------------------------------------------------------------

def test_ratio_test_examples():
    t = 2.0 ** -np.arange(1, 13)
    r = embedding_ratio_test((t, 1 / t), (t, t ** -0.5), t.min(), t.max())
    assert r.trend_slope == approx(-0.5, abs=1e-12)
    assert r.verdict == "non-embedding evidence"
    same = embedding_ratio_test((t, 1 / t), (t, 1 / t), t.min(), t.max())
    assert same.sup_ratio == 1.0 and same.verdict == "no evidence"
    rev = embedding_ratio_test((t, t ** -0.5), (t, 1 / t), t.min(), t.max())
    assert rev.verdict == "no evidence"


def test_ratio_test_grid_mismatch():
    t = 2.0 ** -np.arange(1, 13)
    with raises(GridMismatch):
        embedding_ratio_test((t, 1 / t), (t * 1.1, 1 / t), 1e-4, 1)
