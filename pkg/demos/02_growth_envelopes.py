"""
Growth envelopes
================

The growth envelope ``E(t) = sup{f*(t) : ||f|| <= 1}`` is estimated from
below with normalized indicators. On dyadic grids the log-log slope recovers
``1/p`` for Lebesgue spaces, ``1/min p_i`` for mixed spaces and ``1/p_-``
for variable exponents.
"""

import numpy as np

from envlab import (ClassicalSpace, ExponentField, MixedSpace, TensorGrid, VariableSpace,
                    dyadic_breakpoints, embedding_ratio_test, envelope_lower,
                    fit_envelope_exponent)

t = 2.0 ** -np.arange(4, 12.5, 0.5)
axis = dyadic_breakpoints(0.0, 1.0, 14)
line = TensorGrid([axis])
square = TensorGrid([axis, axis])

cases = [
    ("L_2", ClassicalSpace(2.0, line), ["normalized_indicators"]),
    ("L_(1,2)", MixedSpace((1, 2), square), ["slabs"]),
    ("L_(2,3)", MixedSpace((2, 3), square), ["slabs"]),
    ("L_p(.) with p = 1.5 | 3", VariableSpace(ExponentField.from_function(
        line, lambda x: np.where(x < 0.5, 1.5, 3.0))), ["normalized_indicators"]),
    ("L_p(.) with p = 1 + x", VariableSpace(ExponentField.from_function(
        line, lambda x: 1 + x, x0=(0.0,))), ["lh0_balls"]),
]

curves = {}
for name, space, fams in cases:
    curve = envelope_lower(space, t, families=fams)
    fit = fit_envelope_exponent(curve, t.min(), t.max())
    curves[name] = curve
    print(f"{name:24s} alpha = {fit.alpha:.4f} (theory {space.theoretical_alpha:.4f})")

###############################################################################
# Every estimate comes with a certificate: an indicator scaled to norm <= 1.

c = curves["L_(1,2)"]
A, N = c.certificates[0]
print("certificate at t =", c.t[0], "has measure", A.measure, "and value", 1 / N)

###############################################################################
# Comparing envelopes: the ratio E_(1,2) / E_2 blows up like t^{-1/2}, so
# the mixed space cannot sit inside L_2.

mixed = envelope_lower(MixedSpace((1, 2), square), t, families=["slabs"])
l2 = envelope_lower(ClassicalSpace(2.0, square), t)
print(embedding_ratio_test(mixed, l2, t.min(), t.max()))
