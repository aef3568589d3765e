"""
Additional index probes
=======================

The Hardy functional ``(int_0^eps (t^alpha f*(t))^v dt/t)^{1/v}`` with
``alpha`` the envelope exponent is bounded on the unit ball for ``v`` above
the additional index and unbounded below it. Probes evaluate the ratio to the
norm along a witness sequence and classify its growth.
"""

import numpy as np

from envlab import (AnalyticProfile, ExponentField, MixedSpace, TensorGrid, VariableSpace,
                    hardy_functional, index_probe, sample_analytic)

###############################################################################
# Bracketed analytic profiles
# ---------------------------
# t^{-1/2}(1 + |log t|)^{-gamma} at alpha = 1/2: finite iff gamma v > 1.

for gamma in (0.2, 0.8):
    prof = AnalyticProfile(2.0, gamma, min(1.0, np.exp(1 - 2 * gamma)))
    for J in (16, 64, 256):
        iv = hardy_functional(sample_analytic(prof, J), 0.5, 2.0, eps=prof.s)
        print(f"gamma={gamma} J={J:3d}: [{iv.lower:.4f}, {iv.upper:.4f}]")

###############################################################################
# Probes
# ------

line = TensorGrid([np.linspace(0, 1, 9)])
square = TensorGrid([np.linspace(0, 1, 5)] * 2)
spaces = {
    "L_(1,2)": MixedSpace((1, 2), square),
    "L_(1,2),3": MixedSpace((1, 2), square, 3.0),
    "L_p(.) p-=1.5": VariableSpace(ExponentField.from_function(
        line, lambda x: np.where(x < 0.5, 1.5, 3.0), x0=(0.0,))),
}
for name, space in spaces.items():
    u = space.theoretical_index
    for v in (0.8 * u, u + 0.5):
        rep = index_probe(space, v)
        print(f"{name:14s} v={v:.2f} (index {u}): {rep.classification:12s}"
              f" growth={rep.growth_ratio:.3f} slope={rep.slope:.3f}")
