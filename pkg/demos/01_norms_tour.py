"""
A tour of the norm engines
==========================

Every norm in the package is computed exactly on step functions: the
integrals reduce to finite sums over cells or plateaus, so the only error
left is floating point rounding.
"""

import numpy as np

from envlab import (ExponentField, StepFunction, TensorGrid, lorentz_norm, lorentz_tilde_norm,
                    lp_norm, mixed_lorentz_norm, mixed_norm, product_indicator, rearrange,
                    variable_lorentz_norm, variable_norm)

# a function on [0, 1]: 3 on a set of measure 0.2, 1 on a set of measure 0.5
grid = TensorGrid([[0, 0.1, 0.3, 0.5, 0.7, 1.0]])
f = StepFunction(grid, [1, 3, 1, 1, 0])

###############################################################################
# Rearrangement
# -------------
# ``rearrange`` sorts the (value, measure) pairs and merges equal values.

prof = rearrange(f)
print(prof.to_csv())
print("f*(0.1) =", prof.evaluate(0.1), " f*(0.6) =", prof.evaluate(0.6))

###############################################################################
# Lebesgue and Lorentz norms
# --------------------------
# ``L_{p,p}`` is ``L_p``; the level-set form differs by the factor p^{-1/q}.

for p, q in [(1, 1), (2, 2), (2, 1), (3, 2), (2, np.inf)]:
    print(f"p={p} q={q}: L_p={lp_norm(prof, p):.6f} L_pq={lorentz_norm(prof, p, q):.6f}"
          f" level-set={lorentz_tilde_norm(prof, p, q):.6f}")

###############################################################################
# Mixed norms
# -----------
# For a product set the iterated norm factorizes.

g2 = TensorGrid([[0, 0.5, 1], [0, 0.25, 1]])
box = product_indicator(g2, [(0, 0.5), (0, 0.25)])
print("||chi||_(1,2) =", mixed_norm(box, (1, 2)), "= 0.5 * 0.25**0.5")
print("||chi||_(2,1) =", mixed_norm(box, (2, 1)))
print("Lorentz q=3:", mixed_lorentz_norm(box, (1, 2), 3), "=", 3 ** (-1 / 3) * 0.25)

###############################################################################
# Variable exponents
# ------------------
# p = 1 on the left half, 2 on the right. The norm of the constant 1 solves
# x/2 + x^2/2 = 1 for x = 1/lambda, hence lambda = 1.

halves = TensorGrid([[0, 0.5, 1]])
p = ExponentField(halves, [1.0, 2.0])
one = StepFunction.constant(halves, 1.0)
print("||1||_p(.) =", variable_norm(one, p))
for q in (0.5, 1, 4):
    print(f"q={q}: ||1||_(p(.),q) = {variable_lorentz_norm(one, p, q):.6f}"
          f" = q^(-1/q) * {variable_norm(one, p):.6f}")
