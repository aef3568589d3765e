"""
A function in L_(1,2) outside L_1.5
===================================

``f(x, y) = x^{-a} y^{-b}`` with ``a`` just below 1 and ``b = 0.4`` has a
finite mixed norm, while its ``L_{1.5}`` norm is infinite. Truncating the
singularity at level M and refining towards the axes shows both effects.
"""

from envlab import non_embedding_witness

rep = non_embedding_witness((1, 2), 0.5, [2.0 ** k for k in range(10, 21)])
print("alphas:", rep.alphas)
print(rep.to_csv())
print(f"mixed norm variation {rep.mixed_variation:.2e}, L_1.5 growth {rep.target_growth:.2f}x")
print(rep.verdict)
