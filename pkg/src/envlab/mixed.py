"""Mixed Lebesgue and mixed Lorentz norms on tensor grids.

Axes are reduced in the order 1, ..., d: the innermost integral runs over
``x_1``.
"""

from __future__ import annotations

import math

import numpy as np

from .classical import _check_exponent, level_set_norm
from .domain import BoxDomain, StepFunction, TensorGrid
from .errors import InvalidExponent, ValidationError

__all__ = ["MixedExponent", "mixed_norm", "mixed_lorentz_norm", "hoelder_embedding_constant"]


class MixedExponent(tuple):
    """Tuple of per-axis exponents ``p_i in (0, inf]``."""

    def __new__(cls, ps):
        if isinstance(ps, (int, float)):
            ps = (ps,)
        ps = tuple(_check_exponent(p, f"p_{i + 1}") for i, p in enumerate(ps))
        if not ps:
            raise InvalidExponent("need at least one exponent")
        return super().__new__(cls, ps)

    @property
    def p_min(self) -> float:
        return min(self)

    @property
    def is_constant(self) -> bool:
        return len(set(self)) == 1


def _reduce_axis0(arr, widths, p):
    if math.isinf(p):
        return arr.max(axis=0)
    top = arr.max(axis=0)
    safe = np.where(top > 0, top, 1.0)
    w = widths.reshape((-1,) + (1,) * (arr.ndim - 1))
    s = np.sum((arr / safe) ** p * w, axis=0)
    return top * s ** (1.0 / p)


def _mixed_values(values, grid: TensorGrid, p: MixedExponent) -> float:
    arr = values
    for axis, pa in enumerate(p):
        arr = _reduce_axis0(arr, grid.widths[axis], pa)
    return float(arr)


def _check_dim(f: StepFunction, p: MixedExponent):
    if len(p) != f.dim:
        raise ValidationError(f"{len(p)} exponents for a {f.dim}-dimensional function")


def mixed_norm(f: StepFunction, p) -> float:
    """Iterated norm ``|| ... ||f||_{L_{p_1}(dx_1)} ... ||_{L_{p_d}(dx_d)}``.

    Examples
    --------
    >>> from envlab.domain import TensorGrid, product_indicator
    >>> g = TensorGrid([[0, .5, 1], [0, .25, 1]])
    >>> mixed_norm(product_indicator(g, [(0, .5), (0, .25)]), (1, 2))
    0.25
    """
    p = MixedExponent(p)
    _check_dim(f, p)
    return _mixed_values(f.values, f.grid, p)


def mixed_lorentz_norm(f: StepFunction, p, q) -> float:
    """``(int_0^inf u^q ||chi_{f>u}||_{p_vec}^q du/u)^{1/q}``, exact for step ``f``."""
    p = MixedExponent(p)
    _check_dim(f, p)
    q = _check_exponent(q, "q")
    if math.isinf(p.p_min) and not math.isinf(q):
        raise InvalidExponent("all p_i = inf requires q = inf")
    levels = np.unique(f.values[f.values > 0])
    inner = [_mixed_values((f.values >= u).astype(float), f.grid, p) for u in levels]
    return level_set_norm(levels, inner, q)


def hoelder_embedding_constant(p, domain) -> float:
    """``||chi_Omega||_{q_vec}`` with ``1/q_i = 1/p_min - 1/p_i``.

    Bounds the norm of the embedding of the mixed space into ``L_{p_min}``.
    """
    p = MixedExponent(p)
    if isinstance(domain, TensorGrid):
        domain = domain.domain
    if not isinstance(domain, BoxDomain):
        domain = BoxDomain(*domain)
    if len(p) != domain.dim:
        raise ValidationError("exponent length does not match the domain")
    if math.isinf(p.p_min):
        raise InvalidExponent("p_min must be finite")
    inv_q = [1.0 / p.p_min - 1.0 / pi for pi in p]
    return math.prod(L ** e for L, e in zip(domain.lengths, inv_q))
