"""Variable-exponent Lebesgue and Lorentz norms.

The exponent ``p(.)`` is piecewise constant on a tensor grid.  The modular
``rho(f) = sum_c v_c^{p_c} |c|`` is an exact finite sum, and the Luxemburg
norm ``inf{lam > 0 : rho(f / lam) <= 1}`` is found by geometric bracketing
followed by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import _check_exponent, level_set_norm
from .domain import CellSet, StepFunction, TensorGrid, make_ball_set, refine_common
from .errors import ConvergenceError, EmptySetError, InvalidExponent, NotAMinimizer, ValidationError

__all__ = [
    "ExponentField",
    "LogHoelderReport",
    "UnitBallReport",
    "modular",
    "variable_norm",
    "unit_ball_check",
    "quasi_triangle_check",
    "variable_lorentz_norm",
    "log_hoelder_check",
]

MAX_ITER = 200


class ExponentField(StepFunction):
    """Piecewise-constant exponent with ``0 < p_minus <= p_plus < inf``.

    Parameters
    ----------
    grid : TensorGrid
    values : array_like
        Exponent per cell.
    x0 : sequence of float, optional
        Designated point where the exponent attains ``p_minus``.
    """

    def __init__(self, grid: TensorGrid, values, x0=None):
        vals = np.asarray(values, dtype=float)
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise InvalidExponent("exponent values must be finite and positive")
        super().__init__(grid, vals)
        self.x0 = None if x0 is None else tuple(float(c) for c in np.atleast_1d(x0))
        if self.x0 is not None and len(self.x0) != grid.dim:
            raise ValidationError("x0 has the wrong dimension")

    @classmethod
    def constant(cls, grid: TensorGrid, p: float) -> "ExponentField":
        return cls(grid, np.full(grid.shape, float(p)))

    @classmethod
    def from_function(cls, grid: TensorGrid, func, x0=None) -> "ExponentField":
        """Sample ``func(x_1, ..., x_d)`` at cell centers."""
        mesh = np.meshgrid(*grid.centers, indexing="ij")
        vals = np.broadcast_to(np.asarray(func(*mesh), dtype=float), grid.shape)
        return cls(grid, vals, x0=x0)

    @classmethod
    def from_dict(cls, data: dict) -> "ExponentField":
        sf = StepFunction.from_dict(data)
        return cls(sf.grid, sf.values, x0=data.get("x0"))

    def to_dict(self, role: str | None = "exponent") -> dict:
        out = super().to_dict(role)
        if self.x0 is not None:
            out["x0"] = list(self.x0)
        return out

    def to_json(self, role: str | None = "exponent") -> str:
        return super().to_json(role)

    @property
    def p_minus(self) -> float:
        return float(self.values.min())

    @property
    def p_plus(self) -> float:
        return float(self.values.max())

    def _mask(self, A) -> np.ndarray:
        mask = A.mask if isinstance(A, CellSet) else np.asarray(A, dtype=bool)
        if isinstance(A, CellSet) and A.grid != self.grid:
            raise ValidationError("cell set lives on a different grid")
        if not mask.any():
            raise EmptySetError("empty set has no essential bounds")
        return mask

    def p_minus_on(self, A) -> float:
        return float(self.values[self._mask(A)].min())

    def p_plus_on(self, A) -> float:
        return float(self.values[self._mask(A)].max())

    def on(self, grid: TensorGrid) -> "ExponentField":
        if grid == self.grid:
            return self
        return ExponentField(grid, StepFunction.on(self, grid).values, x0=self.x0)

    def value_at(self, x0) -> float:
        """Smallest exponent among cells whose closure contains ``x0``."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        idx = []
        for a, x in enumerate(x0):
            bp = self.grid.breakpoints[a]
            if x < bp[0] or x > bp[-1]:
                raise ValidationError(f"point {tuple(x0)} lies outside the domain")
            i = self.grid.locate(a, x)
            cand = {int(i)}
            tol = 1e-12 * (bp[-1] - bp[0])
            if abs(x - bp[i]) <= tol and i > 0:
                cand.add(int(i) - 1)
            if abs(x - bp[i + 1]) <= tol and i + 1 < bp.size - 1:
                cand.add(int(i) + 1)
            idx.append(sorted(cand))
        return float(self.values[np.ix_(*idx)].min())


def _common(f: StepFunction, p: ExponentField):
    if not isinstance(p, ExponentField):
        raise TypeError("p must be an ExponentField")
    if f.grid == p.grid:
        return f, p
    g, q = refine_common(f, p)
    return g, ExponentField(q.grid, q.values, x0=p.x0)


def _support_arrays(f: StepFunction, p: ExponentField):
    f, p = _common(f, p)
    pos = f.values > 0
    return f.values[pos], p.values[pos], f.grid.cell_measures[pos]


def modular(f: StepFunction, p: ExponentField) -> float:
    """``rho_{p(.)}(f) = sum_c v_c^{p_c} |c|`` over cells with ``v_c > 0``."""
    v, e, m = _support_arrays(f, p)
    with np.errstate(over="ignore"):
        return math.fsum(v ** e * m)


def _solve_norm(v, e, m, tol: float) -> float:
    def rho(lam):
        with np.errstate(over="ignore", divide="ignore"):
            return float(np.sum((v / lam) ** e * m))

    lam, it = 1.0, 0
    if rho(lam) > 1.0:
        lo = lam
        while rho(lam) > 1.0:
            lo, lam = lam, lam * 2.0
            it += 1
            if it > MAX_ITER:
                raise ConvergenceError("could not bracket the norm from above")
        hi = lam
    else:
        hi = lam
        while rho(lam) <= 1.0:
            hi, lam = lam, lam * 0.5
            it += 1
            if it > MAX_ITER:
                raise ConvergenceError("could not bracket the norm from below")
        lo = lam
    # invariant: rho(lo) > 1 >= rho(hi)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if rho(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        it += 1
        if it > MAX_ITER:
            raise ConvergenceError(f"bisection did not reach relative width {tol}")
    return 0.5 * (lo + hi)


def variable_norm(f: StepFunction, p: ExponentField, tol: float = 1e-10) -> float:
    """Luxemburg norm ``inf{lam > 0 : rho(f / lam) <= 1}`` to relative ``tol``.

    Examples
    --------
    >>> from envlab.domain import TensorGrid
    >>> g = TensorGrid([[0, 0.5, 1]])
    >>> p = ExponentField(g, [1.0, 2.0])
    >>> round(variable_norm(StepFunction.constant(g, 1.0), p), 8)
    1.0
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    v, e, m = _support_arrays(f, p)
    if v.size == 0:
        return 0.0
    return _solve_norm(v, e, m, tol)


@dataclass(frozen=True)
class UnitBallReport:
    norm: float
    modular: float
    norm_le_1: bool
    modular_le_1: bool
    norm_lt_1: bool
    modular_lt_1: bool
    norm_eq_1: bool
    modular_eq_1: bool

    @property
    def agree(self) -> bool:
        return (self.norm_le_1 == self.modular_le_1
                and self.norm_lt_1 == self.modular_lt_1
                and self.norm_eq_1 == self.modular_eq_1)


def unit_ball_check(f: StepFunction, p: ExponentField, tol: float = 1e-10) -> UnitBallReport:
    """Compare ``||f|| <= 1`` with ``rho(f) <= 1`` (and the ``<``, ``=`` variants).

    Near the unit sphere the modular moves by a factor between ``p_minus``
    and ``p_plus`` of the norm's relative change, so the norm is compared
    with slack ``10 tol`` and the modular with ``10 tol p_plus``.
    """
    n = variable_norm(f, p, tol)
    r = modular(f, p)
    sn = 10 * tol
    sr = 10 * tol * p.p_plus
    return UnitBallReport(
        norm=n, modular=r,
        norm_le_1=n <= 1 + sn, modular_le_1=r <= 1 + sr,
        norm_lt_1=n < 1 - sn, modular_lt_1=r < 1 - sr,
        norm_eq_1=abs(n - 1) <= sn, modular_eq_1=abs(r - 1) <= sr,
    )


def quasi_triangle_check(f: StepFunction, g: StepFunction, p: ExponentField,
                         tol: float = 1e-10, slack: float = 1e-9) -> bool:
    """Check ``||f+g||^{p_-} <= ||f||^{p_-} + ||g||^{p_-}`` (``p_- <= 1``)
    or the triangle inequality (``p_- > 1``)."""
    nf = variable_norm(f, p, tol)
    ng = variable_norm(g, p, tol)
    ns = variable_norm(f + g, p, tol)
    e = p.p_minus if p.p_minus <= 1 else 1.0
    lhs, rhs = ns ** e, nf ** e + ng ** e
    return lhs <= rhs + slack * max(1.0, rhs)


def variable_lorentz_norm(f: StepFunction, p: ExponentField, q, tol: float = 1e-10) -> float:
    """``(int u^q ||chi_{f>u}||_{p(.)}^q du/u)^{1/q}`` as an exact level-set sum."""
    q = _check_exponent(q, "q")
    f, p = _common(f, p)
    levels = np.unique(f.values[f.values > 0])
    inner = [variable_norm(StepFunction(f.grid, (f.values >= u).astype(float)), p, tol)
             for u in levels]
    return level_set_norm(levels, inner, q)


@dataclass(frozen=True)
class LogHoelderReport:
    x0: tuple
    radii: tuple
    quantities: tuple
    max_quantity: float
    C: float
    C0: float
    threshold: float | None = None
    passed: bool | None = None
    argmax_radius: float = field(default=math.nan)


def log_hoelder_check(p: ExponentField, x0=None, radii=None, levels=None,
                      threshold: float | None = None) -> LogHoelderReport:
    """Evaluate ``|B_r|^{p_-(B_r) - p_+(B_r)}`` over cubes ``B_r(x0)``.

    Parameters
    ----------
    p : ExponentField
    x0 : point, optional
        Must be a minimizer of ``p``; defaults to ``p.x0``.
    radii : sequence of float, optional
        Half side lengths.  Defaults to ``2^{-j}`` for ``j`` in ``levels``.
    levels : iterable of int, optional
        Defaults to every ``j >= 0`` whose cube still contains a cell center.
    threshold : float, optional
        ``passed`` reports whether the maximum stays below it.
    """
    if x0 is None:
        x0 = p.x0
    if x0 is None:
        raise ValidationError("no point x0 given")
    x0 = tuple(float(c) for c in np.atleast_1d(x0))
    px0 = p.value_at(x0)
    if px0 > p.p_minus + 1e-12:
        raise NotAMinimizer(f"p(x0) = {px0} exceeds p_minus = {p.p_minus}")
    if radii is None:
        if levels is None:
            radii, j = [], 0
            while True:
                r = 2.0 ** -j
                try:
                    make_ball_set(p.grid, x0, r)
                except EmptySetError:
                    break
                radii.append(r)
                j += 1
        else:
            radii = [2.0 ** -j for j in levels]
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise ValidationError("no radii to test")
    qs = []
    for r in radii:
        B = make_ball_set(p.grid, x0, r)
        qs.append(B.measure ** (p.p_minus_on(B) - p.p_plus_on(B)))
    k = int(np.argmax(qs))
    C = float(qs[k])
    return LogHoelderReport(
        x0=x0, radii=radii, quantities=tuple(qs), max_quantity=C, C=C,
        C0=math.log(C) / p.dim, threshold=threshold,
        passed=None if threshold is None else C <= threshold,
        argmax_radius=radii[k],
    )
