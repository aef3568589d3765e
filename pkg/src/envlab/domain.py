"""Box domains, tensor grids, cell sets and step functions.

Every norm engine in envlab consumes a :class:`StepFunction`: one
nonnegative value per cell of a :class:`TensorGrid`.  Cells are stored in
row-major order with axis 0 corresponding to the first coordinate ``x_1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AlignmentError, DomainMismatch, EmptySetError, ValidationError

__all__ = [
    "BoxDomain",
    "TensorGrid",
    "CellSet",
    "StepFunction",
    "dyadic_breakpoints",
    "make_cube_set",
    "make_ball_set",
    "product_indicator",
    "refine_common",
]

# breakpoints closer than this (relative to the axis length) are merged;
# small enough to keep dyadic scales down to 2^-45 distinct
_MERGE_RTOL = 1e-15


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``prod_i [lo_i, hi_i]`` with Lebesgue measure."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.lo))
        hi = tuple(float(x) for x in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not lo:
            raise ValidationError("lo and hi must have the same positive length")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValidationError(f"invalid axis bounds [{a}, {b}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, dim: int = 1) -> "BoxDomain":
        return cls((0.0,) * dim, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    def is_close(self, other: "BoxDomain") -> bool:
        if self.dim != other.dim:
            return False
        tol = 1e-13 * max(max(self.lengths), 1.0)
        return all(
            abs(a - c) <= tol and abs(b - d) <= tol
            for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )


def dyadic_breakpoints(lo: float, hi: float, levels: int, uniform: int = 1,
                       anchor: str = "lo") -> np.ndarray:
    """Breakpoints refining geometrically towards one end of ``[lo, hi]``.

    Combines ``uniform`` equal cells with the points ``anchor +/- L 2^{-j}``
    for ``j = 1..levels`` where ``L = hi - lo``.
    """
    length = hi - lo
    pts = list(np.linspace(lo, hi, uniform + 1))
    scales = length * 2.0 ** -np.arange(1, levels + 1)
    if anchor == "lo":
        pts.extend(lo + scales)
    elif anchor == "hi":
        pts.extend(hi - scales)
    else:
        raise ValidationError("anchor must be 'lo' or 'hi'")
    return np.unique(np.asarray(pts, dtype=float))


class TensorGrid:
    """Tensor-product grid given by strictly increasing breakpoints per axis."""

    def __init__(self, breakpoints: Sequence[Sequence[float]]):
        bps = []
        for axis, bp in enumerate(breakpoints):
            bp = np.asarray(bp, dtype=float).ravel()
            if bp.size < 2:
                raise ValidationError(f"axis {axis} needs at least two breakpoints")
            if not np.all(np.isfinite(bp)):
                raise ValidationError(f"axis {axis} has non-finite breakpoints")
            if not np.all(np.diff(bp) > 0):
                # zero-width cells would produce 0**negative in exponent arithmetic
                raise ValidationError(f"axis {axis} breakpoints must be strictly increasing")
            bps.append(_frozen(bp))
        if not bps:
            raise ValidationError("grid needs at least one axis")
        self._bps = tuple(bps)
        self.domain = BoxDomain([b[0] for b in bps], [b[-1] for b in bps])
        self.widths = tuple(_frozen(np.diff(b)) for b in bps)
        self.centers = tuple(_frozen(0.5 * (b[:-1] + b[1:])) for b in bps)
        meas = self.widths[0]
        for w in self.widths[1:]:
            meas = np.multiply.outer(meas, w)
        self.cell_measures = _frozen(meas)

    @classmethod
    def uniform(cls, domain: BoxDomain, cells) -> "TensorGrid":
        cells = np.broadcast_to(np.atleast_1d(cells), (domain.dim,))
        return cls([np.linspace(a, b, int(n) + 1)
                    for a, b, n in zip(domain.lo, domain.hi, cells)])

    @property
    def breakpoints(self) -> tuple:
        return self._bps

    @property
    def dim(self) -> int:
        return len(self._bps)

    @property
    def shape(self) -> tuple:
        return tuple(b.size - 1 for b in self._bps)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def volume(self) -> float:
        return self.domain.volume

    def __eq__(self, other):
        if not isinstance(other, TensorGrid) or other.dim != self.dim:
            return NotImplemented if not isinstance(other, TensorGrid) else False
        return all(a.shape == b.shape and np.array_equal(a, b)
                   for a, b in zip(self._bps, other._bps))

    def __hash__(self):
        return hash(tuple(b.tobytes() for b in self._bps))

    def __repr__(self):
        return f"TensorGrid(shape={self.shape}, domain={self.domain})"

    def merged(self, other: "TensorGrid") -> "TensorGrid":
        """Grid whose breakpoints are the union of both grids' breakpoints."""
        if not self.domain.is_close(other.domain):
            raise DomainMismatch(f"{self.domain} vs {other.domain}")
        bps = []
        for a, b, length in zip(self._bps, other._bps, self.domain.lengths):
            u = np.union1d(a, b)
            keep = np.concatenate([[True], np.diff(u) > _MERGE_RTOL * length])
            u = u[keep]
            u[-1] = a[-1]
            bps.append(u)
        return TensorGrid(bps)

    def locate(self, axis: int, x) -> np.ndarray:
        """Index of the cell along ``axis`` containing coordinate(s) ``x``."""
        bp = self._bps[axis]
        idx = np.searchsorted(bp, x, side="right") - 1
        return np.clip(idx, 0, bp.size - 2)

    def breakpoint_index(self, axis: int, x: float) -> int:
        bp = self._bps[axis]
        tol = 1e-12 * (bp[-1] - bp[0])
        i = int(np.argmin(np.abs(bp - x)))
        if abs(bp[i] - x) > tol:
            raise AlignmentError(f"{x!r} is not a breakpoint on axis {axis}")
        return i

    def axis_mask(self, axis: int, a: float, b: float) -> np.ndarray:
        """Cells along ``axis`` whose centers lie in the closed interval [a, b]."""
        c = self.centers[axis]
        return (c >= a) & (c <= b)

    def box_mask(self, axis_masks) -> np.ndarray:
        mask = axis_masks[0]
        for m in axis_masks[1:]:
            mask = np.logical_and.outer(mask, m)
        return mask


class CellSet:
    """A union of grid cells; its measure is the exact sum of cell measures."""

    def __init__(self, grid: TensorGrid, mask):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != grid.shape:
            raise ValidationError(f"mask shape {mask.shape} != grid shape {grid.shape}")
        self.grid = grid
        self.mask = _frozen(mask, dtype=bool)
        self.measure = math.fsum(grid.cell_measures[mask])

    def __len__(self):
        return int(self.mask.sum())

    def __or__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.grid, self.mask | other.mask)

    def __and__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.grid, self.mask & other.mask)

    def __sub__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.grid, self.mask & ~other.mask)

    def _check(self, other):
        if other.grid != self.grid:
            raise DomainMismatch("cell sets live on different grids")

    def indicator(self) -> "StepFunction":
        return StepFunction(self.grid, self.mask.astype(float))

    def __repr__(self):
        return f"CellSet(cells={len(self)}, measure={self.measure!r})"


class StepFunction:
    """Nonnegative piecewise-constant function on a tensor grid.

    Parameters
    ----------
    grid : TensorGrid
    values : array_like
        One value per cell, either shaped like ``grid.shape`` or flat in
        row-major order.
    """

    def __init__(self, grid: TensorGrid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            if values.size != grid.size:
                raise ValidationError(
                    f"{values.size} values for a grid with {grid.size} cells")
            values = values.reshape(grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValidationError("step function values must be finite")
        if np.any(values < 0):
            raise ValidationError("step function values must be nonnegative")
        self.grid = grid
        self.values = _frozen(values)

    @classmethod
    def constant(cls, grid: TensorGrid, c: float) -> "StepFunction":
        return cls(grid, np.full(grid.shape, float(c)))

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def supp_measure(self) -> float:
        return math.fsum(self.grid.cell_measures[self.values > 0])

    @property
    def max(self) -> float:
        return float(self.values.max())

    def support(self) -> CellSet:
        return CellSet(self.grid, self.values > 0)

    def superlevel(self, u: float) -> CellSet:
        """The strict superlevel set ``{f > u}``."""
        return CellSet(self.grid, self.values > u)

    def scaled(self, c: float) -> "StepFunction":
        if c < 0:
            raise ValidationError("scale factor must be nonnegative")
        return StepFunction(self.grid, self.values * c)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __add__(self, other: "StepFunction") -> "StepFunction":
        f, g = refine_common(self, other)
        return StepFunction(f.grid, f.values + g.values)

    def on(self, grid: TensorGrid) -> "StepFunction":
        """Resample onto a grid that refines this function's grid."""
        if grid == self.grid:
            return self
        if not grid.domain.is_close(self.grid.domain):
            raise DomainMismatch(f"{grid.domain} vs {self.grid.domain}")
        idx = np.ix_(*[self.grid.locate(a, grid.centers[a]) for a in range(grid.dim)])
        return StepFunction(grid, self.values[idx])

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = tuple(self.grid.locate(a, pts[:, a]) for a in range(self.dim))
        return self.values[idx]

    def to_dict(self, role: str | None = None) -> dict:
        out = {
            "dim": self.dim,
            "breakpoints": [bp.tolist() for bp in self.grid.breakpoints],
            "values": self.values.ravel().tolist(),
        }
        if role is not None:
            out["role"] = role
        return out

    def to_json(self, role: str | None = None) -> str:
        return json.dumps(self.to_dict(role), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "StepFunction":
        try:
            grid = TensorGrid(data["breakpoints"])
            values = data["values"]
        except KeyError as exc:
            raise ValidationError(f"missing key {exc}") from None
        if int(data.get("dim", grid.dim)) != grid.dim:
            raise ValidationError("dim does not match breakpoints")
        return cls(grid, values)

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"StepFunction(shape={self.grid.shape}, max={self.max:g})"


def make_cube_set(grid: TensorGrid, center, sidelength: float) -> CellSet:
    """Cells whose centers lie in the closed cube of the given side length.

    The cube is clipped to the domain; its reported measure is the exact sum
    of the selected cells' measures.
    """
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    if not sidelength > 0:
        raise ValidationError("sidelength must be positive")
    h = 0.5 * sidelength
    masks = [grid.axis_mask(a, c - h, c + h) for a, c in enumerate(center)]
    mask = grid.box_mask(masks)
    if not mask.any():
        raise EmptySetError(f"cube at {tuple(center)} with side {sidelength} "
                            "contains no cell center")
    return CellSet(grid, mask)


def make_ball_set(grid: TensorGrid, center, radius: float) -> CellSet:
    """The cube ``B_r(x0)`` of half-side ``radius`` (sup-norm ball)."""
    return make_cube_set(grid, center, 2.0 * radius)


def product_indicator(grid: TensorGrid, intervals) -> StepFunction:
    """Indicator of ``A_1 x ... x A_d`` for grid-aligned intervals ``A_i``."""
    intervals = list(intervals)
    if len(intervals) != grid.dim:
        raise ValidationError(f"need {grid.dim} intervals, got {len(intervals)}")
    masks = []
    for axis, (a, b) in enumerate(intervals):
        i = grid.breakpoint_index(axis, a)
        j = grid.breakpoint_index(axis, b)
        m = np.zeros(grid.shape[axis], dtype=bool)
        m[min(i, j):max(i, j)] = True
        masks.append(m)
    return StepFunction(grid, grid.box_mask(masks).astype(float))


def refine_common(f: StepFunction, g: StepFunction):
    """Put ``f`` and ``g`` on their merged breakpoint grid."""
    if f.grid == g.grid:
        return f, g
    grid = f.grid.merged(g.grid)
    return f.on(grid), g.on(grid)
