"""Distribution functions and non-increasing rearrangements.

Step functions rearrange exactly into a :class:`ValueMassProfile`, a list of
plateaus ``(value, width)`` laid out left to right on ``[0, total_mass)``.
Unbounded model profiles ``t^{-1/r} (1 + |log t|)^{-gamma}`` are handled by
:class:`AnalyticProfile` and bracketed between two step profiles.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .domain import StepFunction
from .errors import InvalidProfile, ValidationError

__all__ = [
    "ValueMassProfile",
    "AnalyticProfile",
    "ProfileBracket",
    "distribution",
    "rearrange",
    "sample_analytic",
]


def _compensated_cumsum(x) -> np.ndarray:
    """Running sums with Neumaier compensation."""
    out = np.empty(len(x))
    total = comp = 0.0
    for i, v in enumerate(x.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


class ValueMassProfile:
    """Right-continuous non-increasing step profile on ``(0, inf)``.

    Parameters
    ----------
    values : array_like
        Strictly decreasing plateau values.  Only the first value may be
        ``inf`` (used for the unbounded head of an upper bracket).
    widths : array_like
        Positive plateau widths.
    """

    def __init__(self, values, widths):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        widths = np.atleast_1d(np.asarray(widths, dtype=float))
        if values.shape != widths.shape or values.ndim != 1:
            raise ValidationError("values and widths must be 1-d of equal length")
        if values.size:
            if np.any(np.isnan(values)) or np.any(values < 0):
                raise ValidationError("plateau values must be nonnegative")
            if np.any(np.isinf(values[1:])):
                raise ValidationError("only the first plateau may be infinite")
            if np.any(np.diff(values) >= 0):
                raise ValidationError("plateau values must be strictly decreasing")
            if not np.all(np.isfinite(widths)) or np.any(widths <= 0):
                raise ValidationError("plateau widths must be positive and finite")
        self.values = values
        self.widths = widths
        self.values.flags.writeable = False
        self.widths.flags.writeable = False
        # right endpoints of the plateaus
        self.edges = _compensated_cumsum(widths)
        self.edges.flags.writeable = False
        self.total_mass = math.fsum(widths)

    @classmethod
    def from_pairs(cls, pairs) -> "ValueMassProfile":
        pairs = list(pairs)
        if not pairs:
            return cls([], [])
        v, w = zip(*pairs)
        return cls(v, w)

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(zip(self.values.tolist(), self.widths.tolist()))

    def __eq__(self, other):
        if not isinstance(other, ValueMassProfile):
            return NotImplemented
        return (np.array_equal(self.values, other.values)
                and np.array_equal(self.widths, other.widths))

    def __repr__(self):
        return f"ValueMassProfile({list(self)!r})"

    @property
    def is_empty(self) -> bool:
        return self.values.size == 0

    def evaluate(self, t):
        """``f*(t)``: value of the plateau containing ``t``, 0 beyond the mass."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.edges, t, side="right")
        padded = np.append(self.values, 0.0)
        out = padded[idx]
        return out if out.ndim else float(out)

    __call__ = evaluate

    def evaluate_left(self, t):
        """Left limit ``f*(t-)``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.edges, t, side="left")
        padded = np.append(self.values, 0.0)
        out = np.where(t > 0, padded[idx], np.inf if self.values.size else 0.0)
        return out if out.ndim else float(out)

    def distribution(self, s: float) -> float:
        """Measure of ``{f* > s}``."""
        return math.fsum(self.widths[self.values > s])

    def scaled(self, c: float) -> "ValueMassProfile":
        if not c > 0:
            raise ValidationError("scale factor must be positive")
        return ValueMassProfile(self.values * c, self.widths)

    def restrict(self, mass: float) -> "ValueMassProfile":
        """Profile truncated to ``[0, mass)``."""
        keep = []
        start = 0.0
        for v, e, w in zip(self.values, self.edges, self.widths):
            if start >= mass:
                break
            keep.append((v, mass - start if e > mass else w))
            start = e
        return ValueMassProfile.from_pairs(keep)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", "width"])
        for v, w in self:
            writer.writerow([format(v, ".17g"), format(w, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ValueMassProfile":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["value", "width"]:
            raise ValidationError("profile CSV needs a 'value,width' header")
        return cls.from_pairs((float(a), float(b)) for a, b in rows[1:] if a or b)


def distribution(f, s: float) -> float:
    """Exact measure of the strict superlevel set ``{|f| > s}``."""
    if isinstance(f, ValueMassProfile):
        return f.distribution(s)
    vals = f.values.ravel()
    sel = vals > s
    vals, meas = vals[sel], f.grid.cell_measures.ravel()[sel]
    # group by value first so the result rounds exactly like the profile's
    order = np.argsort(vals, kind="stable")
    vals, meas = vals[order], meas[order]
    cuts = np.flatnonzero(np.diff(vals)) + 1
    return math.fsum(math.fsum(chunk) for chunk in np.split(meas, cuts))


def rearrange(f: StepFunction) -> ValueMassProfile:
    """Non-increasing rearrangement of a step function.

    Cells with equal values are merged into one plateau; zero cells are
    dropped since they do not contribute to ``f*`` on ``(0, supp)``.
    """
    vals = f.values.ravel()
    meas = f.grid.cell_measures.ravel()
    pos = vals > 0
    vals, meas = vals[pos], meas[pos]
    if vals.size == 0:
        return ValueMassProfile([], [])
    order = np.argsort(-vals, kind="stable")
    vals, meas = vals[order], meas[order]
    cuts = np.flatnonzero(np.diff(vals)) + 1
    levels = vals[np.concatenate([[0], cuts])]
    widths = [math.fsum(chunk) for chunk in np.split(meas, cuts)]
    return ValueMassProfile(levels, widths)


@dataclass(frozen=True)
class AnalyticProfile:
    """``f*(t) = t^{-1/r} (1 + |log t|)^{-gamma}`` on ``[0, s)``.

    The formula is non-increasing on ``(0, s)`` only when
    ``gamma * r <= 1 - log(min(s, 1))`` and, if ``s > 1``, ``gamma * r >= -1``;
    other parameters are rejected.
    """

    r: float
    gamma: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        r, g, s = float(self.r), float(self.gamma), float(self.s)
        if not (math.isfinite(r) and r > 0):
            raise InvalidProfile(f"r must be positive, got {r}")
        if not (math.isfinite(s) and s > 0) or not math.isfinite(g):
            raise InvalidProfile("s must be positive and gamma finite")
        if g * r > 1.0 - math.log(min(s, 1.0)):
            raise InvalidProfile(
                f"gamma*r = {g * r:g} makes the profile increase near t = {min(s, 1):g}")
        if s > 1 and g * r < -1.0:
            raise InvalidProfile(f"gamma*r = {g * r:g} makes the profile increase past 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "s", s)

    @property
    def kind(self) -> str:
        return "power" if self.gamma == 0 else "power_log"

    def formula(self, t):
        """The profile formula without the support cut-off."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = t ** (-1.0 / self.r) * (1.0 + np.abs(np.log(t))) ** (-self.gamma)
        return out if out.ndim else float(out)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < self.s, self.formula(np.where(t < self.s, t, 1.0)), 0.0)
        return out if out.ndim else float(out)

    __call__ = evaluate


class ProfileBracket(tuple):
    """Pair ``(lower, upper)`` of step profiles enclosing an analytic profile.

    Both agree in structure with the dyadic points ``t_j = s 2^{-j}``.  The
    lower bracket's head ``[0, t_J)`` carries the value ``f*(t_J)``; the upper
    bracket's head is infinite.  ``source`` and ``head`` keep what is needed
    to integrate the upper head analytically.
    """

    def __new__(cls, lower, upper, source, head):
        obj = super().__new__(cls, (lower, upper))
        obj.source = source
        obj.head = head
        return obj

    @property
    def lower(self) -> ValueMassProfile:
        return self[0]

    @property
    def upper(self) -> ValueMassProfile:
        return self[1]


def _merge_equal(values, widths):
    out_v, out_w = [], []
    for v, w in zip(values, widths):
        if out_v and v == out_v[-1]:
            out_w[-1] += w
        else:
            out_v.append(v)
            out_w.append(w)
    return out_v, out_w


def sample_analytic(profile: AnalyticProfile, levels: int, base: float | None = None):
    """Monotone step minorant and majorant of an analytic profile.

    Parameters
    ----------
    profile : AnalyticProfile
    levels : int
        Number ``J >= 2`` of dyadic levels.
    base : float, optional
        Outer scale ``s`` of the breakpoints ``t_j = s 2^{-j}``; defaults to
        the support length of the profile and may not exceed it.

    Returns
    -------
    ProfileBracket
        Unpacks as ``(lower, upper)``.  On each interval ``[t_j, t_{j-1})``
        the lower bracket takes the right-endpoint value and the upper
        bracket the left-endpoint value.
    """
    if int(levels) != levels or levels < 2:
        raise ValidationError("levels must be an integer >= 2")
    s = profile.s if base is None else float(base)
    if not (0 < s <= profile.s):
        raise ValidationError("base must lie in (0, s]")
    J = int(levels)
    t = s * 2.0 ** -np.arange(J + 1)          # t_0 = s > t_1 > ... > t_J
    f = np.asarray(profile.formula(t), dtype=float)
    widths = t[:-1] - t[1:]                   # width of [t_j, t_{j-1}), j = 1..J
    # iterate from the origin outwards
    lo_v = [f[J]] + list(f[J - 1::-1])
    lo_w = [t[J]] + list(widths[::-1])
    up_v = [math.inf] + list(f[J:0:-1])
    up_w = [t[J]] + list(widths[::-1])
    lower = ValueMassProfile(*_merge_equal(lo_v, lo_w))
    upper = ValueMassProfile(*_merge_equal(up_v, up_w))
    return ProfileBracket(lower, upper, profile, t[J])
