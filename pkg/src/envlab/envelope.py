"""Growth envelopes, Hardy functionals, index probes and embedding witnesses.

The growth envelope ``E(t) = sup{f*(t) : ||f|| <= 1}`` is bounded from below
by normalized indicators ``chi_A / ||chi_A||`` drawn from families of cell
sets (slabs, corner cubes, cubes centred at a minimum point of the
exponent).  Index probes evaluate the Hardy-type functional
``(int_0^eps (t^alpha f*(t))^v dt/t)^{1/v}`` on witness sequences and
classify the ratio to the norm as bounded or divergent.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats
from scipy.special import logsumexp

from .classical import LorentzIndex, lorentz_norm, lp_norm
from .domain import (BoxDomain, CellSet, StepFunction, TensorGrid, make_ball_set,
                     make_cube_set)
from .errors import (EmptySetError, GridMismatch, InsufficientSamples, InvalidExponent,
                     InvalidWitness, NumericalError, ValidationError, WitnessOutOfDomain)
from .mixed import MixedExponent, mixed_lorentz_norm, mixed_norm
from .rearrangement import (AnalyticProfile, ProfileBracket, ValueMassProfile, rearrange,
                            sample_analytic)
from .variable import ExponentField, variable_lorentz_norm, variable_norm

__all__ = [
    "ClassicalSpace",
    "MixedSpace",
    "VariableSpace",
    "EnvelopeCurve",
    "FitResult",
    "HardyInterval",
    "ProbeReport",
    "WitnessReport",
    "RatioTestResult",
    "FAMILIES",
    "envelope_lower",
    "fit_envelope_exponent",
    "hardy_functional",
    "index_probe",
    "non_embedding_witness",
    "embedding_ratio_test",
]

FAMILIES = ("normalized_indicators", "slabs", "lh0_balls")
NORM_SLACK = 1e-9


# -- spaces -----------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalSpace:
    """``L_p`` (``q=None``) or the classical Lorentz space ``L_{p,q}``."""

    p: float
    grid: TensorGrid
    q: float | None = None

    def __post_init__(self):
        LorentzIndex(self.p, self.p if self.q is None else self.q)

    @property
    def kind(self) -> str:
        return "classical"

    @property
    def theoretical_alpha(self) -> float:
        return 1.0 / self.p

    @property
    def theoretical_index(self) -> float:
        return self.p if self.q is None else self.q

    def norm(self, f: StepFunction) -> float:
        prof = rearrange(f)
        if self.q is None:
            return lp_norm(prof, self.p)
        return lorentz_norm(prof, self.p, self.q)

    def describe(self) -> dict:
        return {"kind": self.kind, "p": self.p, "q": self.q}


@dataclass(frozen=True)
class MixedSpace:
    """``L_{p_vec}`` (``q=None``) or the mixed Lorentz space ``L_{p_vec,q}``."""

    p: tuple
    grid: TensorGrid
    q: float | None = None

    def __post_init__(self):
        p = MixedExponent(self.p)
        if len(p) != self.grid.dim:
            raise ValidationError("exponent length does not match the grid")
        object.__setattr__(self, "p", p)
        if self.q is not None and math.isinf(p.p_min) and not math.isinf(self.q):
            raise InvalidExponent("all p_i = inf requires q = inf")

    @property
    def kind(self) -> str:
        return "mixed"

    @property
    def theoretical_alpha(self) -> float:
        return 1.0 / self.p.p_min

    @property
    def theoretical_index(self) -> float:
        return self.p.p_min if self.q is None else self.q

    @property
    def worst_axis(self) -> int:
        return int(np.argmin(self.p))

    def norm(self, f: StepFunction) -> float:
        if self.q is None:
            return mixed_norm(f, self.p)
        return mixed_lorentz_norm(f, self.p, self.q)

    def describe(self) -> dict:
        return {"kind": self.kind, "p": list(self.p), "q": self.q}


@dataclass(frozen=True)
class VariableSpace:
    """``L_{p(.)}`` (``q=None``) or the variable Lorentz space ``L_{p(.),q}``.

    The additional index is ``p_minus`` (meaningful for ``p_minus > 1``) or
    ``q`` (for ``q > 1``).
    """

    field: ExponentField
    q: float | None = None
    tol: float = 1e-10

    @property
    def grid(self) -> TensorGrid:
        return self.field.grid

    @property
    def kind(self) -> str:
        return "variable"

    @property
    def theoretical_alpha(self) -> float:
        return 1.0 / self.field.p_minus

    @property
    def theoretical_index(self) -> float:
        return self.field.p_minus if self.q is None else self.q

    def minimum_point(self) -> tuple:
        """``field.x0`` or the centre of the first cell attaining ``p_minus``."""
        if self.field.x0 is not None:
            return self.field.x0
        idx = np.unravel_index(int(np.argmin(self.field.values)), self.grid.shape)
        return tuple(float(self.grid.centers[a][i]) for a, i in enumerate(idx))

    def norm(self, f: StepFunction) -> float:
        if self.q is None:
            return variable_norm(f, self.field, self.tol)
        return variable_lorentz_norm(f, self.field, self.q, self.tol)

    def describe(self) -> dict:
        return {"kind": self.kind, "p_minus": self.field.p_minus,
                "p_plus": self.field.p_plus, "q": self.q}


# -- envelopes --------------------------------------------------------------

def _corners(domain: BoxDomain):
    pts = np.array(np.meshgrid(*[(a, b) for a, b in zip(domain.lo, domain.hi)],
                               indexing="ij")).reshape(domain.dim, -1).T
    return [tuple(p) for p in pts]


def _cube_family(grid: TensorGrid, center) -> list:
    """Cubes centred at ``center`` with half sides reaching each breakpoint."""
    center = np.asarray(center, dtype=float)
    radii = set()
    for a in range(grid.dim):
        d = np.abs(grid.breakpoints[a] - center[a])
        radii.update(d[d > 0].tolist())
    out = []
    for r in sorted(radii):
        try:
            out.append(make_ball_set(grid, center, r))
        except EmptySetError:
            continue
    return out


def _slab_family(grid: TensorGrid) -> list:
    out = []
    for a in range(grid.dim):
        for n in range(1, grid.shape[a] + 1):
            m = np.zeros(grid.shape[a], dtype=bool)
            m[:n] = True
            masks = [np.ones(k, dtype=bool) for k in grid.shape]
            masks[a] = m
            out.append(CellSet(grid, grid.box_mask(masks)))
    return out


def candidate_sets(space, family: str, x0=None) -> list:
    """Cell sets of one family on the space's grid."""
    grid = space.grid
    if family == "slabs":
        return _slab_family(grid)
    if family == "normalized_indicators":
        d = grid.domain
        centre = tuple(0.5 * (a + b) for a, b in zip(d.lo, d.hi))
        sets = []
        for c in _corners(d) + [centre]:
            sets.extend(_cube_family(grid, c))
        return sets
    if family == "lh0_balls":
        if x0 is None:
            if isinstance(space, VariableSpace):
                x0 = space.minimum_point()
            else:
                x0 = grid.domain.lo
        return _cube_family(grid, x0)
    raise ValidationError(f"unknown family {family!r}; choose from {FAMILIES}")


@dataclass
class EnvelopeCurve:
    """Lower estimates of the growth envelope at sample points ``t``.

    ``certificates[i]`` is ``(A, N)``: the function ``chi_A / N`` has norm at
    most ``1 + 1e-9`` and its rearrangement's left limit at ``t[i]`` equals
    ``estimate[i]``.
    """

    t: np.ndarray
    estimate: np.ndarray
    family: list
    certificates: list
    space: dict = field(default_factory=dict)
    fit: "FitResult | None" = None

    def certificate_function(self, i: int) -> StepFunction:
        A, N = self.certificates[i]
        return StepFunction(A.grid, A.mask / N)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "estimate", "family"])
        for t, e, fam in zip(self.t, self.estimate, self.family):
            w.writerow([format(float(t), ".17g"), format(float(e), ".17g"), fam])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {
            "space": self.space,
            "t": [float(x) for x in self.t],
            "estimate": [float(x) for x in self.estimate],
            "family": list(self.family),
            "certificate_measure": [float(A.measure) for A, _ in self.certificates],
            "certificate_norm_of_indicator": [float(N) for _, N in self.certificates],
        }
        if self.fit is not None:
            out["fit"] = self.fit.to_dict()
        return out


def envelope_lower(space, t_samples, families=("normalized_indicators",), x0=None,
                   verify: bool = True) -> EnvelopeCurve:
    """Lower bound for the growth envelope from normalized indicators.

    For each ``t`` the estimate is ``max 1/||chi_A||`` over candidate sets with
    ``|A| >= t``.  Sets of measure exactly ``t`` are admitted because the
    norms of slightly larger sets ``A_s`` decrease to ``||chi_A||`` as
    ``s`` decreases to ``t``; the certificate then realizes the value as the
    left limit ``f*(t-)``.

    Parameters
    ----------
    space : ClassicalSpace, MixedSpace or VariableSpace
    t_samples : array_like
        Points in ``(0, volume]``.
    families : sequence of str
        Subset of :data:`FAMILIES`.
    x0 : point, optional
        Centre for the ``lh0_balls`` family.
    verify : bool
        Re-evaluate the norm of every winning certificate.
    """
    families = list(families)
    if not families:
        raise ValidationError("need at least one candidate family")
    t = np.asarray(t_samples, dtype=float).ravel()
    vol = space.grid.volume
    if t.size == 0 or np.any(t <= 0) or np.any(t > vol * (1 + 1e-12)):
        raise ValidationError(f"t samples must lie in (0, {vol}]")

    cands = []      # (measure, value, family, cellset, norm)
    seen = set()
    for fam in families:
        for A in candidate_sets(space, fam, x0=x0):
            key = A.mask.tobytes()
            if key in seen:
                continue
            seen.add(key)
            N = space.norm(A.indicator())
            if N > 0 and math.isfinite(N):
                cands.append((A.measure, 1.0 / N, fam, A, N))
    if not cands:
        raise ValidationError("candidate families produced no sets")
    cands.sort(key=lambda c: c[0])
    meas = np.array([c[0] for c in cands])
    vals = np.array([c[1] for c in cands])
    # suffix maximum: best value among sets with measure >= meas[i]
    best_idx = np.empty(len(cands), dtype=int)
    run = len(cands) - 1
    for i in range(len(cands) - 1, -1, -1):
        if vals[i] > vals[run]:
            run = i
        best_idx[i] = run

    est, fams, certs = [], [], []
    verified = {}
    for ti in t:
        i = int(np.searchsorted(meas, ti * (1 - 1e-12), side="left"))
        if i >= len(cands):
            raise ValidationError(f"no candidate set has measure >= {ti}")
        j = best_idx[i]
        _, val, fam, A, N = cands[j]
        if verify and j not in verified:
            n = space.norm(StepFunction(A.grid, A.mask / N))
            if n > 1 + NORM_SLACK:
                raise NumericalError(f"certificate norm {n} exceeds 1")
            verified[j] = n
        est.append(val)
        fams.append(fam)
        certs.append((A, N))
    return EnvelopeCurve(t=t, estimate=np.array(est), family=fams, certificates=certs,
                         space=space.describe())


@dataclass(frozen=True)
class FitResult:
    alpha: float
    stderr: float
    intercept: float
    n: int
    t_lo: float
    t_hi: float

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "stderr": self.stderr, "intercept": self.intercept,
                "n": self.n, "t_lo": self.t_lo, "t_hi": self.t_hi}


def _curve_arrays(curve):
    if isinstance(curve, EnvelopeCurve):
        return np.asarray(curve.t, float), np.asarray(curve.estimate, float)
    t, e = curve
    return np.asarray(t, float), np.asarray(e, float)


def fit_envelope_exponent(curve, t_lo: float, t_hi: float) -> FitResult:
    """Least-squares slope of ``log E`` against ``log t``, negated.

    ``curve`` is an :class:`EnvelopeCurve` or a pair ``(t, E)``.
    """
    t, e = _curve_arrays(curve)
    sel = (t >= t_lo * (1 - 1e-12)) & (t <= t_hi * (1 + 1e-12)) & (e > 0) & np.isfinite(e)
    if sel.sum() < 5:
        raise InsufficientSamples(f"{int(sel.sum())} samples in [{t_lo}, {t_hi}], need 5")
    res = stats.linregress(np.log(t[sel]), np.log(e[sel]))
    fit = FitResult(alpha=float(-res.slope), stderr=float(res.stderr),
                    intercept=float(res.intercept), n=int(sel.sum()),
                    t_lo=float(t_lo), t_hi=float(t_hi))
    if isinstance(curve, EnvelopeCurve):
        curve.fit = fit
    return fit


# -- Hardy functional -------------------------------------------------------

@dataclass(frozen=True)
class HardyInterval:
    lower: float
    upper: float


def _log_interval_weights(lo, hi, b):
    """``log int_lo^hi t^b dt/t`` elementwise; ``+inf`` where it diverges."""
    with np.errstate(divide="ignore", invalid="ignore"):
        llo, lhi = np.log(lo), np.log(hi)
        if b > 0:
            w = b * lhi + np.log(-np.expm1(b * (llo - lhi))) - math.log(b)
        elif b == 0:
            w = np.log(lhi - llo)
        else:
            w = b * llo + np.log(-np.expm1(-b * (llo - lhi))) - math.log(-b)
        w = np.where((lo == 0) & (b <= 0), np.inf, w)
    return w


def _log_plateau_terms(values, lo, hi, alpha, v, eps, kappa=None):
    """``log int_a^b (kappa t^alpha c)^v dt/t`` over plateaus cut at ``eps``."""
    keep = lo < eps
    lo, hi, c = lo[keep], np.minimum(hi[keep], eps), values[keep]
    if kappa is not None:
        c = c * np.asarray(kappa, dtype=float)[keep]
    pos = c > 0
    w = _log_interval_weights(lo[pos], hi[pos], alpha * v)
    return v * np.log(c[pos]) + w


def _profile_hardy(profile: ValueMassProfile, alpha, v, eps, kappa=None) -> float:
    if profile.is_empty:
        return 0.0
    lo = np.concatenate([[0.0], profile.edges[:-1]])
    if math.isinf(v):
        keep = lo < eps
        c = profile.values[keep]
        if kappa is not None:
            c = c * np.asarray(kappa, dtype=float)[keep]
        right = np.minimum(profile.edges[keep], eps)
        if alpha < 0 or (alpha == 0 and math.isinf(c[0])):
            return math.inf
        return float(np.max(c * right ** alpha))
    logs = _log_plateau_terms(profile.values, lo, profile.edges, alpha, v, eps, kappa)
    if logs.size == 0:
        return 0.0
    if np.any(np.isposinf(logs)):
        return math.inf
    return float(math.exp(logsumexp(logs) / v))


def _analytic_head(src: AnalyticProfile, alpha, v, h) -> float:
    """``int_0^h (t^alpha f(t))^v dt/t`` for ``f(t) = t^{-1/r}(1+|log t|)^{-gamma}``."""
    beta = v * (alpha - 1.0 / src.r)
    gv = src.gamma * v
    if beta < 0 or (beta == 0 and gv <= 1):
        return math.inf
    total = 0.0
    a = min(h, 1.0)
    L0 = -math.log(a)
    # substitute L = -log t on (0, min(h, 1))
    if beta == 0:
        total += (1 + L0) ** (1 - gv) / (gv - 1)
    else:
        val, _ = integrate.quad(lambda L: math.exp(-beta * L) * (1 + L) ** (-gv),
                                L0, math.inf)
        total += val
    if h > 1:
        val, _ = integrate.quad(lambda t: (t ** alpha * float(src.formula(t))) ** v / t, 1.0, h)
        total += val
    return total


def hardy_functional(profile, alpha: float, v: float, eps: float, kappa=None):
    """``(int_0^eps (kappa(t) t^alpha f*(t))^v dt/t)^{1/v}`` in closed form.

    Parameters
    ----------
    profile : ValueMassProfile or ProfileBracket
        A bracket from :func:`sample_analytic` yields a :class:`HardyInterval`
        whose upper end integrates the unbounded head analytically.
    alpha, v : float
        ``v = inf`` gives ``sup_{t < eps} kappa t^alpha f*(t)``.
    eps : float
        Upper limit of integration.
    kappa : array_like, optional
        Bounded weight tabulated per plateau (defaults to 1).

    Returns
    -------
    float or HardyInterval
        ``inf`` signals divergence.
    """
    if not v > 0:
        raise ValidationError("v must be positive")
    if not eps > 0:
        raise ValidationError("eps must be positive")
    if isinstance(profile, ProfileBracket):
        lower = _profile_hardy(profile.lower, alpha, v, eps)
        up = profile.upper
        h = min(profile.head, eps)
        body = ValueMassProfile(up.values[1:], up.widths[1:]) if len(up) > 1 else None
        if math.isinf(v):
            b = 0.0 if body is None else _body_sup(body, profile.head, alpha, eps)
            head = _head_sup(profile.source, alpha, h)
            return HardyInterval(lower, max(b, head))
        head = _analytic_head(profile.source, alpha, v, h)
        b = 0.0 if body is None else _body_integral(body, profile.head, alpha, v, eps)
        upper = math.inf if math.isinf(head) else (head + b) ** (1.0 / v)
        return HardyInterval(lower, upper)
    if not isinstance(profile, ValueMassProfile):
        profile = rearrange(profile)
    return _profile_hardy(profile, alpha, v, eps, kappa)


def _shifted(body: ValueMassProfile, offset):
    lo = offset + np.concatenate([[0.0], body.edges[:-1]])
    return lo, offset + body.edges


def _body_integral(body, offset, alpha, v, eps) -> float:
    lo, hi = _shifted(body, offset)
    logs = _log_plateau_terms(body.values, lo, hi, alpha, v, eps)
    if logs.size == 0:
        return 0.0
    return float(math.exp(logsumexp(logs)))


def _body_sup(body, offset, alpha, eps) -> float:
    lo, hi = _shifted(body, offset)
    keep = lo < eps
    if not keep.any():
        return 0.0
    ends = np.where(alpha >= 0, np.minimum(hi[keep], eps), lo[keep])
    return float(np.max(body.values[keep] * ends ** alpha))


def _head_sup(src: AnalyticProfile, alpha, h) -> float:
    if alpha < 1.0 / src.r or (alpha == 1.0 / src.r and src.gamma < 0):
        return math.inf
    ts = np.geomspace(h * 1e-300 ** (1 / 8), h, 4000)
    return float(np.max(ts ** alpha * src.formula(ts)))


# -- index probes -----------------------------------------------------------

@dataclass
class ProbeReport:
    v: float
    ks: list
    ratios: list
    hardy_values: list
    norms: list
    classification: str
    growth_ratio: float
    slope: float
    index: float
    alpha: float
    eps: float
    witness: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "ratio"])
        for k, r in zip(self.ks, self.ratios):
            w.writerow([k, format(float(r), ".17g")])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "v": self.v, "k": list(self.ks), "ratio": [float(r) for r in self.ratios],
            "hardy": [float(h) for h in self.hardy_values],
            "norm": [float(n) for n in self.norms],
            "classification": self.classification, "growth_ratio": self.growth_ratio,
            "slope": self.slope, "theoretical_index": self.index, "alpha": self.alpha,
            "eps": self.eps, "witness": self.witness,
        }


def classify_growth(ks, ratios, ratio_threshold=1.5, slope_threshold=0.05,
                    bounded_threshold=1.1):
    """Three-way verdict from the ratio ``R_kmax / R_kmin`` and a log-log slope."""
    ks = np.asarray(ks, dtype=float)
    r = np.asarray(ratios, dtype=float)
    if np.any(~np.isfinite(r)):
        return "divergent", math.inf, math.inf
    growth = float(r[-1] / r[0])
    slope = float(stats.linregress(np.log(ks), np.log(r)).slope) if len(ks) > 1 else 0.0
    if growth > ratio_threshold and slope > slope_threshold:
        return "divergent", growth, slope
    if growth < bounded_threshold:
        return "bounded", growth, slope
    return "inconclusive", growth, slope


def _default_gamma(u_lo: float, v: float) -> float:
    """Log exponent for ``f_{s,gamma}``: inside ``(u_lo, 1/v)`` when nonempty."""
    hi = 1.0 / v
    if hi > u_lo:
        return u_lo + 0.25 * (hi - u_lo)
    return u_lo * 1.1 if u_lo > 0 else hi


def power_log_depth(k: int, r: float, depth_power: float = 1.85) -> int:
    """Dyadic truncation depth ``ceil(k^depth_power)`` of the ``k``-th witness.

    The log-power witnesses diverge only like a power of ``log(1/t)``, so a
    linear depth leaves the signal buried in transients.  Depths are capped
    where ``t^{-1/r}`` would leave the double range.
    """
    cap = int(min(1000, 990 * r))
    return int(min(math.ceil(k ** depth_power), cap))


def _power_log_probe(space, v, ks, gamma, s, depth_power):
    """Witnesses ``f_{s,gamma}`` along the worst axis, bracketed from below.

    Norms are translation invariant, so the witness lives on the box moved
    to the origin; this keeps dyadic breakpoints near 0 exact.
    """
    grid = space.grid
    if isinstance(space, MixedSpace):
        axis = space.worst_axis
        r = space.p.p_min
        q = space.q
    else:
        axis, r, q = 0, space.p, space.q
    if q is None:
        u_lo = 1.0 / r                      # norm finite iff gamma * r > 1
    elif math.isinf(q):
        u_lo = 0.0
    else:
        u_lo = 1.0 / q                      # norm finite iff gamma * q > 1
    if gamma is None:
        gamma = _default_gamma(u_lo, v)
    lengths = grid.domain.lengths
    L = lengths[axis]
    if s is None:
        # largest support on which the profile is still non-increasing
        s = min(L, math.exp(min(0.0, 1.0 - gamma * r)))
    if not 0 < s <= L:
        raise WitnessOutOfDomain(f"support length {s} exceeds axis length {L}")
    try:
        prof = AnalyticProfile(r, gamma, s)
    except Exception as exc:
        raise InvalidWitness(str(exc)) from None
    depths = [power_log_depth(k, r, depth_power) for k in ks]
    jmax = max(depths)
    bps = []
    for a in range(len(lengths)):
        if a == axis:
            pts = s * 2.0 ** -np.arange(jmax + 1)
            bps.append(np.unique(np.concatenate([[0.0, lengths[a]], pts])))
        else:
            bps.append(np.array([0.0, lengths[a]]))
    g = TensorGrid(bps)
    if isinstance(space, MixedSpace):
        sp = MixedSpace(space.p, g, space.q)
    else:
        sp = ClassicalSpace(space.p, g, space.q)
    x = g.breakpoints[axis]
    mid = 0.5 * (x[:-1] + x[1:])
    shape = [1] * len(lengths)
    shape[axis] = -1
    fns = []
    for J in depths:
        lower, _ = sample_analytic(prof, J)
        vals = np.where(mid < s, lower.evaluate(mid), 0.0)
        fns.append(StepFunction(g, np.broadcast_to(vals.reshape(shape), g.shape)))
    wit = {"family": "power_log", "r": r, "gamma": gamma, "s": s, "axis": axis,
           "depths": depths}
    return sp, fns, wit


def _cascade_probe(space: VariableSpace, v, ks, alpha, j0, x0):
    pm = space.field.p_minus
    if alpha is None:
        if space.q is None:
            # divergence needs alpha > 1 and alpha v <= p_minus
            alpha = 0.5 * (1.0 + pm / v) if pm / v > 1 else 1.1
        else:
            lo, hi = pm / space.q, pm / v
            alpha = 0.5 * (lo + hi) if hi > lo else 1.1 * lo
    x0 = space.minimum_point() if x0 is None else tuple(np.atleast_1d(x0).astype(float))
    d = space.grid.domain
    if any(c < a or c > b for c, a, b in zip(x0, d.lo, d.hi)):
        raise WitnessOutOfDomain(f"x0 = {x0} lies outside the domain")
    kmax = max(ks)
    if 2.0 ** -(kmax + 1) < 1e-14 * max(d.lengths):
        raise WitnessOutOfDomain("cascade scales fall below floating point resolution")
    if 2.0 ** -j0 > max(d.lengths):
        raise WitnessOutOfDomain("first cascade cube is larger than the domain")
    bps = []
    for a in range(d.dim):
        r = 2.0 ** -np.arange(j0, kmax + 2)
        pts = np.concatenate([x0[a] - r, x0[a] + r, space.grid.breakpoints[a]])
        pts = pts[(pts >= d.lo[a]) & (pts <= d.hi[a])]
        bps.append(np.unique(pts))
    g = space.grid.merged(TensorGrid(bps))
    field_ = space.field.on(g)
    sp = VariableSpace(field_, space.q, space.tol)
    balls = {}
    for j in range(j0, kmax + 1):
        balls[j] = make_ball_set(g, x0, 2.0 ** -j)
    b = {j: (1.0 / balls[j].measure / j ** alpha) ** (1.0 / pm) for j in balls}
    fns = []
    for k in ks:
        vals = b[k] * balls[k].mask.astype(float)
        for j in range(j0, k):
            ann = balls[j].mask & ~balls[j + 1].mask
            vals = vals + b[j] * ann
        fns.append(StepFunction(g, vals))
    eps = 0.5 * balls[j0].measure
    return sp, fns, {"family": "cascade", "alpha": alpha, "j0": j0, "x0": list(x0)}, eps


def index_probe(space, v: float, k_range=None, alpha=None, gamma=None,
                eps=None, j0: int = 2, x0=None, s=None, depth_power: float = 1.85,
                ratio_threshold=1.5,
                slope_threshold=0.05, bounded_threshold=1.1) -> ProbeReport:
    """Probe whether the Hardy functional at exponent ``v`` is bounded.

    Witnesses are cascades ``s_k`` of scaled indicators of nested cubes for
    variable spaces, and step brackets of ``t^{-1/r}(1+|log t|)^{-gamma}``
    truncated at depth :func:`power_log_depth` for classical and mixed
    spaces.  The ratio
    ``R_k = H_v(f_k) / ||f_k||`` uses ``alpha`` equal to the theoretical
    envelope exponent.

    Parameters
    ----------
    space : ClassicalSpace, MixedSpace or VariableSpace
    v : float
        Exponent tested against the theoretical index.
    k_range : iterable of int, optional
        Witness indices; defaults to ``j0 + 1 .. 40`` for cascades and
        ``2 .. 40`` otherwise.
    alpha : float, optional
        Cascade decay exponent for variable spaces.
    gamma : float, optional
        Log exponent for classical and mixed spaces.
    eps : float, optional
        Hardy window; defaults to half the first cascade scale.
    """
    if not v > 0:
        raise ValidationError("v must be positive")
    if k_range is None:
        k_range = range(j0 + 1 if isinstance(space, VariableSpace) else 2, 41)
    ks = sorted(int(k) for k in k_range)
    if len(ks) < 2 or ks[0] < 2:
        raise ValidationError("k_range needs at least two depths >= 2")
    a_env = space.theoretical_alpha
    if isinstance(space, VariableSpace):
        if ks[0] <= j0:
            raise ValidationError("cascade depths must exceed j0")
        sp, fns, wit, eps0 = _cascade_probe(space, v, ks, alpha, j0, x0)
    else:
        sp, fns, wit = _power_log_probe(space, v, ks, gamma, s, depth_power)
        vol_other = sp.grid.volume / sp.grid.domain.lengths[wit["axis"]]
        eps0 = 0.5 * wit["s"] * vol_other
    eps = eps0 if eps is None else float(eps)
    hardy, norms, ratios = [], [], []
    for f in fns:
        h = hardy_functional(rearrange(f), a_env, v, eps)
        n = sp.norm(f)
        hardy.append(h)
        norms.append(n)
        ratios.append(h / n if n > 0 else math.inf)
    cls, growth, slope = classify_growth(ks, ratios, ratio_threshold, slope_threshold,
                                         bounded_threshold)
    return ProbeReport(v=float(v), ks=ks, ratios=ratios, hardy_values=hardy, norms=norms,
                       classification=cls, growth_ratio=growth, slope=slope,
                       index=space.theoretical_index,
                       alpha=float(wit.get("alpha", a_env)), eps=eps, witness=wit)


# -- non-embedding witness --------------------------------------------------

@dataclass
class WitnessReport:
    p: tuple
    eps: float
    alphas: tuple
    truncations: list
    mixed_norms: list
    target_norms: list
    mixed_variation: float
    target_growth: float
    verdict: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["truncation", "mixed_norm", "target_norm"])
        for M, a, b in zip(self.truncations, self.mixed_norms, self.target_norms):
            w.writerow([format(float(M), ".17g"), format(float(a), ".17g"),
                        format(float(b), ".17g")])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"p": list(self.p), "eps": self.eps, "alphas": list(self.alphas),
                "truncation": [float(m) for m in self.truncations],
                "mixed_norm": [float(x) for x in self.mixed_norms],
                "target_norm": [float(x) for x in self.target_norms],
                "mixed_variation": self.mixed_variation,
                "target_growth": self.target_growth, "verdict": self.verdict}


def witness_alphas(p, eps, alphas=None) -> tuple:
    """Validate (or choose) the exponents of ``prod_j x_j^{-alpha_j}``.

    Axes with ``p_j > p_l`` need ``0 < alpha_j < 1/p_j``; axes with
    ``p_j = p_l`` need ``1/(p_l + eps) <= alpha_j < 1/p_l``.  Defaults are
    ``0.8/p_j`` and ``(1 - 1e-3)/p_l`` respectively.
    """
    p = MixedExponent(p)
    pl = p.p_min
    if math.isinf(pl):
        raise InvalidExponent("p_min must be finite")
    if not eps > 0:
        raise ValidationError("eps must be positive")
    if any(pl < pj <= pl + eps for pj in p):
        raise ValidationError(f"eps = {eps} too large: need p_min + eps < p_j for p_j > p_min")
    if alphas is None:
        alphas = [(1 - 1e-3) / pj if pj == pl else 0.8 / pj for pj in p]
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != len(p):
        raise InvalidWitness("one alpha per axis required")
    for j, (a, pj) in enumerate(zip(alphas, p)):
        if pj == pl:
            ok = 1.0 / (pl + eps) <= a < 1.0 / pl
        else:
            ok = 0 < a < (0 if math.isinf(pj) else 1.0 / pj) or (math.isinf(pj) and a == 0)
        if not ok:
            raise InvalidWitness(f"alpha_{j + 1} = {a} is not admissible for p_{j + 1} = {pj}")
    return alphas


def _power_factor(alpha: float, M: float, length: float, per_octave: int, order: float):
    """Breakpoints and cell values of ``x^{-alpha}`` on ``[0, length]``.

    The first cell is ``[0, M^{-1/alpha}]``; beyond it cells grow
    geometrically.  Each value is the ``L_order`` mean of ``x^{-alpha}`` over
    its cell, so the factor keeps its exact ``L_order`` norm (``alpha *
    order < 1``) while staying bounded.
    """
    if alpha == 0:
        return np.array([0.0, length]), np.array([1.0])
    x1 = min(M ** (-1.0 / alpha), length)
    n = max(1, int(math.ceil(per_octave * math.log2(length / x1))))
    pts = np.unique(np.concatenate([[0.0], np.geomspace(x1, length, n + 1)]))
    a, b = pts[:-1], pts[1:]
    e = 1.0 - alpha * order
    vals = ((b ** e - a ** e) / (e * (b - a))) ** (1.0 / order)
    return pts, vals


def non_embedding_witness(p, eps: float, truncations, alphas=None, domain=None,
                          per_octave: int = 4, tol: float = 0.01) -> WitnessReport:
    """Witness that ``L_{p_vec}`` does not embed into ``L_{p_min + eps}``.

    Builds discretizations of ``prod_j x_j^{-alpha_j}`` resolved down to
    level ``M`` for each truncation ``M``; factor ``j`` takes ``L_{p_j}``
    cell means, so the mixed norm is exact at every level.  The verdict is
    ``"non-embedding confirmed"`` when the mixed norms vary by less than
    ``tol`` (relative) while the ``L_{p_min+eps}`` norms increase strictly.
    """
    p = MixedExponent(p)
    alphas = witness_alphas(p, eps, alphas)
    d = BoxDomain.unit(len(p)) if domain is None else domain
    if d.dim != len(p):
        raise ValidationError("domain dimension does not match the exponent")
    truncations = [float(M) for M in truncations]
    if len(truncations) < 2 or any(M <= 1 for M in truncations):
        raise ValidationError("need at least two truncation levels above 1")
    target = p.p_min + eps
    mixed, tnorm = [], []
    for M in truncations:
        bps, vals = [], None
        for j, a in enumerate(alphas):
            pts, fv = _power_factor(a, M, d.lengths[j], per_octave, p[j])
            bps.append(d.lo[j] + pts)
            vals = fv if vals is None else np.multiply.outer(vals, fv)
        f = StepFunction(TensorGrid(bps), vals)
        mixed.append(mixed_norm(f, p))
        tnorm.append(lp_norm(rearrange(f), target))
    var = (max(mixed) - min(mixed)) / min(mixed)
    growth = tnorm[-1] / tnorm[0]
    increasing = all(b > a for a, b in zip(tnorm, tnorm[1:]))
    verdict = ("non-embedding confirmed" if var < tol and increasing
               else "inconclusive")
    return WitnessReport(p=tuple(p), eps=float(eps), alphas=alphas, truncations=truncations,
                         mixed_norms=mixed, target_norms=tnorm, mixed_variation=var,
                         target_growth=growth, verdict=verdict)


# -- envelope ratio ---------------------------------------------------------

@dataclass(frozen=True)
class RatioTestResult:
    sup_ratio: float
    trend_slope: float
    verdict: str

    def to_dict(self) -> dict:
        return {"sup_ratio": self.sup_ratio, "trend_slope": self.trend_slope,
                "verdict": self.verdict}


def embedding_ratio_test(curve1, curve2, t_lo: float, t_hi: float,
                         threshold: float = 0.05) -> RatioTestResult:
    """Compare two envelopes; a ratio ``E_1/E_2`` blowing up as ``t -> 0``
    is evidence that the first space does not embed into the second."""
    t1, e1 = _curve_arrays(curve1)
    t2, e2 = _curve_arrays(curve2)
    if t1.shape != t2.shape or not np.allclose(t1, t2, rtol=1e-12, atol=0):
        raise GridMismatch("curves are sampled at different t")
    sel = (t1 >= t_lo * (1 - 1e-12)) & (t1 <= t_hi * (1 + 1e-12))
    if sel.sum() < 2:
        raise InsufficientSamples("need at least two common samples in range")
    ratio = e1[sel] / e2[sel]
    slope = float(stats.linregress(np.log(t1[sel]), np.log(ratio)).slope)
    verdict = "non-embedding evidence" if slope < -threshold else "no evidence"
    return RatioTestResult(sup_ratio=float(np.max(ratio)), trend_slope=slope,
                           verdict=verdict)
