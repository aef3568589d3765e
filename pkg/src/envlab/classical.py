"""Lebesgue and Lorentz quasi-norms of step profiles in closed form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .domain import StepFunction
from .errors import InvalidExponent
from .rearrangement import ValueMassProfile, rearrange

__all__ = [
    "LorentzIndex",
    "lp_norm",
    "lorentz_norm",
    "lorentz_tilde_norm",
    "level_set_norm",
]


def _check_exponent(p, name="p", allow_inf=True) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise InvalidExponent(f"{name} must be a number, got {p!r}") from None
    if math.isnan(p) or p <= 0 or (math.isinf(p) and not allow_inf):
        raise InvalidExponent(f"{name} must lie in (0, inf{']' if allow_inf else ')'}, got {p}")
    return p


@dataclass(frozen=True)
class LorentzIndex:
    """Index pair ``(p, q)``; ``p = inf`` forces ``q = inf``."""

    p: float
    q: float

    def __post_init__(self):
        p = _check_exponent(self.p, "p")
        q = _check_exponent(self.q, "q")
        if math.isinf(p) and not math.isinf(q):
            raise InvalidExponent("p = inf requires q = inf (otherwise the space is trivial)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


def _as_profile(f) -> ValueMassProfile:
    if isinstance(f, ValueMassProfile):
        return f
    if isinstance(f, StepFunction):
        return rearrange(f)
    raise TypeError(f"expected a StepFunction or ValueMassProfile, got {type(f).__name__}")


def lp_norm(f, p) -> float:
    """``||f||_p`` of a profile (or step function, via its rearrangement).

    Examples
    --------
    >>> lp_norm(ValueMassProfile([3, 1], [0.2, 0.5]), 1)
    1.1
    """
    p = _check_exponent(p)
    prof = _as_profile(f)
    if prof.is_empty:
        return 0.0
    top = prof.values[0]
    if math.isinf(p) or math.isinf(top):
        return float(top)
    logs = p * np.log(prof.values / top) + np.log(prof.widths)
    return float(top * math.exp(logsumexp(logs) / p))


def _log_power_increments(edges, a):
    """``log(T_k^a - T_{k-1}^a)`` for increasing ``T`` with ``T_{-1} = 0``, a > 0."""
    logT = np.log(edges)
    out = a * logT
    with np.errstate(divide="ignore"):
        out[1:] += np.log(-np.expm1(a * (logT[:-1] - logT[1:])))
    return out


def lorentz_norm(f, p, q) -> float:
    """Classical ``||f||_{L_{p,q}} = (int (t^{1/p} f*(t))^q dt/t)^{1/q}``.

    For ``q = inf`` the supremum ``sup_t t^{1/p} f*(t)`` is attained at a
    plateau's right end (as a left limit).
    """
    idx = LorentzIndex(p, q)
    prof = _as_profile(f)
    if prof.is_empty:
        return 0.0
    top = prof.values[0]
    if math.isinf(top):
        return math.inf
    if math.isinf(idx.p):
        return float(top)
    if math.isinf(idx.q):
        return float(np.max(prof.values * prof.edges ** (1.0 / idx.p)))
    a = idx.q / idx.p
    logs = idx.q * np.log(prof.values / top) + _log_power_increments(prof.edges, a)
    return float(top * math.exp((logsumexp(logs) - math.log(a)) / idx.q))


def level_set_norm(levels, inner, q, log_inner: bool = False) -> float:
    """``(int_0^inf u^q N(u)^q du/u)^{1/q}`` for a step level-set norm ``N``.

    Parameters
    ----------
    levels : array_like
        Distinct positive values ``u_1 < ... < u_m`` of the function.
    inner : array_like
        ``inner[k]`` is the norm of ``{f > u}`` for ``u in [u_{k-1}, u_k)``,
        i.e. of ``{f >= u_k}``.
    q : float
        ``q = inf`` gives ``sup_u u N(u) = max_k u_k inner[k]``.
    log_inner : bool
        ``inner`` holds logarithms of the norms (for extreme scales).
    """
    u = np.asarray(levels, dtype=float)
    n = np.asarray(inner, dtype=float)
    if u.size == 0:
        return 0.0
    if math.isinf(q):
        if log_inner:
            return float(np.exp(np.max(np.log(u) + n)))
        return float(np.max(u * n))
    if log_inner:
        logn = n
        if np.any(np.isposinf(logn)):
            return math.inf
        pos = ~np.isneginf(logn)
    else:
        if np.any(np.isinf(n)):
            return math.inf
        pos = n > 0
        with np.errstate(divide="ignore"):
            logn = np.log(n)
    if not pos.any():
        return 0.0
    logu = np.log(u)
    # log of u_k^q - u_{k-1}^q, kept in log space so extreme levels stay finite;
    # log(u_{k-1}/u_k) via log1p keeps adjacent levels from cancelling to 0
    rel = np.diff(u) / u[1:]
    with np.errstate(divide="ignore"):
        near = np.log1p(-np.minimum(rel, 0.5))
    lograt = np.concatenate([[-np.inf], np.where(rel < 0.5, near, logu[:-1] - logu[1:])])
    logdw = q * logu + np.log(-np.expm1(q * lograt))
    logs = q * logn[pos] + logdw[pos]
    return float(math.exp((logsumexp(logs) - math.log(q)) / q))


def lorentz_tilde_norm(f, p, q) -> float:
    """Level-set Lorentz quasi-norm ``(int u^q ||chi_{f>u}||_p^q du/u)^{1/q}``.

    Without the ``p^{1/q}`` prefactor, so that it equals
    ``p^{-1/q} * lorentz_norm(f, p, q)`` for ``q < inf``.
    """
    idx = LorentzIndex(p, q)
    prof = _as_profile(f)
    if prof.is_empty:
        return 0.0
    if math.isinf(prof.values[0]):
        return math.inf
    levels = prof.values[::-1]
    # {f >= u_k} has measure equal to the right edge of plateau k
    meas = prof.edges[::-1]
    log_inner = np.zeros_like(meas) if math.isinf(idx.p) else np.log(meas) / idx.p
    return level_set_norm(levels, log_inner, idx.q, log_inner=True)
