"""Configuration-driven experiment runner.

``envlab <subcommand> --config file.json [--out-dir d] [--strict] [--seed n]``

Exit codes: 0 success, 2 invalid configuration (nothing written),
3 numerical failure, 4 inconclusive verdict under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .classical import lp_norm
from .domain import BoxDomain, StepFunction, TensorGrid, dyadic_breakpoints, product_indicator
from .envelope import (FAMILIES, ClassicalSpace, MixedSpace, VariableSpace, embedding_ratio_test,
                       envelope_lower, fit_envelope_exponent, hardy_functional, index_probe,
                       non_embedding_witness)
from .errors import EnvlabError, NumericalError, ValidationError
from .mixed import hoelder_embedding_constant, mixed_norm
from .rearrangement import AnalyticProfile, ValueMassProfile, rearrange, sample_analytic
from .variable import ExponentField, log_hoelder_check

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 2, 3, 4

# -- schemas ----------------------------------------------------------------

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_exp = {"anyOf": [_pos, {"const": "inf"}]}
_vec = {"type": "array", "items": {"type": "number"}, "minItems": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


GRID = _obj({
    "lo": _vec, "hi": _vec,
    "cells": {"anyOf": [{"type": "integer", "minimum": 1},
                        {"type": "array", "items": {"type": "integer", "minimum": 1}}]},
    "breakpoints": {"type": "array", "items": _vec, "minItems": 1},
    "dyadic_levels": {"type": "integer", "minimum": 0, "maximum": 45},
})

EXPONENT = {"oneOf": [
    _obj({"type": {"const": "constant"}, "value": _pos, "x0": _vec}, ["type", "value"]),
    _obj({"type": {"const": "piecewise"}, "axis": {"type": "integer", "minimum": 0},
          "breaks": _vec, "values": {"type": "array", "items": _pos, "minItems": 1},
          "x0": _vec}, ["type", "breaks", "values"]),
    _obj({"type": {"const": "affine"}, "base": _num, "slope": _vec, "x0": _vec},
         ["type", "base", "slope"]),
    _obj({"type": {"const": "log_hoelder"}, "p_minus": _pos, "x0": _vec},
         ["type", "p_minus", "x0"]),
    _obj({"type": {"const": "step"}, "values": {"type": "array", "items": _pos},
          "x0": _vec}, ["type", "values"]),
]}

SPACE = {"oneOf": [
    _obj({"type": {"const": "classical"}, "p": _exp, "q": _exp}, ["type", "p"]),
    _obj({"type": {"const": "mixed"}, "p": {"type": "array", "items": _exp, "minItems": 1},
          "q": _exp}, ["type", "p"]),
    _obj({"type": {"const": "variable"}, "exponent": EXPONENT, "q": _exp,
          "tol": _pos}, ["type", "exponent"]),
]}

FUNCTION = {"oneOf": [
    _obj({"type": {"const": "indicator"},
          "intervals": {"type": "array", "items": {"type": "array", "items": _num,
                                                   "minItems": 2, "maxItems": 2}}},
         ["type", "intervals"]),
    _obj({"type": {"const": "step"}, "values": {"type": "array", "items": _num}},
         ["type", "values"]),
    _obj({"type": {"const": "serialized"}, "dim": {"type": "integer"},
          "breakpoints": {"type": "array", "items": _vec}, "values": _vec,
          "role": {"type": "string"}}, ["type", "breakpoints", "values"]),
]}

T_SAMPLES = {"anyOf": [
    {"type": "array", "items": _pos, "minItems": 1},
    _obj({"lo": _pos, "hi": _pos, "num": {"type": "integer", "minimum": 1}},
         ["lo", "hi", "num"]),
]}

PROFILE = {"oneOf": [
    _obj({"type": {"const": "analytic"}, "r": _pos, "gamma": _num, "s": _pos,
          "levels": {"type": "integer", "minimum": 2}}, ["type", "r", "levels"]),
    _obj({"type": {"const": "plateaus"},
          "pairs": {"type": "array", "items": {"type": "array", "items": _num,
                                               "minItems": 2, "maxItems": 2}}},
         ["type", "pairs"]),
]}

SCHEMAS = {
    "norm": _obj({"grid": GRID, "space": SPACE, "function": FUNCTION}, ["grid", "space", "function"]),
    "rearrange": _obj({"grid": GRID, "function": FUNCTION}, ["grid", "function"]),
    "envelope": _obj({
        "grid": GRID, "space": SPACE, "t": T_SAMPLES,
        "families": {"type": "array", "items": {"enum": list(FAMILIES)}, "minItems": 1},
        "x0": _vec,
        "fit": _obj({"t_lo": _pos, "t_hi": _pos}, ["t_lo", "t_hi"]),
    }, ["grid", "space", "t"]),
    "index-probe": _obj({
        "grid": GRID, "space": SPACE, "v": _pos,
        "k_min": {"type": "integer", "minimum": 2}, "k_max": {"type": "integer", "minimum": 3},
        "alpha": _pos, "gamma": _num, "eps": _pos, "j0": {"type": "integer", "minimum": 0},
        "x0": _vec, "depth_power": _pos,
    }, ["grid", "space", "v"]),
    "embedding-check": {"oneOf": [
        _obj({"mode": {"const": "witness"}, "p": {"type": "array", "items": _exp},
              "eps": _pos, "truncations": {"type": "array", "items": _pos, "minItems": 2},
              "alphas": _vec, "tol": _pos}, ["mode", "p", "eps", "truncations"]),
        _obj({"mode": {"const": "hoelder"}, "grid": GRID,
              "p": {"type": "array", "items": _exp},
              "trials": {"type": "integer", "minimum": 1}}, ["mode", "grid", "p"]),
        _obj({"mode": {"const": "ratio"}, "grid": GRID,
              "spaces": {"type": "array", "items": SPACE, "minItems": 2, "maxItems": 2},
              "t": T_SAMPLES,
              "families": {"type": "array", "items": {"enum": list(FAMILIES)}, "minItems": 1},
              "t_lo": _pos, "t_hi": _pos, "threshold": _pos},
             ["mode", "grid", "spaces", "t"]),
    ]},
    "hardy-check": _obj({"profile": PROFILE, "alpha": _num, "v": _exp, "eps": _pos},
                        ["profile", "alpha", "v", "eps"]),
    "loghoelder-check": _obj({"grid": GRID, "exponent": EXPONENT, "x0": _vec,
                              "levels": {"type": "array", "items": {"type": "integer"}},
                              "threshold": _pos}, ["grid", "exponent"]),
}


# -- builders ---------------------------------------------------------------

def _exponent_value(x):
    return math.inf if x == "inf" else float(x)


def build_grid(spec: dict) -> TensorGrid:
    if "breakpoints" in spec:
        bps = [np.asarray(b, dtype=float) for b in spec["breakpoints"]]
    else:
        if "lo" not in spec or "hi" not in spec:
            raise ValidationError("grid needs either breakpoints or lo/hi")
        dom = BoxDomain(spec["lo"], spec["hi"])
        cells = np.broadcast_to(np.atleast_1d(spec.get("cells", 1)), (dom.dim,))
        bps = [np.linspace(a, b, int(n) + 1) for a, b, n in zip(dom.lo, dom.hi, cells)]
    levels = spec.get("dyadic_levels", 0)
    if levels:
        bps = [np.union1d(b, dyadic_breakpoints(b[0], b[-1], levels)) for b in bps]
    return TensorGrid(bps)


def build_exponent(spec: dict, grid: TensorGrid) -> ExponentField:
    kind = spec["type"]
    x0 = spec.get("x0")
    mesh = np.meshgrid(*grid.centers, indexing="ij")
    if kind == "constant":
        vals = np.full(grid.shape, float(spec["value"]))
    elif kind == "piecewise":
        axis = spec.get("axis", 0)
        if axis >= grid.dim:
            raise ValidationError("piecewise axis out of range")
        breaks = np.asarray(spec["breaks"], dtype=float)
        values = np.asarray(spec["values"], dtype=float)
        if values.size != breaks.size + 1:
            raise ValidationError("piecewise exponent needs len(breaks) + 1 values")
        vals = values[np.searchsorted(breaks, mesh[axis], side="right")]
    elif kind == "affine":
        slope = spec["slope"]
        if len(slope) != grid.dim:
            raise ValidationError("affine slope needs one entry per axis")
        vals = spec["base"] + sum(c * m for c, m in zip(slope, mesh))
    elif kind == "log_hoelder":
        if len(x0) != grid.dim:
            raise ValidationError("x0 has the wrong dimension")
        dist = np.max(np.abs(np.stack([m - c for m, c in zip(mesh, x0)])), axis=0)
        vals = spec["p_minus"] + 1.0 / (1.0 - np.log(np.minimum(dist, 1.0)))
    else:
        vals = spec["values"]
    return ExponentField(grid, vals, x0=x0)


def build_space(spec: dict, grid: TensorGrid):
    q = _exponent_value(spec["q"]) if "q" in spec else None
    if spec["type"] == "classical":
        return ClassicalSpace(_exponent_value(spec["p"]), grid, q)
    if spec["type"] == "mixed":
        return MixedSpace(tuple(_exponent_value(p) for p in spec["p"]), grid, q)
    return VariableSpace(build_exponent(spec["exponent"], grid), q, spec.get("tol", 1e-10))


def build_function(spec: dict, grid: TensorGrid) -> StepFunction:
    kind = spec["type"]
    if kind == "indicator":
        return product_indicator(grid, spec["intervals"])
    if kind == "step":
        return StepFunction(grid, spec["values"])
    f = StepFunction.from_dict(spec)
    return f.on(grid.merged(f.grid)) if f.grid != grid else f


def build_t(spec) -> np.ndarray:
    if isinstance(spec, dict):
        if not spec["lo"] < spec["hi"]:
            raise ValidationError("t.lo must be below t.hi")
        return np.geomspace(spec["lo"], spec["hi"], spec["num"])
    return np.asarray(spec, dtype=float)


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


# -- subcommands ------------------------------------------------------------
# each returns (files: dict name -> text, inconclusive: bool)

def run_norm(cfg, args):
    grid = build_grid(cfg["grid"])
    space = build_space(cfg["space"], grid)
    f = build_function(cfg["function"], grid)
    if f.grid != grid:
        space = build_space(cfg["space"], f.grid)
    out = {"norm": space.norm(f)}
    return {"norm.json": dump_json(out)}, False


def run_rearrange(cfg, args):
    grid = build_grid(cfg["grid"])
    prof = rearrange(build_function(cfg["function"], grid))
    summary = {"plateaus": len(prof), "total_mass": prof.total_mass,
               "max": float(prof.values[0]) if len(prof) else 0.0}
    return {"profile.csv": prof.to_csv(), "rearrange.json": dump_json(summary)}, False


def run_envelope(cfg, args):
    grid = build_grid(cfg["grid"])
    space = build_space(cfg["space"], grid)
    curve = envelope_lower(space, build_t(cfg["t"]),
                           families=cfg.get("families", ["normalized_indicators"]),
                           x0=cfg.get("x0"))
    fit = cfg.get("fit")
    if fit is None:
        fit = {"t_lo": float(curve.t.min()), "t_hi": float(curve.t.max())}
    fit_envelope_exponent(curve, fit["t_lo"], fit["t_hi"])
    out = curve.to_dict()
    out["theoretical_alpha"] = space.theoretical_alpha
    return {"envelope.csv": curve.to_csv(), "envelope.json": dump_json(out)}, False


def run_probe(cfg, args):
    grid = build_grid(cfg["grid"])
    space = build_space(cfg["space"], grid)
    kw = {k: cfg[k] for k in ("alpha", "gamma", "eps", "j0", "x0", "depth_power") if k in cfg}
    j0 = cfg.get("j0", 2)
    if "k_min" in cfg or "k_max" in cfg:
        k_min = cfg.get("k_min", j0 + 1 if isinstance(space, VariableSpace) else 2)
        kw["k_range"] = range(k_min, cfg.get("k_max", 40) + 1)
    rep = index_probe(space, cfg["v"], **kw)
    return ({"probe.csv": rep.to_csv(), "probe.json": dump_json(rep.to_dict())},
            rep.classification == "inconclusive")


def run_embedding(cfg, args):
    mode = cfg["mode"]
    if mode == "witness":
        p = [_exponent_value(x) for x in cfg["p"]]
        rep = non_embedding_witness(p, cfg["eps"], cfg["truncations"], alphas=cfg.get("alphas"),
                                    tol=cfg.get("tol", 0.01))
        return ({"witness.csv": rep.to_csv(), "witness.json": dump_json(rep.to_dict())},
                rep.verdict != "non-embedding confirmed")
    if mode == "hoelder":
        grid = build_grid(cfg["grid"])
        p = tuple(_exponent_value(x) for x in cfg["p"])
        if len(p) != grid.dim:
            raise ValidationError("exponent length does not match the grid")
        c = hoelder_embedding_constant(p, grid)
        rng = np.random.default_rng(args.seed)
        pmin = min(p)
        worst, violations, trials = 0.0, 0, cfg.get("trials", 200)
        for _ in range(trials):
            f = StepFunction(grid, rng.exponential(size=grid.shape) * (rng.random(grid.shape) < 0.7))
            lhs = lp_norm(rearrange(f), pmin)
            rhs = c * mixed_norm(f, p)
            if lhs > rhs * (1 + 1e-12):
                violations += 1
            if rhs > 0:
                worst = max(worst, lhs / rhs)
        out = {"constant": c, "trials": trials, "violations": violations,
               "max_ratio": worst, "seed": args.seed}
        return {"hoelder.json": dump_json(out)}, False
    grid = build_grid(cfg["grid"])
    t = build_t(cfg["t"])
    fams = cfg.get("families", ["normalized_indicators", "slabs"])
    curves = [envelope_lower(build_space(s, grid), t, families=fams) for s in cfg["spaces"]]
    res = embedding_ratio_test(curves[0], curves[1], cfg.get("t_lo", float(t.min())),
                               cfg.get("t_hi", float(t.max())), cfg.get("threshold", 0.05))
    out = res.to_dict()
    out["t"] = list(t)
    out["estimate_1"] = list(curves[0].estimate)
    out["estimate_2"] = list(curves[1].estimate)
    return {"ratio.json": dump_json(out)}, False


def run_hardy(cfg, args):
    spec = cfg["profile"]
    v = _exponent_value(cfg["v"])
    if spec["type"] == "analytic":
        prof = AnalyticProfile(spec["r"], spec.get("gamma", 0.0), spec.get("s", 1.0))
        res = hardy_functional(sample_analytic(prof, spec["levels"]), cfg["alpha"], v, cfg["eps"])
        out = {"lower": res.lower, "upper": res.upper}
    else:
        prof = ValueMassProfile.from_pairs(spec["pairs"])
        out = {"value": hardy_functional(prof, cfg["alpha"], v, cfg["eps"])}
    return {"hardy.json": dump_json(out)}, False


def run_loghoelder(cfg, args):
    grid = build_grid(cfg["grid"])
    field = build_exponent(cfg["exponent"], grid)
    rep = log_hoelder_check(field, x0=cfg.get("x0"), levels=cfg.get("levels"),
                            threshold=cfg.get("threshold"))
    out = {"x0": rep.x0, "radii": rep.radii, "quantities": rep.quantities, "C": rep.C,
           "C0": rep.C0, "threshold": rep.threshold, "passed": rep.passed}
    return {"loghoelder.json": dump_json(out)}, False


RUNNERS = {
    "norm": run_norm,
    "rearrange": run_rearrange,
    "envelope": run_envelope,
    "index-probe": run_probe,
    "embedding-check": run_embedding,
    "hardy-check": run_hardy,
    "loghoelder-check": run_loghoelder,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="envlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"envlab {__version__}")
    parser.add_argument("subcommand", choices=sorted(RUNNERS))
    parser.add_argument("--config", required=True, help="JSON experiment configuration")
    parser.add_argument("--out-dir", default=".", help="directory for CSV/JSON reports")
    parser.add_argument("--strict", action="store_true",
                        help="exit with status 4 on inconclusive verdicts")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        jsonschema.validate(cfg, SCHEMAS[args.subcommand])
        files, inconclusive = RUNNERS[args.subcommand](cfg, args)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, ValidationError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"envlab: invalid configuration: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, ArithmeticError) as exc:
        print(f"envlab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EnvlabError as exc:
        print(f"envlab: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    if inconclusive and args.strict:
        print("envlab: inconclusive verdict", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
