"""Numerical lab for Lebesgue, Lorentz, mixed-norm and variable-exponent spaces.

Exact norms of step functions, growth envelopes, additional-index probes
and embedding witnesses.
"""

__version__ = "0.1.0"

from .classical import LorentzIndex, lorentz_norm, lorentz_tilde_norm, lp_norm
from .domain import (BoxDomain, CellSet, StepFunction, TensorGrid, dyadic_breakpoints,
                     make_ball_set, make_cube_set, product_indicator, refine_common)
from .envelope import (ClassicalSpace, EnvelopeCurve, MixedSpace, VariableSpace,
                       embedding_ratio_test, envelope_lower, fit_envelope_exponent,
                       hardy_functional, index_probe, non_embedding_witness)
from .errors import *  # noqa: F401,F403
from .mixed import MixedExponent, hoelder_embedding_constant, mixed_lorentz_norm, mixed_norm
from .rearrangement import (AnalyticProfile, ValueMassProfile, distribution, rearrange,
                            sample_analytic)
from .variable import (ExponentField, log_hoelder_check, modular, quasi_triangle_check,
                       unit_ball_check, variable_lorentz_norm, variable_norm)
