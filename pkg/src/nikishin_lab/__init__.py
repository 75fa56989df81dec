"""Numerical laboratory for mixed Hermite-Pade approximation of Nikishin
systems on the real line."""

from .errors import *  # noqa: F401,F403
from .measures import (Interval, Measure, cauchy_transform, integrate,
                       inverse_measure, lebesgue, moments)
from .nikishin import MixedSystem, NikishinSystem, build, system_from_descriptor
from .hermite_pade import (MixedForm, MultiIndex2, at_zero_count,
                           normality_scan, solve_mixed, type2_pade,
                           zeros_in_hull)
from .reduction import (default_case, lemma4_transform, theorem3_reduce,
                        theorem4_check, verify_identity)
from .simquad import build_rule, exactness_test, markov_rate
from .equilibrium import (build_interaction, nth_root_compare,
                          ratio_experiment, solve_vector_equilibrium)
from .demos import load_demo

__version__ = '0.1.0'
