"""Random convex analysis on finite stratified probability spaces.

Module elements are vectors indexed by the atoms of a fine partition;
scalars are random variables measurable for a coarse partition and are
stored as one extended real per coarse atom.
"""

from .convex_sets import StratifiedConvexSet, ball_of_seminorm, contains_event, gauge, random_distance
from .fenchel import (
    StratifiedConvexFunction,
    affine_minorant,
    biconjugate,
    classify_events,
    closure,
    conjugate,
    evaluate,
)
from .harness import ExperimentConfig, run_suite
from .l0_lattice import RandomScalar, gen_inverse, glue, lattice_inf, lattice_sup, sign
from .legendre import dlt, dlt_brute
from .polyhedra import Polyhedron
from .prob_core import Event, StratifiedSpace, cond_expect, make_space, uniform_space
from .risk import EntropicRiskSpec, entropic_risk, risk_duality_report
from .rlc_module import (
    CondPNorm,
    Concatenated,
    FiniteSup,
    ModuleElement,
    ModuleFunctional,
    WeightedCoord,
    apply_functional,
    operator_bound,
)
from .separation import counterexample_probe, normalize_separator, separate, separate_strict
from .serialization import load_instance, save_report

__version__ = "0.1.0"
