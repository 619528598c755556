"""Numerical auditing of approximate (similarity) algebraic structures."""

__version__ = "0.1.0"

from .collapse import EpsilonFamily, collapse_curve, collapse_curves, fit_rate, judge, verify_collapse
from .core import DefectStatistics, Metric, SampleSet, approx_equal, defect, estimate_lipschitz
from .errors import SimAlgError
from .fuzzy import FuzzySet, TNorm, derived_epsilon, embed_fuzzy
from .instances import FloatInstance, IntegersMod, PerturbedRealField, PerturbedVectorSpace, as_structure
from .liegroup import BilinearPerturbation, PerturbedMatrixGroup, extract_bracket, fixed_point_inverse, mul_eps
from .morphisms import MorphismDescriptor, check_approx_homomorphism, compose, embed_classical
from .structures import Carrier, OperationTable, StructureDescriptor, audit, axiom_catalog

__all__ = [
    "BilinearPerturbation", "Carrier", "DefectStatistics", "EpsilonFamily", "FloatInstance", "FuzzySet",
    "IntegersMod", "Metric", "MorphismDescriptor", "OperationTable", "PerturbedMatrixGroup",
    "PerturbedRealField", "PerturbedVectorSpace", "SampleSet", "SimAlgError", "StructureDescriptor", "TNorm",
    "approx_equal", "as_structure", "audit", "axiom_catalog", "check_approx_homomorphism", "collapse_curve",
    "collapse_curves", "compose", "defect", "derived_epsilon", "embed_classical", "embed_fuzzy",
    "estimate_lipschitz", "extract_bracket", "fit_rate", "fixed_point_inverse", "judge", "mul_eps",
    "verify_collapse",
]
