"""Finite, exact checks of arity approximation for discrete operads.

Partition complexes of operations and their connectivity, Segal functors on
arity-truncated patterns, and right Kan extension between truncations.
"""
from .fin_pointed import PointedMap
from .fincat import FiniteCategory, FinitePoset, Functor, is_n_initial
from .homology import ChainComplex, HomologyProfile, SimplicialComplex, homology
from .operads import EInfinity, EOne, TableOperad, multimorphism, pi_homology, sigma
from .patterns import (
    SegalFunctor,
    check_unique_extension,
    enumerate_segal,
    pattern_assoc,
    pattern_fin,
    right_kan_extend,
)

__version__ = "0.1.0"

__all__ = [
    "ChainComplex", "EInfinity", "EOne", "FiniteCategory", "FinitePoset", "Functor",
    "HomologyProfile", "PointedMap", "SegalFunctor", "SimplicialComplex", "TableOperad",
    "check_unique_extension", "enumerate_segal", "homology", "is_n_initial", "multimorphism",
    "pattern_assoc", "pattern_fin", "pi_homology", "right_kan_extend", "sigma",
]
