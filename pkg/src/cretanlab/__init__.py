"""Exact and numerical construction of two-level Cretan matrices from SBIBDs."""

from .cretan import (
    CharacteristicSolution,
    CretanMatrix,
    all_solutions,
    build_cretan,
    determinant,
    hadamard_family_cretan,
    solve_characteristic,
    verify_exact,
)
from .designs import (
    DesignParams,
    DifferenceSet,
    IncidenceMatrix,
    complement,
    develop,
    find_difference_set,
    load_difference_sets,
    menon_family,
    qr_family,
    twin_prime_family,
    verify_sbibd,
)
from .numeric import SearchConfig, SearchTemplate, compare_exact_float, float_det, residual, search
from .qfield import QuadExt, parse_quad

__version__ = "0.1.0"
