"""Spectral description of shift symmetries."""

from .curve import CurveCheck, HyperellipticCurve, curve_from_a2, tau, verify_a_on_curve
from .data import (
    Condition,
    ConditionReport,
    PHat,
    PHatSeries,
    SMatrix,
    SpectralData,
    build_chi_spectral,
    check_necessary,
    check_sufficient,
    identity_residual,
    make_phat,
    rational_fit,
    s_matrix,
)
from .omega import (
    CycleIntegral,
    Residue,
    a_cycle_integrals,
    b_cycle_conditions,
    contour_selftest,
    omega_residues,
    residue_sum,
)
from .rational import RationalFunction, laurent_to_rational

__all__ = [
    "Condition",
    "ConditionReport",
    "CurveCheck",
    "CycleIntegral",
    "HyperellipticCurve",
    "PHat",
    "PHatSeries",
    "RationalFunction",
    "Residue",
    "SMatrix",
    "SpectralData",
    "a_cycle_integrals",
    "b_cycle_conditions",
    "build_chi_spectral",
    "check_necessary",
    "check_sufficient",
    "contour_selftest",
    "curve_from_a2",
    "laurent_to_rational",
    "identity_residual",
    "make_phat",
    "omega_residues",
    "rational_fit",
    "residue_sum",
    "s_matrix",
    "tau",
    "verify_a_on_curve",
]
