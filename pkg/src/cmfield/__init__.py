"""Class fields of imaginary quadratic fields by complex multiplication.

Reduced binary quadratic forms and class groups, ray class groups with
conductors, arbitrary-precision modular function evaluation, Hilbert
class polynomials with certified integer rounding, CM curves with
division polynomials and ray class field generators, and a Shimura
reciprocity engine for reduced-size class invariants.
"""

__version__ = "0.1.0"

from .numerics import ComplexPoly, IntPoly, PrecisionCtx, PrecisionExhausted, RoundingUncertified
from .quadforms import Discriminant, QuadForm, class_group, compose, enumerate_reduced_forms
from .quadforms import reduce as reduce_form
from .quadforms import tau_of_form
from .rayclass import (
    Modulus,
    ResidueUnits,
    conductor_exponent_bound,
    conductor_of,
    discriminant_by_characters,
    ray_class_group,
    residue_units,
)
from .groups import FinAbGroup, smith_normal_form
from .modfunc import eta, eta_quotient, j_from_f2, lattice_invariants, weber_f, weber_f1, weber_f2, wp
from .hilbert import ClassPolynomial, cornacchia, hilbert_class_poly, initial_precision, split_check
from .cmcurve import (
    CMModel,
    DivisionPoly,
    QuadIntPolyK,
    cm_model,
    division_poly,
    division_poly_specialized,
    ray_class_poly,
    torsion_x_values,
    weber_value,
)
from .shimura import (
    FunctionSymbol,
    class_invariant_poly,
    conjugate_matrix,
    decompose,
    eta_quotient_symbol,
    fricke_symbol,
    g_tau,
    is_class_invariant,
    weber_symbol,
)
from .shimura import act as gl2_act

__all__ = [
    "__version__",
    "PrecisionCtx", "IntPoly", "ComplexPoly", "PrecisionExhausted", "RoundingUncertified",
    "Discriminant", "QuadForm", "enumerate_reduced_forms", "reduce_form", "compose",
    "tau_of_form", "class_group",
    "Modulus", "ResidueUnits", "residue_units", "ray_class_group", "conductor_of",
    "discriminant_by_characters", "conductor_exponent_bound", "FinAbGroup", "smith_normal_form",
    "eta", "weber_f", "weber_f1", "weber_f2", "j_from_f2", "lattice_invariants", "wp", "eta_quotient",
    "ClassPolynomial", "hilbert_class_poly", "initial_precision", "split_check", "cornacchia",
    "CMModel", "cm_model", "DivisionPoly", "division_poly", "division_poly_specialized",
    "torsion_x_values", "weber_value", "ray_class_poly", "QuadIntPolyK",
    "FunctionSymbol", "weber_symbol", "fricke_symbol", "eta_quotient_symbol", "g_tau",
    "decompose", "gl2_act", "is_class_invariant", "conjugate_matrix", "class_invariant_poly",
]
