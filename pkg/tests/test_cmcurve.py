from fractions import Fraction

import mpmath
import pytest
from mpmath import mpc, mpf

from cmfield.cmcurve import (
    ABPoly,
    _PsiEngine,
    _t3_t4,
    cm_model,
    division_poly,
    division_poly_degree,
    division_poly_leading,
    division_poly_specialized,
    p_eval,
    p_mul,
    p_sub,
    ray_class_poly,
    torsion_x_reps,
    torsion_x_values,
    weber_value,
)
from cmfield.modfunc import lattice_invariants, wp
from cmfield.numerics import PrecisionCtx
from cmfield.quadforms import principal_form, tau_of_form
from cmfield.rayclass import residue_units

CTX = PrecisionCtx(192)


def _abpoly_coeffs(dp):
    return [str(c) for c in dp.T]


def test_t3_matches_print():
    dp = division_poly(3)
    a, b = ABPoly.gen_a(), ABPoly.gen_b()
    assert list(dp.T) == [-(a * a), 12 * b, 6 * a, ABPoly.const(0), ABPoly.const(3)]


def test_t4_matches_print():
    dp = division_poly(4)
    a, b = ABPoly.gen_a(), ABPoly.gen_b()
    expected = [
        -16 * (b * b) - 2 * (a * a * a),
        -8 * (a * b),
        -10 * (a * a),
        40 * b,
        10 * a,
        ABPoly.const(0),
        ABPoly.const(2),
    ]
    assert list(dp.T) == expected


def test_t5_degree_and_leading():
    dp = division_poly(5)
    assert dp.degree == 12
    assert dp.leading == ABPoly.const(5)


def test_psi5_recursion_cross_check():
    # Doubling result equals the direct expansion psi5 = psi4 psi2^3 - psi3^3 psi1,
    # with (2y)^2 = 4(x^3 + ax + b) eliminated by hand.
    a, b = ABPoly.gen_a(), ABPoly.gen_b()
    t3, t4 = _t3_t4(a, b)
    eng = _PsiEngine(a, b, t3, t4)
    w4 = [4 * b, 4 * a, ABPoly.const(0), ABPoly.const(4)]
    direct = p_sub(p_mul(p_mul(w4, w4), t4), p_mul(p_mul(t3, t3), t3))
    assert eng.psi(5) == (0, direct)


def test_degree_and_leading_up_to_40():
    for m in range(1, 41):
        T = division_poly_specialized(m, 1, 1)
        assert len(T) - 1 == division_poly_degree(m), m
        assert T[-1] == division_poly_leading(m), m


def test_division_poly_rejects_bad_index():
    with pytest.raises(ValueError):
        division_poly(0)


def test_cm_model_minus7_exact():
    model = cm_model(-7, CTX)
    assert model.exact
    assert model.j == -3375
    assert model.a == Fraction(-875, 16384)
    assert model.b == Fraction(6125, 1048576)


def test_cm_model_specials():
    m4 = cm_model(-4, CTX)
    assert (m4.a, m4.b, m4.j) == (Fraction(-1), Fraction(0), 1728)
    m3 = cm_model(-3, CTX)
    assert (m3.a, m3.b, m3.j) == (Fraction(0), Fraction(-1), 0)


def test_cm_model_j_roundtrip_nonexact():
    model = cm_model(-23, CTX)  # h = 3: complex coefficients
    assert not model.exact
    a, b = model.a_num(CTX), model.b_num(CTX)
    with CTX.workprec():
        j = 1728 * 4 * a**3 / (4 * a**3 + 27 * b**2)
        assert abs(j - model.j) < abs(model.j) * mpf(2) ** -90


def test_torsion_reps_counts():
    assert len(torsion_x_reps(3)) == 4
    assert len(torsion_x_reps(5)) == 12
    assert len(torsion_x_reps(2)) == 3


def test_two_torsion_is_cubic_roots():
    model = cm_model(-7, CTX)
    xs = torsion_x_values(model, 2, CTX)
    a, b = model.a_num(CTX), model.b_num(CTX)
    with CTX.workprec():
        for x in xs:
            assert abs(4 * (x**3 + a * x + b)) < mpf(2) ** -90
    assert len(xs) == 3


@pytest.mark.parametrize("D,m,count", [(-7, 3, 4), (-7, 5, 12), (-11, 3, 4)])
def test_torsion_values_are_division_poly_roots(D, m, count):
    model = cm_model(D, CTX)
    xs = torsion_x_values(model, m, CTX)
    assert len(xs) == count
    a, b = model.a_num(CTX), model.b_num(CTX)
    with CTX.workprec():
        T = division_poly_specialized(m, a, b)
        scale = max(abs(c) for c in T)
        for x in xs:
            assert abs(p_eval(T, x)) < scale * mpf(2) ** (-CTX.bits // 2)


def test_weber_value_even():
    model = cm_model(-7, CTX)
    z = mpc(0.23, 0.31)
    with CTX.workprec():
        assert abs(weber_value(model, z, CTX) - weber_value(model, -z, CTX)) < mpf(2) ** -120


def test_weber_value_weight_zero_under_basis_change():
    # The scaled pe is a function of the lattice, not the basis: computing
    # through the equivalent basis [tau+1, 1] of Z_K gives the same value.
    D = -7
    tau = tau_of_form(principal_form(D), CTX).value
    z = mpc(0.23, 0.31)
    with CTX.workprec():
        inv1 = lattice_invariants(tau, CTX)
        inv2 = lattice_invariants(tau + 1, CTX)
        v1 = inv1.g2 * inv1.g3 / inv1.delta * wp(z, tau, CTX)
        v2 = inv2.g2 * inv2.g3 / inv2.delta * wp(z, tau + 1, CTX)
        assert abs(v1 - v2) < abs(v1) * mpf(10) ** -25


def test_weber_value_scaling_invariance():
    # f_K(lambda L, lambda z) = f_K(L, z) through the homogeneity weights
    # g2 -> lambda^-4 g2, g3 -> lambda^-6 g3, Delta -> lambda^-12, pe -> lambda^-2.
    D = -11
    tau = tau_of_form(principal_form(D), CTX).value
    z = mpc(0.17, 0.41)
    lam = mpc(1.3, 0.4)
    with CTX.workprec():
        inv = lattice_invariants(tau, CTX)
        base = inv.g2 * inv.g3 / inv.delta * wp(z, tau, CTX)
        scaled = (
            (inv.g2 / lam**4)
            * (inv.g3 / lam**6)
            / (inv.delta / lam**12)
            * (wp(z, tau, CTX) / lam**2)
        )
        assert abs(base - scaled) < abs(base) * mpf(10) ** -25


def test_weber_value_special_powers():
    # D = -4 uses pe^2, D = -3 uses pe^3: check homogeneity degree by scaling z.
    z = mpc(0.21, 0.37)
    m4 = cm_model(-4, CTX)
    m3 = cm_model(-3, CTX)
    with CTX.workprec():
        assert abs(weber_value(m4, z, CTX) - weber_value(m4, -z, CTX)) < mpf(2) ** -120
        assert abs(weber_value(m3, z, CTX) - weber_value(m3, -z, CTX)) < mpf(2) ** -120


def test_ray_class_poly_degrees():
    rp = ray_class_poly(-7, 3)
    U = residue_units(-7, 3)
    assert rp.degree == U.order // 2 == 4
    rp = ray_class_poly(-4, 3)
    assert rp.degree == 2


def test_ray_class_poly_rejects_h_gt_1():
    with pytest.raises(ValueError):
        ray_class_poly(-23, 3)


def test_ray_class_poly_roundtrip_residual():
    rp = ray_class_poly(-7, 3)
    ctx = PrecisionCtx(300)
    with ctx.workprec():
        # every recognized coefficient re-evaluates onto the numeric product
        from cmfield.cmcurve import _orbit_reps_mod_units, _ray_poly_attempt

        units = residue_units(-7, 3)
        reps = _orbit_reps_mod_units(units)
        coeffs2 = _ray_poly_attempt(-7, 3, reps, ctx)
        assert coeffs2 == rp.coeffs


def test_ray_class_poly_roots_satisfy_division_poly():
    rp = ray_class_poly(-7, 3, bits=256)
    ctx = PrecisionCtx(256)
    model = cm_model(-7, ctx)
    tau = tau_of_form(principal_form(-7), ctx).value
    with ctx.workprec():
        cs = []
        for (u, v) in rp.coeffs:
            cs.append(mpf(u.numerator) / u.denominator + tau * mpf(v.numerator) / v.denominator)
        roots = mpmath.polyroots(list(reversed(cs)), extraprec=120, maxsteps=200)
        a, b = model.a_num(ctx), model.b_num(ctx)
        T = division_poly_specialized(3, a, b)
        scale = max(abs(c) for c in T)
        for r in roots:
            assert abs(p_eval(T, r)) < scale * mpf(2) ** (-ctx.bits // 2)
