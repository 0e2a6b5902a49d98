"""Acceptance criteria, one test per criterion, at the stated tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL
line per criterion.

One criterion is expected to fail and is marked strict-xfail: the
reference value it was transcribed from — the Weber class polynomial for
discriminant -71 with constant term +1 — carries a sign typo. That
polynomial has discriminant -29*82811 (ramified away from 71) and
factorization patterns mod 3, 5, 29 that are impossible for a degree-7
class field generator, so it is not the minimal polynomial of any
root-of-unity multiple of a Weber value at a CM point of this field.
The corrected polynomial (constant term -1), certified independently by
integer-relation detection at 900 bits, is pinned by its companion test.
"""

import random
import time
from dataclasses import replace
from fractions import Fraction
import mpmath
import pytest
from mpmath import mpc, mpf

from cmfield import quadforms
from cmfield.cmcurve import (
    cm_model,
    division_poly,
    division_poly_degree,
    division_poly_leading,
    division_poly_specialized,
    p_eval,
    ray_class_poly,
)
from cmfield.cmcurve import ABPoly
from cmfield.hilbert import cornacchia, first_split_primes, hilbert_class_poly, split_check
from cmfield.modfunc import j_qexp_check, lattice_invariants
from cmfield.numerics import PrecisionCtx
from cmfield.quadforms import principal_form, tau_of_form
from cmfield.rayclass import (
    conductor_of,
    discriminant_by_characters,
    quotient_group,
    ray_class_group,
    residue_units,
)
from cmfield.shimura import (
    F2_J_DEGREE_RATIO,
    Multiplier,
    act,
    class_invariant_poly,
    decompose,
    gtau_image_order,
    is_class_invariant,
    mat_det,
    symbol_value,
    weber_symbol,
    word_to_matrix,
)
from oracles import brute_force_ray_class_group, fundamental_discriminants

HIL_71 = (
    737707086760731113357714241006081263,
    -425319473946139603274605151187659,
    5138800366453976780323726329446,
    -823534263439730779968091389,
    98394038810047812049302,
    -3091990138604570,
    313645809715,
    1,
)
WEBER_71_PRINTED = (1, 2, 1, -1, -1, -1, 1, 1)  # X^7+X^6-X^5-X^4-X^3+X^2+2X+1
WEBER_71_CERTIFIED = (-1, 2, 1, -1, -1, -1, 1, 1)  # constant term corrected


def report(name, ok):
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}")
    return ok


def test_criterion_hilbert_minus71():
    t0 = time.monotonic()
    cp = hilbert_class_poly(-71)
    elapsed = time.monotonic() - t0
    ok = cp.poly.coeffs == HIL_71 and elapsed < 5.0
    assert report(f"Hilbert class polynomial D=-71 byte-identical ({elapsed:.2f}s < 5s)", ok)


@pytest.mark.xfail(
    strict=True,
    reason="the +1 constant term in the transcribed reference is a typo: that "
    "polynomial has discriminant -29*82811 and cannot generate the class field; "
    "the certified constant term is -1 (see the companion test)",
)
def test_criterion_weber_minus71_as_printed():
    ok, rep = is_class_invariant(weber_symbol("f2"), -71, search_modifications=True)
    poly, _ = class_invariant_poly(rep.symbol, -71)
    match = poly.coeffs == WEBER_71_PRINTED
    report("Weber invariant polynomial D=-71 equals the transcribed reference", match)
    assert match


def test_criterion_weber_minus71_certified():
    t0 = time.monotonic()
    ok, rep = is_class_invariant(weber_symbol("f2"), -71, search_modifications=True)
    poly, _ = class_invariant_poly(rep.symbol, -71)
    elapsed = time.monotonic() - t0
    good = ok and poly.coeffs == WEBER_71_CERTIFIED and elapsed < 5.0
    assert report(
        f"Weber invariant polynomial D=-71, corrected constant term ({elapsed:.2f}s < 5s)", good
    )
    # Independent certification: the invariant value is a root, to 250+ bits.
    ctx = PrecisionCtx(300)
    tau = tau_of_form(principal_form(-71), ctx).value
    with ctx.workprec():
        v = symbol_value(rep.symbol, tau, ctx)
        assert abs(poly(v)) < mpf(2) ** -150


def test_criterion_special_cases():
    ok = (
        hilbert_class_poly(-4).poly.coeffs == (-1728, 1)
        and hilbert_class_poly(-3).poly.coeffs == (0, 1)
    )
    assert report("special cases Hil(-4) = X - 1728 and Hil(-3) = X", ok)


def test_criterion_division_polynomials():
    a, b = ABPoly.gen_a(), ABPoly.gen_b()
    t3 = division_poly(3)
    t4 = division_poly(4)
    ok = list(t3.T) == [-(a * a), 12 * b, 6 * a, ABPoly.const(0), ABPoly.const(3)]
    ok = ok and list(t4.T) == [
        -16 * (b * b) - 2 * (a * a * a),
        -8 * (a * b),
        -10 * (a * a),
        40 * b,
        10 * a,
        ABPoly.const(0),
        ABPoly.const(2),
    ]
    for m in range(1, 41):
        T = division_poly_specialized(m, 1, 1)
        ok = ok and len(T) - 1 == division_poly_degree(m) and T[-1] == division_poly_leading(m)
    assert report("division polynomials: printed T3, T4; degrees and leads for m <= 40", ok)


def test_criterion_j_q_expansion():
    ctx = PrecisionCtx(192)
    with mpmath.workprec(250):
        q = mpmath.exp(-10 * mpmath.pi)
        resid = j_qexp_check(mpc(0, 5), ctx)
        ok = resid < mpf(2.2e7) * q * q
    assert report(f"j q-expansion at 5i: residual < 2.2e7|q|^2", ok)


def test_criterion_splitting_oracle():
    total = agree = 0
    for D in (-7, -8, -11, -15, -20, -23, -71):
        cp = hilbert_class_poly(D)
        for p in first_split_primes(D, 50, cp.poly):
            total += 1
            verdict = split_check(cp, p) == "splits-completely"
            witness = cornacchia(p, D) is not None
            agree += verdict == witness
    ok = agree == total == 350
    assert report(f"splitting oracle: {agree}/{total} agreements over 7 discriminants", ok)


def test_criterion_ray_class_property_suite():
    checked = 0
    for D in fundamental_discriminants(40):
        h = quadforms.class_group(D)[0].order
        for m in (1, 2, 3, 4, 5, 6):
            rc = ray_class_group(D, m)
            U = rc.units
            im = U.group.subgroup_order(U.unit_image_vectors()) if U.group.ngens else 1
            assert rc.order * im == h * U.order, (D, m)
            inv, n = brute_force_ray_class_group(D, m)
            assert inv == rc.invariant_factors and n == rc.order, (D, m)
            checked += 1
    assert report(f"ray class suite: exactness + ideal-enumeration oracle on {checked} (D, m)", True)


def test_criterion_conductor_discriminant():
    # Ten cyclic prime-degree quotients reproduce Delta = f0^(l-1).
    cases = 0
    for (D, m) in (
        (-7, 3), (-4, 5), (-23, 2), (-8, 3), (-11, 5),
        (-4, 13), (-7, 9), (-3, 7), (-20, 3), (-24, 5), (-15, 4), (-8, 9),
        (-19, 5), (-40, 3), (-11, 4), (-8, 5), (-4, 7), (-3, 13), (-7, 5),
    ):
        rc = ray_class_group(D, m)
        for ell in (2, 3, 5, 7, 11):
            if rc.order % ell:
                continue
            sub = []
            for i in range(rc.group.ngens):
                v = [0] * rc.group.ngens
                v[i] = ell
                sub.append(v)
            q = quotient_group(rc, sub)
            if q.invariant_factors != (ell,):
                continue
            f0 = conductor_of(sub, rc)
            fdp = discriminant_by_characters(sub, rc)
            expected = {}
            n = f0
            d = 2
            while n > 1:
                while n % d == 0:
                    expected[d] = expected.get(d, 0) + (ell - 1)
                    n //= d
                d += 1
            got = {p: e for p, e in fdp.items() if e}
            assert got == expected, (D, m, ell, got, expected)
            cases += 1
            if cases >= 10:
                break
        if cases >= 10:
            break
    ok = cases >= 10
    assert report(f"conductor-discriminant formula on {cases} cyclic prime-degree cases", ok)


def test_criterion_shimura_act_vs_numeric():
    rng = random.Random(42)
    ctx = PrecisionCtx(160)
    tau0 = mpc(0, 2)
    f2 = weber_symbol("f2")
    m = 48
    worst = mpf(0)
    for _ in range(25):
        while True:
            M = tuple(rng.randrange(m) for _ in range(4))
            if mat_det(M, m) == 1:
                break
        sym = act(f2, M, m)
        word, _ = decompose(M, m)
        lift = word_to_matrix(word)
        with mpmath.workprec(220):
            moeb = (lift[0] * tau0 + lift[1]) / (lift[2] * tau0 + lift[3])
            lhs = symbol_value(sym, tau0, ctx)
            rhs = symbol_value(f2, moeb, ctx)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    ok = worst < mpf(10) ** -25
    assert report(f"shimura symbolic act vs numeric oracle: worst rel err {mpmath.nstr(worst, 3)}", ok)
    assert F2_J_DEGREE_RATIO == 72


def test_criterion_gtau_image_orders():
    checked = 0
    for D in fundamental_discriminants(100):
        for m in range(2, 49):
            U = residue_units(D, m)
            im = U.group.subgroup_order(U.unit_image_vectors()) if U.group.ngens else 1
            assert gtau_image_order(D, m) == U.order // im, (D, m)
            checked += 1
    assert report(f"g_tau image subgroup order on {checked} (D, m) pairs, m <= 48, |D| <= 100", True)


def test_criterion_ray_class_field_generation():
    for (D, m) in ((-7, 3), (-4, 3)):
        rp = ray_class_poly(D, m, bits=192)
        U = residue_units(D, m)
        im = U.group.subgroup_order(U.unit_image_vectors()) if U.group.ngens else 1
        degree_target = U.order // im  # [H_m : H] via the Artin isomorphism
        assert rp.degree == degree_target, (D, m)
        # stability re-check at doubled starting precision
        rp2 = ray_class_poly(D, m, bits=384)
        assert rp2.coeffs == rp.coeffs
        # roots satisfy the specialized division polynomial
        ctx = PrecisionCtx(256)
        model = cm_model(D, ctx)
        tau = tau_of_form(principal_form(D), ctx).value
        with ctx.workprec():
            cs = [
                mpf(u.numerator) / u.denominator + tau * mpf(v.numerator) / v.denominator
                for (u, v) in rp.coeffs
            ]
            roots = mpmath.polyroots(list(reversed(cs)), extraprec=120, maxsteps=300)
            a, b = model.a_num(ctx), model.b_num(ctx)
            T = division_poly_specialized(m, a, b)
            scale = max(abs(c) for c in T)
            tol = mpf(2) ** (-ctx.bits // 2)
            for r in roots:
                if D == -4:
                    # Weber value is a scaled pe^2: map back to x = +-sqrt(4 r Delta / g2^3).
                    inv = lattice_invariants(tau, ctx, cross_check=False)
                    x2 = 4 * r * inv.delta / inv.g2**3
                    x = mpmath.sqrt(x2)
                    assert min(abs(p_eval(T, x)), abs(p_eval(T, -x))) < scale * tol
                else:
                    assert abs(p_eval(T, r)) < scale * tol
    assert report("ray class field polynomials: degree = [H_m:H], 2x-stable, roots on T_m", True)


def test_criterion_precision_robustness():
    ok = True
    for D in (-3, -4, -15, -23, -71):
        cp = hilbert_class_poly(D)
        ok = ok and hilbert_class_poly(D, bits=2 * cp.bits_used).poly == cp.poly
    sym = replace(weber_symbol("f2"), mult=Multiplier.root_of_unity(Fraction(1, 48)))
    p1, bits = class_invariant_poly(sym, -71)
    p2, _ = class_invariant_poly(sym, -71, bits=2 * bits)
    ok = ok and p1 == p2
    g = replace(weber_symbol("gamma2"), mult=Multiplier.root_of_unity(Fraction(1, 3)))
    q1, gbits = class_invariant_poly(g, -23)
    q2, _ = class_invariant_poly(g, -23, bits=2 * gbits)
    ok = ok and q1 == q2
    assert report("precision robustness: all golden polynomials unchanged at doubled bits", ok)
