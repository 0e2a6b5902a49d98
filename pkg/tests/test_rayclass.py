from math import gcd

import pytest

from cmfield import quadforms
from cmfield.ideals import QuadField, ideal_from_element
from cmfield.rayclass import (
    Modulus,
    conductor_exponent_bound,
    conductor_of,
    discriminant_by_characters,
    quotient_group,
    ray_class_group,
    residue_units,
    snf,
)
from oracles import brute_force_ray_class_group, fundamental_discriminants


def test_modulus_validation():
    with pytest.raises(ValueError):
        Modulus(0)
    assert Modulus(1).m == 1


def test_snf_operation_examples():
    assert snf([[2, 0], [0, 3]]).invariant_factors == (6,)
    assert snf([[1, 0], [0, 1]]).invariant_factors == ()
    assert snf([[7]]).invariant_factors == (7,)


def test_residue_units_inert_three_over_gaussians():
    U = residue_units(-4, 3)
    assert U.order == 8
    assert U.group.invariant_factors == (8,)


def test_residue_units_trivial_modulus():
    assert residue_units(-23, 1).order == 1


def test_residue_units_split_two():
    # 2 splits in Q(sqrt(-7)): two degree-one primes, each unit group trivial.
    U = residue_units(-7, 2)
    assert U.order == 1


def test_residue_units_order_formula_vs_enumeration():
    for D in (-4, -7, -8, -15, -20, -23):
        K = QuadField.of(D)
        for m in (2, 3, 4, 5, 6, 8, 9):
            U = residue_units(D, m)
            count = sum(
                1 for u in range(m) for v in range(m) if gcd(K.norm((u, v)), m) == 1
            )
            assert U.order == count, (D, m)


def test_residue_units_dlog_respects_multiplication():
    for (D, m) in ((-4, 5), (-23, 6), (-7, 9), (-8, 4)):
        U = residue_units(D, m)
        K = U.K
        elems = U.elements()[:12]
        for x in elems:
            for y in elems[:5]:
                xy = (K.mul(x, y)[0] % m, K.mul(x, y)[1] % m)
                lhs = [a + b for a, b in zip(U.dlog(x), U.dlog(y))]
                assert U.group.coords(lhs) == U.group.coords(list(U.dlog(xy)))


def test_residue_units_rejects_nonunit_dlog():
    U = residue_units(-4, 5)
    with pytest.raises(ValueError):
        U.dlog((0, 0))


def test_ray_class_group_gaussian_five():
    rc = ray_class_group(-4, 5)
    assert rc.order == 4
    assert rc.invariant_factors == (4,)


def test_ray_class_group_trivial_modulus_is_class_group():
    for D in (-23, -71, -84, -40):
        rc = ray_class_group(D, 1)
        clk, _, _ = quadforms.class_group(D)
        assert rc.invariant_factors == clk.invariant_factors


def test_ray_class_group_minus23_mod2():
    # 2 splits in Q(sqrt(-23)); residues mod 2 contribute nothing.
    rc = ray_class_group(-23, 2)
    assert rc.order == 3
    assert rc.invariant_factors == (3,)


def test_exact_sequence_orders():
    # |Cl_m| * |im Z_K^*| = h_K * |(Z_K/m)^*| over the desk-scale range.
    for D in fundamental_discriminants(40):
        h = quadforms.class_group(D)[0].order
        for m in (1, 2, 3, 4, 5, 6):
            rc = ray_class_group(D, m)
            U = rc.units
            im = U.group.subgroup_order(U.unit_image_vectors()) if U.group.ngens else 1
            assert rc.order * im == h * U.order, (D, m)


def test_unit_images_die_in_ray_class_group():
    # Exactness at the unit node: im Z_K^* maps to the identity class.
    for (D, m) in ((-4, 5), (-3, 7), (-23, 4)):
        rc = ray_class_group(D, m)
        for (u, v) in rc.K.unit_elements():
            vec = rc.iota((u % m, v % m))
            assert rc.group.is_identity(vec)


def test_brute_force_oracle_sample():
    # The full |D| <= 40, m <= 6 sweep runs in the acceptance suite.
    for (D, m) in ((-4, 5), (-23, 3), (-35, 4), (-40, 6)):
        rc = ray_class_group(D, m)
        inv, n = brute_force_ray_class_group(D, m)
        assert inv == rc.invariant_factors and n == rc.order


def test_ideal_class_of_principal_matches_iota():
    rc = ray_class_group(-23, 5)
    K = rc.K
    for x in ((3, 1), (2, 3), (6, 1)):
        if gcd(K.norm(x), 5) != 1:
            continue
        vec = rc.ideal_class(ideal_from_element(K, x))
        assert rc.group.coords(vec) == rc.group.coords(rc.iota((x[0] % 5, x[1] % 5)))


def test_conductor_full_group_is_one():
    rc = ray_class_group(-4, 5)
    k = rc.group.ngens
    full = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    assert conductor_of(full, rc) == 1


def test_conductor_trivial_subgroup_gaussian_five():
    rc = ray_class_group(-4, 5)
    assert conductor_of([], rc) == 5


def test_conductor_drop_like_z6_z3():
    # (Z_K/6)^* = (Z_K/3)^* over Q(sqrt(-7)): the trivial subgroup of Cl_6
    # has conductor 3, the analogue of (Z/6Z)^* = (Z/3Z)^* over Q.
    rc6 = ray_class_group(-7, 6)
    rc3 = ray_class_group(-7, 3)
    assert rc6.order == rc3.order
    assert conductor_of([], rc6) == 3


def test_fdp_trivial_quotient():
    rc = ray_class_group(-4, 5)
    k = rc.group.ngens
    full = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    assert all(e == 0 for e in discriminant_by_characters(full, rc).values())


def test_fdp_cyclic_four_gaussian():
    # Cl_5 over Q(i) is cyclic of order 4; three nontrivial characters of
    # conductor 5 give Delta = (5)^3.
    rc = ray_class_group(-4, 5)
    assert discriminant_by_characters([], rc) == {5: 3}


def test_fdp_cyclic_prime_degree_formula():
    # For a cyclic quotient of prime degree l: Delta = f^(l-1).
    cases = 0
    for (D, m) in ((-7, 3), (-4, 5), (-23, 2), (-8, 3), (-11, 5), (-4, 13)):
        rc = ray_class_group(D, m)
        for ell in (2, 3, 5, 7):
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
            expected = {}
            n = f0
            d = 2
            while d * d <= n:
                while n % d == 0:
                    expected[d] = expected.get(d, 0) + 1
                    n //= d
                d += 1
            if n > 1:
                expected[n] = expected.get(n, 0) + 1
            fdp = discriminant_by_characters(sub, rc)
            got = {p: e for p, e in fdp.items() if e}
            assert got == {p: e * (ell - 1) for p, e in expected.items()}, (D, m, ell)
            cases += 1
    assert cases >= 4


def test_conductor_exponent_bound_examples():
    assert conductor_exponent_bound(2, 2, 2) == 5
    assert conductor_exponent_bound(1, 3, 3) == 2
    # tame: p does not divide e_ext and p > e_abs + 1
    assert conductor_exponent_bound(1, 5, 3) == 1
    assert conductor_exponent_bound(2, 5, 2) == 1
    with pytest.raises(ValueError):
        conductor_exponent_bound(0, 2, 1)
