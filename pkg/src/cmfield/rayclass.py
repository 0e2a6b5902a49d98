"""Ray class groups Cl_m of imaginary quadratic fields, for moduli m*Z_K.

The group is assembled from the exact sequence relating units, residue
classes mod m, ray classes and ordinary ideal classes: generators are
residue units modulo the image of Z_K^* together with lifts of class
group generators; each class group relation becomes a ray relation by
finding the generator of the corresponding principal ideal. Conductors
of congruence subgroups and the conductor-discriminant product formula
sit on top.

Residue unit groups (Z_K/m)^* are built prime by prime: the cyclic
residue field part plus principal units 1 + p^a * {1, omega} at doubling
filtration levels, with exact relations recovered by the generic
abelian-group walker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from . import quadforms
from .groups import FinAbGroup, group_from_multiplication
from .ideals import (
    Ideal,
    QuadField,
    factor_rational_prime,
    form_of_ideal,
    ideal_conj,
    ideal_mul,
    ideal_of_form,
    ideal_pow,
    principal_gen,
    whole_ring,
)


@dataclass(frozen=True)
class Modulus:
    """A modulus m*Z_K, m a positive integer (no real places over imaginary quadratic K)."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("modulus must be a positive integer")


def snf(relations, labels=None) -> FinAbGroup:
    """The finite abelian group presented by integer relation rows.

    Invariant factors come from the Smith normal form; the returned group
    supports element discrete logs through its canonical coordinates.
    """
    rels = [list(r) for r in relations]
    k = len(rels[0]) if rels else 0
    if labels is None:
        labels = [f"g{i}" for i in range(k)]
    return FinAbGroup(labels, rels)


def _factorize(n: int):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _primitive_root(p: int, e: int) -> int:
    """A generator of (Z/p^e)^* for odd p."""
    fac = _factorize(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            break
    else:
        raise RuntimeError("no primitive root found")
    if e == 1:
        return g
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


class _LocalUnits:
    """(Z_K / p^e Z_K)^* with structured generators and a full dlog table."""

    def __init__(self, K: QuadField, p: int, e: int):
        self.K = K
        self.p = p
        self.e = e
        self.pe = p**e
        kind, primes = factor_rational_prime(K, p)
        self.kind = kind
        gens = self._structured_generators(kind, primes)
        mul = lambda x, y: self._red(K.mul(x, y))
        group, accepted, dlog = group_from_multiplication((1 % self.pe, 0), gens, mul)
        expected = self._expected_order(kind)
        if group.order != expected:
            # Structured generators should always suffice; enumerate as a safety net.
            gens = gens + self._enumerate_units()
            group, accepted, dlog = group_from_multiplication((1 % self.pe, 0), gens, mul)
            assert group.order == expected, (K.D, p, e, group.order, expected)
        self.group = group
        self.gens = accepted
        self.dlog = dlog

    def _red(self, x):
        return (x[0] % self.pe, x[1] % self.pe)

    def _expected_order(self, kind) -> int:
        p, e = self.p, self.e
        if kind == "split":
            return (p ** (e - 1) * (p - 1)) ** 2
        if kind == "inert":
            return p ** (2 * (e - 1)) * (p * p - 1)
        return p ** (2 * e - 1) * (p - 1)  # ramified: N(p^e Z_K at pp) over pp^(2e)

    def _doubling_levels(self, top: int):
        a = 1
        while a < top:
            yield a
            a *= 2

    def _structured_generators(self, kind, primes):
        K, p, e, pe = self.K, self.p, self.e, self.pe
        gens = []
        if kind == "split":
            # Two degree-one primes; CRT through the Hensel-lifted roots.
            r1 = self._hensel_root()
            r2 = (K.t - r1) % pe
            for g0 in self._rational_unit_gens():
                # x = u + v*omega with x(r1) = g0, x(r2) = 1.
                inv = pow((r1 - r2) % pe, -1, pe)
                v = (g0 - 1) * inv % pe
                u = (g0 - v * r1) % pe
                gens.append((u, v))
                v2 = (1 - g0) * inv % pe
                u2 = (1 - v2 * r1) % pe
                gens.append((u2, v2))
        elif kind == "inert":
            gens.append(self._residue_field_generator())
            for a in self._doubling_levels(e):
                pa = p**a
                gens.append(self._red((1 + pa, 0)))
                gens.append(self._red((1, pa)))
        else:  # ramified
            g = _primitive_root(p, 1) if p > 2 else 1
            if p > 2:
                gens.append((g % pe, 0))
            pp = primes[0]
            # Filtration levels run over powers of the prime ideal up to pp^(2e).
            power = pp
            for a in self._doubling_levels(2 * e):
                for vec in power.basis():
                    gens.append(self._red((1 + vec[0], vec[1])))
                power = ideal_mul(power, power)
        return [g_ for g_ in gens if g_ != (1 % pe, 0)]

    def _rational_unit_gens(self):
        p, e, pe = self.p, self.e, self.pe
        if p > 2:
            return [_primitive_root(p, e) % pe]
        if e == 1:
            return []
        if e == 2:
            return [3]
        return [pe - 1, 5]

    def _hensel_root(self) -> int:
        """Root of x^2 - t x + n mod p^e, lifted from mod p (derivative is a unit)."""
        K, p, pe = self.K, self.p, self.pe
        r = next(r for r in range(p) if (r * r - K.t * r + K.n) % p == 0)
        mod = p
        while mod < pe:
            mod = min(mod * mod, pe)
            f = (r * r - K.t * r + K.n) % mod
            fp = (2 * r - K.t) % mod
            r = (r - f * pow(fp, -1, mod)) % mod
        return r % pe

    def _residue_field_generator(self):
        """A generator of (Z_K/p)^* = F_{p^2}^*, lifted as-is."""
        K, p = self.K, self.p
        order = p * p - 1
        fac = _factorize(order)
        for u in range(p):
            for v in range(p):
                x = (u, v)
                if (u, v) == (0, 0) or K.norm(x) % p == 0:
                    continue
                if all(self._pow_mod_p(x, order // q) != (1, 0) for q in fac):
                    return x
        raise RuntimeError("no residue field generator found")

    def _pow_mod_p(self, x, k):
        K, p = self.K, self.p
        out = (1, 0)
        while k:
            if k & 1:
                out = (K.mul(out, x)[0] % p, K.mul(out, x)[1] % p)
            x = (K.mul(x, x)[0] % p, K.mul(x, x)[1] % p)
            k >>= 1
        return out

    def _enumerate_units(self):
        K, pe = self.K, self.pe
        return [
            (u, v)
            for u in range(pe)
            for v in range(pe)
            if gcd(K.norm((u, v)), pe) == 1
        ]


class ResidueUnits:
    """(Z_K/m Z_K)^* assembled by CRT over the rational prime powers of m."""

    def __init__(self, K, m):
        self.K = K if isinstance(K, QuadField) else QuadField.of(K)
        self.m = m.m if isinstance(m, Modulus) else int(m)
        if self.m < 1:
            raise ValueError("modulus must be positive")
        self.parts = [ _LocalUnits(self.K, p, e) for p, e in sorted(_factorize(self.m).items()) ]
        labels = []
        gens = []
        rels_blocks = []
        for part in self.parts:
            offset = len(gens)
            for i, g in enumerate(part.gens):
                gens.append(self._crt_embed(g, part))
                labels.append(f"u{offset + i}")
            rels_blocks.append((offset, part.group.relations, len(part.gens)))
        k = len(gens)
        relations = []
        for offset, rels, width in rels_blocks:
            for r in rels:
                row = [0] * k
                row[offset : offset + width] = r
                relations.append(row)
        if k == 0:
            self.group = FinAbGroup([], [])
        else:
            self.group = FinAbGroup(labels, relations)
        self.gens = gens

    def _crt_embed(self, g, part):
        """Lift a local generator to (Z/m)^2: itself at p^e, 1 at the other parts."""
        m = self.m
        pe = part.pe
        rest = m // pe
        if rest == 1:
            return (g[0] % m, g[1] % m)
        inv_pe = pow(pe, -1, rest)
        inv_rest = pow(rest, -1, pe)
        def crt(x_pe, x_rest):
            return (x_pe * rest * inv_rest + x_rest * pe * inv_pe) % m
        return (crt(g[0], 1), crt(g[1], 0))

    @property
    def order(self) -> int:
        return self.group.order

    def is_unit(self, x) -> bool:
        return gcd(self.K.norm(x), self.m) == 1

    def dlog(self, x):
        """Exponent vector of a residue class over the CRT generators."""
        if self.m == 1:
            return ()
        if not self.is_unit(x):
            raise ValueError(f"{x} is not a unit modulo {self.m}")
        vec = []
        for part in self.parts:
            key = (x[0] % part.pe, x[1] % part.pe)
            vec.extend(part.dlog[key])
        return tuple(vec)

    def unit_image_vectors(self):
        """dlog vectors of the images of the Z_K^* generators."""
        return [self.dlog((u % self.m, v % self.m)) for (u, v) in self.K.units()]

    def elements(self):
        """All unit residue pairs (desk scale)."""
        m = self.m
        return [
            (u, v) for u in range(m) for v in range(m) if gcd(self.K.norm((u, v)), m) == 1
        ]


def residue_units(K, m) -> ResidueUnits:
    return ResidueUnits(K, m)


@dataclass
class RayClassGroup:
    K: QuadField
    m: int
    group: FinAbGroup
    units: ResidueUnits
    n_unit_gens: int
    ideal_gens: list  # translated forms whose classes lift Cl_K generators
    _clk: tuple = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def invariant_factors(self):
        return self.group.invariant_factors

    def iota(self, x):
        """Class vector of the principal ideal (x), x a residue unit mod m."""
        vec = [0] * self.group.ngens
        ul = self.units.dlog(x)
        vec[: len(ul)] = ul
        return vec

    def ideal_class(self, I: Ideal):
        """Exponent vector of the class of an ideal coprime to m."""
        if gcd(I.norm, self.m) != 1:
            raise ValueError("ideal must be coprime to the modulus")
        clk_group, clk_gens, clk_dlog = self._clk
        f = quadforms.reduce(form_of_ideal(I))
        e = clk_dlog[f]
        # I * prod(a_i^-e_i) is principal; clear denominators with conjugates.
        acc = I
        norm_shift = []
        for gen_form, e_i in zip(self.ideal_gens, e):
            if e_i == 0:
                continue
            ai = ideal_of_form(gen_form, self.K)
            acc = ideal_mul(acc, ideal_pow(ideal_conj(ai), e_i))
            norm_shift.append((ai.norm, e_i))
        gamma = principal_gen(acc)
        assert gamma is not None, "class bookkeeping produced a non-principal ideal"
        vec = self.iota(self._unit_reduce(gamma))
        for i, e_i in enumerate(e):
            vec[self.n_unit_gens + i] += e_i
        for (nrm, e_i) in norm_shift:
            sub = self.iota((nrm % self.m, 0))
            vec = [a - e_i * b for a, b in zip(vec, sub)]
        return vec

    def _unit_reduce(self, x):
        return (x[0] % self.m, x[1] % self.m)


def ray_class_group(K, m) -> RayClassGroup:
    """Cl_m for the modulus m*Z_K over an imaginary quadratic field."""
    K = K if isinstance(K, QuadField) else QuadField.of(K)
    m = m.m if isinstance(m, Modulus) else int(m)
    units = ResidueUnits(K, m)
    clk_group, clk_gens, clk_dlog = quadforms.class_group(K.D)

    n_u = len(units.gens)
    # Translate each class-group generator form to one coprime to m.
    lifted = [quadforms._represent_coprime_to(g, m) for g in clk_gens]
    n_t = len(lifted)
    labels = [f"u{i}" for i in range(n_u)] + [f"t{i}" for i in range(n_t)]
    relations = []
    for r in units.group.relations:
        relations.append(list(r) + [0] * n_t)
    for uv in units.unit_image_vectors():
        relations.append(list(uv) + [0] * n_t)
    # Each Cl_K relation: prod [a_i]^(rho_i) = iota(generator of the principal ideal).
    for rho in clk_group.relations:
        acc = whole_ring(K)
        norm_shift = []
        for gen_form, r_i in zip(lifted, rho):
            if r_i == 0:
                continue
            ai = ideal_of_form(gen_form, K)
            if r_i > 0:
                acc = ideal_mul(acc, ideal_pow(ai, r_i))
            else:
                acc = ideal_mul(acc, ideal_pow(ideal_conj(ai), -r_i))
                norm_shift.append((ai.norm, -r_i))
        gamma = principal_gen(acc)
        assert gamma is not None, "Cl_K relation did not produce a principal ideal"
        rhs = [0] * n_u
        if m > 1:
            rhs = list(units.dlog((gamma[0] % m, gamma[1] % m)))
            for (nrm, k) in norm_shift:
                sub = units.dlog((nrm % m, 0))
                rhs = [a - k * b for a, b in zip(rhs, sub)]
        row = [-x for x in rhs] + list(rho)
        relations.append(row)
    group = FinAbGroup(labels, relations) if labels else FinAbGroup([], [])
    rc = RayClassGroup(K, m, group, units, n_u, lifted)
    rc._clk = (clk_group, clk_gens, clk_dlog)
    return rc


def _divisors(n: int):
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def conductor_of(subgroup, rc: RayClassGroup) -> int:
    """Smallest n | m with the subgroup containing ker(Cl_m -> Cl_n).

    The kernel is generated by classes iota(x) of residues x = 1 mod n
    that are units mod m.
    """
    m = rc.m
    for n in _divisors(m):
        if _contains_relative_kernel(subgroup, rc, n):
            return n
    return m


def _contains_relative_kernel(subgroup, rc: RayClassGroup, n: int) -> bool:
    m = rc.m
    span = n
    kernel_vecs = []
    for s in range(0, m, span):
        for t in range(0, m, span):
            x = ((1 + s) % m, t % m)
            if not rc.units.is_unit(x):
                continue
            kernel_vecs.append(rc.iota(x))
    subs = list(subgroup)
    return all(rc.group.subgroup_contains(subs, k) for k in kernel_vecs)


def quotient_group(rc: RayClassGroup, subgroup) -> FinAbGroup:
    """Cl_m modulo the subgroup generated by the given exponent vectors."""
    rels = [list(r) for r in rc.group.relations] + [list(s) for s in subgroup]
    return FinAbGroup(rc.group.labels, rels)


def discriminant_by_characters(subgroup, rc: RayClassGroup):
    """Exponents of Delta_(L/K) at each prime dividing m, for L the class
    field of the subgroup, via the conductor-discriminant product formula.

    Every character of Cl_m/subgroup contributes the finite part of its
    conductor; the result maps p -> ord_p of the product.
    """
    q = quotient_group(rc, subgroup)
    k = q.ngens
    # Enumerate characters via the invariant-factor coordinates of the quotient.
    diag = q.diag
    exps = {p: 0 for p in _factorize(rc.m)}
    def characters():
        def rec(i, acc):
            if i == len(diag):
                yield tuple(acc)
                return
            for c in range(diag[i]):
                yield from rec(i + 1, acc + [c])
        yield from rec(0, [])
    base = list(subgroup)
    for chi in characters():
        # Kernel of chi as a subgroup of Cl_m: all elements of Q with chi = 1, pulled back.
        ker = list(base)
        for coords in q.all_coords():
            tot = Fraction(0)
            for c_i, y_i, d_i in zip(chi, coords, diag):
                tot += Fraction(c_i * y_i, d_i)
            if tot.denominator == 1:
                ker.append(_preimage(q, coords))
        f0 = conductor_of(ker, rc)
        for p, e in _factorize(f0).items():
            exps[p] += e
    return exps


def _preimage(group: FinAbGroup, coords):
    """An exponent vector mapping to the given invariant-factor coordinates."""
    from .groups import solve_integer_system

    k = group.ngens
    U = group._U
    # Solve U * x = coords + diag * t jointly: [U | diag] * (x; t) = coords.
    A = [list(U[i]) + [group.diag[i] if j == i else 0 for j in range(k)] for i in range(k)]
    sol = solve_integer_system(A, list(coords))
    assert sol is not None
    return sol[:k]


def conductor_exponent_bound(e_abs: int, p: int, e_ext: int) -> int:
    """floor(e_abs * (1/(p-1) + ord_p(e_ext))) + 1, in exact arithmetic."""
    if e_abs < 1 or p < 2 or e_ext < 1:
        raise ValueError("inputs must be positive")
    ordp = 0
    n = e_ext
    while n % p == 0:
        n //= p
        ordp += 1
    val = Fraction(e_abs, p - 1) + e_abs * ordp
    return int(val) + 1
