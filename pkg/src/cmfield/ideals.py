"""Exact arithmetic in imaginary quadratic maximal orders Z[omega].

Elements are coordinate pairs (u, v) = u + v*omega where omega has trace
t and norm n (omega^2 = t*omega - n). Ideals are rank-2 sublattices in
Hermite normal form [(a, 0), (b, c)], multiplied by reducing the four
pairwise basis products. Principality is decided by Lagrange-Gauss
lattice reduction: an ideal is principal exactly when its shortest
vector has norm equal to the ideal norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .quadforms import Discriminant, QuadForm


@dataclass(frozen=True)
class QuadField:
    """Invariants of Q(sqrt(D)) for fundamental D < 0: Z_K = Z[omega]."""

    D: int
    t: int  # trace of omega
    n: int  # norm of omega

    @classmethod
    def of(cls, D) -> "QuadField":
        D = D if isinstance(D, Discriminant) else Discriminant(D)
        if not D.fundamental:
            raise ValueError("maximal-order arithmetic requires a fundamental discriminant")
        if D.D % 4 == 0:
            return cls(D.D, 0, -D.D // 4)
        return cls(D.D, 1, (1 - D.D) // 4)

    def mul(self, x, y):
        u1, v1 = x
        u2, v2 = y
        return (u1 * u2 - self.n * v1 * v2, u1 * v2 + v1 * u2 + self.t * v1 * v2)

    def norm(self, x) -> int:
        u, v = x
        return u * u + self.t * u * v + self.n * v * v

    def conj(self, x):
        u, v = x
        return (u + self.t * v, -v)

    def units(self):
        """Generators of the unit group Z_K^*."""
        if self.D == -4:
            return [(0, 1)]  # i = omega
        if self.D == -3:
            return [(0, 1)]  # zeta6 = omega
        return [(-1, 0)]

    def unit_elements(self):
        """All units of Z_K."""
        if self.D == -4:
            return [(1, 0), (0, 1), (-1, 0), (0, -1)]
        if self.D == -3:
            out = []
            x = (1, 0)
            for _ in range(6):
                out.append(x)
                x = self.mul(x, (0, 1))
            return out
        return [(1, 0), (-1, 0)]

    def bilinear(self, x, y) -> int:
        """The norm form's bilinear companion (N(x+y) - N(x) - N(y)) / 2 (integer doubled trick)."""
        u1, v1 = x
        u2, v2 = y
        return 2 * u1 * u2 + self.t * (u1 * v2 + u2 * v1) + 2 * self.n * v1 * v2


@dataclass(frozen=True)
class Ideal:
    """Integral ideal with HNF basis (a, 0), (b, c) over (1, omega)."""

    K: QuadField
    a: int
    b: int
    c: int

    @property
    def norm(self) -> int:
        return self.a * self.c

    def basis(self):
        return [(self.a, 0), (self.b, self.c)]

    def contains(self, x) -> bool:
        u, v = x
        if v % self.c:
            return False
        return (u - (v // self.c) * self.b) % self.a == 0

    def __str__(self):
        return f"[{self.a}, {self.b}+{self.c}w]"


def hnf_ideal(K: QuadField, vectors) -> Ideal:
    """HNF of the lattice spanned by the (u, v) vectors; must have full rank."""
    vecs = [tuple(v) for v in vectors if v != (0, 0)]
    # Reduce to c = gcd of all v-coordinates with one representative vector.
    c, rep = 0, (0, 0)
    for (u, v) in vecs:
        if v == 0:
            continue
        g, x, _ = _xgcd(c, v)
        # new rep: x*rep + y*(u,v) where y chosen via Bezout below
        if c == 0:
            c, rep = abs(v), (u if v > 0 else -u, abs(v))
        else:
            y = (g - x * c) // v
            rep = (x * rep[0] + y * u, g)
            c = g
    a = 0
    for (u, v) in vecs:
        assert v % c == 0
        residual = u - (v // c) * rep[0]
        a = gcd(a, residual)
    if a == 0 or c == 0:
        raise ValueError("vectors do not span a full-rank lattice")
    b = rep[0] % a
    return Ideal(K, a, b, c)


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def ideal_from_element(K: QuadField, x) -> Ideal:
    return hnf_ideal(K, [x, K.mul(x, (0, 1))])


def whole_ring(K: QuadField) -> Ideal:
    return Ideal(K, 1, 0, 1)


def ideal_mul(I: Ideal, J: Ideal) -> Ideal:
    K = I.K
    prods = [K.mul(x, y) for x in I.basis() for y in J.basis()]
    return hnf_ideal(K, prods)


def ideal_pow(I: Ideal, e: int) -> Ideal:
    out = whole_ring(I.K)
    base = I
    while e:
        if e & 1:
            out = ideal_mul(out, base)
        base = ideal_mul(base, base)
        e >>= 1
    return out


def ideal_conj(I: Ideal) -> Ideal:
    K = I.K
    return hnf_ideal(K, [K.conj(v) for v in I.basis()])


def ideal_of_form(f: QuadForm, K: QuadField) -> Ideal:
    """The ideal Z*a + Z*(-b+sqrt(D))/2 of a form (a, b, c)."""
    # (-b+sqrt(D))/2 = (-b-t)/2 + omega in (1, omega) coordinates.
    u = (-f.b - K.t) // 2
    return hnf_ideal(K, [(f.a, 0), (u, 1)])


def form_of_ideal(I: Ideal) -> QuadForm:
    """The positive definite form of the ideal class of I.

    With the HNF basis (e1, e2) = (a, b + c*omega) the correctly oriented
    form is N(x*e2 + y*e1)/N(I); the reversed order would hand back the
    conjugate class.
    """
    K = I.K
    e1, e2 = I.basis()
    N = I.norm
    a = K.norm(e2) // N
    b = K.bilinear(e2, e1) // N
    c = K.norm(e1) // N
    assert b * b - 4 * a * c == K.D
    return QuadForm(a, b, c)


def gauss_shortest(K: QuadField, e1, e2):
    """Shortest nonzero vector of the lattice spanned by e1, e2 (Lagrange-Gauss)."""
    v, w = e1, e2
    if K.norm(v) > K.norm(w):
        v, w = w, v
    while True:
        nv = K.norm(v)
        mu = _round_div(K.bilinear(v, w), 2 * nv)
        w = (w[0] - mu * v[0], w[1] - mu * v[1])
        if K.norm(w) >= nv:
            return v
        v, w = w, v


def _round_div(num, den):
    if den < 0:
        num, den = -num, -den
    return (2 * num + den) // (2 * den)


def principal_gen(I: Ideal):
    """A generator of I, or None when the ideal class is nontrivial."""
    K = I.K
    v = gauss_shortest(K, *I.basis())
    if K.norm(v) == I.norm:
        return v
    return None


def factor_rational_prime(K: QuadField, p: int):
    """Factor pZ_K. Returns (kind, primes) with kind in {split, inert, ramified}."""
    # Roots of x^2 - t x + n mod p.
    roots = [r for r in range(p) if (r * r - K.t * r + K.n) % p == 0]
    if not roots:
        return "inert", [hnf_ideal(K, [(p, 0), (0, p)])]
    if len(roots) == 2 or (p == 2 and len(roots) == 1 and K.D % 2 != 0):
        # p odd with distinct roots, or p = 2 with D = 1 mod 8 (single listed root pairs with t-r).
        if len(roots) == 1:
            roots = [roots[0], (K.t - roots[0]) % p]
        if roots[0] == roots[1]:
            return "ramified", [hnf_ideal(K, [(p, 0), (-roots[0], 1)])]
        ps = [hnf_ideal(K, [(p, 0), (-r, 1)]) for r in roots]
        return "split", ps
    return "ramified", [hnf_ideal(K, [(p, 0), (-roots[0], 1)])]


def prime_kind(K: QuadField, p: int) -> str:
    return factor_rational_prime(K, p)[0]
