"""Reduced binary quadratic forms of negative discriminant.

A triple (a, b, c) with b^2 - 4ac = D < 0 and a > 0 stands for the ideal
class of Z*a + Z*(-b+sqrt(D))/2, or equivalently for the lattice point
tau = (-b+sqrt(D))/(2a) in the upper half plane. Reduction picks the
canonical representative in each SL2(Z) orbit; composition is Gauss
composition done through united forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt

import mpmath

from .groups import group_from_multiplication
from .numerics import PrecisionCtx


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


@dataclass(frozen=True)
class Discriminant:
    """A negative discriminant D = 0, 1 (mod 4)."""

    D: int

    def __post_init__(self):
        if self.D >= 0:
            raise ValueError("discriminant must be negative")
        if self.D % 4 not in (0, 1):
            raise ValueError("discriminant must be 0 or 1 mod 4")

    @property
    def fundamental(self) -> bool:
        if self.D % 4 == 1:
            return _is_squarefree(self.D)
        d = self.D // 4
        return d % 4 in (2, 3) and _is_squarefree(d)


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def __iter__(self):
        yield self.a
        yield self.b
        yield self.c

    def inverse(self) -> "QuadForm":
        return reduce(QuadForm(self.a, -self.b, self.c))

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


@dataclass(frozen=True)
class TauPoint:
    """The upper-half-plane point of a reduced form, with its source triple."""

    value: mpmath.mpc
    form: QuadForm


def principal_form(D) -> QuadForm:
    D = D.D if isinstance(D, Discriminant) else D
    if D % 2 == 0:
        return QuadForm(1, 0, -D // 4)
    return QuadForm(1, 1, (1 - D) // 4)


def reduce(f: QuadForm) -> QuadForm:
    """The unique reduced form SL2(Z)-equivalent to f (positive definite input)."""
    a, b, c = f.a, f.b, f.c
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise ValueError("form must be positive definite with a > 0")
    while True:
        # Normalize: bring b into (-a, a].
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
        if a > c:
            a, b, c = c, -b, a
            continue
        break
    if a == c and b < 0:
        b = -b
    if b == -a:
        b = a
    return QuadForm(a, b, c)


def enumerate_reduced_forms(D) -> list:
    """All primitive reduced forms of discriminant D, sorted by (a, b); length h(D)."""
    D = Discriminant(D).D if not isinstance(D, Discriminant) else D.D
    out = []
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append(QuadForm(a, b, c))
    out.sort(key=lambda f: (f.a, f.b))
    return out


def transform(f: QuadForm, s: int, t: int, u: int, v: int) -> QuadForm:
    """Apply the SL2(Z) substitution (x, y) -> (s x + u y, t x + v y) to f."""
    if s * v - t * u != 1:
        raise ValueError("matrix must have determinant 1")
    a, b, c = f.a, f.b, f.c
    a2 = a * s * s + b * s * t + c * t * t
    b2 = 2 * a * s * u + b * (s * v + t * u) + 2 * c * t * v
    c2 = a * u * u + b * u * v + c * v * v
    return QuadForm(a2, b2, c2)


def _represent_coprime_to(f: QuadForm, n: int) -> QuadForm:
    """An equivalent form whose first coefficient is coprime to n."""
    if gcd(f.a, n) == 1:
        return f
    for bound in range(1, 64):
        for s in range(-bound, bound + 1):
            for t in range(-bound, bound + 1):
                if gcd(s, t) != 1:
                    continue
                val = f.a * s * s + f.b * s * t + f.c * t * t
                if val != 0 and gcd(val, n) == 1:
                    # Complete (s, t) to an SL2(Z) matrix.
                    g, x, y = _xgcd(s, t)
                    if g < 0:
                        x, y = -x, -y
                    return transform(f, s, t, -y, x)
    raise RuntimeError(f"no representative of {f} coprime to {n} found")


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Gauss composition of primitive forms of one discriminant, reduced.

    Classical united-forms route: translate g so its first coefficient is
    coprime to that of f, solve the two congruences B = b1 (mod 2a1),
    B = b2 (mod 2a2) — which force B^2 = D (mod 4 a1 a2) — and reduce
    (a1 a2, B, (B^2-D)/(4 a1 a2)).
    """
    D = f.disc
    if g.disc != D:
        raise ValueError("forms must share a discriminant")
    g = _represent_coprime_to(g, f.a)
    a1, b1 = f.a, f.b
    a2, b2 = g.a, g.b
    # CRT: both residues agree mod 2 (both have the parity of D).
    _, inv, _ = _xgcd(a1 % a2, a2)
    k = ((b2 - b1) // 2 * inv) % a2
    B = b1 + 2 * a1 * k
    A = a1 * a2
    C = (B * B - D) // (4 * A)
    return reduce(QuadForm(A, B, C))


def tau_of_form(f: QuadForm, ctx: PrecisionCtx) -> TauPoint:
    """The fundamental-domain point (-b + sqrt(D))/(2a) of a reduced form."""
    if not f.is_reduced:
        raise ValueError("tau_of_form expects a reduced form")
    with ctx.workprec():
        root = mpmath.sqrt(mpmath.mpf(-f.disc))
        tau = mpmath.mpc(mpmath.mpf(-f.b) / (2 * f.a), root / (2 * f.a))
    return TauPoint(tau, f)


def class_group(D):
    """The form class group of a fundamental discriminant.

    Returns (group, generator_forms, dlog) where dlog maps every reduced
    form to its exponent vector over the generator forms.
    """
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    if not D.fundamental:
        raise ValueError("class_group requires a fundamental discriminant (maximal order)")
    forms = enumerate_reduced_forms(D)
    ident = principal_form(D)
    group, gens, dlog = group_from_multiplication(ident, forms, compose)
    return group, gens, dlog
