"""Hilbert class polynomials with certified rounding, plus splitting checks.

The polynomial is the product of (X - j(tau)) over the reduced forms of
the discriminant, evaluated through the Weber f2 route, expanded, and
rounded to integers only when every coefficient is provably close to one.
Failures double the precision and retry. Cornacchia's algorithm decides
representability 4p = x^2 + |D| y^2 as the independent splitting oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import mpmath

from . import modfunc, quadforms
from .numerics import (
    DEFAULT_TOL,
    MAX_BITS_DEFAULT,
    IntPoly,
    PrecisionCtx,
    poly_from_roots,
    retry_with_doubling,
    round_to_int_poly,
)
from .quadforms import Discriminant


@dataclass(frozen=True)
class ClassPolynomial:
    D: int
    poly: IntPoly
    function: str  # "j" | "f2-power" | "gamma2" | "eta-quotient" | ...
    bits_used: int


def initial_precision(D) -> int:
    """Starting bits: ceil(pi*sqrt|D| * sum(1/a) / ln 2) + 10h + 64.

    The sum of 1/a over reduced forms bounds sum of log|j(tau_a)| through
    |q|^-1 = e^(2 pi Im tau); the margin absorbs expansion growth. A bad
    guess only costs a retry, never correctness.
    """
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    forms = quadforms.enumerate_reduced_forms(D)
    h = len(forms)
    inv_a = sum(mpmath.mpf(1) / f.a for f in forms)
    bits = int(mpmath.ceil(mpmath.pi * mpmath.sqrt(-D.D) * inv_a / mpmath.log(2)))
    return bits + 10 * h + 64


def hilbert_class_poly(D, bits=None, max_bits=MAX_BITS_DEFAULT, tol=DEFAULT_TOL) -> ClassPolynomial:
    """The Hilbert class polynomial of a fundamental discriminant D < 0."""
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    if not D.fundamental:
        raise ValueError("hilbert_class_poly requires a fundamental discriminant")
    forms = quadforms.enumerate_reduced_forms(D)

    def compute(ctx: PrecisionCtx) -> IntPoly:
        roots = [modfunc.j_from_f2(quadforms.tau_of_form(f, ctx).value, ctx) for f in forms]
        return round_to_int_poly(poly_from_roots(roots, ctx), tol)

    start = bits if bits is not None else initial_precision(D)
    poly, used = retry_with_doubling(compute, start, max_bits)
    return ClassPolynomial(D.D, poly, "j", used)


# --- splitting verdicts -------------------------------------------------


def _poly_mul_mod(a, b, mod_poly, p):
    """(a*b) mod (mod_poly, p); polynomials as ascending int lists, mod_poly monic."""
    n = len(a) + len(b) - 1
    out = [0] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    deg_m = len(mod_poly) - 1
    for i in range(n - 1, deg_m - 1, -1):
        c = out[i]
        if c == 0:
            continue
        out[i] = 0
        for j in range(deg_m):
            out[i - deg_m + j] = (out[i - deg_m + j] - c * mod_poly[j]) % p
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _x_pow_mod(e, mod_poly, p):
    """X^e mod (mod_poly, p) by binary exponentiation."""
    result = [1]
    base = [0, 1] if len(mod_poly) > 2 else _poly_mul_mod([0, 1], [1], mod_poly, p)
    while e:
        if e & 1:
            result = _poly_mul_mod(result, base, mod_poly, p)
        base = _poly_mul_mod(base, base, mod_poly, p)
        e >>= 1
    return result


def _poly_gcd_mod(a, b, p):
    a = [c % p for c in a]
    b = [c % p for c in b]
    def trim(v):
        while len(v) > 1 and v[-1] == 0:
            v.pop()
        return v
    a, b = trim(a), trim(b)
    while b != [0]:
        # a mod b
        inv = pow(b[-1], -1, p)
        r = a[:]
        for i in range(len(r) - 1, len(b) - 2, -1):
            c = r[i] * inv % p
            if c:
                for j in range(len(b)):
                    r[i - (len(b) - 1) + j] = (r[i - (len(b) - 1) + j] - c * b[j]) % p
        a, b = b, trim(r)
    return a


def poly_disc_divisible(poly: IntPoly, p: int) -> bool:
    """Does p divide the discriminant of poly, tested as gcd(poly, poly') mod p nontrivial?"""
    d = _poly_gcd_mod(list(poly.coeffs), list(poly.derivative().coeffs), p)
    return len(d) > 1 or poly.coeffs[-1] % p == 0


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol (D|p) for odd prime p."""
    r = D % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def split_check(cp: ClassPolynomial, p: int) -> str:
    """Factorisation verdict of the class polynomial mod p.

    Returns "splits-completely" when gcd(X^p - X, poly) has full degree
    and the reduction is squarefree, "no-root" when the gcd is trivial,
    else "partial".
    """
    poly = cp.poly
    if p == 2 or p % 2 == 0:
        raise ValueError("split_check wants an odd prime")
    if cp.D % p == 0:
        raise ValueError("p must not divide the discriminant")
    if poly_disc_divisible(poly, p):
        raise ValueError("p must not divide the discriminant of the polynomial")
    mod_poly = [c % p for c in poly.coeffs]
    xp = _x_pow_mod(p, mod_poly, p)
    # X^p - X
    xpx = xp[:]
    while len(xpx) < 2:
        xpx.append(0)
    xpx[1] = (xpx[1] - 1) % p
    g = _poly_gcd_mod(xpx, mod_poly, p)
    deg = len(g) - 1 if g != [0] else 0
    if deg == poly.degree:
        return "splits-completely"
    if deg == 0:
        return "no-root"
    return "partial"


# --- Cornacchia ---------------------------------------------------------


def _sqrt_mod_prime(n: int, p: int):
    """A square root of n mod p (Tonelli-Shanks), or None."""
    n %= p
    if n == 0:
        return 0
    if pow(n, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def cornacchia(p: int, D) -> tuple | None:
    """A solution (x, y) of 4p = x^2 + |D| y^2 with x, y >= 0, or None.

    Modified Cornacchia on the root of x^2 = D (mod 4p); any returned
    solution is re-verified in exact arithmetic.
    """
    D = D.D if isinstance(D, Discriminant) else D
    if p == 2 or p % 2 == 0:
        raise ValueError("cornacchia wants an odd prime")
    adD = -D
    if adD >= 4 * p:
        # Only y = 0 could work, impossible for D < 0 and p prime.
        return None
    r = _sqrt_mod_prime(D, p)
    if r is None:
        return None
    # Match parity so that r^2 = D (mod 4p).
    if (r - D) % 2:
        r = p - r
    r %= 2 * p
    # Euclidean descent on (2p, r).
    a, b = 2 * p, r
    limit = isqrt(4 * p)
    while b > limit:
        a, b = b, a % b
    rem = 4 * p - b * b
    if rem % adD:
        return None
    c = rem // adD
    y = isqrt(c)
    if y * y != c:
        return None
    x = b
    assert x * x + adD * y * y == 4 * p
    return (x, y)


def first_split_primes(D: int, count: int, poly: IntPoly):
    """The first `count` odd primes with (D|p) = 1 not dividing disc(poly)."""
    out = []
    p = 3
    while len(out) < count:
        if _is_prime(p) and D % p and kronecker(D, p) == 1 and not poly_disc_divisible(poly, p):
            out.append(p)
        p += 2
    return out


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
