"""Shimura reciprocity: GL2 action on modular function symbols.

The Galois action on CM values of a level-m function is computed through
matrices g_tau(x) in GL2(Z/m), decomposed into S/T words plus a
cyclotomic diagonal. Function symbols form finite families closed under
that action: the Weber functions f, f1, f2 and gamma2, gamma3 with 48th
roots of unity, Fricke functions indexed by torsion points, and eta
quotients handled through exact Dedekind-eta transformation bookkeeping.

The S/T tables are classical; nothing here trusts them blindly — the
test suite replays every symbolic action against direct numerical
evaluation. Class invariants are detected by checking that the
generators of (Z_K/m)^* stabilize a (possibly slightly modified) symbol,
and their minimal polynomials are assembled from one conjugate per
reduced form.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd

import mpmath
from mpmath import mpc, mpf

from . import modfunc, quadforms
from .groups import group_from_multiplication
from .numerics import PrecisionCtx, RoundingUncertified, poly_from_roots, round_to_int_poly
from .quadforms import Discriminant, QuadForm
from .rayclass import ResidueUnits

S_MAT = (0, -1, 1, 0)
T_MAT = (1, 1, 0, 1)
IDENT = (1, 0, 0, 1)

# Degree of Q(f2) over Q(j): the j-formula in f2 is a cubic in f2^24, so
# coefficients of f2-class polynomials are smaller by about this factor.
F2_J_DEGREE_RATIO = 24 * 3
assert F2_J_DEGREE_RATIO == 72


# --- matrices mod m ---------------------------------------------------------


def mat_mul(A, B, m=0):
    a = (
        A[0] * B[0] + A[1] * B[2],
        A[0] * B[1] + A[1] * B[3],
        A[2] * B[0] + A[3] * B[2],
        A[2] * B[1] + A[3] * B[3],
    )
    return tuple(x % m for x in a) if m else a


def mat_det(A, m=0):
    d = A[0] * A[3] - A[1] * A[2]
    return d % m if m else d


def mat_inv(A, m):
    d = mat_det(A, m)
    di = pow(d, -1, m)
    return ((A[3] * di) % m, (-A[1] * di) % m, (-A[2] * di) % m, (A[0] * di) % m)


def reciprocity_matrix(x1, x2, B, C, m=0):
    """M_x = [[-B x1 + x2, -C x1], [x1, x2]]: multiplication by x = x1*tau + x2
    on the basis (tau, 1), for tau a root of X^2 + B X + C. Its determinant
    is the norm of x."""
    Mx = (-B * x1 + x2, -C * x1, x1, x2)
    return tuple(v % m for v in Mx) if m else Mx


def g_tau(x1, x2, B, C, m):
    """g_tau(x) = M_x^{-1} in GL2(Z/m), for x = x1*tau + x2, tau^2 + B tau + C = 0."""
    Mx = reciprocity_matrix(x1, x2, B, C, m)
    if gcd(mat_det(Mx, m), m) != 1:
        raise ValueError("x is not a unit modulo m")
    return mat_inv(Mx, m)


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


def sl2_lift(M, m):
    """An integer SL2(Z) matrix congruent to M mod m (det M = 1 mod m required)."""
    if m == 1:
        return IDENT
    a, b, c, d = (x % m for x in M)
    assert mat_det((a, b, c, d), m) == 1, "sl2_lift wants determinant 1"
    # Make the first column primitive over Z, preferring small adjustments.
    a1, c1 = a, c
    found = False
    for total in range(128):
        for s in range(total + 1):
            t = total - s
            a1, c1 = a + s * m, c + t * m
            if gcd(a1, c1) == 1:
                found = True
                break
        if found:
            break
    assert found, "no coprime lift of the first column"
    det0 = a1 * d - b * c1
    e = (det0 - 1) // m
    g, u, v = _xgcd(a1, c1)
    # a1*(d + y m) - (b + x m)*c1 = 1  with  a1*y - c1*x = -e.
    y = -e * u
    x = e * v
    lift = (a1, b + x * m, c1, d + y * m)
    assert mat_det(lift) == 1
    assert all((p - q) % m == 0 for p, q in zip(lift, M))
    return lift


def word_from_sl2(M):
    """M in SL2(Z) as letters ('T', n) and ('S',), multiplying out to M.

    Nearest-integer quotients keep the remainder at most half the
    divisor, so the word length is logarithmic in the entries.
    """
    a, b, c, d = M
    word = []
    while c:
        q, r = divmod(a, c)
        if 2 * abs(r) > abs(c):
            q += 1
        word.append(("T", q))
        word.append(("S",))
        # M <- S^-1 T^-q M
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    if a == 1:  # M = T^b
        word.append(("T", b))
    else:  # a = d = -1: M = -T^(-b) = S^2 T^(-b)
        word.append(("S",))
        word.append(("S",))
        word.append(("T", -b))
    return [w for w in word if w != ("T", 0)]


def word_to_matrix(word):
    M = IDENT
    for letter in word:
        if letter[0] == "S":
            M = mat_mul(M, S_MAT)
        else:
            M = mat_mul(M, (1, letter[1], 0, 1))
    return M


def decompose(M, m):
    """M = (SL2 word) * diag(1, k) mod m; returns (word, k)."""
    word, k = _decompose_cached(tuple(x % m for x in M), m)
    return list(word), k


@lru_cache(maxsize=65536)
def _decompose_cached(M, m):
    k = mat_det(M, m)
    if gcd(k, m) != 1:
        raise ValueError("matrix determinant is not a unit")
    ki = pow(k, -1, m)
    M1 = (M[0] % m, (M[1] * ki) % m, M[2] % m, (M[3] * ki) % m)
    word = tuple(word_from_sl2(sl2_lift(M1, m)))
    return word, k


# --- exact multipliers ------------------------------------------------------


def _squarefree_split(r: Fraction):
    """r = s^2 * r0 with r0 squarefree in numerator and denominator."""
    def split(n):
        s, sf = 1, 1
        d = 2
        while d * d <= n:
            cnt = 0
            while n % d == 0:
                n //= d
                cnt += 1
            s *= d ** (cnt // 2)
            if cnt % 2:
                sf *= d
            d += 1
        sf *= n
        return s, sf

    sn, rn = split(r.numerator)
    sd, rd = split(r.denominator)
    # 1/d = d/d^2
    return Fraction(sn, sd * rd), Fraction(rn * rd)


@dataclass(frozen=True)
class Multiplier:
    """q * e^(2 pi i t) * sqrt(r), with q rational, t mod 1, r squarefree positive."""

    q: Fraction = Fraction(1)
    t: Fraction = Fraction(0)
    r: Fraction = Fraction(1)

    @classmethod
    def root_of_unity(cls, t) -> "Multiplier":
        return cls(Fraction(1), Fraction(t) % 1, Fraction(1))

    def times(self, other: "Multiplier") -> "Multiplier":
        s, r0 = _squarefree_split(self.r * other.r)
        return Multiplier(self.q * other.q * s, (self.t + other.t) % 1, r0)

    def rotate(self, t) -> "Multiplier":
        return Multiplier(self.q, (self.t + Fraction(t)) % 1, self.r)

    def scale_sqrt(self, r) -> "Multiplier":
        return self.times(Multiplier(Fraction(1), Fraction(0), Fraction(r)))

    def pow(self, e: int) -> "Multiplier":
        out = Multiplier()
        for _ in range(e):
            out = out.times(self)
        return out

    def value(self, ctx: PrecisionCtx) -> mpc:
        with ctx.workprec():
            rot = mpmath.expjpi(2 * mpf(self.t.numerator) / self.t.denominator)
            return (
                mpf(self.q.numerator)
                / self.q.denominator
                * rot
                * mpmath.sqrt(mpf(self.r.numerator) / self.r.denominator)
            )

    def __str__(self):
        parts = []
        if self.q != 1:
            parts.append(str(self.q))
        if self.t:
            parts.append(f"e(2pi i * {self.t})")
        if self.r != 1:
            parts.append(f"sqrt({self.r})")
        return " * ".join(parts) if parts else "1"


ONE = Multiplier()


# --- function symbols -------------------------------------------------------

WEBER_LEVELS = {"f": 48, "f1": 48, "f2": 48, "gamma2": 3, "gamma3": 2, "j": 1}


@dataclass(frozen=True)
class FunctionSymbol:
    """mult * base^exponent for a base closed under the S, T, diag actions.

    kind is one of "weber" (base in f/f1/f2/gamma2/gamma3/j), "fricke"
    (base index u = (u1, u2)/m), or "etaq" (tuple of Hermite eta atoms
    ((a, b, d), power)).
    """

    kind: str
    base: object
    exponent: int = 1
    mult: Multiplier = ONE
    level: int = 1

    def __str__(self):
        if self.kind == "weber":
            body = self.base
        elif self.kind == "fricke":
            body = f"F_{self.base}"
        else:
            body = " ".join(f"eta(({a}t+{b})/{d})^{e}" for ((a, b, d), e) in self.base)
        e = f"^{self.exponent}" if self.exponent != 1 else ""
        m = f"{self.mult} * " if self.mult != ONE else ""
        return f"{m}{body}{e}"


def weber_symbol(name: str, exponent: int = 1, mult: Multiplier = ONE) -> FunctionSymbol:
    if name not in WEBER_LEVELS:
        raise ValueError(f"unknown function {name}")
    return FunctionSymbol("weber", name, exponent, mult, WEBER_LEVELS[name])


def fricke_symbol(u1: int, u2: int, m: int) -> FunctionSymbol:
    u = _canon_fricke(u1 % m, u2 % m, m)
    return FunctionSymbol("fricke", u, 1, ONE, m)


def _canon_fricke(u1, u2, m):
    if (u1, u2) == (0, 0):
        raise ValueError("Fricke index must be nonzero")
    neg = ((-u1) % m, (-u2) % m)
    return min((u1, u2), neg)


def eta_quotient_symbol(primes) -> FunctionSymbol:
    """eta(p z)/eta(z), or eta(p z) eta(q z) / (eta(pq z) eta(z))."""
    ps = sorted(set(primes))
    if len(ps) == 1:
        (p,) = ps
        atoms = (((p, 0, 1), 1), ((1, 0, 1), -1))
        level = 24 * p
    elif len(ps) == 2:
        p, q = ps
        atoms = (((p, 0, 1), 1), ((q, 0, 1), 1), ((p * q, 0, 1), -1), ((1, 0, 1), -1))
        level = 24 * p * q
    else:
        raise ValueError("eta quotient takes one or two distinct primes")
    return FunctionSymbol("etaq", _merge_atoms(atoms), 1, ONE, level)


# --- Dedekind eta transformation, exactly -----------------------------------


def dedekind_sum(h: int, k: int) -> Fraction:
    """s(h, k) for k >= 1 by the reciprocity recursion."""
    h %= k
    if k == 1 or h == 0:
        return Fraction(0)
    # s(h,k) + s(k,h) = -1/4 + (h/k + k/h + 1/(h k))/12
    return (
        Fraction(-1, 4)
        + (Fraction(h, k) + Fraction(k, h) + Fraction(1, h * k)) / 12
        - dedekind_sum(k % h, h)
    )


def eta_epsilon_exponent(gamma) -> Fraction:
    """t with eta(gamma tau) = e^(2 pi i t) (c tau + d)^(1/2) eta(tau), principal branch.

    gamma is normalized to c > 0 or (c = 0, d > 0); both signs represent
    the same Moebius action.
    """
    a, b, c, d = gamma
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    if c == 0:
        return Fraction(b, 24) % 1
    val = Fraction(a + d, 24 * c) - dedekind_sum(d, c) / 2 - Fraction(1, 8)
    return val % 1


def _hermite_decompose(N):
    """N (det > 0) = gamma * H with gamma in SL2(Z), H = [[a, b], [0, d]], 0 <= b < d."""
    n11, n12, n21, n22 = N
    g, u, v = _xgcd(n11, n21)
    a = g
    d = (n11 * n22 - n12 * n21) // g
    b = u * n12 + v * n22
    # gamma^{-1} = [[u, v], [-n21/g, n11/g]]
    gamma = (n11 // g, -v, n21 // g, u)
    assert mat_det(gamma) == 1
    shift = b // d
    b -= shift * d
    # eta((a tau + b + shift*d)/d) = e^(2 pi i shift/24) eta((a tau + b)/d)
    return gamma, (a, b, d), shift


def _atom_act_sl2(atom, gamma_int):
    """eta_M(gamma tau) = mult * j(gamma,tau)^(1/2) * eta_M'(tau); returns (mult, M')."""
    (a, b, d) = atom
    N = mat_mul((a, b, 0, d), gamma_int)
    gamma2, (a2, b2, d2), shift = _hermite_decompose(N)
    t = eta_epsilon_exponent(gamma2) + Fraction(shift, 24)
    # (c' (M' tau) + d') = (d_M / d_M') * (c tau + d)
    mult = Multiplier(Fraction(1), t % 1, Fraction(1)).scale_sqrt(Fraction(d, d2))
    return mult, (a2, b2, d2)


def _etaq_act_sl2(symbol: FunctionSymbol, gamma_int) -> FunctionSymbol:
    total = symbol.mult
    atoms_out = []
    weight = sum(e for (_, e) in symbol.base)
    assert weight == 0, "eta quotient symbols must have weight zero"
    for (atom, e) in symbol.base:
        mult, new_atom = _atom_act_sl2(atom, gamma_int)
        total = total.times(mult.pow(e) if e > 0 else _mult_inverse(mult).pow(-e))
        atoms_out.append((new_atom, e))
    atoms_out = _merge_atoms(atoms_out)
    return replace(symbol, base=atoms_out, mult=total)


def _mult_inverse(m: Multiplier) -> Multiplier:
    return Multiplier(1 / m.q, (-m.t) % 1, Fraction(1)).scale_sqrt(1 / m.r)


def _merge_atoms(atoms):
    acc = {}
    for (atom, e) in atoms:
        acc[atom] = acc.get(atom, 0) + e
    return tuple(sorted((a, e) for a, e in acc.items() if e))


def _etaq_act_diag(symbol: FunctionSymbol, k: int) -> FunctionSymbol:
    """Cyclotomic action on the Fourier coefficients: b -> k b per atom."""
    atoms_out = []
    extra = Fraction(0)
    for ((a, b, d), e) in symbol.base:
        kb = (k * b) % (24 * d)
        b2 = kb % d
        extra += e * Fraction((kb - b2) // d, 24)
        atoms_out.append(((a, b2, d), e))
    # Multiplier coefficients: q sqrt(r) stays (rational sqrt of rational can
    # pick up a sign under sigma_k only through sqrt(2)-type factors).
    mult = symbol.mult
    if mult.r != 1:
        mult = mult.times(Multiplier.root_of_unity(_sqrt_galois_twist(mult.r, k)))
    mult = Multiplier(mult.q, (mult.t * k + extra) % 1, mult.r)
    return replace(symbol, base=_merge_atoms(atoms_out), mult=mult)


def _sqrt_galois_twist(r: Fraction, k: int) -> Fraction:
    """t with sigma_k(sqrt(r)) = e^(2 pi i t) sqrt(r), for squarefree r built from small primes.

    sqrt(p*) for p* = (-1)^((p-1)/2) p lies in Q(zeta_p); sigma_k flips its
    sign by the Legendre symbol (k|p). Factors of sqrt(2) flip by the
    second supplement (k = +-1 mod 8).
    """
    num_den = r.numerator * r.denominator
    t = Fraction(0)
    n = num_den
    p = 2
    while p * p <= n or n > 1:
        if n % p == 0:
            while n % p == 0:
                n //= p
            if p == 2:
                if k % 8 in (3, 5):
                    t += Fraction(1, 2)
            else:
                ls = pow(k % p, (p - 1) // 2, p)
                if ls == p - 1:
                    t += Fraction(1, 2)
                # sqrt(p) vs sqrt(p*): for p = 3 mod 4, sqrt(p) = sqrt(-1)*sqrt(p*)/...
                if p % 4 == 3:
                    # sigma_k(i) = i^k: contributes when k = 3 mod 4
                    if k % 4 == 3:
                        t += Fraction(1, 2)
        p += 1 if p == 2 else 2
        if p * p > n and n == 1:
            break
    return t % 1


# --- the geometric action tables -------------------------------------------

# Under T: base -> (new base, added multiplier exponent as fraction of a turn)
_WEBER_T = {
    "f": ("f1", Fraction(-1, 48)),
    "f1": ("f", Fraction(-1, 48)),
    "f2": ("f2", Fraction(1, 24)),
    "gamma2": ("gamma2", Fraction(-1, 3)),
    "gamma3": ("gamma3", Fraction(1, 2)),
    "j": ("j", Fraction(0)),
}
# Under S: base -> (new base, multiplier turn)
_WEBER_S = {
    "f": ("f", Fraction(0)),
    "f1": ("f2", Fraction(0)),
    "f2": ("f1", Fraction(0)),
    "gamma2": ("gamma2", Fraction(0)),
    "gamma3": ("gamma3", Fraction(1, 2)),
    "j": ("j", Fraction(0)),
}


def _weber_act_letter(symbol: FunctionSymbol, letter) -> FunctionSymbol:
    base, e = symbol.base, symbol.exponent
    if letter[0] == "T":
        n = letter[1]
        newbase = base
        turn = Fraction(0)
        if base in ("f", "f1"):
            newbase = base if n % 2 == 0 else _WEBER_T[base][0]
            turn = n * Fraction(-1, 48)
        else:
            turn = n * _WEBER_T[base][1]
        return replace(symbol, base=newbase, mult=symbol.mult.rotate(e * turn))
    newbase, turn = _WEBER_S[base]
    return replace(symbol, base=newbase, mult=symbol.mult.rotate(e * turn))


def _weber_act_diag(symbol: FunctionSymbol, k: int) -> FunctionSymbol:
    mult = Multiplier(symbol.mult.q, (symbol.mult.t * k) % 1, symbol.mult.r)
    if symbol.base == "f2" and k % 8 in (3, 5):
        # sigma_k(sqrt 2) = -sqrt 2 inside f2's expansion
        mult = mult.rotate(Fraction(symbol.exponent, 2))
    return replace(symbol, mult=mult)


def _fricke_act_letter(symbol: FunctionSymbol, letter) -> FunctionSymbol:
    m = symbol.level
    u1, u2 = symbol.base
    if letter[0] == "T":
        n = letter[1]
        u1, u2 = u1 % m, (u1 * n + u2) % m
    else:
        u1, u2 = u2 % m, (-u1) % m
    return replace(symbol, base=_canon_fricke(u1, u2, m))


def _etaq_normalized(symbol: FunctionSymbol) -> FunctionSymbol:
    """Fold an outer exponent of an eta-quotient symbol into its atom powers."""
    if symbol.exponent == 1:
        return replace(symbol, base=_merge_atoms(symbol.base))
    atoms = tuple((a, e * symbol.exponent) for (a, e) in symbol.base)
    return replace(symbol, base=_merge_atoms(atoms), exponent=1)


def act(symbol: FunctionSymbol, M, m: int) -> FunctionSymbol:
    """The right action of M in GL2(Z/m) on a symbol of level dividing m."""
    if m % symbol.level:
        raise ValueError("matrix modulus must be a multiple of the symbol level")
    if symbol.kind == "etaq":
        symbol = _etaq_normalized(symbol)
    lev = symbol.level
    if lev == 1:
        return symbol
    Mred = tuple(x % lev for x in M)
    word, k = decompose(Mred, lev)
    out = symbol
    if symbol.kind == "weber":
        for letter in word:
            out = _weber_act_letter(out, letter)
        out = _weber_act_diag(out, k % lev)
    elif symbol.kind == "fricke":
        for letter in word:
            out = _fricke_act_letter(out, letter)
        u1, u2 = out.base
        out = replace(out, base=_canon_fricke(u1, (k * u2) % lev, lev))
    else:
        out = _etaq_act_sl2(out, word_to_matrix(word))
        out = _etaq_act_diag(out, k % lev)
    return out


def symbol_value(symbol: FunctionSymbol, tau, ctx: PrecisionCtx) -> mpc:
    """Numeric value: multiplier * base(tau)^exponent."""
    with ctx.workprec():
        if symbol.kind == "weber":
            fn = {
                "f": modfunc.weber_f,
                "f1": modfunc.weber_f1,
                "f2": modfunc.weber_f2,
                "gamma2": modfunc.gamma2,
                "gamma3": modfunc.gamma3,
                "j": modfunc.j_from_f2,
            }[symbol.base]
            v = fn(tau, ctx)
        elif symbol.kind == "fricke":
            u1, u2 = symbol.base
            v = modfunc.fricke_value(u1, u2, symbol.level, tau, ctx)
        else:
            v = mpc(1)
            for ((a, b, d), e) in symbol.base:
                v *= modfunc.eta((a * mpc(tau) + b) / d, ctx) ** e
        return symbol.mult.value(ctx) * v**symbol.exponent


# --- class invariants -------------------------------------------------------


def principal_tau_poly(D) -> tuple:
    """(B, C) with tau = (-B + sqrt(D))/2 a root of X^2 + B X + C generating Z_K."""
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    f = quadforms.principal_form(D)
    return f.b, f.c


def unit_group_pairs(D, m: int):
    """Generators of (Z_K/m)^* as pairs x = x1*tau + x2, with certification.

    The group is walked exhaustively over small (x1, x2) and its order is
    checked against the residue-unit machinery.
    """
    return _unit_group_pairs_cached(D.D if isinstance(D, Discriminant) else int(D), m)


@lru_cache(maxsize=4096)
def _unit_group_pairs_cached(D: int, m: int):
    B, C = principal_tau_poly(D)

    def norm(x):
        x1, x2 = x
        return (x2 * x2 - B * x1 * x2 + C * x1 * x1) % m

    def mul(x, y):
        x1, x2 = x
        y1, y2 = y
        return (
            (x1 * y2 + x2 * y1 - B * x1 * y1) % m,
            (x2 * y2 - C * x1 * y1) % m,
        )

    cands = [
        (x1, x2)
        for x1 in range(m)
        for x2 in range(m)
        if gcd(norm((x1, x2)), m) == 1
    ]
    group, gens, dlog = group_from_multiplication((0, 1 % m), cands, mul)
    expected = ResidueUnits(D if isinstance(D, int) else D.D, m).order
    assert group.order == expected, "tau-basis unit group disagrees with rayclass"
    return gens, group


@dataclass(frozen=True)
class InvariantReport:
    invariant: bool
    symbol: FunctionSymbol
    level: int
    unit_group_order: int
    n_generators: int
    orbit_size: int


def is_class_invariant(symbol: FunctionSymbol, D, search_modifications=False):
    """Does the symbol's CM value at the principal tau land in the Hilbert class field?

    True iff every generator of (Z_K/m)^* stabilizes the symbol under
    g_tau. With search_modifications, small powers and 48th roots of
    unity multiples are scanned in canonical order (increasing exponent,
    then multiplier) and the first stabilized modification is reported.
    """
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    m = symbol.level
    if m == 1:
        return True, InvariantReport(True, symbol, 1, 1, 0, 1)
    B, C = principal_tau_poly(D)
    gens, group = unit_group_pairs(D.D, m)
    mats = [g_tau(x1, x2, B, C, m) for (x1, x2) in gens]

    def stabilized(sym):
        return all(act(sym, M, m) == sym for M in mats)

    def modified(e, k):
        mult = symbol.mult.pow(e).times(Multiplier.root_of_unity(Fraction(k, 48)))
        out = replace(symbol, exponent=symbol.exponent * e, mult=mult)
        return _etaq_normalized(out) if symbol.kind == "etaq" else out

    candidates = [_etaq_normalized(symbol) if symbol.kind == "etaq" else symbol]
    if search_modifications:
        candidates = [modified(e, k) for e in range(1, 25) for k in range(48)]
    for cand in candidates:
        if stabilized(cand):
            orbit = _orbit_size(cand, mats, m)
            rep = InvariantReport(True, cand, m, group.order, len(gens), orbit)
            return True, rep
    orbit = _orbit_size(symbol, mats, m)
    return False, InvariantReport(False, symbol, m, group.order, len(gens), orbit)


def _orbit_size(symbol, mats, m, cap=512):
    seen = {symbol}
    frontier = [symbol]
    while frontier and len(seen) < cap:
        nxt = []
        for s in frontier:
            for M in mats:
                s2 = act(s, M, m)
                if s2 not in seen:
                    seen.add(s2)
                    nxt.append(s2)
        frontier = nxt
    return len(seen)


def gtau_image_order(D, m: int) -> int:
    """Order of the image of (Z_K/m)^* in GL2(Z/m)/{+-1}, divided by the
    image of the unit group Z_K^*: the size of the Galois group the
    matrices realize, which is |(Z_K/m)^*| / |im Z_K^*|."""
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    B, C = principal_tau_poly(D)
    gens, group = unit_group_pairs(D.D, m)

    def canon(M):
        Mneg = tuple((-x) % m for x in M)
        return min(M, Mneg)

    def mmul(A, Bm):
        return canon(mat_mul(A, Bm, m))

    mats = [canon(g_tau(x1, x2, B, C, m)) for (x1, x2) in gens]
    img, _, _ = group_from_multiplication(canon(IDENT), mats, mmul)
    # Image of the unit group Z_K^* itself.
    umats = [canon(g_tau(x1, x2, B, C, m)) for (x1, x2) in _unit_pairs_tau(D.D)]
    uimg, _, _ = group_from_multiplication(canon(IDENT), umats, mmul)
    return img.order // uimg.order


def _unit_pairs_tau(D: int):
    """Z_K^* elements as (x1, x2) pairs over the principal tau basis."""
    if D == -4:
        # i = tau (B = 0): units 1, i, -1, -i
        return [(0, 1), (1, 0), (0, -1), (-1, 0)]
    if D == -3:
        # zeta6 = tau + 1 for tau = (-1+sqrt(-3))/2
        out = []
        x = (0, 1)
        B, C = principal_tau_poly(Discriminant(-3))
        for _ in range(6):
            out.append(x)
            x1, x2 = x
            # multiply by zeta6 = tau + 1: (x1 t + x2)(t + 1) with t^2 = -t - 1
            x = (x1 + x2 - x1, x2 - x1)  # = (x2, x2 - x1)
        return out
    return [(0, 1), (0, -1)]


# --- conjugates and class polynomials ---------------------------------------


def conjugate_matrix(form: QuadForm, D, m: int):
    """(U, evaluation form) with f^U(tau of the form) a Galois conjugate of f(tau).

    The form is first translated inside its class so its leading
    coefficient is coprime to m; the matrix is then
    [[a, (b-B)/2], [0, 1]] mod m. Writing the idele of the class as a
    unit at the primes over m, the whole recipe collapses to this single
    case, certified by the class polynomial tests (the conjugates must
    assemble to an exact O_K polynomial and match the independent
    integer-relation oracle).
    """
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    B, _ = principal_tau_poly(D)
    f = quadforms._represent_coprime_to(form, m) if m > 1 else form
    a, b = f.a, f.b
    U = (a % m, ((b - B) // 2) % m, 0, 1) if m > 1 else IDENT
    return U, f


def _fundamental_domain_word(tau, ctx: PrecisionCtx):
    """gamma in SL2(Z) with gamma*tau in the fundamental domain; returns (gamma, tau')."""
    g = IDENT
    with ctx.workprec():
        z = mpc(tau)
        for _ in range(10000):
            n = int(mpmath.nint(z.real))
            if n:
                z = z - n
                g = mat_mul((1, -n, 0, 1), g)
            if abs(z) < 1 - mpf(2) ** (-ctx.bits // 2):
                z = -1 / z
                g = mat_mul(S_MAT, g)
            else:
                break
        return g, z


def conjugate_value(symbol: FunctionSymbol, form: QuadForm, D, ctx: PrecisionCtx) -> mpc:
    """The Galois conjugate of the symbol's CM value attached to one form class."""
    m = symbol.level
    U, f = conjugate_matrix(form, D, m)
    with ctx.workprec():
        root = mpmath.sqrt(mpf(4 * f.a * f.c - f.b * f.b))
        tau_f = mpc(mpf(-f.b) / (2 * f.a), root / (2 * f.a))
        gamma, tau_fd = _fundamental_domain_word(tau_f, ctx)
        # f^U(tau_f) = f^(U * gamma^-1)(gamma tau_f)
        ginv = (gamma[3], -gamma[1], -gamma[2], gamma[0])
        M = mat_mul(U, tuple(x % m for x in ginv) if m > 1 else ginv, m) if m > 1 else IDENT
        moved = act(symbol, M, m) if m > 1 else symbol
        return symbol_value(moved, tau_fd, ctx)


def class_invariant_poly(symbol: FunctionSymbol, D, bits: int = None, tol=0.25):
    """The minimal polynomial of a class invariant: one conjugate per reduced form.

    Returns (poly, bits_used) with poly an IntPoly when the coefficients
    are rational integers, else a QuadIntPolyK over Z[tau_K] (recognized
    by continued fractions and certified at doubled precision). Rounding
    failures that keep shrinking under precision doubling are retried;
    stagnating ones switch to the O_K route.
    """
    from .cmcurve import QuadIntPolyK, _recognize_rational
    from .hilbert import initial_precision
    from .numerics import MAX_BITS_DEFAULT, PrecisionExhausted

    D = D if isinstance(D, Discriminant) else Discriminant(D)
    forms = quadforms.enumerate_reduced_forms(D)

    def roots_at(ctx):
        return poly_from_roots([conjugate_value(symbol, f, D, ctx) for f in forms], ctx)

    def k_coeffs(ctx):
        cpoly = roots_at(ctx)
        tau = quadforms.tau_of_form(quadforms.principal_form(D), ctx).value
        with ctx.workprec():
            out = []
            for c in cpoly.coeffs:
                v = c.imag / tau.imag
                u = c.real - v * tau.real
                out.append((_recognize_rational(u, ctx), _recognize_rational(v, ctx)))
            return tuple(out)

    start = bits if bits is not None else max(192, initial_precision(D) // 8)
    bits_now = start
    last_worst = None
    while bits_now <= MAX_BITS_DEFAULT:
        ctx = PrecisionCtx(bits_now)
        try:
            return round_to_int_poly(roots_at(ctx), tol), bits_now
        except RoundingUncertified as e:
            worst = float(e.worst_distance)
        if last_worst is not None and worst > 0.5 * last_worst:
            # Not converging to integers: the coefficients live in O_K.
            try:
                coeffs = k_coeffs(ctx)
                if coeffs == k_coeffs(PrecisionCtx(bits_now * 2)):
                    return QuadIntPolyK(D.D, coeffs), bits_now
            except RoundingUncertified:
                pass
        last_worst = worst
        bits_now *= 2
    raise PrecisionExhausted("precision-exhausted: class invariant polynomial did not stabilize")
