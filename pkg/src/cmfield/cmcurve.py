"""CM Weierstrass models, division polynomials, and ray class field generators.

The model y^2 = w_K(x) = 4(x^3 + a x + b) is pinned by
c_K = 27 j_K/(j_K - 1728); the fields with extra units get the fixed
special models y^2 = 4x^3 - 4x and y^2 = 4x^3 - 4. Division polynomials
T_m follow the classical doubling recursions from T_1 = T_2 = 1 and the
printed T_3, T_4, with the modern +1 leading-sign convention (not
Weber's (-1)^(m-1)). Torsion x-coordinates come from the Weierstrass pe
function; Weber function values of m-torsion points generate the ray
class field H_m, recognized exactly over Z[tau_K] when h = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath
from mpmath import mpc, mpf

from . import modfunc, quadforms
from .hilbert import hilbert_class_poly
from .numerics import MAX_BITS_DEFAULT, PrecisionCtx, RoundingUncertified
from .quadforms import Discriminant
from .rayclass import ResidueUnits


# --- coefficient ring Z[a, b] -------------------------------------------


class ABPoly:
    """Exact polynomial in the Weierstrass coefficients a, b over Z."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, n: int) -> "ABPoly":
        return cls({(0, 0): n})

    @classmethod
    def gen_a(cls) -> "ABPoly":
        return cls({(1, 0): 1})

    @classmethod
    def gen_b(cls) -> "ABPoly":
        return cls({(0, 1): 1})

    def _coerce(self, other):
        if isinstance(other, int):
            return ABPoly.const(other)
        if isinstance(other, ABPoly):
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ABPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ABPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = {}
        for (i1, j1), v1 in self.terms.items():
            for (i2, j2), v2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + v1 * v2
        return ABPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def evaluate(self, a, b):
        acc = 0
        for (i, j), v in self.terms.items():
            acc = acc + v * a**i * b**j
        return acc

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), v in sorted(self.terms.items(), reverse=True):
            mono = "".join(
                (f"a^{i}" if i > 1 else "a" if i else "",
                 f"b^{j}" if j > 1 else "b" if j else "")
            )
            mag = abs(v)
            body = f"{mag}{'*' if mono and mag != 1 else ''}{mono if mag != 1 or mono else mag}"
            if mag == 1 and mono:
                body = mono
            elif not mono:
                body = str(mag)
            parts.append(("- " if v < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


# --- generic dense polynomials in x ---------------------------------------


def _trim(p):
    while len(p) > 1 and not p[-1]:
        p.pop()
    return p


def p_add(u, v):
    n = max(len(u), len(v))
    return _trim([(u[i] if i < len(u) else 0) + (v[i] if i < len(v) else 0) for i in range(n)])


def p_sub(u, v):
    n = max(len(u), len(v))
    return _trim([(u[i] if i < len(u) else 0) - (v[i] if i < len(v) else 0) for i in range(n)])


def _int_poly_mul(u, v):
    """Multiply integer polynomials by Kronecker substitution through gmpy2.

    Coefficients are split by sign into four nonnegative packings so each
    big-integer product unpacks digit-exactly.
    """
    mb = max((abs(c) for c in u), default=0) * max((abs(c) for c in v), default=0)
    bound = mb * min(len(u), len(v)) + 1
    k = max(bound.bit_length() + 1, 8)
    n_out = len(u) + len(v) - 1

    def pack(p):
        acc = gmpy2.mpz(0)
        for c in reversed(p):
            acc = (acc << k) | c
        return acc

    def unpack(z):
        out = []
        mask = (gmpy2.mpz(1) << k) - 1
        for _ in range(n_out):
            out.append(int(z & mask))
            z >>= k
        return out

    up = [c if c > 0 else 0 for c in u]
    un = [-c if c < 0 else 0 for c in u]
    vp = [c if c > 0 else 0 for c in v]
    vn = [-c if c < 0 else 0 for c in v]
    pp = unpack(pack(up) * pack(vp))
    nn = unpack(pack(un) * pack(vn))
    pn = unpack(pack(up) * pack(vn))
    np_ = unpack(pack(un) * pack(vp))
    return _trim([pp[i] + nn[i] - pn[i] - np_[i] for i in range(n_out)])


def p_mul(u, v):
    if all(isinstance(c, int) for c in u) and all(isinstance(c, int) for c in v):
        return _int_poly_mul(list(u), list(v))
    out = [0] * (len(u) + len(v) - 1)
    for i, ui in enumerate(u):
        if isinstance(ui, int) and ui == 0:
            continue
        for j, vj in enumerate(v):
            out[i + j] = out[i + j] + ui * vj
    return _trim(out)


def p_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


# --- division polynomials -------------------------------------------------


@dataclass(frozen=True)
class DivisionPoly:
    """T_m with coefficients in Z[a, b]; psi_m = T_m (odd m) or 2y*T_m (even m)."""

    m: int
    T: tuple  # ascending in x
    even: bool

    @property
    def degree(self) -> int:
        return len(self.T) - 1

    @property
    def leading(self):
        return self.T[-1]


class _PsiEngine:
    """Repeated-doubling cache of psi_m = (2y)^E * P(x) over a generic ring.

    T_m and the recursion live on the companion model y^2 = x^3 + a x + b
    (the curve 6.13 after y -> y/2), so (2y)^2 is eliminated eagerly
    through (2y)^2 = 4(x^3 + a x + b); the exponent E is carried lazily
    and folded only when two terms must be combined at different heights.
    """

    def __init__(self, a, b, t3, t4):
        self.w4 = [4 * b, 4 * a, 0, 4]  # 4(x^3 + ax + b)
        self.cache = {
            0: (0, [0]),
            1: (0, [1]),
            2: (1, [1]),
            3: (0, t3),
            4: (1, t4),
        }

    def _fold_to(self, E, P, target):
        while E > target:
            E -= 2
            P = p_mul(P, self.w4)
        if E != target:
            raise AssertionError("parity mismatch while folding (2y) powers")
        return P

    def _mul(self, x, y):
        return (x[0] + y[0], p_mul(x[1], y[1]))

    def _pow(self, x, k):
        E, P = x
        out = P
        for _ in range(k - 1):
            out = p_mul(out, P)
        return (E * k, out)

    def _sub(self, x, y):
        E = min(x[0], y[0])
        return (E, p_sub(self._fold_to(x[0], x[1], E), self._fold_to(y[0], y[1], E)))

    def psi(self, m: int):
        if m in self.cache:
            return self.cache[m]
        k = m // 2
        if m % 2:
            val = self._sub(
                self._mul(self.psi(k + 2), self._pow(self.psi(k), 3)),
                self._mul(self._pow(self.psi(k + 1), 3), self.psi(k - 1)),
            )
        else:
            inner = self._sub(
                self._mul(self.psi(k + 2), self._pow(self.psi(k - 1), 2)),
                self._mul(self._pow(self.psi(k + 1), 2), self.psi(k - 2)),
            )
            E, P = self._mul(self.psi(k), inner)
            if E < 1:
                raise AssertionError("even psi lost its 2y factor")
            val = (E - 1, P)
        # Canonical height: 0 for odd index, 1 for even.
        target = 0 if m % 2 else 1
        val = (target, self._fold_to(val[0], val[1], target))
        self.cache[m] = val
        return val


def _t3_t4(a, b):
    t3 = [-(a * a), 12 * b, 6 * a, 0, 3]
    t4 = [-16 * (b * b) - 2 * (a * a * a), -8 * (a * b), -10 * (a * a), 40 * b, 10 * a, 0, 2]
    return t3, t4


def division_poly(m: int) -> DivisionPoly:
    """Symbolic T_m over Z[a, b] by repeated doubling."""
    if m < 1:
        raise ValueError("division polynomial index must be >= 1")
    a, b = ABPoly.gen_a(), ABPoly.gen_b()
    t3, t4 = _t3_t4(a, b)
    eng = _PsiEngine(a, b, t3, t4)
    E, P = eng.psi(m)
    T = tuple(c if isinstance(c, ABPoly) else ABPoly.const(c) for c in P)
    return DivisionPoly(m, T, even=(m % 2 == 0))


def division_poly_specialized(m: int, a, b):
    """T_m with a, b from any commutative ring (ints, Fractions, mpc, ...)."""
    if m < 1:
        raise ValueError("division polynomial index must be >= 1")
    t3, t4 = _t3_t4(a, b)
    eng = _PsiEngine(a, b, t3, t4)
    return eng.psi(m)[1]


def division_poly_degree(m: int) -> int:
    return (m * m - 1) // 2 if m % 2 else (m * m - 4) // 2


def division_poly_leading(m: int) -> int:
    return m if m % 2 else m // 2


# --- CM model --------------------------------------------------------------


@dataclass(frozen=True)
class CMModel:
    """y^2 = 4(x^3 + a x + b) with CM by the maximal order of discriminant D."""

    D: int
    a: object  # Fraction when exact (h=1 or special), else mpc
    b: object
    j: object  # exact int when h=1, else mpc
    exact: bool

    def a_num(self, ctx: PrecisionCtx) -> mpc:
        return _to_mpc(self.a, ctx)

    def b_num(self, ctx: PrecisionCtx) -> mpc:
        return _to_mpc(self.b, ctx)


def _to_mpc(x, ctx: PrecisionCtx) -> mpc:
    if isinstance(x, Fraction):
        with ctx.workprec():
            return mpc(mpf(x.numerator) / mpf(x.denominator))
    if isinstance(x, mpc):
        return x  # already carries its own precision
    with ctx.workprec():
        return mpc(x)


SPECIAL_MODELS = {
    -4: (Fraction(-1), Fraction(0)),  # y^2 = 4x^3 - 4x, j = 1728
    -3: (Fraction(0), Fraction(-1)),  # y^2 = 4x^3 - 4,  j = 0
}


def cm_model(D, ctx: PrecisionCtx) -> CMModel:
    """The Weierstrass model for C/Z_K, exact over Q when j is rational."""
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    if D.D in SPECIAL_MODELS:
        a, b = SPECIAL_MODELS[D.D]
        return CMModel(D.D, a, b, 1728 if D.D == -4 else 0, True)
    forms = quadforms.enumerate_reduced_forms(D)
    if len(forms) == 1:
        j = -hilbert_class_poly(D).poly.coeffs[0]
        c = Fraction(27 * j, j - 1728)
        a = -c / (4 * (c - 27) ** 2)
        b = -c / (4 * (c - 27) ** 3)
        model = CMModel(D.D, a, b, j, True)
    else:
        tau = quadforms.tau_of_form(quadforms.principal_form(D), ctx).value
        with ctx.workprec():
            j = modfunc.j_from_f2(tau, ctx)
            c = 27 * j / (j - 1728)
            a = -c / (4 * (c - 27) ** 2)
            b = -c / (4 * (c - 27) ** 3)
        model = CMModel(D.D, a, b, j, False)
    _check_j_roundtrip(model, ctx)
    return model


def _check_j_roundtrip(model: CMModel, ctx: PrecisionCtx):
    with ctx.workprec():
        a, b = model.a_num(ctx), model.b_num(ctx)
        denom = 4 * a**3 + 27 * b**2
        j = 1728 * 4 * a**3 / denom
        target = _to_mpc(model.j if not isinstance(model.j, int) else mpf(model.j), ctx)
        scale = max(mpf(1), abs(target))
        if abs(j - target) > scale * mpf(2) ** (-ctx.bits // 2):
            raise ArithmeticError("model j-invariant round-trip failed")


# --- torsion values and the Weber function --------------------------------


def _tau_k(D: int, ctx: PrecisionCtx) -> mpc:
    return quadforms.tau_of_form(quadforms.principal_form(Discriminant(D)), ctx).value


def _model_scale(D: int, ctx: PrecisionCtx) -> mpc:
    """lambda^-2 with x_model = lambda^-2 * pe_{Z_K}(z) for the curve's lattice."""
    tau = _tau_k(D, ctx)
    with ctx.workprec():
        inv = modfunc.lattice_invariants(tau, ctx, cross_check=False)
        if D == -4:
            return 1 / mpmath.sqrt(inv.g2 / 4)
        if D == -3:
            return 1 / mpmath.cbrt(inv.g3 / 4)
        return inv.g2 * inv.g3 / inv.delta


def torsion_x_reps(m: int):
    """Representatives of ((1/m)Z_K / Z_K minus 0) modulo +-1, as pairs (r1, r2)."""
    seen = set()
    out = []
    for r1 in range(m):
        for r2 in range(m):
            if (r1, r2) == (0, 0):
                continue
            neg = ((-r1) % m, (-r2) % m)
            key = min((r1, r2), neg)
            if key in seen:
                continue
            seen.add(key)
            out.append(key)
    return out


def torsion_x_values(model: CMModel, m: int, ctx: PrecisionCtx):
    """x-coordinates of the nonzero m-torsion points of the model."""
    if m < 2:
        raise ValueError("torsion index must be >= 2")
    D = model.D
    tau = _tau_k(D, ctx)
    with ctx.workprec():
        if m == 2:
            a, b = model.a_num(ctx), model.b_num(ctx)
            return mpmath.polyroots([1, 0, a, b], extraprec=ctx.bits // 4)
        scale = _model_scale(D, ctx)
        out = []
        for (r1, r2) in torsion_x_reps(m):
            z = (r1 * tau + r2) / m
            out.append(scale * modfunc.wp(z, tau, ctx))
        return out


def weber_value(model: CMModel, z, ctx: PrecisionCtx) -> mpc:
    """The Weber function of K at z: scaled pe (pe^2, pe^3 for D = -4, -3)."""
    tau = _tau_k(model.D, ctx)
    with ctx.workprec():
        inv = modfunc.lattice_invariants(tau, ctx, cross_check=False)
        p = modfunc.wp(z, tau, ctx)
        if model.D == -4:
            return inv.g2**2 / inv.delta * p**2
        if model.D == -3:
            return inv.g3 / inv.delta * p**3
        return inv.g2 * inv.g3 / inv.delta * p


# --- ray class field polynomials (h = 1) -----------------------------------


@dataclass(frozen=True)
class QuadIntPolyK:
    """Monic polynomial with coefficients u + v*tau_K, u and v in Q."""

    D: int
    coeffs: tuple  # tuple of (Fraction u, Fraction v), ascending, including leading

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, x, ctx: PrecisionCtx):
        tau = _tau_k(self.D, ctx)
        with ctx.workprec():
            acc = mpc(0)
            for (u, v) in reversed(self.coeffs):
                c = mpf(u.numerator) / u.denominator + tau * mpf(v.numerator) / v.denominator
                acc = acc * x + c
            return acc

    def coefficient_str(self, i: int) -> str:
        u, v = self.coeffs[i]
        return f"{u}" if v == 0 else f"{u} + {v}*tau"


def _orbit_reps_mod_units(units: ResidueUnits):
    """Representatives of (Z_K/m)^* modulo the image of Z_K^*."""
    K, m = units.K, units.m
    unit_elems = [(u % m, v % m) for (u, v) in K.unit_elements()]
    seen = set()
    reps = []
    for x in units.elements():
        orb = {( (K.mul(e, x)[0]) % m, (K.mul(e, x)[1]) % m ) for e in unit_elems}
        key = min(orb)
        if key in seen:
            continue
        seen.add(key)
        reps.append(key)
    return reps


def ray_class_poly(D, m: int, bits: int = 192, max_bits: int = MAX_BITS_DEFAULT) -> QuadIntPolyK:
    """Minimal polynomial over K = H of a Weber value of exact order m (h(D) = 1).

    The Galois orbit is the Weber function at alpha/m for alpha over
    (Z_K/m)^*/Z_K^*; coefficients are recognized in (1/den) Z[tau_K] with
    den | m^6 |D|^3 and certified by a doubled-precision re-evaluation.
    """
    D = D if isinstance(D, Discriminant) else Discriminant(D)
    if len(quadforms.enumerate_reduced_forms(D)) != 1:
        raise ValueError("ray_class_poly requires class number one")
    if m < 2:
        raise ValueError("modulus must be >= 2")
    units = ResidueUnits(D.D, m)
    reps = _orbit_reps_mod_units(units)

    bits_now = bits
    while bits_now <= max_bits:
        ctx = PrecisionCtx(bits_now)
        try:
            coeffs = _ray_poly_attempt(D.D, m, reps, ctx)
            # Stability certificate: the recognized exact coefficients must
            # reappear identically from a doubled-precision run.
            coeffs2 = _ray_poly_attempt(D.D, m, reps, PrecisionCtx(bits_now * 2))
        except RoundingUncertified:
            bits_now *= 2
            continue
        if coeffs != coeffs2:
            bits_now *= 2
            continue
        return QuadIntPolyK(D.D, coeffs)
    from .numerics import PrecisionExhausted

    raise PrecisionExhausted("precision-exhausted: ray class polynomial did not stabilize")


def _ray_poly_attempt(D: int, m: int, reps, ctx: PrecisionCtx):
    from .numerics import poly_from_roots

    model = cm_model(D, ctx)
    tau = _tau_k(D, ctx)
    K_t = 1 if D % 2 else 0  # omega = tau_K + t
    with ctx.workprec():
        roots = []
        for (u, v) in reps:
            z = (v * tau + (u + v * K_t)) / m
            roots.append(weber_value(model, z, ctx))
        poly = poly_from_roots(roots, ctx)
        im_tau = tau.imag
        re_tau = tau.real
        out = []
        for cpl in poly.coeffs:
            v = cpl.imag / im_tau
            u = cpl.real - v * re_tau
            out.append((_recognize_rational(u, ctx), _recognize_rational(v, ctx)))
        return tuple(out)


def _recognize_rational(x, ctx: PrecisionCtx) -> Fraction:
    """Best rational with denominator <= 2^(bits/3), certified within 2^(-bits/2).

    Model scaling puts powers of 2 (and of m, |D|) into the true
    denominators, so reconstruction runs by continued fractions rather
    than against a fixed denominator.
    """
    qmax = 1 << (ctx.bits // 3)
    scaled = Fraction(int(mpmath.nint(x * mpf(2) ** ctx.bits)), 2**ctx.bits)
    fr = scaled.limit_denominator(qmax)
    err = abs(x - mpf(fr.numerator) / fr.denominator)
    if err > mpf(2) ** (-(ctx.bits // 2)) * max(mpf(1), abs(x)):
        raise RoundingUncertified(err)
    return fr
