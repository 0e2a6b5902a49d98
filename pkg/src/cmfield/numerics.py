"""Arbitrary-precision complex arithmetic and certified integer rounding.

Everything analytic in this package flows through a PrecisionCtx: a fixed
binary working precision under which mpmath does the actual arithmetic.
Polynomials with exact integer coefficients (IntPoly) are the certified
outputs; ComplexPoly is the floating intermediate.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf

MIN_BITS = 64
MAX_BITS_DEFAULT = 2**20
DEFAULT_TOL = 0.25


class PrecisionExhausted(Exception):
    """Raised when the doubling retry loop hits its precision cap ("precision-exhausted")."""


class RoundingUncertified(Exception):
    """A coefficient sat too far from an integer to round safely ("rounding-uncertified").

    Carries the worst offending distance so callers can decide how much
    precision to add before retrying.
    """

    def __init__(self, worst_distance):
        self.worst_distance = worst_distance
        super().__init__(f"rounding-uncertified: worst coefficient distance {worst_distance}")


@dataclass(frozen=True)
class PrecisionCtx:
    """Shared binary working precision (bits of mantissa, >= 64).

    Relative error per arithmetic step under one context is at most
    2**(3-bits); this is a documented model, certified a posteriori by
    round_to_int_poly rather than tracked per operation.
    """

    bits: int = 192

    def __post_init__(self):
        if self.bits < MIN_BITS:
            raise ValueError(f"precision must be at least {MIN_BITS} bits, got {self.bits}")

    def workprec(self):
        return mpmath.workprec(self.bits)

    def double(self) -> "PrecisionCtx":
        return PrecisionCtx(self.bits * 2)

    # Constructors: values are created under this context's precision.
    def complex(self, re, im=0) -> mpc:
        with self.workprec():
            z = mpc(re, im)
        if not mpmath.isfinite(z):
            raise ValueError("non-finite complex value")
        return z

    def real(self, x) -> mpf:
        with self.workprec():
            v = mpf(x)
        if not mpmath.isfinite(v):
            raise ValueError("non-finite real value")
        return v

    def pi(self) -> mpf:
        with self.workprec():
            return +mpmath.pi

    def exp(self, z):
        with self.workprec():
            return mpmath.exp(z)

    def sqrt(self, z):
        with self.workprec():
            return mpmath.sqrt(z)

    def log(self, z):
        with self.workprec():
            return mpmath.log(z)

    def eps(self) -> mpf:
        """2**(-bits), the context's unit roundoff scale."""
        with self.workprec():
            return mpf(2) ** (-self.bits)


@dataclass(frozen=True)
class IntPoly:
    """Polynomial with exact integer coefficients, degree-ascending."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(int(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        if self.coeffs == (0,):
            return -1
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPoly":
        if len(self.coeffs) == 1:
            return IntPoly((0,))
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def monic(self) -> bool:
        return self.coeffs[-1] == 1

    def __str__(self):
        if self.coeffs == (0,):
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                term = f"{abs(c)}"
            else:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                term = f"{mag}X" + (f"^{i}" if i > 1 else "")
            parts.append(("- " if c < 0 else "+ ") + term)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


class ComplexPoly:
    """Polynomial with arbitrary-precision complex coefficients, degree-ascending."""

    def __init__(self, coeffs, ctx: PrecisionCtx):
        self.coeffs = list(coeffs)
        self.ctx = ctx
        if not self.coeffs:
            raise ValueError("empty coefficient list")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        with self.ctx.workprec():
            acc = mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * z + c
            return acc


def _mul_coeffs(a, b):
    n, m = len(a), len(b)
    out = [mpc(0)] * (n + m - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def poly_from_roots(roots, ctx: PrecisionCtx) -> ComplexPoly:
    """Expand the monic polynomial with the given roots.

    Uses a balanced subproduct tree so coefficient error grows like
    O(log n) multiplications deep rather than O(n).
    """
    roots = list(roots)
    if not roots:
        raise ValueError("poly_from_roots requires at least one root")
    with ctx.workprec():
        level = [[-mpc(r), mpc(1)] for r in roots]
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(_mul_coeffs(level[i], level[i + 1]))
            if len(level) % 2 == 1:
                nxt.append(level[-1])
            level = nxt
        coeffs = level[0]
    for c in coeffs:
        if not mpmath.isfinite(c):
            raise PrecisionExhausted("precision-exhausted: overflow while expanding product")
    return ComplexPoly(coeffs, ctx)


def round_to_int_poly(p: ComplexPoly, tol=DEFAULT_TOL) -> IntPoly:
    """Round a ComplexPoly to exact integers, certifying every coefficient.

    Each coefficient must be within tol (< 0.5) of an integer, in both the
    real distance and the imaginary part; otherwise RoundingUncertified is
    raised with the worst distance seen and the caller should raise
    precision and retry.
    """
    if not tol < 0.5:
        raise ValueError("tolerance must be < 0.5 for unambiguous rounding")
    worst = mpf(0)
    out = []
    with p.ctx.workprec():
        for c in p.coeffs:
            n = int(mpmath.nint(c.real))
            dist = max(abs(c.real - n), abs(c.imag))
            if dist > worst:
                worst = dist
            out.append(n)
    if worst >= tol:
        raise RoundingUncertified(worst)
    return IntPoly(tuple(out))


def retry_with_doubling(compute, start_bits, max_bits=MAX_BITS_DEFAULT):
    """Run compute(ctx) with doubling precision until it stops raising RoundingUncertified.

    compute takes a PrecisionCtx and either returns a result or raises
    RoundingUncertified. Raises PrecisionExhausted past max_bits.
    """
    bits = max(int(start_bits), MIN_BITS)
    while bits <= max_bits:
        try:
            return compute(PrecisionCtx(bits)), bits
        except RoundingUncertified:
            bits *= 2
    raise PrecisionExhausted(f"precision-exhausted: gave up beyond {max_bits} bits")
