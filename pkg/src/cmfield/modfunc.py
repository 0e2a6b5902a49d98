"""Arbitrary-precision evaluation of the classical modular functions.

Dedekind eta via its lacunary pentagonal-number series, the Weber
functions f, f1, f2, the j-invariant through f2, Eisenstein series E4 and
E6 with the lattice invariants g2, g3, Delta, and the Weierstrass pe
function by its q-series. All values are mpmath complex numbers computed
under an explicit PrecisionCtx with 32 guard bits.

Branch discipline: every fractional power of q is exp(2*pi*i*tau/n),
fixed by tau itself, never by root extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf

from .numerics import PrecisionCtx

GUARD = 32
# Stop q-series only after this many consecutive below-threshold terms;
# lacunary gaps make single-term tests unsafe.
RUN_LENGTH = 8


class PoleError(ArithmeticError):
    """Evaluation point too close to a lattice point."""


@dataclass(frozen=True)
class QNome:
    """tau in the upper half plane with its nome q = exp(2 pi i tau)."""

    tau: mpc
    q: mpc
    ctx: PrecisionCtx

    @classmethod
    def from_tau(cls, tau, ctx: PrecisionCtx) -> "QNome":
        tau = mpc(tau)
        if not tau.imag > 0:
            raise ValueError("tau must lie in the upper half plane")
        with mpmath.workprec(ctx.bits + GUARD):
            q = mpmath.exp(2j * mpmath.pi * tau)
        return cls(tau, q, ctx)

    def root(self, n: int) -> mpc:
        """q^(1/n) with the branch fixed by tau: exp(2 pi i tau / n)."""
        with mpmath.workprec(self.ctx.bits + GUARD):
            return mpmath.exp(2j * mpmath.pi * self.tau / n)


@dataclass(frozen=True)
class LatticeInvariants:
    g2: mpc
    g3: mpc
    delta: mpc
    j: mpc


def _threshold(ctx):
    return mpf(2) ** (-(ctx.bits + GUARD))


_ETA_CACHE = {}
_ETA_CACHE_MAX = 4096


def eta(tau, ctx: PrecisionCtx) -> mpc:
    """Dedekind eta: q^(1/24) * sum over n of (-1)^n q^(n(3n-1)/2).

    Pentagonal exponents are walked incrementally (each term costs two
    multiplications), so the series stays usable even when Im(tau) is
    pushed down by a Moebius transformation. Values are memoized per
    (tau, precision).
    """
    key = (mpc(tau)._mpc_, ctx.bits)
    hit = _ETA_CACHE.get(key)
    if hit is not None:
        return hit
    nome = QNome.from_tau(tau, ctx)
    with mpmath.workprec(ctx.bits + GUARD):
        q = nome.q
        thresh = _threshold(ctx)
        acc = mpc(1)  # n = 0 term
        below = 0
        n = 1
        q3 = q**3
        qp = q          # q^(n(3n-1)/2), starts at n = 1
        qm = q * q      # q^(n(3n+1)/2), starts at n = 1
        q3n = q3        # q^(3n)
        while below < RUN_LENGTH:
            sign = -1 if n & 1 else 1
            term = sign * (qp + qm)
            acc += term
            size = max(abs(qp), abs(qm))
            below = below + 1 if size < thresh else 0
            # pent(n+1) = pent(n) + 3n+1; pent(-(n+1)) = pent(-n) + 3n+2
            qp = qp * q3n * q
            qm = qm * q3n * q * q
            q3n *= q3
            n += 1
        val = nome.root(24) * acc
    if len(_ETA_CACHE) >= _ETA_CACHE_MAX:
        _ETA_CACHE.clear()
    _ETA_CACHE[key] = val
    return val


def eta_product_oracle(tau, ctx: PrecisionCtx) -> mpc:
    """Independent eta via the product q^(1/24) * prod (1 - q^n), term by term."""
    nome = QNome.from_tau(tau, ctx)
    with mpmath.workprec(ctx.bits + GUARD):
        q = nome.q
        thresh = _threshold(ctx)
        acc = mpc(1)
        qn = mpc(1)
        below = 0
        while below < RUN_LENGTH:
            qn *= q
            acc *= 1 - qn
            below = below + 1 if abs(qn) < thresh else 0
        return nome.root(24) * acc


def weber_f2(tau, ctx: PrecisionCtx) -> mpc:
    """sqrt(2) * eta(2 tau) / eta(tau)."""
    with mpmath.workprec(ctx.bits + GUARD):
        return mpmath.sqrt(2) * eta(2 * mpc(tau), ctx) / eta(tau, ctx)


def weber_f1(tau, ctx: PrecisionCtx) -> mpc:
    """eta(tau/2) / eta(tau)."""
    with mpmath.workprec(ctx.bits + GUARD):
        return eta(mpc(tau) / 2, ctx) / eta(tau, ctx)


def weber_f(tau, ctx: PrecisionCtx) -> mpc:
    """zeta48^-1 * eta((tau+1)/2) / eta(tau)."""
    with mpmath.workprec(ctx.bits + GUARD):
        z48 = mpmath.exp(-1j * mpmath.pi / 24)
        return z48 * eta((mpc(tau) + 1) / 2, ctx) / eta(tau, ctx)


def j_from_f2(tau, ctx: PrecisionCtx) -> mpc:
    """j = (f2^24 + 16)^3 / f2^24, the numerically preferred route to j."""
    with mpmath.workprec(ctx.bits + GUARD):
        w = weber_f2(tau, ctx) ** 24
        if w == 0:
            raise ZeroDivisionError("f2 vanished; eta is nonvanishing on H, so tau is invalid")
        return (w + 16) ** 3 / w


def _eisenstein(tau, ctx: PrecisionCtx, power: int, factor: int):
    """1 + factor * sum n^power q^n / (1 - q^n), the normalized Eisenstein shape."""
    nome = QNome.from_tau(tau, ctx)
    with mpmath.workprec(ctx.bits + GUARD):
        q = nome.q
        thresh = _threshold(ctx)
        acc = mpc(0)
        qn = mpc(1)
        below = 0
        n = 1
        while below < RUN_LENGTH:
            qn *= q
            t = mpf(n) ** power * qn / (1 - qn)
            acc += t
            below = below + 1 if abs(t) < thresh else 0
            n += 1
        return 1 + factor * acc


def eisenstein_e4(tau, ctx: PrecisionCtx) -> mpc:
    return _eisenstein(tau, ctx, 3, 240)


def eisenstein_e6(tau, ctx: PrecisionCtx) -> mpc:
    return _eisenstein(tau, ctx, 5, -504)


def gamma2(tau, ctx: PrecisionCtx) -> mpc:
    """The cube root E4/eta^8 of j that is real on the imaginary axis."""
    with mpmath.workprec(ctx.bits + GUARD):
        return eisenstein_e4(tau, ctx) / eta(tau, ctx) ** 8


def gamma3(tau, ctx: PrecisionCtx) -> mpc:
    """The square root E6/eta^12 of j - 1728."""
    with mpmath.workprec(ctx.bits + GUARD):
        return eisenstein_e6(tau, ctx) / eta(tau, ctx) ** 12


def lattice_invariants(tau, ctx: PrecisionCtx, cross_check: bool = True) -> LatticeInvariants:
    """g2, g3, Delta and j for the lattice [tau, 1].

    The classical normalizations g2 = (2 pi)^4 E4 / 12 and
    g3 = (2 pi)^6 E6 / 216 are not taken on trust: Delta = g2^3 - 27 g3^2
    is compared against (2 pi)^12 eta^24 unless cross_check is disabled.
    """
    with mpmath.workprec(ctx.bits + GUARD):
        twopi = 2 * mpmath.pi
        e4 = eisenstein_e4(tau, ctx)
        e6 = eisenstein_e6(tau, ctx)
        g2 = twopi**4 * e4 / 12
        g3 = twopi**6 * e6 / 216
        delta = g2**3 - 27 * g3**2
        if cross_check:
            delta_eta = twopi**12 * eta(tau, ctx) ** 24
            if abs(delta - delta_eta) > abs(delta_eta) * mpf(2) ** (-ctx.bits // 2):
                raise ArithmeticError("Delta cross-check against eta^24 failed")
        j = 1728 * g2**3 / delta
        return LatticeInvariants(g2, g3, delta, j)


def j_qexp_check(tau, ctx: PrecisionCtx) -> mpf:
    """|j(tau) - (1/q + 744 + 196884 q)|, for test harnesses (needs Im tau >= 2)."""
    nome = QNome.from_tau(tau, ctx)
    if not nome.tau.imag >= 2:
        raise ValueError("q-expansion check wants Im(tau) >= 2")
    with mpmath.workprec(ctx.bits + GUARD):
        q = nome.q
        approx = 1 / q + 744 + 196884 * q
        return abs(j_from_f2(tau, ctx) - approx)


def _reduce_mod_lattice(z, tau):
    """Translate z by the lattice [tau, 1] into the centred fundamental cell."""
    n = mpmath.nint(z.imag / tau.imag)
    z = z - n * tau
    k = mpmath.nint(z.real)
    return z - k


def wp_and_prime(z, tau, ctx: PrecisionCtx):
    """Weierstrass pe and pe' for the lattice [tau, 1], via the u = e^(2 pi i z) series."""
    tau = mpc(tau)
    z = mpc(z)
    if not tau.imag > 0:
        raise ValueError("tau must lie in the upper half plane")
    with mpmath.workprec(ctx.bits + GUARD):
        z = _reduce_mod_lattice(z, tau)
        if abs(z) < mpf(2) ** (-ctx.bits // 2):
            raise PoleError("pe pole: z lies on the lattice")
        twopii = 2j * mpmath.pi
        q = mpmath.exp(twopii * tau)
        u = mpmath.exp(twopii * z)
        thresh = _threshold(ctx)
        p_acc = mpf(1) / 12 + u / (1 - u) ** 2
        dp_acc = u * (1 + u) / (1 - u) ** 3
        qn = mpc(1)
        below = 0
        while below < RUN_LENGTH:
            qn *= q
            a = qn * u
            b = qn / u
            tp = a / (1 - a) ** 2 + b / (1 - b) ** 2 - 2 * qn / (1 - qn) ** 2
            td = a * (1 + a) / (1 - a) ** 3 - b * (1 + b) / (1 - b) ** 3
            p_acc += tp
            dp_acc += td
            scale = max(mpf(1), abs(p_acc))
            below = below + 1 if max(abs(tp), abs(td)) < thresh * scale else 0
        return twopii**2 * p_acc, twopii**3 * dp_acc


def wp(z, tau, ctx: PrecisionCtx) -> mpc:
    return wp_and_prime(z, tau, ctx)[0]


def eta_quotient(tau, primes, ctx: PrecisionCtx) -> mpc:
    """eta(p tau)/eta(tau) for {p}, or eta(p tau) eta(q tau)/(eta(pq tau) eta(tau)) for {p, q}."""
    ps = sorted(primes)
    if len(set(ps)) != len(ps):
        raise ValueError("eta quotient wants distinct primes")
    tau = mpc(tau)
    with mpmath.workprec(ctx.bits + GUARD):
        if len(ps) == 1:
            (p,) = ps
            return eta(p * tau, ctx) / eta(tau, ctx)
        if len(ps) == 2:
            p, q = ps
            return (eta(p * tau, ctx) * eta(q * tau, ctx)) / (eta(p * q * tau, ctx) * eta(tau, ctx))
    raise ValueError("eta quotient takes one or two primes")


def eta_quotient_level(primes) -> int:
    ps = sorted(set(primes))
    level = 24
    for p in ps:
        level *= p
    return level


def fricke_value(r1: int, r2: int, m: int, tau, ctx: PrecisionCtx) -> mpc:
    """The Fricke function F_u(tau) for u = (r1/m, r2/m), via the weight-0 pe scaling."""
    if (r1 % m, r2 % m) == (0, 0):
        raise ValueError("Fricke index must be a nonzero m-torsion point")
    tau = mpc(tau)
    with mpmath.workprec(ctx.bits + GUARD):
        inv = lattice_invariants(tau, ctx, cross_check=False)
        z = (r1 * tau + r2) / m
        return inv.g2 * inv.g3 / inv.delta * wp(z, tau, ctx)
