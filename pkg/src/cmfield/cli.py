"""Command-line front end.

Every subcommand emits a deterministic result envelope; with --json the
envelope is printed as JSON with all polynomial coefficients rendered as
decimal strings (never floats), so output round-trips losslessly.

Exit codes: 0 success, 2 invalid input, 3 precision exhaustion.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import mpmath

from . import __version__, hilbert, modfunc, quadforms, rayclass, shimura
from .cmcurve import QuadIntPolyK, division_poly, division_poly_specialized, ray_class_poly
from .numerics import IntPoly, PrecisionCtx, PrecisionExhausted
from .quadforms import Discriminant, QuadForm

DEFAULT_BITS_ENV = "CCF_DEFAULT_BITS"


class InputError(Exception):
    pass


def _parse_disc(s: str) -> Discriminant:
    """A discriminant, given as D or as a form a,b,c (validated and reduced)."""
    try:
        if "," in s:
            a, b, c = (int(x) for x in s.split(","))
            form = quadforms.reduce(QuadForm(a, b, c))
            return Discriminant(form.disc)
        return Discriminant(int(s))
    except (ValueError, TypeError) as e:
        raise InputError(f"bad discriminant {s!r}: {e}") from None


def _parse_complex(s: str):
    try:
        return mpmath.mpc(mpmath.mpmathify(s.replace("i", "j").replace(" ", "")))
    except (ValueError, TypeError):
        raise InputError(f"bad complex number {s!r}") from None


def _default_bits(args) -> int | None:
    if getattr(args, "bits", None):
        return args.bits
    env = os.environ.get(DEFAULT_BITS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"bad {DEFAULT_BITS_ENV}={env!r}")
    return None


def _poly_payload(poly) -> dict:
    if isinstance(poly, IntPoly):
        return {
            "type": "int",
            "degree": poly.degree,
            "coefficients": [str(c) for c in poly.coeffs],
            "pretty": str(poly),
        }
    if isinstance(poly, QuadIntPolyK):
        return {
            "type": "quadratic-integer",
            "degree": poly.degree,
            "coefficients": [
                {"u": str(u.numerator) + "/" + str(u.denominator), "v": str(v.numerator) + "/" + str(v.denominator)}
                for (u, v) in poly.coeffs
            ],
            "pretty": " , ".join(poly.coefficient_str(i) for i in range(poly.degree + 1)),
        }
    raise TypeError(f"unknown polynomial type {type(poly)}")


def _mpc_str(z, digits=30) -> str:
    return mpmath.nstr(mpmath.mpc(z), digits)


class Envelope:
    def __init__(self, command: str, inputs: dict):
        self.data = {
            "command": command,
            "inputs": inputs,
            "outputs": {},
            "precision_bits": None,
            "wall_time_s": 0.0,
            "version": __version__,
        }
        self._t0 = time.monotonic()

    def finish(self, args) -> int:
        self.data["wall_time_s"] = round(time.monotonic() - self._t0, 6)
        if args.json:
            print(json.dumps(self.data, indent=2, sort_keys=False))
        else:
            self._render_text()
        return 0

    def _render_text(self):
        out = self.data["outputs"]
        for key, val in out.items():
            if isinstance(val, dict) and "coefficients" in val:
                print(f"{key}: {val['pretty']}")
            elif isinstance(val, list):
                print(f"{key}:")
                for item in val:
                    print(f"  {item}")
            else:
                print(f"{key}: {val}")
        if self.data["precision_bits"]:
            print(f"precision: {self.data['precision_bits']} bits")
        print(f"time: {self.data['wall_time_s']} s")


def cmd_forms(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("forms", {"disc": D.D})
    forms = quadforms.enumerate_reduced_forms(D)
    env.data["outputs"] = {
        "forms": [f"({f.a},{f.b},{f.c})" for f in forms],
        "class_number": len(forms),
    }
    return env.finish(args)


def cmd_classgroup(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("classgroup", {"disc": D.D})
    group, gens, _ = quadforms.class_group(D)
    env.data["outputs"] = {
        "invariant_factors": list(group.invariant_factors),
        "order": group.order,
        "generators": [str(g) for g in gens],
    }
    return env.finish(args)


def cmd_rayclass(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("rayclass", {"disc": D.D, "mod": args.mod})
    rc = rayclass.ray_class_group(D, args.mod)
    env.data["outputs"] = {
        "invariant_factors": list(rc.invariant_factors),
        "order": rc.order,
        "residue_unit_order": rc.units.order,
    }
    return env.finish(args)


def _parse_subgroup(s: str, ngens: int):
    if not s:
        return []
    vecs = []
    for part in s.split(";"):
        vec = [int(x) for x in part.split(",")]
        if len(vec) != ngens:
            raise InputError(f"subgroup vector {part!r} must have {ngens} entries")
        vecs.append(vec)
    return vecs


def cmd_conductor(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("conductor", {"disc": D.D, "mod": args.mod, "subgroup": args.subgroup})
    rc = rayclass.ray_class_group(D, args.mod)
    try:
        subgroup = _parse_subgroup(args.subgroup, rc.group.ngens)
    except ValueError as e:
        raise InputError(str(e)) from None
    cond = rayclass.conductor_of(subgroup, rc)
    fdp = rayclass.discriminant_by_characters(subgroup, rc)
    env.data["outputs"] = {
        "conductor": cond,
        "relative_discriminant_exponents": {str(p): e for p, e in sorted(fdp.items())},
        "quotient_order": rayclass.quotient_group(rc, subgroup).order,
    }
    return env.finish(args)


EVAL_FUNCTIONS = ("eta", "f", "f1", "f2", "j", "g2", "g3", "gamma2", "gamma3", "wp")


def cmd_eval(args) -> int:
    bits = _default_bits(args) or 192
    ctx = PrecisionCtx(bits)
    if args.form:
        form = quadforms.reduce(QuadForm(*(int(x) for x in args.form.split(","))))
        tau = quadforms.tau_of_form(form, ctx).value
        tau_in = args.form
    elif args.tau:
        tau = _parse_complex(args.tau)
        if not tau.imag > 0:
            raise InputError("tau must lie in the upper half plane")
        tau_in = args.tau
    else:
        raise InputError("eval needs --tau or --form")
    env = Envelope("eval", {"fn": args.fn, "tau": tau_in, "bits": bits, "z": args.z})
    with ctx.workprec():
        if args.fn == "eta":
            val = modfunc.eta(tau, ctx)
        elif args.fn == "f":
            val = modfunc.weber_f(tau, ctx)
        elif args.fn == "f1":
            val = modfunc.weber_f1(tau, ctx)
        elif args.fn == "f2":
            val = modfunc.weber_f2(tau, ctx)
        elif args.fn == "j":
            val = modfunc.j_from_f2(tau, ctx)
        elif args.fn in ("g2", "g3"):
            inv = modfunc.lattice_invariants(tau, ctx)
            val = inv.g2 if args.fn == "g2" else inv.g3
        elif args.fn == "gamma2":
            val = modfunc.gamma2(tau, ctx)
        elif args.fn == "gamma3":
            val = modfunc.gamma3(tau, ctx)
        elif args.fn == "wp":
            if not args.z:
                raise InputError("wp needs --z")
            val = modfunc.wp(_parse_complex(args.z), tau, ctx)
        else:
            raise InputError(f"unknown function {args.fn!r}")
    env.data["outputs"] = {"value": _mpc_str(val, max(10, bits // 4))}
    env.data["precision_bits"] = bits
    return env.finish(args)


def cmd_hilbert(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("hilbert", {"disc": D.D, "bits": getattr(args, "bits", None)})
    cp = hilbert.hilbert_class_poly(D, bits=_default_bits(args))
    env.data["outputs"] = {"polynomial": _poly_payload(cp.poly), "class_number": cp.poly.degree}
    env.data["precision_bits"] = cp.bits_used
    return env.finish(args)


def cmd_verify(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("verify", {"disc": D.D, "primes": args.primes})
    cp = hilbert.hilbert_class_poly(D)
    rows = []
    agree = True
    for p in hilbert.first_split_primes(D.D, args.primes, cp.poly):
        verdict = hilbert.split_check(cp, p)
        sol = hilbert.cornacchia(p, D)
        match = (verdict == "splits-completely") == (sol is not None)
        agree = agree and match
        rows.append(
            {
                "p": p,
                "split_check": verdict,
                "cornacchia": f"{sol[0]}^2+{-D.D}*{sol[1]}^2" if sol else None,
                "agree": match,
            }
        )
    env.data["outputs"] = {"table": rows, "all_agree": agree}
    env.data["precision_bits"] = cp.bits_used
    return env.finish(args)


def cmd_divpoly(args) -> int:
    env = Envelope("divpoly", {"m": args.m, "spec": args.spec})
    if args.spec:
        a, b = (int(x) for x in args.spec.split(","))
        T = division_poly_specialized(args.m, a, b)
        env.data["outputs"] = {
            "T": {
                "type": "int",
                "degree": len(T) - 1,
                "coefficients": [str(c) for c in T],
                "pretty": str(IntPoly(tuple(T))),
            },
            "parity": "even" if args.m % 2 == 0 else "odd",
        }
    else:
        dp = division_poly(args.m)
        terms = []
        for i in range(dp.degree, -1, -1):
            c = str(dp.T[i])
            if c == "0":
                continue
            mono = f"X^{i}" if i > 1 else ("X" if i == 1 else "")
            body = c if c in ("1", "-1") and not mono else (f"({c})" if any(s in c for s in "+- ") else c)
            if c == "1" and mono:
                terms.append(mono)
            elif c == "-1" and mono:
                terms.append(f"-{mono}")
            else:
                terms.append(f"{body}*{mono}" if mono else body)
        env.data["outputs"] = {
            "T": {
                "type": "Z[a,b]",
                "degree": dp.degree,
                "coefficients": [str(c) for c in dp.T],
                "pretty": " + ".join(terms).replace("+ -", "- "),
            },
            "parity": "even" if dp.even else "odd",
        }
    return env.finish(args)


def cmd_raypoly(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("raypoly", {"disc": D.D, "mod": args.mod, "bits": getattr(args, "bits", None)})
    bits = _default_bits(args) or 192
    rp = ray_class_poly(D, args.mod, bits=bits)
    env.data["outputs"] = {"polynomial": _poly_payload(rp), "degree": rp.degree}
    env.data["precision_bits"] = bits
    return env.finish(args)


def _parse_fn_symbol(s: str):
    if s.startswith("etaq:"):
        primes = tuple(int(p) for p in s.split(":", 1)[1].split(","))
        return shimura.eta_quotient_symbol(primes)
    if s in shimura.WEBER_LEVELS:
        return shimura.weber_symbol(s)
    raise InputError(f"unknown invariant function {s!r}")


def cmd_invariant(args) -> int:
    D = _parse_disc(args.disc)
    env = Envelope("invariant", {"fn": args.fn, "disc": D.D, "check_only": args.check_only})
    base = _parse_fn_symbol(args.fn)
    ok, report = shimura.is_class_invariant(base, D, search_modifications=True)
    outputs = {
        "invariant": ok,
        "symbol": str(report.symbol),
        "level": report.level,
        "residue_unit_group_order": report.unit_group_order,
        "stabilizer_generators_checked": report.n_generators,
        "orbit_size": report.orbit_size,
    }
    if ok and not args.check_only:
        poly, bits = shimura.class_invariant_poly(report.symbol, D)
        outputs["polynomial"] = _poly_payload(poly)
        env.data["precision_bits"] = bits
        hil = hilbert.hilbert_class_poly(D)
        size_inv = max(abs(c) for c in poly.coeffs) if isinstance(poly, IntPoly) else None
        size_hil = max(abs(c) for c in hil.poly.coeffs)
        if size_inv:
            outputs["coefficient_size_vs_hilbert"] = f"{size_inv} vs {size_hil}"
    env.data["outputs"] = outputs
    return env.finish(args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cmfield",
        description="Class fields of imaginary quadratic fields by complex multiplication.",
    )
    ap.add_argument("--threads", type=int, default=0, help="work-pool size hint (0 = all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, disc=True, mod=False, bits=False):
        p.add_argument("--json", action="store_true", help="emit a JSON result envelope")
        if disc:
            p.add_argument("--disc", required=True, help="discriminant D < 0, or a form a,b,c")
        if mod:
            p.add_argument("--mod", type=int, required=True, help="modulus m >= 1")
        if bits:
            p.add_argument("--bits", type=int, help="starting binary precision")

    p = sub.add_parser("forms", help="reduced forms and the class number")
    common(p)
    p.set_defaults(fn_impl=cmd_forms)

    p = sub.add_parser("classgroup", help="class group structure")
    common(p)
    p.set_defaults(fn_impl=cmd_classgroup)

    p = sub.add_parser("rayclass", help="ray class group Cl_m")
    common(p, mod=True)
    p.set_defaults(fn_impl=cmd_rayclass)

    p = sub.add_parser("conductor", help="conductor of a congruence subgroup of Cl_m")
    common(p, mod=True)
    p.add_argument("--subgroup", default="", help="generator exponent vectors, e.g. '1,0;0,2'")
    p.set_defaults(fn_impl=cmd_conductor)

    p = sub.add_parser("eval", help="evaluate a modular function")
    common(p, disc=False, bits=True)
    p.add_argument("--fn", required=True, choices=EVAL_FUNCTIONS)
    p.add_argument("--tau", help="point in the upper half plane, e.g. '0.1+1.2i'")
    p.add_argument("--form", help="reduced form a,b,c standing for its tau")
    p.add_argument("--z", help="argument for wp")
    p.set_defaults(fn_impl=cmd_eval)

    p = sub.add_parser("hilbert", help="Hilbert class polynomial")
    common(p, bits=True)
    p.set_defaults(fn_impl=cmd_hilbert)

    p = sub.add_parser("verify", help="splitting vs Cornacchia cross-check table")
    common(p)
    p.add_argument("--primes", type=int, default=20, help="how many split primes to test")
    p.set_defaults(fn_impl=cmd_verify)

    p = sub.add_parser("divpoly", help="division polynomial T_m")
    common(p, disc=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--spec", help="specialize at integers a,b")
    p.set_defaults(fn_impl=cmd_divpoly)

    p = sub.add_parser("raypoly", help="ray class field polynomial (h = 1)")
    common(p, mod=True, bits=True)
    p.set_defaults(fn_impl=cmd_raypoly)

    p = sub.add_parser("invariant", help="class invariant detection and polynomial")
    common(p)
    p.add_argument("--fn", required=True, help="f | f1 | f2 | gamma2 | gamma3 | j | etaq:p[,q]")
    p.add_argument("--check-only", action="store_true", help="stop after the invariance verdict")
    p.set_defaults(fn_impl=cmd_invariant)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn_impl(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PrecisionExhausted as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
