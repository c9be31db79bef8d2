"""Command-line front end.

Exit codes: 0 all checks passed, 2 usage error, 3 nonzero identity or
failed check, 4 undefined series product, 5 unreadable or malformed JSON,
6 invalid or non-symmetrizable Cartan matrix, 7 unknown or invalid family,
8 other bad input (indices, parameters).  Indices are 0-based.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import kernel
from .biseries import DEFAULT_RHO, UndefinedProduct
from .cartan import CartanError, NotSymmetrizable, load_cartan, symmetrize, validate_gcm
from .scalarq import QScalar
from .solutions import (
    DEFAULT_WINDOW, KINDS, FamilyError, basis_P, basis_Q, check_equation_c, check_system1,
    family_from_descriptor, phi_psi, taylor_solution, check_pair,
)
from .verifier import (
    IdentityError, IdentityInstance, numeric_oracle, hypothesis_check, pointwise,
    pointwise_prefactored, pointwise_serre, verify,
)

EXIT_OK, EXIT_USAGE, EXIT_NONZERO, EXIT_UNDEFINED = 0, 2, 3, 4
EXIT_BAD_JSON, EXIT_BAD_CARTAN, EXIT_BAD_FAMILY, EXIT_BAD_INPUT = 5, 6, 7, 8


class BadInput(Exception):
    code = EXIT_BAD_INPUT


class BadJSON(BadInput):
    code = EXIT_BAD_JSON


def _add_common(p):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--workers", type=int, default=1, help="worker processes for the term sum")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="series truncation window W")
    p.add_argument("--rho", default=str(DEFAULT_RHO), help="|q| used to certify convergence")
    p.add_argument("--oracle", type=int, default=0, metavar="TRIALS",
                   help="cross-check exact verdicts at random rational points")
    p.add_argument("--seed", type=int, default=0)


def _add_cartan(p, required=True):
    p.add_argument("--cartan", required=required, help='JSON file {"a": [[...], ...]}')
    p.add_argument("--i", type=int, default=0)
    p.add_argument("--j", type=int, default=1)


def _add_family(p):
    p.add_argument("--family", help=f"family kind: {', '.join(KINDS)}")
    p.add_argument("--family-file", help="family descriptor JSON")
    p.add_argument("--n", type=int, help="basis index")
    p.add_argument("--n-off", type=int, help="off-diagonal basis index (phi-psi)")
    p.add_argument("--which", choices=("phi", "psi"))
    p.add_argument("--eps", type=int, choices=(1, -1))
    p.add_argument("--coeffs", help='general-offdiag modes, e.g. --coeffs="-3:1,-2:q+1"')
    p.add_argument("--C", dest="delta_c", help="general-offdiag delta coefficient")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qserre", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify an identity")
    vs = v.add_subparsers(dest="identity", required=True)
    for name in ("lemma2", "jing"):
        p = vs.add_parser(name)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--t-power", type=int, default=1, help="t = q^T")
        if name == "jing":
            p.add_argument("--literal", action="store_true", help="use the opposite-sign last factor (z/w - t^m)")
        _add_common(p)
    p = vs.add_parser("eq5")
    _add_cartan(p, required=False)
    for flag in ("--a-ij", "--b-ii", "--b-ij", "--d-i"):
        p.add_argument(flag, type=int)
    _add_common(p)
    for name in ("serre", "prefactored", "system1", "hypothesis"):
        p = vs.add_parser(name)
        _add_cartan(p)
        _add_family(p)
        if name == "hypothesis":
            p.add_argument("--variant", choices=("constr1", "constr2"), default="constr1")
        _add_common(p)

    b = sub.add_parser("basis", help="solution bases of the single equation")
    bs = b.add_subparsers(dest="action", required=True)
    p = bs.add_parser("list")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p = bs.add_parser("check")
    p.add_argument("--family", required=True, choices=("P", "Q", "phi", "psi", "taylor"))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--c-power", type=int, default=-1, help="c = q^BETA")
    p.add_argument("--n-ij", type=int, default=0)
    p.add_argument("--n-ji", type=int, default=0)
    p.add_argument("--d-i", type=int, default=1)
    p.add_argument("--d-j", type=int, default=1)
    _add_common(p)

    c = sub.add_parser("cartan", help="Cartan matrix utilities")
    cs = c.add_subparsers(dest="action", required=True)
    for name in ("validate", "symmetrize"):
        p = cs.add_parser(name)
        p.add_argument("--cartan", required=True)
        p.add_argument("--format", choices=("text", "json"), default="text")
    return ap


# --- helpers ----------------------------------------------------------------------------

def _rho(args) -> Fraction:
    try:
        rho = Fraction(args.rho)
    except (ValueError, ZeroDivisionError):
        raise BadInput(f"bad --rho {args.rho!r}") from None
    if not 0 < rho < 1:
        raise BadInput("--rho must lie in (0, 1)")
    return rho


def _cartan(args):
    try:
        return load_cartan(args.cartan)
    except FileNotFoundError:
        raise BadJSON(f"cannot read {args.cartan}") from None
    except json.JSONDecodeError as exc:
        raise BadJSON(f"malformed JSON in {args.cartan}: {exc}") from None


def _descriptor(args) -> dict:
    if args.family_file:
        try:
            with open(args.family_file) as fh:
                return json.load(fh)
        except FileNotFoundError:
            raise BadJSON(f"cannot read {args.family_file}") from None
        except json.JSONDecodeError as exc:
            raise BadJSON(f"malformed JSON in {args.family_file}: {exc}") from None
    if not args.family:
        raise BadInput("give --family or --family-file")
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.n_off is not None:
        params["n_off"] = args.n_off
    if args.which:
        params["which"] = args.which
    if args.eps is not None:
        params["eps"] = args.eps
    if args.coeffs:
        modes = {}
        for item in args.coeffs.split(","):
            k, _, val = item.partition(":")
            try:
                modes[str(int(k))] = val.strip() or "1"
            except ValueError:
                raise BadInput(f"bad --coeffs entry {item!r}") from None
        params["coeffs"] = modes
    if args.delta_c:
        params["C"] = args.delta_c
    return {"kind": args.family, "params": params}


def _family(args, cartan):
    desc = _descriptor(args)
    return family_from_descriptor(cartan, desc, args.window), desc


def _check_indices(args, cartan):
    r = cartan.rank
    if not (0 <= args.i < r and 0 <= args.j < r):
        raise BadInput(f"indices ({args.i},{args.j}) out of range for rank {r} (0-based)")


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if v is not None and k != "format"}
    cfg["kernel"] = kernel.backend()
    return cfg


def _emit(args, payload: dict, lines: list) -> None:
    if getattr(args, "format", "text") == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _report_lines(rep) -> list:
    lines = [f"{rep.identity}: {rep.result} ({rep.mode}, {rep.terms} terms, {rep.millis} ms)"]
    if rep.window:
        lines.append(f"  verified on truncation window W={rep.window['W']}; certified box radius "
                     f"{rep.window['box_radius']} (exact on every monomial with levels.e < threshold)")
    if rep.witness:
        lines.append(f"  witness: {rep.witness['coefficient']} at {rep.witness['monomial']}")
    for note in rep.notes:
        lines.append(f"  note: {note}")
    return lines


# --- commands ----------------------------------------------------------------------------------

def _oracle_target(inst, shape):
    if shape.name in ("lemma2", "jing", "eq5"):
        return pointwise(shape)
    if shape.name == "serre":
        return pointwise_serre(inst.family, inst.i, inst.j)
    return pointwise_prefactored(inst.family, inst.i, inst.j)


def _run_identity(args, inst) -> int:
    shape = inst.shape()
    rep = verify(inst, workers=max(1, args.workers))
    payload = {"config": _config(args), "report": rep.to_json()}
    lines = _report_lines(rep)
    status = {"zero": EXIT_OK, "nonzero": EXIT_NONZERO, "undefined": EXIT_UNDEFINED}[rep.result]
    if args.oracle and rep.mode == "exact":
        fn, nv = _oracle_target(inst, shape)
        agree = numeric_oracle(fn, args.oracle, nvars=nv, seed=args.seed)
        payload["oracle"] = {"trials": args.oracle, "all_zero": agree}
        lines.append(f"  numeric oracle ({args.oracle} trials): {'zero' if agree else 'nonzero'}")
        if agree != (rep.result == "zero"):
            lines.append("  ORACLE DISAGREES WITH EXACT VERDICT")
            status = EXIT_NONZERO
    _emit(args, payload, lines)
    return status


def cmd_verify(args) -> int:
    ident = args.identity
    if ident in ("lemma2", "jing"):
        inst = IdentityInstance(ident, m=args.m, t_power=args.t_power,
                                literal=getattr(args, "literal", False), window=args.window)
        return _run_identity(args, inst)
    if ident == "eq5":
        explicit = (args.a_ij, args.b_ii, args.b_ij, args.d_i)
        if all(x is not None for x in explicit):
            inst = IdentityInstance("eq5", eq5=explicit)
        elif args.cartan:
            cart = _cartan(args)
            _check_indices(args, cart)
            inst = IdentityInstance("eq5", cartan=cart, i=args.i, j=args.j)
        else:
            raise BadInput("eq5 needs --cartan or all of --a-ij --b-ii --b-ij --d-i")
        return _run_identity(args, inst)
    cart = _cartan(args)
    _check_indices(args, cart)
    fam, desc = _family(args, cart)
    if ident in ("serre", "prefactored"):
        inst = IdentityInstance(ident, cartan=cart, i=args.i, j=args.j, family=fam,
                                window=args.window)
        return _run_identity(args, inst)
    if ident == "system1":
        if cart.a[args.i][args.j] == 0:
            raise BadInput(f"a_{args.i}{args.j} = 0: no equation for this pair")
        res = check_system1(fam, args.i, args.j, args.window)
        payload = {"config": _config(args), "family": desc, "check": res.to_json()}
        scope = "exactly" if res.exact else f"on window [{res.window[0]}, {res.window[1]}]"
        lines = [f"system1 ({args.i},{args.j}): {'holds' if res.ok else 'fails'} {scope}"]
        if res.witness is not None:
            lines.append(f"  first failing degree: {res.witness}")
        _emit(args, payload, lines)
        return EXIT_OK if res.ok else EXIT_NONZERO
    rep = hypothesis_check(fam, args.i, args.j, args.variant, _rho(args))
    payload = {"config": _config(args), "family": desc, "hypothesis": rep.to_json()}
    lines = [f"hypothesis {rep.variant}: {'common domain' if rep.ok else 'no common domain'} "
             f"(rho={rep.rho}; {rep.reason})"]
    for lab, _, reg in rep.regions:
        lines.append(f"  {lab}: log|ratio| in ({reg.lo:.4g}, {reg.hi:.4g})")
    _emit(args, payload, lines)
    return EXIT_OK if rep.ok else EXIT_NONZERO


BASIS_INFO = {
    "P": "P_n(z,c): Laurent polynomial basis of the single equation",
    "Q": "Q_n(z,c) = P_n(1/z,1/c)",
    "phi": "phi_n(z,c): series basis with support bounded below",
    "psi": "psi_n(z,c): series basis with support bounded above",
    "taylor": "Taylor pair F_ij, F_ji with F_ij(0) = q_j^n_ij",
}


def cmd_basis(args) -> int:
    if args.action == "list":
        payload = {"bases": BASIS_INFO, "family_kinds": list(KINDS)}
        _emit(args, payload, [f"{k}: {v}" for k, v in BASIS_INFO.items()]
              + ["family kinds: " + ", ".join(KINDS)])
        return EXIT_OK
    c = QScalar.q(args.c_power)
    if args.family == "taylor":
        b_ij = args.c_power
        f_ij, f_ji = taylor_solution(args.d_i, args.d_j, b_ij, args.n_ij, args.n_ji)
        res = check_pair(f_ij, f_ji, c, args.window)
    else:
        if args.n < (1 if args.family in ("P", "Q") else 0):
            raise BadInput("basis index out of range")
        F = {"P": lambda: basis_P(args.n, c), "Q": lambda: basis_Q(args.n, c)}.get(
            args.family, lambda: phi_psi(args.n, c, args.family))()
        res = check_equation_c(F, c, args.window)
    scope = "exactly" if res.exact else f"verified on window [{res.window[0]}, {res.window[1]}]"
    payload = {"config": _config(args), "check": res.to_json()}
    _emit(args, payload, [f"{args.family}_{args.n} with c = q^{args.c_power}: "
                          f"{'solution' if res.ok else 'not a solution'} ({scope})"])
    return EXIT_OK if res.ok else EXIT_NONZERO


def cmd_cartan(args) -> int:
    try:
        with open(args.cartan) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise BadJSON(f"cannot read {args.cartan}") from None
    except json.JSONDecodeError as exc:
        raise BadJSON(f"malformed JSON in {args.cartan}: {exc}") from None
    if not isinstance(data, dict) or "a" not in data:
        raise BadJSON('cartan file must be a JSON object with key "a"')
    if args.action == "validate":
        validate_gcm(data["a"])
        _emit(args, {"valid": True, "a": data["a"]}, ["valid generalized Cartan matrix"])
        return EXIT_OK
    cd = symmetrize(data["a"])
    _emit(args, cd.to_json(), [f"d = {cd.d}", f"b = {[list(r) for r in cd.b]}"])
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            code = cmd_verify(args)
        elif args.command == "basis":
            code = cmd_basis(args)
        else:
            code = cmd_cartan(args)
    except NotSymmetrizable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CARTAN
    except CartanError as exc:
        print(f"error: invalid generalized Cartan matrix: {exc}", file=sys.stderr)
        return EXIT_BAD_CARTAN
    except FamilyError as exc:
        print(f"error: bad family: {exc}", file=sys.stderr)
        return EXIT_BAD_FAMILY
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except IdentityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except UndefinedProduct as exc:
        print(f"undefined: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    return code


if __name__ == "__main__":
    sys.exit(main())
