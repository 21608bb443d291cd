"""Command-line front end.

Exit codes: 0 success, 2 user error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from .bounds import LOG_DISC, ap_upper_bound, compute_bp
from .curve_catalog import (
    check_x0n_level,
    fermat_report,
    x0n_fiber,
    x0n_report,
    xn_report,
)
from .errors import ArakelovError, SingleComponent
from .exact_core import BoundExpression, FormalLogSum, format_rational
from .fiber_model import FiberFormatError, dual_graph_stats, dumps_fiber, load_fiber, validate_fiber
from .fibral_divisors import ap_from_sums, fiber_divisors, solve_F, solve_G
from .green_discrete import random_instance, spectral_bound_check, verify_green_identities

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 2, 3
DEFAULT_MAX_N = 200


class UserError(Exception):
    pass


def _q(x) -> str:
    return format_rational(x)


def _expr(e: BoundExpression) -> dict:
    return {"terms": e.to_json(), "display": e.display()}


def _logsum(s: FormalLogSum) -> dict:
    return {"terms": s.to_json(), "display": BoundExpression.from_logsum(s).display()}


def _stats(st) -> dict:
    return {"r": st.r, "u": st.u, "l": st.l, "c": st.c}


def _checks(checks) -> list[dict]:
    return [{"name": name, "passed": bool(ok)} for name, ok in checks]


def _parse_bindings(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UserError(f"--bind expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UserError(f"--bind {name}: {value!r} is not a number") from None
    return dict(sorted(out.items()))


def _numeric_block(exprs: dict[str, BoundExpression], bindings: dict[str, float]) -> dict:
    values, missing = {}, {}
    for key, e in exprs.items():
        need = sorted(s for s in e.symbols() if s not in bindings and s != "pi")
        if need:
            values[key] = None
            missing[key] = need
        else:
            values[key] = e.evaluate(bindings)
    return {"bindings": bindings, "values": values, "unbound": missing}


# ---------------------------------------------------------------------------
# commands


def cmd_x0n(args) -> tuple[dict, int]:
    try:
        rep = x0n_report(args.N, args.prime)
    except ArakelovError as exc:
        raise UserError(str(exc)) from None
    ex = rep.extras
    primes = []
    for row in ex["rows"]:
        fib = row["fiber"]
        names = [c.name for c in fib.components]
        cusps = []
        for s in fib.sections:
            G, F = row["divisors"][s.name]
            cusps.append(
                {
                    "name": s.name,
                    "width": s.width,
                    "hits": names[next(iter(s.hits))],
                    "G": [_q(c) for c in G.coefficients],
                    "F": [_q(c) for c in F.coefficients],
                    "G2": _q(row["G2"][s.name]),
                    "F2": _q(row["F2"][s.name]),
                }
            )
        primes.append(
            {
                "p": row["p"],
                "flags": row["flags"],
                "components": names,
                "stats": _stats(row["stats"]),
                "b_p": _q(row["bp"]),
                "a_p": _q(row["ap"]),
                "a_p_bound_2g_bp": _q(ap_upper_bound(rep.genus, row["bp"])),
                "sum_bG2": _q(row["sum_bG2"]),
                "sum_bF2": _q(row["sum_bF2"]),
                "adjunction_sum": _q(row["adjunction_sum"]),
                "cusps": sorted(cusps, key=lambda c: c["name"]),
            }
        )
    doc = {
        "command": "x0n",
        "inputs": {"N": args.N, "primes": ex["primes"]},
        "genus": rep.genus,
        "degree": rep.degree,
        "cusps": [{"e": e, "width": w} for e, w in ex["cusps"]],
        "per_prime": primes,
        "geometric": _logsum(rep.geometric),
        "closed_form": _logsum(ex["closed_form"]),
        "bounds": {
            "analytic": _expr(rep.analytic),
            "total": _expr(rep.total),
            "leading_term": _expr(ex["leading_term"]),
            "leading_log_coefficient": _expr(rep.leading_log_coefficient),
        },
        "checks": _checks(ex["checks"]),
    }
    if args.bind:
        doc["numeric"] = _numeric_block(
            {
                "geometric": BoundExpression.from_logsum(rep.geometric),
                "analytic": rep.analytic,
                "total": rep.total,
                "leading_term": ex["leading_term"],
            },
            _parse_bindings(args.bind),
        )
    ok = all(c["passed"] for c in doc["checks"])
    return doc, EXIT_OK if ok else EXIT_INTERNAL


def cmd_x0n_fiber(args) -> tuple[str, int]:
    try:
        check_x0n_level(args.N)
        if args.prime is None or len(args.prime) != 1:
            raise UserError("x0n-fiber needs exactly one --prime")
        return dumps_fiber(x0n_fiber(args.N, args.prime[0])), EXIT_OK
    except ArakelovError as exc:
        raise UserError(str(exc)) from None


def cmd_fiber_analyze(args) -> tuple[dict, int]:
    try:
        fib = load_fiber(args.input)
    except OSError as exc:
        raise UserError(f"cannot read {args.input}: {exc.strerror}") from None
    except FiberFormatError as exc:
        raise UserError(f"{args.input}: {exc}") from None
    problems = validate_fiber(fib)
    if problems:
        raise UserError("\n".join(f"{args.input}: {p}" for p in problems))
    if args.sections_required and not fib.sections:
        raise UserError(f"{args.input}: fiber has no section data (--sections-required)")
    names = [c.name for c in fib.components]
    doc = {
        "command": "fiber-analyze",
        "inputs": {"input": os.path.basename(args.input), "genus": args.genus, "degree": args.degree},
        "prime_norm": fib.prime_norm,
        "components": names,
    }
    bp = None
    try:
        st = dual_graph_stats(fib)
        bp = compute_bp(st)
        doc["stats"] = _stats(st)
        doc["b_p"] = _q(bp)
    except SingleComponent:
        doc["stats"] = {"r": 1, "u": None, "l": None, "c": None}
        doc["b_p"] = _q(0)
        bp = Fraction(0)
    except ArakelovError as exc:
        doc["stats"] = {"r": fib.size, "u": None, "l": None, "c": None}
        doc["b_p"] = None
        doc["b_p_error"] = str(exc)
    if fib.sections:
        d = args.degree if args.degree is not None else sum(s.width for s in fib.sections)
        g = args.genus
        try:
            sections = []
            if g is not None:
                divs = fiber_divisors(fib, g, d)
            else:
                divs = {s.name: (solve_G(fib, s, d), None) for s in fib.sections}
            for s in fib.sections:
                G, F = divs[s.name]
                entry = {"name": s.name, "width": s.width, "G": [_q(c) for c in G.coefficients], "G2": _q(G.self_intersection)}
                if F is not None:
                    entry["F"] = [_q(c) for c in F.coefficients]
                    entry["F2"] = _q(F.self_intersection)
                sections.append(entry)
            doc["sections"] = sections
            doc["degree"] = d
            if g is not None:
                wG = sum((s.width * divs[s.name][0].self_intersection for s in fib.sections), Fraction(0))
                wF = sum((s.width * divs[s.name][1].self_intersection for s in fib.sections), Fraction(0))
                ap = ap_from_sums(g, d, wG, wF)
                doc["a_p"] = _q(ap)
                if bp is not None:
                    bound = ap_upper_bound(g, bp)
                    doc["geom_bound"] = {"a_p": _q(ap), "2g_b_p": _q(bound), "holds": ap <= bound}
        except ArakelovError as exc:
            raise UserError(f"{args.input}: {exc}") from None
    ok = doc.get("geom_bound", {}).get("holds", True)
    return doc, EXIT_OK if ok else EXIT_INTERNAL


def cmd_fermat(args) -> tuple[dict, int]:
    try:
        rep = fermat_report(args.p)
    except ArakelovError as exc:
        raise UserError(str(exc)) from None
    fp = rep.extras["params"]
    doc = {
        "command": "fermat",
        "inputs": {"p": args.p},
        "genus": rep.genus,
        "degree": rep.degree,
        "params": {"r_max": fp.r_max, "u": fp.u, "l": fp.l, "c": fp.c},
        "b_p_raw": _q(fp.bp_raw),
        "b_p_envelope": _q(fp.envelope),
        "flag": fp.flag,
        "a_p_bound_galois": _q(rep.extras["galois_ap_bound"]),
        "bounds": {"analytic": _expr(rep.analytic), "total": _expr(rep.total)},
    }
    if args.bind:
        doc["numeric"] = _numeric_block({"total": rep.total}, _parse_bindings(args.bind))
    return doc, EXIT_OK


def cmd_xn(args) -> tuple[dict, int]:
    try:
        rep = xn_report(args.N)
    except ArakelovError as exc:
        raise UserError(str(exc)) from None
    doc = {
        "command": "xn",
        "inputs": {"N": args.N},
        "genus": rep.genus,
        "degree": rep.degree,
        "field_degree": rep.extras["field_degree"],
        "per_prime": [
            {
                "p": x.p,
                "k": x.k,
                "m": x.m,
                "r": x.r,
                "s": x.s,
                "m_p": x.m_p,
                "norm": x.norm,
                "prime_count": x.prime_count,
                "b_p_envelope": _q(x.envelope),
            }
            for x in rep.extras["params"]
        ],
        "geometric": _logsum(rep.geometric),
        "bounds": {"analytic": _expr(rep.analytic), "total": _expr(rep.total)},
    }
    if args.bind:
        doc["numeric"] = _numeric_block({"total": rep.total}, _parse_bindings(args.bind))
    return doc, EXIT_OK


def cmd_green_selftest(args) -> tuple[dict, int]:
    if args.n < 2:
        raise UserError("--n must be at least 2")
    if args.trials < 1:
        raise UserError("--trials must be positive")
    master = random.Random(args.seed)
    instances, failures = [], []
    for t in range(args.trials):
        seed = master.randrange(2**32)
        s, mu, nu = random_instance(seed, args.n)
        rep = verify_green_identities(s, mu, nu)
        sc = spectral_bound_check(s, mu, nu)
        ok = rep.passed and sc.holds()
        instances.append(
            {
                "trial": t,
                "seed": seed,
                "passed": ok,
                "c": _q(sc.c_exact),
                "f_norm_sq": _q(sc.f_norm_sq),
                "numeric": {
                    "lambda1": sc.lambda1,
                    "bound_resolvent": sc.bound_resolvent,
                    "bound_paper": sc.bound_paper,
                },
            }
        )
        if not ok:
            failures.append({"seed": seed, "first_failure": rep.first_failure or "spectral sandwich"})
    doc = {
        "command": "green-selftest",
        "inputs": {"n": args.n, "trials": args.trials, "seed": args.seed},
        "passed": not failures,
        "failures": failures,
        "instances": instances,
    }
    return doc, EXIT_OK if not failures else EXIT_INTERNAL


def _sweep_levels(limit: int) -> list[int]:
    out = []
    for N in range(5, limit + 1):
        try:
            check_x0n_level(N)
        except ArakelovError:
            continue
        out.append(N)
    return out


def cmd_sweep(args) -> tuple[dict, int]:
    cap = int(os.environ.get("ARAKELOV_MAX_N", DEFAULT_MAX_N))
    limit = min(args.max_n if args.max_n is not None else cap, cap)
    rows = []
    for N in _sweep_levels(limit):
        rep = x0n_report(N)
        rows.append(
            {
                "N": N,
                "genus": rep.genus,
                "degree": rep.degree,
                "a_p": {str(p): _q(c) for p, c in rep.geometric.items()},
                "passed": all(ok for _, ok in rep.extras["checks"]),
            }
        )
    ok = all(r["passed"] for r in rows)
    doc = {"command": "sweep", "inputs": {"max_n": limit}, "levels": rows, "passed": ok}
    return doc, EXIT_OK if ok else EXIT_INTERNAL


# ---------------------------------------------------------------------------
# table rendering


def _render_table(doc: dict) -> str:
    lines = []
    cmd = doc["command"]
    if cmd == "x0n":
        lines.append(f"X0({doc['inputs']['N']})  genus {doc['genus']}  index {doc['degree']}")
        lines.append("cusps (e: width): " + ", ".join(f"{c['e']}: {c['width']}" for c in doc["cusps"]))
        lines.append(f"{'p':>5} {'r':>3} {'u':>3} {'l':>3} {'c':>3} {'b_p':>12} {'sum bG^2':>12} {'sum bF^2':>12} {'a_p':>12}")
        for row in doc["per_prime"]:
            st = row["stats"]
            lines.append(
                f"{row['p']:>5} {st['r']:>3} {st['u']:>3} {st['l']:>3} {st['c']:>3} {row['b_p']:>12} "
                f"{row['sum_bG2']:>12} {row['sum_bF2']:>12} {row['a_p']:>12}"
            )
        lines.append(f"geometric    : {doc['geometric']['display']}")
        lines.append(f"closed form  : {doc['closed_form']['display']}")
        for key in ("analytic", "total", "leading_term"):
            lines.append(f"{key:<13}: {doc['bounds'][key]['display']}")
        for c in doc["checks"]:
            lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
    elif cmd == "fiber-analyze":
        st = doc["stats"]
        lines.append(f"fiber over Nm = {doc['prime_norm']}: components {', '.join(doc['components'])}")
        lines.append(f"r={st['r']} u={st['u']} l={st['l']} c={st['c']}  b_p={doc['b_p']}")
        for s in doc.get("sections", []):
            lines.append(f"  cusp {s['name']} (width {s['width']}): G^2={s['G2']}" + (f" F^2={s['F2']}" if "F2" in s else ""))
        if "a_p" in doc:
            lines.append(f"a_p = {doc['a_p']}")
        if "geom_bound" in doc:
            gb = doc["geom_bound"]
            lines.append(f"[{'PASS' if gb['holds'] else 'FAIL'}] a_p <= 2g b_p ({gb['a_p']} <= {gb['2g_b_p']})")
    elif cmd == "fermat":
        p = doc["params"]
        lines.append(f"Fermat p={doc['inputs']['p']}  genus {doc['genus']}")
        lines.append(f"r_max={p['r_max']} u={p['u']} l={p['l']} c={p['c']}")
        lines.append(f"b_p raw {doc['b_p_raw']}  envelope p^7/2 = {doc['b_p_envelope']}  {doc['flag']}")
        lines.append(f"total: {doc['bounds']['total']['display']}")
    elif cmd == "xn":
        lines.append(f"X({doc['inputs']['N']})  genus {doc['genus']}  [Q(zeta_N):Q] = {doc['field_degree']}")
        for x in doc["per_prime"]:
            lines.append(
                f"  p={x['p']} k={x['k']} m={x['m']}: r={x['r']} s={x['s']} m_p={x['m_p']} "
                f"Nm={x['norm']} (x{x['prime_count']})  b_p <= {x['b_p_envelope']}"
            )
        lines.append(f"total: {doc['bounds']['total']['display']}")
    elif cmd == "green-selftest":
        n_ok = sum(i["passed"] for i in doc["instances"])
        lines.append(f"green self-test n={doc['inputs']['n']} seed={doc['inputs']['seed']}: {n_ok}/{len(doc['instances'])} passed")
        for f in doc["failures"]:
            lines.append(f"  FAIL seed={f['seed']}: {f['first_failure']}")
    elif cmd == "sweep":
        for r in doc["levels"]:
            lines.append(f"N={r['N']:>4} g={r['genus']:>3} {'PASS' if r['passed'] else 'FAIL'}  " + " ".join(f"a_{p}={v}" for p, v in r["a_p"].items()))
    if "numeric" in doc:
        lines.append("numeric:")
        for key, v in doc["numeric"]["values"].items():
            lines.append(f"  {key}: " + ("unbound " + ",".join(doc["numeric"]["unbound"][key]) if v is None else f"{v:.12g}"))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arakelov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("x0n", help="bound report for X_0(N)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--prime", type=int, action="append", help="restrict to these primes (repeatable)")
    p.add_argument("--bind", action="append", metavar="NAME=VALUE")
    fmt(p)
    p.set_defaults(func=cmd_x0n)

    p = sub.add_parser("x0n-fiber", help="export the special fiber of X_0(N) at p as JSON")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--prime", type=int, action="append", required=True)
    p.set_defaults(func=cmd_x0n_fiber, raw=True)

    p = sub.add_parser("fiber-analyze", help="analyse a fiber description file")
    p.add_argument("--input", required=True)
    p.add_argument("--genus", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--sections-required", action="store_true")
    fmt(p)
    p.set_defaults(func=cmd_fiber_analyze)

    p = sub.add_parser("fermat", help="parameters and bound for the Fermat curve of prime exponent p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--bind", action="append", metavar="NAME=VALUE")
    fmt(p)
    p.set_defaults(func=cmd_fermat)

    p = sub.add_parser("xn", help="parameters and bound for X(N)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--bind", action="append", metavar="NAME=VALUE")
    fmt(p)
    p.set_defaults(func=cmd_xn)

    p = sub.add_parser("green-selftest", help="exact Green-identity checks on random finite surfaces")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    fmt(p)
    p.set_defaults(func=cmd_green_selftest)

    p = sub.add_parser("sweep", help="run the X_0(N) identity checks for all valid N up to a cap")
    p.add_argument("--max-n", type=int)
    fmt(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, code = args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except ArakelovError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_USER if exc.user_error else EXIT_INTERNAL
    if getattr(args, "raw", False):
        print(out)
    elif args.format == "json":
        print(json.dumps(out, indent=2, ensure_ascii=False))
    else:
        print(_render_table(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
