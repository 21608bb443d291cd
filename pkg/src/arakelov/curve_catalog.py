"""Built-in curve families: X_0(N) with full special fibers, X(N) and Fermat curves at parameter level."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod

from sympy import divisors, factorint, isprime, legendre_symbol, n_order, totient

from .bounds import (
    AnalyticInputs,
    CurveBoundReport,
    analytic_bbeta_bound,
    ap_upper_bound,
    compute_bp,
    omega_total_bound,
    x0n_leading_coefficient,
    x0n_leading_term,
)
from .errors import InvalidN, InvalidPrime, NonIntegralCrossing
from .exact_core import BoundExpression, FormalLogSum, log_expr
from .fiber_model import ComponentRecord, SectionHit, SpecialFiber, adjunction_sum, dual_graph_stats, validate_fiber
from .fibral_divisors import ap_from_sums, fiber_divisors


def _factor(N: int) -> dict[int, int]:
    if N < 1:
        raise InvalidN(f"N must be a positive integer, got {N}")
    return {int(p): int(e) for p, e in factorint(N).items()}


def _require_squarefree(N: int) -> list[int]:
    fac = _factor(N)
    if any(e > 1 for e in fac.values()):
        raise InvalidN(f"N must be square-free, got {N}")
    return sorted(fac)


def check_x0n_level(N: int) -> list[int]:
    """Validate the X_0(N) hypotheses and return the prime factors of ``N``."""
    primes = _require_squarefree(N)
    if gcd(N, 6) != 1:
        raise InvalidN(f"N must be coprime to 6, got {N}")
    if len(primes) < 2:
        raise InvalidN(f"N must have at least two prime factors, got {N}")
    return primes


def x0n_index(N: int) -> int:
    return prod(p + 1 for p in _require_squarefree(N))


def x0n_genus(N: int) -> int:
    """Genus of X_0(N) for square-free ``N`` coprime to 6."""
    primes = _require_squarefree(N)
    if gcd(N, 6) != 1:
        raise InvalidN(f"N must be coprime to 6, got {N}")
    d = prod(p + 1 for p in primes)
    e2 = prod(1 + legendre_symbol(-1 % p, p) for p in primes)
    e3 = prod(1 + legendre_symbol(-3 % p, p) for p in primes)
    g = 1 + Fraction(d, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(2 ** len(primes), 2)
    if g.denominator != 1 or g < 0:
        raise NonIntegralCrossing(f"genus formula gave {g} for N = {N}")
    return int(g)


def cusp_name(e: int, N: int) -> str:
    if e == 1:
        return "0"
    if e == N:
        return "inf"
    return f"1/{e}"


def x0n_cusps(N: int) -> list[tuple[int, int]]:
    """Cusps ``1/e`` for ``e | N`` with width ``N/e``."""
    check_x0n_level(N)
    out = [(e, N // e) for e in divisors(N)]
    assert sum(w for _, w in out) == x0n_index(N)
    return out


@dataclass(frozen=True)
class X0NFlags:
    p: int
    M: int
    nu: int
    u: int
    v: int
    Q: int
    crossing: int


def x0n_flags(N: int, p: int) -> X0NFlags:
    primes = check_x0n_level(N)
    if p not in primes:
        raise InvalidN(f"{p} does not divide {N}")
    M = N // p
    qs = [q for q in primes if q != p]
    nu = len(qs)
    u = int(p % 12 in (7, 11) and all(q % 4 == 1 for q in qs))
    v = int(p % 12 in (5, 11) and all(q % 3 == 1 for q in qs))
    d = x0n_index(N)
    cross = Fraction(d * (p - 1), 12 * (p + 1)) - 2**nu * (Fraction(u, 2) + Fraction(v, 3))
    if cross.denominator != 1 or cross < 0:
        raise NonIntegralCrossing(f"C0.Cinf = {cross} for N = {N}, p = {p}")
    return X0NFlags(p, M, nu, u, v, prod(q + 1 for q in qs), int(cross))


def x0n_fiber(N: int, p: int) -> SpecialFiber:
    """The reduction of X_0(N) at ``p``: two copies of X_0(N/p) joined by crossings and chains."""
    fl = x0n_flags(N, p)
    d = x0n_index(N)
    gM = x0n_genus(fl.M)
    k = 2**fl.nu
    comps = [
        ComponentRecord("C0", 1, gM, Fraction(p * d, p + 1)),
        ComponentRecord("Cinf", 1, gM, Fraction(d, p + 1)),
    ]
    crossings = {(0, 1): fl.crossing}
    if fl.u:
        for i in range(1, k + 1):
            idx = len(comps)
            comps.append(ComponentRecord(f"F{i}", 1, 0, Fraction(0)))
            crossings[(0, idx)] = 1
            crossings[(1, idx)] = 1
    if fl.v:
        for i in range(1, k + 1):
            gi = len(comps)
            comps.append(ComponentRecord(f"G{i}", 1, 0, Fraction(0)))
            comps.append(ComponentRecord(f"H{i}", 1, 0, Fraction(0)))
            crossings[(0, gi)] = 1
            crossings[(gi, gi + 1)] = 1
            crossings[(1, gi + 1)] = 1
    sections = [
        SectionHit(cusp_name(e, N), w, {1 if e % p == 0 else 0: 1}) for e, w in x0n_cusps(N)
    ]
    fib = SpecialFiber.build(p, p, comps, crossings, sections, label=f"X0({N}) mod {p}")
    problems = validate_fiber(fib, degree=d)
    if problems:
        raise NonIntegralCrossing(f"catalog fiber X0({N}) mod {p} failed validation: {problems}")
    on_inf = sum(s.width for s in fib.sections if 1 in s.hits)
    if on_inf != d // (p + 1):
        raise NonIntegralCrossing("cusp widths on Cinf do not match its local degree")
    return fib


def lemma_G_value(p: int) -> Fraction:
    """Closed form of ``sum_j b_j G_j^2`` at ``p``."""
    return Fraction(-12 * p, p * p - 1)


def lemma_F_value(p: int) -> Fraction:
    return Fraction(-3 * (p + 1), p - 1)


def x0n_closed_form(N: int, g: int | None = None) -> FormalLogSum:
    """``(2/d) [ sum_p (12 g p/(p^2-1) - 6 (g-1)/(p-1)) log p - 3 (g-1) log N ]``."""
    primes = check_x0n_level(N)
    g = x0n_genus(N) if g is None else g
    d = x0n_index(N)
    inner = FormalLogSum({p: Fraction(12 * g * p, p * p - 1) - Fraction(6 * (g - 1), p - 1) for p in primes})
    inner = inner - FormalLogSum.log(N, 3 * (g - 1))
    return inner * Fraction(2, d)


def x0n_analytic_inputs(N: int) -> AnalyticInputs:
    return AnalyticInputs(g=x0n_genus(N), d=x0n_index(N), widths=[w for _, w in x0n_cusps(N)])


def x0n_report(N: int, primes: list[int] | None = None) -> CurveBoundReport:
    """Full X_0(N) pipeline: fibers, correction divisors, a_p, checks and symbolic bounds."""
    all_primes = check_x0n_level(N)
    if primes:
        bad = [p for p in primes if p not in all_primes]
        if bad:
            raise InvalidN(f"primes {bad} do not divide {N}")
    selected = sorted(set(primes)) if primes else all_primes
    g, d = x0n_genus(N), x0n_index(N)
    closed = x0n_closed_form(N, g)
    checks = []
    rows = []
    per_prime = {}
    for p in selected:
        fib = x0n_fiber(N, p)
        fl = x0n_flags(N, p)
        divs = fiber_divisors(fib, g, d)
        G2 = {name: G.self_intersection for name, (G, _) in divs.items()}
        F2 = {name: F.self_intersection for name, (_, F) in divs.items()}
        wG = sum((s.width * G2[s.name] for s in fib.sections), Fraction(0))
        wF = sum((s.width * F2[s.name] for s in fib.sections), Fraction(0))
        ap = ap_from_sums(g, d, wG, wF)
        per_prime[p] = ap
        stats = dual_graph_stats(fib)
        bp = compute_bp(stats)
        adj = adjunction_sum(fib)
        checks += [
            (f"p={p}: sum b_j G_j^2 = -12p/(p^2-1)", wG == lemma_G_value(p)),
            (f"p={p}: sum b_j F_j^2 = -3(p+1)/(p-1)", wF == lemma_F_value(p)),
            (f"p={p}: adjunction sum = 2g-2", adj == 2 * g - 2),
            (f"p={p}: sum of widths = d", sum(s.width for s in fib.sections) == d),
            (f"p={p}: a_p matches closed form", ap == closed.coefficient(p)),
            (f"p={p}: a_p <= 2g b_p", ap <= ap_upper_bound(g, bp)),
            (f"p={p}: -G_j^2 <= b_p for every cusp", all(-v <= bp for v in G2.values())),
        ]
        rows.append(
            {
                "p": p,
                "flags": {"nu": fl.nu, "u": fl.u, "v": fl.v, "M": fl.M, "Q": fl.Q},
                "fiber": fib,
                "stats": stats,
                "bp": bp,
                "ap": ap,
                "sum_bG2": wG,
                "sum_bF2": wF,
                "G2": G2,
                "F2": F2,
                "divisors": divs,
                "adjunction_sum": adj,
            }
        )
    geometric = FormalLogSum(per_prime)
    if not primes:
        checks.append(("sum a_p log p equals closed form", geometric.expanded() == closed.expanded()))
    analytic = analytic_bbeta_bound(x0n_analytic_inputs(N))
    total = omega_total_bound(False, 1, g, analytic, geometric, manin_drinfeld=True)
    leading = x0n_leading_term(g, N)
    return CurveBoundReport(
        genus=g,
        degree=d,
        geometric=geometric,
        analytic=analytic,
        total=total,
        leading_log_coefficient=x0n_leading_coefficient(),
        extras={
            "N": N,
            "primes": selected,
            "cusps": x0n_cusps(N),
            "rows": rows,
            "closed_form": closed,
            "leading_term": leading,
            "checks": checks,
        },
    )


# ---------------------------------------------------------------------------
# Fermat curves


@dataclass(frozen=True)
class FermatParams:
    p: int
    r_max: int
    u: int
    l: int
    c: int
    genus: int
    bp_raw: Fraction
    envelope: Fraction

    @property
    def envelope_exceeded(self) -> bool:
        return self.bp_raw > self.envelope

    @property
    def flag(self) -> str:
        return "ENVELOPE_EXCEEDED" if self.envelope_exceeded else "OK"


def fermat_genus(p: int) -> int:
    return (p - 1) * (p - 2) // 2


def fermat_params(p: int) -> FermatParams:
    if not isprime(p) or p < 5:
        raise InvalidPrime(f"p must be a prime >= 5, got {p}")
    r_max = 4 + p * (p - 3) // 2
    raw = compute_bp((r_max, p, 1, 3))
    return FermatParams(p, r_max, p, 1, 3, fermat_genus(p), raw, Fraction(p**7, 2))


def fermat_omega_bound(p: int, g: int | None = None) -> BoundExpression:
    """``(2g-2)(2 logDisc + (p-1)(kappa1 log p + kappa2) + g p^7 log p)``."""
    fermat_params(p)
    g = fermat_genus(p) if g is None else g
    inp = AnalyticInputs(g=g, d=p * p, widths=[p] * p, field_degree=p - 1)
    analytic = analytic_bbeta_bound(inp, simplified=True)
    geometric = log_expr(p, g * p**7)
    return omega_total_bound(True, p - 1, g, analytic, geometric, manin_drinfeld=True)


def fermat_report(p: int) -> CurveBoundReport:
    fp = fermat_params(p)
    g = fp.genus
    inp = AnalyticInputs(g=g, d=p * p, widths=[p] * p, field_degree=p - 1)
    analytic = analytic_bbeta_bound(inp, simplified=True)
    total = fermat_omega_bound(p, g)
    return CurveBoundReport(
        genus=g,
        degree=p * p,
        geometric=FormalLogSum({p: g * p**7}),
        analytic=analytic,
        total=total,
        leading_log_coefficient=BoundExpression.constant((2 * g - 2) * g * p**7),
        extras={"params": fp, "galois_ap_bound": ap_upper_bound(g, fp.bp_raw, galois_over_P1=True)},
    )


# ---------------------------------------------------------------------------
# X(N)


@dataclass(frozen=True)
class XNParams:
    N: int
    p: int
    k: int
    m: int
    r: int
    s: int
    m_p: int
    residue_degree: int  # f with Nm(P) = p^f
    prime_count: int  # number of primes of Q(zeta_N) above p

    @property
    def envelope(self) -> Fraction:
        return Fraction((self.r - 1) ** 2 * self.m_p, self.s)

    @property
    def norm(self) -> int:
        return self.p**self.residue_degree


def _check_xn_level(N: int) -> dict[int, int]:
    fac = _factor(N)
    if gcd(N, 6) != 1:
        raise InvalidN(f"N must be coprime to 6, got {N}")
    if len(fac) < 2:
        raise InvalidN(f"N must have at least two different prime factors, got {N}")
    return fac


def xn_params(N: int, p: int | None = None) -> XNParams:
    fac = _check_xn_level(N)
    p = min(fac) if p is None else p
    if p not in fac:
        raise InvalidN(f"{p} does not divide {N}")
    k = fac[p]
    m = N // p**k
    s = Fraction(p - 1, 24) * m * m * int(totient(m)) * prod(Fraction(q + 1, q) for q in factorint(m))
    if s.denominator != 1:
        raise InvalidN(f"supersingular count s_p = {s} is not integral for N = {N}, p = {p}")
    f = int(n_order(p, m))
    return XNParams(
        N=N,
        p=p,
        k=k,
        m=m,
        r=p**k + p ** (k - 1),
        s=int(s),
        m_p=p ** (2 * k - 2),
        residue_degree=f,
        prime_count=int(totient(m)) // f,
    )


def xn_index(N: int) -> int:
    """``|PSL_2(Z/N)|`` for ``N > 2``."""
    fac = _factor(N)
    return int(Fraction(N**3, 2) * prod(1 - Fraction(1, p * p) for p in fac))


def xn_genus(N: int) -> int:
    g = 1 + Fraction(xn_index(N) * (N - 6), 12 * N)
    assert g.denominator == 1
    return int(g)


def xn_omega_bound(N: int) -> BoundExpression:
    """``(2g-2)(2 logDisc + phi(N)(kappa1 log N + kappa2) + 2 sum_P (r-1)^2 m/s log Nm P)``."""
    return xn_report(N).total


def xn_report(N: int) -> CurveBoundReport:
    fac = _check_xn_level(N)
    params = [xn_params(N, p) for p in sorted(fac)]
    g, d = xn_genus(N), xn_index(N)
    phi = int(totient(N))
    inp = AnalyticInputs(g=g, d=d, widths=[N] * (d // N), field_degree=phi)
    analytic = analytic_bbeta_bound(inp, simplified=True)
    geometric = FormalLogSum(
        [(x.norm, 2 * x.prime_count * x.envelope) for x in params]
    )
    total = omega_total_bound(True, phi, g, analytic, geometric, manin_drinfeld=True)
    return CurveBoundReport(
        genus=g,
        degree=d,
        geometric=geometric,
        analytic=analytic,
        total=total,
        leading_log_coefficient=BoundExpression.symbol("kappa1", coeff=(2 * g - 2) * phi),
        extras={"params": params, "field_degree": phi},
    )
