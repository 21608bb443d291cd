"""Closed-form bound assembly: b_p, the analytic contribution, and the total bound."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateStats, ManinDrinfeldNotAsserted, NonPositiveLambda
from .exact_core import BoundExpression, FormalLogSum, Sym, UNIT, as_rational, log_expr
from .fiber_model import DualStats

KAPPA0 = "kappa0"
KAPPA = "kappa"
KAPPA1 = "kappa1"
KAPPA2 = "kappa2"
PI = "pi"
LOG_DISC = "logDisc"
LBAR2 = "Lbar2"


@dataclass
class AnalyticInputs:
    g: int
    d: int
    widths: Sequence[int]
    field_degree: int = 1
    L_self_intersection: BoundExpression | Fraction | int | None = None
    deg_L: int = 1
    cusp_orders: Sequence[int] | None = None  # ord of l at f(S_j); default 1 for every cusp

    def __post_init__(self):
        if not self.widths:
            raise ValueError("at least one cusp width is required")
        if any(w < 1 for w in self.widths):
            raise ValueError("cusp widths must be positive")
        if sum(self.widths) != self.d:
            raise ValueError(f"widths sum to {sum(self.widths)}, expected d = {self.d}")
        if self.cusp_orders is None:
            self.cusp_orders = [1] * len(self.widths)
        if len(self.cusp_orders) != len(self.widths):
            raise ValueError("one cusp order per width expected")
        if any(o < 0 for o in self.cusp_orders):
            raise ValueError("cusp orders must be nonnegative")

    @property
    def L_squared(self) -> BoundExpression:
        L = self.L_self_intersection
        if L is None:
            return BoundExpression.symbol(LBAR2)
        if isinstance(L, BoundExpression):
            return L
        return BoundExpression.constant(L)

    @property
    def b_max(self) -> int:
        return max(self.widths)


@dataclass
class CurveBoundReport:
    genus: int
    degree: int
    geometric: FormalLogSum
    analytic: BoundExpression
    total: BoundExpression
    leading_log_coefficient: BoundExpression
    extras: dict = field(default_factory=dict)


def _sum_powers(ratio: Fraction, k: int) -> Fraction:
    return sum((ratio ** (i - 1) for i in range(1, k + 1)), Fraction(0))


def compute_bp(s: DualStats | Sequence) -> Fraction:
    """Combinatorial bound ``b_p`` from ``(r, u, l, c)``."""
    r, u, l, c = (s.r, s.u, s.l, s.c) if isinstance(s, DualStats) else s
    r, c = int(r), int(c)
    u, l = as_rational(u), as_rational(l)
    if r < 2:
        raise DegenerateStats("b_p needs at least two components")
    if c < 1 or l <= 0 or u <= 0:
        raise DegenerateStats(f"invalid dual statistics (r={r}, u={u}, l={l}, c={c})")
    if r - c - 1 < 0:
        raise DegenerateStats(f"r - c - 1 = {r - c - 1} < 0")
    ratio = u / l
    head = sum((_sum_powers(ratio, k) ** 2 for k in range(1, c + 1)), Fraction(0))
    tail = (r - c - 1) * _sum_powers(ratio, c) ** 2
    return (head + tail) * u / l**2


def ap_upper_bound(g: int, bp, galois_over_P1: bool = False) -> Fraction:
    bp = as_rational(bp)
    return 2 * bp if galois_over_P1 else 2 * g * bp


def _width_log_sum(widths, orders=None) -> BoundExpression:
    """``sum ord_j * b_j * log b_j`` over prime atoms."""
    orders = orders or [1] * len(widths)
    out = BoundExpression()
    for b, o in zip(widths, orders):
        if o and b > 1:
            out = out + log_expr(b, o * b)
    return out


def jk_integral_bound(inp: AnalyticInputs) -> BoundExpression:
    """Upper bound for ``int -log||l|| nu_can``: ``4 pi k0 sum ord_j b_j log b_j / g + (d/g) kappa``."""
    logs = _width_log_sum(inp.widths, inp.cusp_orders)
    return (logs * Fraction(4, inp.g)).times_symbol(PI, KAPPA0) + BoundExpression.symbol(
        KAPPA, coeff=Fraction(inp.d, inp.g)
    )


def analytic_bbeta_bound(inp: AnalyticInputs, simplified: bool = False) -> BoundExpression:
    """Upper bound for the analytic contribution ``b_beta``.

    The full form is ``-(2g/d) L^2 + [K:Q] (8 pi k0 sum b_j log b_j / d + 2 kappa)``;
    ``simplified=True`` gives ``[K:Q] (kappa1 log b_max + kappa2)``.
    """
    K = inp.field_degree
    if simplified:
        return (log_expr(inp.b_max).times_symbol(KAPPA1) + BoundExpression.symbol(KAPPA2)) * K
    logs = _width_log_sum(inp.widths)
    inner = (logs * Fraction(8, inp.d)).times_symbol(PI, KAPPA0) + BoundExpression.symbol(KAPPA, coeff=2)
    return inp.L_squared * Fraction(-2 * inp.g, inp.d) + inner * K


def spectral_c_bound(lambda1: float, f_norm_sq: float, hyperbolic: bool = False) -> float:
    if not lambda1 > 0:
        raise NonPositiveLambda(f"lambda1 must be positive, got {lambda1}")
    if f_norm_sq < 0:
        raise ValueError("||f||^2 must be nonnegative")
    lam = min(lambda1, 0.25) if hyperbolic else lambda1
    return 2.0 / lam * f_norm_sq


def omega_total_bound(
    disc_present: bool,
    field_degree: int,
    g: int,
    analytic: BoundExpression,
    geometric: FormalLogSum | BoundExpression,
    manin_drinfeld: bool = False,
) -> BoundExpression:
    """``(2g-2) (2 logDisc + analytic + geometric)``.

    Valid only when every cuspidal divisor is torsion, which the caller has
    to assert; the Neron-Tate height terms are then dropped.
    """
    if not manin_drinfeld:
        raise ManinDrinfeldNotAsserted("torsion of cuspidal divisors must be asserted for this bound")
    if g < 2:
        raise ValueError("genus must be at least 2")
    inner = analytic + geometric
    if disc_present:
        inner = inner + BoundExpression.symbol(LOG_DISC, coeff=2)
    return inner * (2 * g - 2)


def x0n_leading_term(g: int, N: int) -> BoundExpression:
    """``g (16 pi kappa0 - 1) log N`` expanded over the primes of ``N``."""
    from .curve_catalog import check_x0n_level

    check_x0n_level(N)
    logN = log_expr(N, g)
    return logN.times_symbol(PI, KAPPA0) * 16 - logN


def x0n_leading_coefficient() -> BoundExpression:
    """``16 pi kappa0 - 1``, the coefficient of ``g log N``."""
    return BoundExpression({Sym(PI, KAPPA0): 16, UNIT: -1})

