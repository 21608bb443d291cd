"""Correction divisors G_j, F_j on a fiber and the geometric contribution a_p."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import InvalidFiber, Inconsistent, WidthMismatch
from .exact_core import FormalLogSum, mat_vec, quadratic_form, solve_pinned
from .fiber_model import SectionHit, SpecialFiber, intersection_matrix, omega_restrictions, validate_fiber


@dataclass(frozen=True)
class VerticalDivisor:
    fiber: SpecialFiber
    coefficients: tuple[Fraction, ...]
    pin: int = 0

    def __post_init__(self):
        if len(self.coefficients) != self.fiber.size:
            raise ValueError("one coefficient per component expected")
        if self.coefficients[self.pin] != 0:
            raise ValueError("pinned coordinate must be zero")

    @property
    def self_intersection(self) -> Fraction:
        return quadratic_form(intersection_matrix(self.fiber), self.coefficients)


@dataclass
class GeometricContribution:
    value: FormalLogSum
    per_prime: dict[int, Fraction]
    per_cusp_G2: dict[tuple[int, str], Fraction] = field(default_factory=dict)
    per_cusp_F2: dict[tuple[int, str], Fraction] = field(default_factory=dict)
    widths: dict[tuple[int, str], int] = field(default_factory=dict)


def _solve(f: SpecialFiber, rhs, pin: int) -> VerticalDivisor:
    M = intersection_matrix(f)
    x = solve_pinned(M, [rhs], pin)[0]
    if mat_vec(M, x) != list(rhs):
        raise Inconsistent("post-solve residual is not zero")
    return VerticalDivisor(f, tuple(x), pin)


def _hit_vector(f: SpecialFiber, s: SectionHit) -> list[int]:
    v = [0] * f.size
    for i, h in s.hits.items():
        v[i] = h
    return v


def g_rhs(f: SpecialFiber, s: SectionHit, d: int) -> list[Fraction]:
    """``(1/d) deg(L|C_i) - S.C_i``: what ``G . C_i`` must equal."""
    hits = _hit_vector(f, s)
    return [Fraction(c.local_degree) / d - h for c, h in zip(f.components, hits)]


def f_rhs(f: SpecialFiber, s: SectionHit, g: int) -> list[Fraction]:
    hits = _hit_vector(f, s)
    omega = omega_restrictions(f, g)
    return [w / (2 * g - 2) - h for w, h in zip(omega, hits)]


def solve_G(f: SpecialFiber, s: SectionHit, d: int, pin: int = 0) -> VerticalDivisor:
    """Vertical divisor ``G`` with ``(S + G - (1/d) beta^* inf) . C_i = 0`` for every component."""
    if any(c.local_degree is None for c in f.components):
        raise InvalidFiber(["solve_G needs a local_degree on every component"])
    problems = validate_fiber(f, degree=d)
    if problems:
        raise InvalidFiber(problems)
    return _solve(f, g_rhs(f, s, d), pin)


def solve_F(f: SpecialFiber, s: SectionHit, g: int, pin: int = 0) -> VerticalDivisor:
    """Vertical divisor ``F`` with ``(S + F - K/(2g-2)) . C_i = 0`` for every component."""
    problems = validate_fiber(f)
    if problems:
        raise InvalidFiber(problems)
    return _solve(f, f_rhs(f, s, g), pin)


def divisor_self_intersection(D: VerticalDivisor) -> FormalLogSum:
    return FormalLogSum({D.fiber.prime_norm: D.self_intersection})


def fiber_divisors(f: SpecialFiber, g: int, d: int) -> dict[str, tuple[VerticalDivisor, VerticalDivisor]]:
    """``{cusp: (G_j, F_j)}`` on one fiber after checking ``sum b_j = d``."""
    if not f.sections:
        raise WidthMismatch(f"fiber over {f.prime_norm} carries no section data")
    total = sum(s.width for s in f.sections)
    if total != d:
        raise WidthMismatch(f"section widths sum to {total} over {f.prime_norm}, expected d = {d}")
    return {s.name: (solve_G(f, s, d), solve_F(f, s, g)) for s in f.sections}


def fiber_sums(f: SpecialFiber, g: int, d: int):
    """Per-cusp ``G_j^2``, ``F_j^2`` on one fiber, keyed by section name."""
    divs = fiber_divisors(f, g, d)
    G2 = {name: G.self_intersection for name, (G, _) in divs.items()}
    F2 = {name: F.self_intersection for name, (_, F) in divs.items()}
    return G2, F2


def ap_from_sums(g: int, d: int, weighted_G2: Fraction, weighted_F2: Fraction) -> Fraction:
    """``a_p = -(2g/d) sum b_j G_j^2 + ((2g-2)/d) sum b_j F_j^2``."""
    return Fraction(-2 * g, d) * weighted_G2 + Fraction(2 * g - 2, d) * weighted_F2


def geometric_contribution(fibers: Iterable[SpecialFiber], g: int, d: int) -> GeometricContribution:
    per_prime: dict[int, Fraction] = {}
    G2s, F2s, widths = {}, {}, {}
    for f in fibers:
        G2, F2 = fiber_sums(f, g, d)
        wG = sum((s.width * G2[s.name] for s in f.sections), Fraction(0))
        wF = sum((s.width * F2[s.name] for s in f.sections), Fraction(0))
        key = f.prime_norm
        per_prime[key] = per_prime.get(key, Fraction(0)) + ap_from_sums(g, d, wG, wF)
        for s in f.sections:
            G2s[(key, s.name)] = G2[s.name]
            F2s[(key, s.name)] = F2[s.name]
            widths[(key, s.name)] = s.width
    per_prime = dict(sorted(per_prime.items()))
    return GeometricContribution(FormalLogSum(per_prime), per_prime, G2s, F2s, widths)
