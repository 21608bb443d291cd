"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd

from arakelov.fiber_model import ComponentRecord, SectionHit, SpecialFiber


def x0n_levels(limit: int = 200) -> list[int]:
    """Square-free N <= limit, coprime to 6, with at least two prime factors (trial division)."""
    out = []
    for N in range(5, limit + 1):
        if gcd(N, 6) != 1:
            continue
        primes, m, q = [], N, 2
        ok = True
        while q * q <= m:
            if m % q == 0:
                m //= q
                if m % q == 0:
                    ok = False
                    break
                primes.append(q)
            q += 1
        if m > 1:
            primes.append(m)
        if ok and len(primes) >= 2:
            out.append(N)
    return out


def prime_divisors(N: int) -> list[int]:
    return [p for p in range(2, N + 1) if N % p == 0 and all(p % q for q in range(2, int(p**0.5) + 1))]


def random_fiber(rng: random.Random, max_size: int = 7, n_sections: int | None = None) -> tuple[SpecialFiber, int, int]:
    """Random connected reduced fiber with sections; returns ``(fiber, g, d)``.

    Every component has multiplicity one, so ``C_i^2`` is minus the number of
    crossings on it and the arithmetic genus is ``sum p_i + b_1(graph)``.
    """
    while True:
        n = rng.randint(2, max_size)
        crossings = {}
        for i in range(1, n):
            crossings[(rng.randrange(i), i)] = rng.randint(1, 3)
        for _ in range(rng.randint(0, n)):
            i, j = sorted(rng.sample(range(n), 2))
            crossings[(i, j)] = crossings.get((i, j), 0) + rng.randint(1, 2)
        genera = [rng.choice([0, 0, 0, 1, 2]) for _ in range(n)]
        edges = sum(crossings.values())
        g = sum(genera) + edges - n + 1
        if g >= 2:
            break
    k = n_sections or rng.randint(1, 4)
    widths = [rng.randint(1, 9) for _ in range(k)]
    d = sum(widths)
    # local degrees: nonnegative rationals summing to d
    raw = [rng.randint(0, 5) for _ in range(n)]
    raw[rng.randrange(n)] += 1
    total = sum(raw)
    degrees = [Fraction(d * x, total) for x in raw]
    comps = [ComponentRecord(f"C{i}", 1, genera[i], degrees[i]) for i in range(n)]
    sections = [SectionHit(f"s{j}", w, {rng.randrange(n): 1}) for j, w in enumerate(widths)]
    char, power = rng.choice([(2, 1), (2, 2), (3, 1), (3, 2), (5, 1), (7, 1), (11, 1)])
    return SpecialFiber.build(char**power, char, comps, crossings, sections), g, d
