"""Exact Green kernels on a finite measured space.

A ``DiscreteSurface`` is a symmetric positive-semidefinite form ``Q`` whose
kernel is the constants, together with a probability measure.  The Green
kernel normalised against ``nu`` is the unique symmetric ``G`` with
``Q G = I - nu 1^T`` and ``nu^T G = 0``; with ``Delta_mu = D_mu^{-1} Q``
all the change-of-measure identities then hold on the nose.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AmbiguousKernel, EigenFailure, InvalidMeasure, InvalidSurface
from .exact_core import is_symmetric, mat_vec, solve_pinned


@dataclass(frozen=True)
class DiscreteSurface:
    Q: tuple[tuple[Fraction, ...], ...]
    mu: tuple[Fraction, ...]

    @classmethod
    def build(cls, Q, mu) -> "DiscreteSurface":
        s = cls(tuple(tuple(Fraction(v) for v in row) for row in Q), tuple(Fraction(v) for v in mu))
        validate_surface(s)
        return s

    @property
    def n(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class GreenKernel:
    G: tuple[tuple[Fraction, ...], ...]
    measure: tuple[Fraction, ...]


def validate_measure(nu, n: int):
    if len(nu) != n:
        raise InvalidMeasure(f"measure has {len(nu)} entries, expected {n}")
    if any(v <= 0 for v in nu):
        raise InvalidMeasure("measure must be strictly positive")
    if sum(nu) != 1:
        raise InvalidMeasure(f"measure sums to {sum(nu)}, expected 1")


def validate_surface(s: DiscreteSurface):
    n = len(s.Q)
    if n < 2:
        raise InvalidSurface("surface needs at least two points")
    if any(len(row) != n for row in s.Q):
        raise InvalidSurface("Q is not square")
    if not is_symmetric(s.Q):
        raise InvalidSurface("Q is not symmetric")
    if any(sum(row) != 0 for row in s.Q):
        raise InvalidSurface("Q does not annihilate constants")
    # kernel exactly the constants: Q x = e_0 - e_1 must be solvable uniquely after pinning
    try:
        solve_pinned(s.Q, [[1, -1] + [0] * (n - 2)], 0)
    except AmbiguousKernel:
        raise InvalidSurface("kernel of Q is larger than the constants (disconnected)") from None
    validate_measure(s.mu, n)
    eig = np.linalg.eigvalsh(np.array(s.Q, dtype=float))
    if eig.min() < -1e-9 * max(1.0, abs(eig).max()):
        raise InvalidSurface("Q is not positive semidefinite")


def green_matrix(s: DiscreteSurface, nu=None) -> GreenKernel:
    """Green kernel normalised against ``nu`` (default: the surface measure)."""
    nu = s.mu if nu is None else tuple(Fraction(v) for v in nu)
    n = s.n
    validate_measure(nu, n)
    rhs = [[(1 if i == w else 0) - nu[i] for i in range(n)] for w in range(n)]
    cols = solve_pinned(s.Q, rhs, 0)
    # shift each column by a constant so that its nu-mean vanishes
    for col in cols:
        mean = sum(a * b for a, b in zip(nu, col))
        for i in range(n):
            col[i] -= mean
    G = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
    return GreenKernel(G, nu)


def change_of_measure(s: DiscreteSurface, mu, nu):
    """``(a, c)`` with ``a = -G_mu nu`` and ``c = nu^T G_mu nu``."""
    Gmu = green_matrix(s, mu)
    nu = tuple(Fraction(v) for v in nu)
    validate_measure(nu, s.n)
    a = [-v for v in mat_vec(Gmu.G, nu)]
    c = -sum(x * y for x, y in zip(a, nu))
    return a, c


@dataclass
class IdentityReport:
    checks: list[tuple[str, bool]]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    @property
    def first_failure(self) -> str | None:
        return next((name for name, ok in self.checks if not ok), None)


def _kernel_checks(s, K: GreenKernel, label):
    n = s.n
    G, nu = K.G, K.measure
    QG = [[sum(s.Q[i][k] * G[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    target = [[(1 if i == j else 0) - nu[i] for j in range(n)] for i in range(n)]
    return [
        (f"{label}: Q G = I - nu 1^T", QG == target),
        (f"{label}: nu^T G = 0", all(sum(nu[i] * G[i][j] for i in range(n)) == 0 for j in range(n))),
        (f"{label}: G symmetric", is_symmetric(G)),
    ]


def verify_green_identities(s: DiscreteSurface, mu, nu, kernels=None) -> IdentityReport:
    """Check kernel equations, the resolvent identity, the change-of-measure
    formula and the integrated second-variable identity, all exactly.

    ``kernels`` may supply precomputed ``(K_mu, K_nu)`` (used to inject a
    broken kernel as a negative control).
    """
    mu = tuple(Fraction(v) for v in mu)
    nu = tuple(Fraction(v) for v in nu)
    n = s.n
    Kmu, Knu = kernels or (green_matrix(s, mu), green_matrix(s, nu))
    checks = _kernel_checks(s, Kmu, "g_mu") + _kernel_checks(s, Knu, "g_nu")

    # resolvent: Delta_nu (G_nu D_nu f) = f for nu-mean-zero f; f = e_0/nu_0 - e_1/nu_1
    f = [Fraction(0)] * n
    f[0], f[1] = 1 / nu[0], -1 / nu[1]
    h = mat_vec(Knu.G, [a * b for a, b in zip(nu, f)])
    lap = [v / nu[i] for i, v in enumerate(mat_vec(s.Q, h))]
    checks.append(("resolvent: Delta_nu G_nu D_nu f = f", lap == f))

    Gmu, Gnu = Kmu.G, Knu.G
    a = [-v for v in mat_vec(Gmu, nu)]
    c = -sum(x * y for x, y in zip(a, nu))
    checks.append(
        (
            "change of measure: g_nu = g_mu + a(z) + a(w) + c",
            all(Gnu[z][w] == Gmu[z][w] + a[z] + a[w] + c for z in range(n) for w in range(n)),
        )
    )
    weight = [x + y for x, y in zip(mu, nu)]
    checks.append(
        (
            "second variable: sum_z (g_nu - g_mu)(z,P)(mu+nu)(z) = 2 a(P) + c",
            all(
                sum((Gnu[z][P] - Gmu[z][P]) * weight[z] for z in range(n)) == 2 * a[P] + c
                for P in range(n)
            ),
        )
    )
    checks.append(("c >= 0", c >= 0))
    checks.append(("c = 0 iff mu = nu", (c == 0) == (mu == nu)))
    return IdentityReport(checks)


def first_nonzero_eigenvalue(s: DiscreteSurface, mu) -> float:
    """Smallest nonzero eigenvalue of ``D_mu^{-1} Q`` via the symmetrised form."""
    w = np.array([float(v) for v in mu])
    Q = np.array(s.Q, dtype=float)
    S = Q / np.sqrt(np.outer(w, w))
    try:
        eig = np.linalg.eigvalsh(S)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.all(np.isfinite(eig)) or len(eig) < 2:
        raise EigenFailure("eigenvalues are not finite")
    return float(eig[1])


@dataclass(frozen=True)
class SpectralCheck:
    c_exact: Fraction
    bound_resolvent: float
    bound_paper: float
    lambda1: float
    f_norm_sq: Fraction

    def holds(self, rel_tol: float = 1e-10) -> bool:
        c = float(self.c_exact)
        slack = rel_tol * max(abs(self.bound_resolvent), 1e-300)
        return 0 <= self.c_exact and c <= self.bound_resolvent + slack and self.bound_resolvent <= self.bound_paper


def spectral_bound_check(s: DiscreteSurface, mu, nu) -> SpectralCheck:
    """Compare ``c_{mu,nu}`` with ``||f||^2 / lambda_1`` and ``2 ||f||^2 / lambda_1`` where ``nu = (1+f) mu``."""
    mu = tuple(Fraction(v) for v in mu)
    nu = tuple(Fraction(v) for v in nu)
    _, c = change_of_measure(s, mu, nu)
    f = [y / x - 1 for x, y in zip(mu, nu)]
    norm = sum(x * v * v for x, v in zip(mu, f))
    lam = first_nonzero_eigenvalue(s, mu)
    if not lam > 0:
        raise EigenFailure(f"first nonzero eigenvalue is not positive: {lam}")
    return SpectralCheck(c, float(norm) / lam, 2 * float(norm) / lam, lam, norm)


# ---------------------------------------------------------------------------
# random instances


def _random_measure(rng: random.Random, n: int, scale: int = 20) -> tuple[Fraction, ...]:
    w = [rng.randint(1, scale) for _ in range(n)]
    t = sum(w)
    return tuple(Fraction(x, t) for x in w)


def random_surface(rng: random.Random, n: int) -> DiscreteSurface:
    """Weighted graph Laplacian on a random connected graph with rational weights."""
    Q = [[Fraction(0)] * n for _ in range(n)]
    edges = {(rng.randrange(i), i) for i in range(1, n)}  # random spanning tree
    for _ in range(rng.randint(0, n)):
        i, j = rng.sample(range(n), 2)
        edges.add((min(i, j), max(i, j)))
    for i, j in edges:
        w = Fraction(rng.randint(1, 9), rng.randint(1, 5))
        Q[i][j] -= w
        Q[j][i] -= w
        Q[i][i] += w
        Q[j][j] += w
    return DiscreteSurface.build(Q, _random_measure(rng, n))


def random_instance(seed: int, n: int):
    rng = random.Random(seed)
    s = random_surface(rng, n)
    return s, s.mu, _random_measure(rng, n)
