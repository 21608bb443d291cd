"""Exact rational linear algebra and the two symbolic value types.

Everything here works over :class:`fractions.Fraction`; no floating point
enters until one of the explicit ``evaluate`` functions is called.
"""

from __future__ import annotations

import math
from collections import namedtuple
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from sympy import factorint

from .errors import AmbiguousKernel, DimensionMismatch, Inconsistent, UnboundSymbol

Rational = Fraction


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(value)


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` or ``"num"``. Accepts a unicode minus sign."""
    text = text.strip().replace("−", "-")
    if not text:
        raise ValueError("empty rational")
    num, sep, den = text.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def format_rational(q) -> str:
    q = as_rational(q)
    return f"{q.numerator}/{q.denominator}"


def prime_expand(n: int) -> dict[int, int]:
    """``{p: v_p(n)}`` for an integer ``n >= 1``."""
    if n < 1:
        raise ValueError(f"cannot take log of {n}")
    return {int(p): int(e) for p, e in factorint(n).items()}


# ---------------------------------------------------------------------------
# linear algebra


def _check_square(M: Sequence[Sequence]) -> int:
    n = len(M)
    for row in M:
        if len(row) != n:
            raise DimensionMismatch(f"matrix is not square ({n} rows, row of length {len(row)})")
    return n


def mat_vec(M, x) -> list[Fraction]:
    if any(len(row) != len(x) for row in M):
        raise DimensionMismatch("matrix/vector sizes differ")
    return [sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in M]


def quadratic_form(M, x) -> Fraction:
    """Exact ``x^T M x``."""
    n = _check_square(M)
    if len(x) != n:
        raise DimensionMismatch(f"vector of length {len(x)} against {n}x{n} matrix")
    x = [as_rational(v) for v in x]
    total = Fraction(0)
    for i, row in enumerate(M):
        if x[i]:
            total += x[i] * sum((as_rational(a) * b for a, b in zip(row, x) if b), Fraction(0))
    return total


def is_symmetric(M) -> bool:
    n = len(M)
    return all(M[i][j] == M[j][i] for i in range(n) for j in range(i + 1, n))


def solve_pinned(M, rhs: Sequence[Sequence], pin_index: int = 0) -> list[list[Fraction]]:
    """Solve ``M x = b`` with ``x[pin_index] = 0`` for several right-hand sides.

    ``rhs`` is a list of vectors; returns one solution vector per entry.
    The pinned column is dropped and the remaining (n x n-1) system is
    row-reduced once for all right-hand sides.
    """
    n = _check_square(M)
    if not 0 <= pin_index < n:
        raise IndexError(f"pin_index {pin_index} out of range for dimension {n}")
    k = len(rhs)
    for b in rhs:
        if len(b) != n:
            raise DimensionMismatch(f"rhs of length {len(b)} against dimension {n}")
    cols = [j for j in range(n) if j != pin_index]
    m = len(cols)
    # augmented rows: [M[i][cols] | b_1[i] ... b_k[i]]
    A = [[as_rational(M[i][j]) for j in cols] + [as_rational(b[i]) for b in rhs] for i in range(n)]

    pivots = []
    row = 0
    for col in range(m):
        piv = next((r for r in range(row, n) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = 1 / A[row][col]
        prow = [v * inv for v in A[row]]
        A[row] = prow
        for r in range(n):
            if r != row and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * p for a, p in zip(A[r], prow)]
        pivots.append(col)
        row += 1
        if row == n:
            break

    for r in range(row, n):
        if any(A[r][m + t] != 0 for t in range(k)):
            raise Inconsistent("right-hand side is not in the column space")
    if len(pivots) < m:
        raise AmbiguousKernel(
            f"kernel has dimension {m - len(pivots) + 1} > 1 after pinning; fiber graph disconnected?"
        )

    out = []
    for t in range(k):
        x = [Fraction(0)] * n
        for r, col in enumerate(pivots):
            x[cols[col]] = A[r][m + t]
        out.append(x)
    return out


def solve_singular_symmetric(M, b, pin_index: int = 0) -> list[Fraction]:
    """Solve ``M x = b`` for symmetric, possibly singular ``M`` with ``x[pin_index] = 0``.

    Raises :class:`Inconsistent` when ``b`` is outside the column space and
    :class:`AmbiguousKernel` when pinning one coordinate does not determine
    the solution.
    """
    n = _check_square(M)
    if not is_symmetric(M):
        raise DimensionMismatch("matrix is not symmetric")
    if len(b) != n:
        raise DimensionMismatch(f"rhs of length {len(b)} against dimension {n}")
    return solve_pinned(M, [b], pin_index)[0]


# ---------------------------------------------------------------------------
# FormalLogSum


class FormalLogSum:
    """Exact finite sum ``sum q_n * log(n)`` over integer atoms ``n > 1``.

    Atoms are kept as given (typically prime norms). :meth:`expanded`
    rewrites everything over prime atoms, which is the form used for
    equality comparisons across differently-built sums.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Fraction] = {}
        for atom, coeff in items:
            atom = int(atom)
            if atom < 1:
                raise ValueError(f"log atom must be a positive integer, got {atom}")
            if atom == 1:
                continue
            acc[atom] = acc.get(atom, Fraction(0)) + as_rational(coeff)
        self._terms = {a: c for a, c in sorted(acc.items()) if c != 0}

    @classmethod
    def log(cls, n: int, coeff=1) -> "FormalLogSum":
        """``coeff * log n`` expanded over the primes of ``n``."""
        c = as_rational(coeff)
        return cls({p: c * e for p, e in prime_expand(n).items()})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, atom: int) -> Fraction:
        return self._terms.get(atom, Fraction(0))

    def expanded(self) -> "FormalLogSum":
        out: dict[int, Fraction] = {}
        for atom, c in self._terms.items():
            for p, e in prime_expand(atom).items():
                out[p] = out.get(p, Fraction(0)) + c * e
        return FormalLogSum(out)

    def evaluate(self) -> float:
        return math.fsum(float(c) * math.log(a) for a, c in self._terms.items())

    def __add__(self, other):
        if not isinstance(other, FormalLogSum):
            return NotImplemented
        return FormalLogSum(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self):
        return FormalLogSum({a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, FormalLogSum):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        s = as_rational(scalar)
        return FormalLogSum({a: s * c for a, c in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, FormalLogSum):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"FormalLogSum({ {a: str(c) for a, c in self._terms.items()} })"

    def to_json(self) -> dict[str, str]:
        return {str(a): format_rational(c) for a, c in self._terms.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "FormalLogSum":
        return cls({int(a): parse_rational(c) for a, c in data.items()})


def eval_logsum(s: FormalLogSum) -> float:
    return s.evaluate()


# ---------------------------------------------------------------------------
# BoundExpression

# A monomial: product of named symbols (sorted tuple, possibly empty) times
# an optional prime log.  Unit = ((), None).
Atom = namedtuple("Atom", ["symbols", "log"])

UNIT = Atom((), None)


def Sym(*names: str) -> Atom:
    return Atom(tuple(sorted(names)), None)


def Log(p: int) -> Atom:
    """Log atom; ``p`` must be prime (use :func:`log_expr` for composites)."""
    return Atom((), int(p))


def SymTimesLog(names, p: int) -> Atom:
    if isinstance(names, str):
        names = (names,)
    return Atom(tuple(sorted(names)), int(p))


class BoundExpression:
    """Exact linear combination of symbolic monomials.

    Log atoms are canonicalised over primes at construction, so two
    expressions are equal iff they agree term by term.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Atom, object] | Iterable[tuple[Atom, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Atom, Fraction] = {}
        for atom, coeff in items:
            atom = Atom(tuple(sorted(atom[0])), atom[1])
            c = as_rational(coeff)
            if atom.log is None:
                parts = [(atom, c)]
            else:
                if atom.log < 1:
                    raise ValueError(f"log atom must be >= 1, got {atom.log}")
                parts = [(Atom(atom.symbols, p), c * e) for p, e in prime_expand(atom.log).items()]
            for a, v in parts:
                acc[a] = acc.get(a, Fraction(0)) + v
        self._terms = {a: c for a, c in sorted(acc.items(), key=_atom_key) if c != 0}

    # constructors -----------------------------------------------------------
    @classmethod
    def constant(cls, value) -> "BoundExpression":
        return cls({UNIT: value})

    @classmethod
    def symbol(cls, *names: str, coeff=1) -> "BoundExpression":
        return cls({Sym(*names): coeff})

    @classmethod
    def from_logsum(cls, s: FormalLogSum) -> "BoundExpression":
        return cls({Atom((), a): c for a, c in s.items()})

    # algebra ------------------------------------------------------------------
    @property
    def terms(self) -> dict[Atom, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, atom: Atom) -> Fraction:
        atom = Atom(tuple(sorted(atom[0])), atom[1])
        return self._terms.get(atom, Fraction(0))

    def symbols(self) -> set[str]:
        return {s for a in self._terms for s in a.symbols}

    def times_symbol(self, *names: str) -> "BoundExpression":
        return BoundExpression({Atom(a.symbols + tuple(names), a.log): c for a, c in self._terms.items()})

    def times_log(self, n: int) -> "BoundExpression":
        """Multiply every log-free term by ``log n``."""
        out = []
        for a, c in self._terms.items():
            if a.log is not None:
                raise ValueError("product of two logs is not representable")
            out.append((Atom(a.symbols, n), c))
        return BoundExpression(out)

    def substitute(self, bindings: Mapping[str, object]) -> "BoundExpression":
        """Replace symbols by exact rationals (other symbols stay symbolic)."""
        out = []
        for a, c in self._terms.items():
            keep = []
            for s in a.symbols:
                if s in bindings:
                    c = c * as_rational(bindings[s])
                else:
                    keep.append(s)
            out.append((Atom(tuple(keep), a.log), c))
        return BoundExpression(out)

    def evaluate(self, bindings: Mapping[str, float] | None = None) -> float:
        env = {"pi": math.pi}
        env.update(bindings or {})
        parts = []
        for a, c in self._terms.items():
            v = float(c)
            for s in a.symbols:
                if s not in env:
                    raise UnboundSymbol(s)
                v *= float(env[s])
            if a.log is not None:
                v *= math.log(a.log)
            parts.append(v)
        return math.fsum(parts)

    def __add__(self, other):
        if isinstance(other, FormalLogSum):
            other = BoundExpression.from_logsum(other)
        elif not isinstance(other, BoundExpression):
            try:
                other = BoundExpression.constant(other)
            except TypeError:
                return NotImplemented
        return BoundExpression(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return BoundExpression({a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        return self + _negate(other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, (BoundExpression, FormalLogSum)):
            return NotImplemented
        s = as_rational(scalar)
        return BoundExpression({a: s * c for a, c in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, BoundExpression):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"BoundExpression({self.display()!r})"

    def display(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for a, c in self._terms.items():
            factors = list(a.symbols) + ([f"log({a.log})"] if a.log is not None else [])
            mag = abs(c)
            if factors:
                head = "" if mag == 1 else f"{_fmt_plain(mag)}*"
                body = head + "*".join(factors)
            else:
                body = _fmt_plain(mag)
            pieces.append(("-" if c < 0 else "+", body))
        sign, first = pieces[0]
        out = ("-" if sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def to_json(self) -> list[dict]:
        return [
            {"coeff": format_rational(c), "symbols": list(a.symbols), "log": a.log}
            for a, c in self._terms.items()
        ]

    @classmethod
    def from_json(cls, data) -> "BoundExpression":
        return cls((Atom(tuple(t["symbols"]), t["log"]), parse_rational(t["coeff"])) for t in data)


def _negate(other):
    if isinstance(other, FormalLogSum):
        return BoundExpression.from_logsum(-other)
    if isinstance(other, BoundExpression):
        return -other
    return BoundExpression.constant(-as_rational(other))


def _atom_key(item):
    a = item[0]
    return (len(a.symbols), a.symbols, -1 if a.log is None else a.log)


def _fmt_plain(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def log_expr(n: int, coeff=1) -> BoundExpression:
    """``coeff * log n`` as a BoundExpression over prime atoms."""
    return BoundExpression({Atom((), n): coeff})


def eval_bound_expr(e: BoundExpression, bindings: Mapping[str, float] | None = None) -> float:
    return e.evaluate(bindings)
