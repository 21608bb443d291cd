"""Special fibers as weighted crossing graphs, and the quantities read off them."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from sympy import isprime

from .errors import AdjunctionMismatch, InvalidFiber, SingleComponent
from .exact_core import as_rational, format_rational, parse_rational


@dataclass(frozen=True)
class ComponentRecord:
    name: str
    multiplicity: int = 1
    genus: int | None = 0
    local_degree: Fraction | None = None


@dataclass(frozen=True)
class SectionHit:
    """A horizontal section (cusp) with its width and its hits on the fiber."""

    name: str
    width: int
    hits: Mapping[int, int]  # component index -> S.C_i


@dataclass(frozen=True)
class DualStats:
    r: int
    u: int
    l: int
    c: int


@dataclass(frozen=True)
class SpecialFiber:
    prime_norm: int
    residue_char: int
    components: tuple[ComponentRecord, ...]
    crossings: Mapping[tuple[int, int], int]  # keys (i, j) with i < j
    sections: tuple[SectionHit, ...] = ()
    label: str = field(default="", compare=False)

    @classmethod
    def build(cls, prime_norm, residue_char, components, crossings, sections=(), label=""):
        """Normalise crossing keys to ``(min, max)`` and merge duplicates."""
        norm: dict[tuple[int, int], int] = {}
        for (i, j), k in dict(crossings).items():
            key = (min(i, j), max(i, j))
            norm[key] = norm.get(key, 0) + int(k)
        return cls(
            int(prime_norm),
            int(residue_char),
            tuple(components),
            dict(sorted(norm.items())),
            tuple(sections),
            label,
        )

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def multiplicities(self) -> list[int]:
        return [c.multiplicity for c in self.components]

    def index(self, name: str) -> int:
        for i, c in enumerate(self.components):
            if c.name == name:
                return i
        raise KeyError(name)

    def crossing(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("self-crossing is derived, not stored")
        return self.crossings.get((min(i, j), max(i, j)), 0)

    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.components]
        for (i, j), k in self.crossings.items():
            if k > 0:
                adj[i].append(j)
                adj[j].append(i)
        return adj


def _bfs_distances(adj, start):
    dist = [-1] * len(adj)
    dist[start] = 0
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def is_connected(f: SpecialFiber) -> bool:
    if not f.components:
        return False
    return min(_bfs_distances(f.neighbours(), 0)) >= 0


def validate_fiber(f: SpecialFiber, degree: int | None = None) -> list[str]:
    """Return human-readable violations; an empty list means the fiber is valid."""
    out = []
    if f.prime_norm < 2:
        out.append(f"prime_norm must be > 1, got {f.prime_norm}")
    if not isprime(f.residue_char):
        out.append(f"residue_char {f.residue_char} is not prime")
    elif f.prime_norm > 1:
        q = f.prime_norm
        while q % f.residue_char == 0:
            q //= f.residue_char
        if q != 1:
            out.append(f"prime_norm {f.prime_norm} is not a power of residue_char {f.residue_char}")
    if not f.components:
        out.append("fiber has no components")
        return out
    names = [c.name for c in f.components]
    if len(set(names)) != len(names):
        out.append("component names are not unique")
    for c in f.components:
        if c.multiplicity < 1:
            out.append(f"component {c.name}: multiplicity must be >= 1")
        if c.genus is not None and c.genus < 0:
            out.append(f"component {c.name}: genus must be >= 0")
        if c.local_degree is not None and c.local_degree < 0:
            out.append(f"component {c.name}: local_degree must be >= 0")
    n = f.size
    for (i, j), k in f.crossings.items():
        if not (0 <= i < n and 0 <= j < n):
            out.append(f"crossing ({i}, {j}) refers to a missing component")
        elif i == j:
            out.append(f"component {names[i]} crosses itself; self-intersections are derived")
        elif i > j:
            out.append(f"crossing key ({i}, {j}) is not normalised")
        if k < 0:
            out.append(f"crossing ({i}, {j}) is negative")
    if not out and not is_connected(f):
        out.append("Disconnected: fiber graph not connected")
    if degree is not None and all(c.local_degree is not None for c in f.components):
        total = sum((c.multiplicity * c.local_degree for c in f.components), Fraction(0))
        if total != degree:
            out.append(f"local degrees sum to {total}, expected covering degree {degree}")
    for s in f.sections:
        if s.width < 1:
            out.append(f"section {s.name}: width must be positive")
        bad = [i for i in s.hits if not 0 <= i < n]
        if bad:
            out.append(f"section {s.name}: hits unknown component index {bad}")
            continue
        if any(h < 0 for h in s.hits.values()):
            out.append(f"section {s.name}: negative hit")
        meet = sum(f.components[i].multiplicity * h for i, h in s.hits.items())
        if meet != 1:
            out.append(f"section {s.name}: meets the fiber with total multiplicity {meet}, expected 1")
    return out


def _require_valid(f: SpecialFiber):
    problems = validate_fiber(f)
    if problems:
        raise InvalidFiber(problems)


def self_intersections(f: SpecialFiber) -> list[Fraction]:
    """``C_i^2`` forced by the full fiber having zero intersection with every ``C_i``."""
    _require_valid(f)
    m = f.multiplicities
    out = []
    for i in range(f.size):
        s = sum(m[j] * f.crossing(i, j) for j in range(f.size) if j != i)
        out.append(-Fraction(s, m[i]))
    return out


def intersection_matrix(f: SpecialFiber) -> list[list[Fraction]]:
    diag = self_intersections(f)
    n = f.size
    return [[diag[i] if i == j else Fraction(f.crossing(i, j)) for j in range(n)] for i in range(n)]


def dual_graph_diameter(f: SpecialFiber) -> int:
    """Largest shortest-path edge count between two components (BFS from every vertex)."""
    adj = f.neighbours()
    best = 0
    for v in range(f.size):
        dist = _bfs_distances(adj, v)
        if min(dist) < 0:
            raise InvalidFiber(["Disconnected: fiber graph not connected"])
        best = max(best, max(dist))
    return best


def dual_graph_stats(f: SpecialFiber) -> DualStats:
    _require_valid(f)
    r = f.size
    if r < 2:
        err = SingleComponent("u, l and c are undefined for an irreducible fiber")
        err.r = r
        raise err
    values = [k for k in f.crossings.values() if k != 0]
    return DualStats(r=r, u=max(values), l=min(values), c=dual_graph_diameter(f))


def adjunction_values(f: SpecialFiber) -> list[Fraction]:
    """``omega . C_i = 2 p_a(C_i) - 2 - C_i^2`` for every component."""
    if any(c.genus is None for c in f.components):
        raise InvalidFiber(["omega restrictions need a genus on every component"])
    sq = self_intersections(f)
    return [2 * c.genus - 2 - s for c, s in zip(f.components, sq)]


def adjunction_sum(f: SpecialFiber) -> Fraction:
    vals = adjunction_values(f)
    return sum((c.multiplicity * v for c, v in zip(f.components, vals)), Fraction(0))


def omega_restrictions(f: SpecialFiber, g: int) -> list[Fraction]:
    """Vector of ``omega . C_i``; raises :class:`AdjunctionMismatch` unless the weighted sum is ``2g - 2``."""
    vals = adjunction_values(f)
    total = sum((c.multiplicity * v for c, v in zip(f.components, vals)), Fraction(0))
    if total != 2 * g - 2:
        raise AdjunctionMismatch(
            f"sum of m_i * (omega . C_i) is {total}, but 2g - 2 = {2 * g - 2} for g = {g}"
        )
    return vals


# ---------------------------------------------------------------------------
# JSON file format

_TOP_KEYS = {"prime_norm", "residue_char", "components", "crossings", "sections"}
_COMPONENT_KEYS = {"name", "multiplicity", "genus", "local_degree"}
_SECTION_KEYS = {"name", "width", "hits"}


class FiberFormatError(ValueError):
    """Raised for malformed fiber documents; ``line`` is set for JSON syntax errors."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - allowed)
    if extra:
        raise FiberFormatError(f"{where}: unknown keys {extra}")


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise FiberFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def fiber_from_json(doc: Mapping) -> SpecialFiber:
    if not isinstance(doc, Mapping):
        raise FiberFormatError("top level must be an object")
    _unknown(doc, _TOP_KEYS, "fiber")
    for key in ("prime_norm", "residue_char", "components"):
        if key not in doc:
            raise FiberFormatError(f"fiber: missing key {key!r}")
    comps = []
    for n, c in enumerate(doc["components"]):
        where = f"components[{n}]"
        if not isinstance(c, Mapping):
            raise FiberFormatError(f"{where}: expected an object")
        _unknown(c, _COMPONENT_KEYS, where)
        if "name" not in c:
            raise FiberFormatError(f"{where}: missing name")
        ld = c.get("local_degree")
        try:
            ld = None if ld is None else parse_rational(str(ld))
        except ValueError as exc:
            raise FiberFormatError(f"{where}.local_degree: {exc}") from None
        genus = c.get("genus", 0)
        comps.append(
            ComponentRecord(
                name=str(c["name"]),
                multiplicity=_int(c.get("multiplicity", 1), f"{where}.multiplicity"),
                genus=None if genus is None else _int(genus, f"{where}.genus"),
                local_degree=ld,
            )
        )
    index = {c.name: i for i, c in enumerate(comps)}
    crossings: dict[tuple[int, int], int] = {}
    for n, entry in enumerate(doc.get("crossings", [])):
        where = f"crossings[{n}]"
        if not isinstance(entry, Sequence) or isinstance(entry, str) or len(entry) != 3:
            raise FiberFormatError(f"{where}: expected [nameA, nameB, int]")
        a, b, k = entry
        if a not in index or b not in index:
            raise FiberFormatError(f"{where}: unknown component {a if a not in index else b!r}")
        if a == b:
            raise FiberFormatError(f"{where}: component {a!r} crosses itself")
        key = (min(index[a], index[b]), max(index[a], index[b]))
        if key in crossings:
            raise FiberFormatError(f"{where}: duplicate crossing {a}-{b}")
        crossings[key] = _int(k, f"{where}[2]")
    sections = []
    for n, s in enumerate(doc.get("sections", []) or []):
        where = f"sections[{n}]"
        if not isinstance(s, Mapping):
            raise FiberFormatError(f"{where}: expected an object")
        _unknown(s, _SECTION_KEYS, where)
        for key in _SECTION_KEYS:
            if key not in s:
                raise FiberFormatError(f"{where}: missing {key!r}")
        hits = {}
        for name, h in s["hits"].items():
            if name not in index:
                raise FiberFormatError(f"{where}.hits: unknown component {name!r}")
            hits[index[name]] = _int(h, f"{where}.hits.{name}")
        sections.append(SectionHit(str(s["name"]), _int(s["width"], f"{where}.width"), hits))
    return SpecialFiber.build(
        _int(doc["prime_norm"], "prime_norm"),
        _int(doc["residue_char"], "residue_char"),
        comps,
        crossings,
        sections,
    )


def fiber_to_json(f: SpecialFiber) -> dict:
    names = [c.name for c in f.components]
    return {
        "prime_norm": f.prime_norm,
        "residue_char": f.residue_char,
        "components": [
            {
                "name": c.name,
                "multiplicity": c.multiplicity,
                "genus": c.genus,
                "local_degree": None if c.local_degree is None else format_rational(c.local_degree),
            }
            for c in f.components
        ],
        "crossings": [[names[i], names[j], k] for (i, j), k in f.crossings.items()],
        "sections": [
            {"name": s.name, "width": s.width, "hits": {names[i]: h for i, h in sorted(s.hits.items())}}
            for s in f.sections
        ],
    }


def loads_fiber(text: str) -> SpecialFiber:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FiberFormatError(exc.msg, line=exc.lineno) from None
    return fiber_from_json(doc)


def load_fiber(path) -> SpecialFiber:
    with open(path, encoding="utf-8") as fh:
        return loads_fiber(fh.read())


def dumps_fiber(f: SpecialFiber) -> str:
    return json.dumps(fiber_to_json(f), indent=2, ensure_ascii=False)


def with_local_degrees(f: SpecialFiber, degrees: Sequence) -> SpecialFiber:
    comps = [
        ComponentRecord(c.name, c.multiplicity, c.genus, as_rational(d))
        for c, d in zip(f.components, degrees, strict=True)
    ]
    return SpecialFiber(f.prime_norm, f.residue_char, tuple(comps), f.crossings, f.sections, f.label)
