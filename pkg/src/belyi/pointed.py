"""Pointed triples and pointed passports.

A pointed triple marks one cycle of ``sigma_s`` for ``s in {0, 1, inf}``.
The automorphism group of the triple permutes the cycles of each ``sigma_s``;
its orbits are the pointed classes, and the stabilizer order ``a`` together
with the base ``s`` and cycle length ``e`` is the pointed datum ``(s, e, a)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .passports import Passport
from .perm import PermGroup, PermutationTriple, _centralizer_sym, _cycles, _group_from_elements

BASE_LABELS = ("0", "1", "inf")


def base_index(s) -> int:
    """Accepts 0/1/2 or the labels ``'0'``, ``'1'``, ``'inf'``."""
    if isinstance(s, str):
        s = s.strip().lower()
        if s in ("inf", "oo", "infinity", "∞"):
            return 2
        return BASE_LABELS.index(s)
    if s not in (0, 1, 2):
        raise ValueError(f"base must be 0, 1 or inf, got {s!r}")
    return s


@dataclass(frozen=True)
class PointedTriple:
    triple: PermutationTriple
    base: int
    cycle: tuple  # 1-based points, in the cyclic order of sigma_base

    def __post_init__(self):
        _check_cycle(self.triple, self.base, self.cycle)

    @property
    def datum(self) -> tuple:
        return (self.base, len(self.cycle), pointed_aut(self.triple, self.base, self.cycle).order)


@dataclass
class PointedPassport:
    passport: Passport
    base: int
    length: int
    aut_order: int
    size: int
    contributors: int = 0  # number of triple classes with at least one such cycle
    per_triple: list = field(default_factory=list)

    @property
    def base_label(self) -> str:
        return BASE_LABELS[self.base]

    @property
    def datum(self) -> tuple:
        return (self.base_label, self.length, self.aut_order)

    def __repr__(self) -> str:
        return (f"PointedPassport(s={self.base_label}, e={self.length}, "
                f"a={self.aut_order}, size={self.size})")


def _check_cycle(t, s, cycle):
    s = base_index(s)
    perm = t[s]
    pts = [int(x) for x in cycle]
    if not pts:
        raise ValueError("empty cycle")
    for a, b in zip(pts, pts[1:] + pts[:1]):
        if perm(a) != b:
            raise ValueError(f"{tuple(pts)} is not a cycle of sigma_{BASE_LABELS[s]}")


def _aut_raw(t):
    return _centralizer_sym([t.sigma0._img, t.sigma1._img], t.degree)


def pointed_aut(t: PermutationTriple, s, cycle) -> PermGroup:
    """Automorphisms of ``t`` mapping the given cycle of ``sigma_s`` to itself."""
    s = base_index(s)
    _check_cycle(t, s, cycle)
    support = frozenset(int(x) - 1 for x in cycle)
    keep = [a for a in _aut_raw(t) if all(a[x] in support for x in support)]
    return _group_from_elements(t.degree, keep)


def cycle_orbits(t: PermutationTriple, s, aut=None) -> list[tuple[list, int]]:
    """Orbits of ``Aut(t)`` on the cycles of ``sigma_s``.

    Returns ``(cycles, a)`` pairs: the cycles of one orbit (0-based supports)
    and the order of the stabilizer of any of them.
    """
    s = base_index(s)
    aut = _aut_raw(t) if aut is None else aut
    cycles = [frozenset(c) for c in _cycles(t[s]._img)]
    seen = set()
    out = []
    for c in sorted(cycles, key=lambda c: (-len(c), min(c))):
        if c in seen:
            continue
        orbit = {frozenset(a[x] for x in c) for a in aut}
        seen |= orbit
        out.append((sorted(orbit, key=min), len(aut) // len(orbit)))
    return out


def pointed_classes(p: Passport) -> list[PointedPassport]:
    """Sizes of all nonempty pointed passports refining ``p``.

    Ordered by base (0, 1, inf), then decreasing cycle length, then ``a``.
    """
    counts = defaultdict(lambda: [0] * p.size)
    for i, t in enumerate(p.triples):
        aut = _aut_raw(t)
        for s in range(3):
            for orbit, a in cycle_orbits(t, s, aut):
                counts[(s, len(orbit[0]), a)][i] += 1
    out = []
    for (s, e, a), per in sorted(counts.items(), key=lambda kv: (kv[0][0], -kv[0][1], kv[0][2])):
        out.append(PointedPassport(p, s, e, a, sum(per), sum(1 for x in per if x), per))
    return out


def moduli_degree_bound(pp: PointedPassport) -> int:
    """Upper bound on the degree of a field of definition for maps in ``pp``."""
    if pp.size < 1:
        raise ValueError("empty pointed passport")
    return pp.size


def descent_witness(p: Passport, pointed: list[PointedPassport] | None = None):
    """The first ``(s, e, a)`` refinement of the same size as ``p`` that every class meets."""
    pointed = pointed_classes(p) if pointed is None else pointed
    for pp in pointed:
        if pp.size == p.size and pp.contributors == p.size:
            return pp
    return None


def descends_by_size(p: Passport, pointed: list[PointedPassport] | None = None) -> bool:
    """Whether some pointed refinement has the same size as ``p`` and covers it."""
    return descent_witness(p, pointed) is not None
