"""Enumeration of transitive permutation triples and their passports.

Two enumeration modes are provided.

* ``enumerate_group(G)`` follows the per-group recipe: conjugacy classes of
  ``G`` up to its normalizer ``N``, then one pair per double coset
  ``Z_N(tau0) \\ N / Z_N(tau1)``, keeping pairs that generate ``G``.
* ``enumerate_degree(d)`` needs no list of transitive groups.  For every pair
  of cycle types it walks the second class in lexicographic order and keeps
  the first member of each orbit under the centralizer of the (standardized)
  first permutation; that member is exactly the canonical triple of its
  simultaneous-conjugacy class.  Monodromy groups are identified afterwards.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations as _itperms
from typing import Callable, Iterable, Sequence

from .perm import (
    DEFAULT_MAX_DEGREE,
    CapacityError,
    GroupKey,
    Partition,
    PermGroup,
    PermutationTriple,
    _centralizer_sym,
    _closure,
    _conjugate,
    _cycle_type,
    _is_primitive,
    _is_transitive,
    _signature_of_elements,
    _standard_form,
    _subgroup_conjugator_raw,
    canonical_triple,
    centralizer,
    class_size,
    classes_mod,
    conjugacy_class,
    coset_pair_reps,
    normalizer_in_sym,
    partitions_of,
)

log = logging.getLogger(__name__)

LARGE_DEGREE_LIMIT = 11


# ---------------------------------------------------------------------------
# order on partitions, genus
# ---------------------------------------------------------------------------

def partition_key(lam: Sequence[int]) -> tuple:
    """Sort key realizing the total order: larger in lexicographic order comes first."""
    return tuple(-x for x in lam)


def partition_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """``a`` precedes or equals ``b``: ``a`` is lexicographically at least ``b``."""
    if sum(a) != sum(b):
        raise ValueError(f"partitions of different totals: {sum(a)} vs {sum(b)}")
    return tuple(sorted(a, reverse=True)) >= tuple(sorted(b, reverse=True))


def lambda_key(lams: Sequence[Sequence[int]]) -> tuple:
    return tuple(partition_key(l) for l in lams)


def genus_from_types(lams: Sequence[Sequence[int]]) -> int:
    d = sum(lams[0])
    total = sum(d - len(l) for l in lams)
    if total % 2:
        raise ValueError(f"index sum {total} is odd; not a valid triple")
    g = 1 - d + total // 2
    if g < 0:
        raise ValueError(f"negative genus {g}; the triple is not transitive")
    return g


def genus(t: PermutationTriple) -> int:
    """Riemann-Hurwitz genus ``1 - d + (e0 + e1 + einf)/2`` of a transitive triple."""
    return genus_from_types(t.cycle_types())


# ---------------------------------------------------------------------------
# the S3 action on triples
# ---------------------------------------------------------------------------

# For each relabelling of {0, 1, inf}: (source positions, invert?)
S3_ACTIONS = (
    ((0, 1, 2), False),
    ((1, 2, 0), False),
    ((2, 0, 1), False),
    ((1, 0, 2), True),
    ((0, 2, 1), True),
    ((2, 1, 0), True),
)


def s3_image(t: PermutationTriple, action) -> PermutationTriple:
    pos, inv = action
    perms = [t[i] for i in pos]
    if inv:
        perms = [p.inverse() for p in perms]
    return PermutationTriple(*perms)


# ---------------------------------------------------------------------------
# group identification
# ---------------------------------------------------------------------------

def _primes_upto(n):
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, int(p ** 0.5) + 1))]


class _Witness:
    """Cycle types certifying, inside a primitive group, that it contains ``A_d``.

    A part ``p`` (prime, ``p <= d-3`` or ``p in {2, 3}``) occurring once while
    no other part is divisible by ``p`` gives a ``p``-cycle as a power.  When
    ``p > d/2`` the group is automatically primitive.
    """

    def __init__(self, d):
        self.d = d
        self.primes = [p for p in _primes_upto(d) if p <= d - 3 or p in (2, 3)]
        self.cache = {}

    def __call__(self, ct):
        r = self.cache.get(ct)
        if r is None:
            r = 0
            for p in self.primes:
                if p > self.d:
                    break
                if ct.count(p) == 1 and all(x == p or x % p for x in ct):
                    r = 2 if 2 * p > self.d else 1
                    if r == 2:
                        break
            self.cache[ct] = r
        return r


_WALK_STEPS = 80


def giant_kind(gens, n, witness=None, known_types=()):
    """``'S'``/``'A'`` when the transitive group is symmetric/alternating, else ``None``.

    ``None`` is also returned when no certificate was found; callers then
    materialize the group, which settles the question exactly.
    """
    if n <= 3:
        return None
    witness = witness or _Witness(n)
    even = all((n - len(_cycle_type(g))) % 2 == 0 for g in gens)
    kind = "A" if even else "S"
    best = 0
    for ct in known_types:
        best = max(best, witness(tuple(ct)))
        if best == 2:
            return kind
    primitive = None
    if best == 1:
        primitive = _is_primitive(gens, n)
        return kind if primitive else None
    x = gens[0]
    state = 12345
    m = len(gens)
    for _ in range(_WALK_STEPS):
        state = (state * 1103515245 + 12345) & 0x7FFFFFFF
        g = gens[(state >> 16) % m]
        x = tuple([g[i] for i in x])
        w = witness(_cycle_type(x))
        if w == 2:
            return kind
        if w == 1:
            if primitive is None:
                primitive = _is_primitive(gens, n)
            if not primitive:
                return None
            return kind
    return None


def _giant_signature(d, alternating):
    out = []
    for lam in partitions_of(d):
        if alternating and (d - len(lam)) % 2:
            continue
        out.append((tuple(lam), class_size(lam)))
    return tuple(sorted(out))


def _sympy_order(gens, n):
    from sympy.combinatorics import Permutation as SPerm, PermutationGroup
    return int(PermutationGroup([SPerm(list(g)) for g in gens]).order())


@dataclass
class _GroupClass:
    order: int
    signature: tuple
    gens: tuple           # raw generators of one representative
    elements: frozenset | None  # None for symmetric/alternating
    giant: str | None
    first: tuple = None   # least canonical triple key seen with this class

    @property
    def even(self):
        return all((sum(k) - len(k)) % 2 == 0 for k, _ in self.signature)


class GroupClassifier:
    """Assigns transitive subgroups of ``S_d`` to ``S_d``-conjugacy classes."""

    def __init__(self, degree: int, cap: int | None = None):
        self.degree = degree
        self.classes: list[_GroupClass] = []
        self._by_elements: dict = {}
        self._by_signature: dict = defaultdict(list)
        self._giant_idx = {}
        self._witness = _Witness(degree)
        self.cap = cap if cap is not None else math.factorial(min(degree, DEFAULT_MAX_DEGREE))

    def _giant(self, kind):
        idx = self._giant_idx.get(kind)
        if idx is None:
            d = self.degree
            sig = _giant_signature(d, kind == "A")
            order = math.factorial(d) // (2 if kind == "A" else 1)
            idx = len(self.classes)
            self.classes.append(_GroupClass(order, sig, (), None, kind))
            self._giant_idx[kind] = idx
        return idx

    def classify(self, gens, known_types=(), tag=None) -> int:
        n = self.degree
        gens = tuple(gens)
        kind = giant_kind(gens, n, self._witness, known_types)
        if kind is not None:
            idx = self._giant(kind)
        else:
            idx = self._classify_materialized(gens)
        cls = self.classes[idx]
        if not cls.gens:
            cls.gens = gens
        if tag is not None and (cls.first is None or tag < cls.first):
            cls.first = tag
        return idx

    def _classify_materialized(self, gens):
        n = self.degree
        try:
            els = frozenset(_closure(gens, n, self.cap))
        except CapacityError:
            order = _sympy_order(gens, n)
            full = math.factorial(n)
            if order == full:
                return self._giant("S")
            if 2 * order == full:
                return self._giant("A")
            raise
        idx = self._by_elements.get(els)
        if idx is not None:
            return idx
        if len(els) == math.factorial(n):
            idx = self._giant("S")
        elif n > 1 and 2 * len(els) == math.factorial(n) and all(
                (n - len(_cycle_type(g))) % 2 == 0 for g in gens):
            idx = self._giant("A")
        else:
            sig = _signature_of_elements(els)
            key = (len(els), sig)
            idx = None
            for j in self._by_signature[key]:
                if _subgroup_conjugator_raw(gens, self.classes[j].elements, n) is not None:
                    idx = j
                    break
            if idx is None:
                idx = len(self.classes)
                self.classes.append(_GroupClass(len(els), sig, gens, els, None))
                self._by_signature[key].append(idx)
        self._by_elements[els] = idx
        return idx

    def absorb(self, other_classes: Sequence[_GroupClass]) -> list[int]:
        """Re-classify classes found elsewhere; returns the index mapping."""
        out = []
        for c in other_classes:
            if c.giant is not None:
                idx = self._giant(c.giant)
            else:
                idx = self._classify_materialized(c.gens)
            mine = self.classes[idx]
            if not mine.gens:
                mine.gens = c.gens
            if c.first is not None and (mine.first is None or c.first < mine.first):
                mine.first = c.first
            out.append(idx)
        return out

    def keys(self) -> list[GroupKey]:
        """GroupKeys with run-local ids 1, 2, ... ordered by (order, signature, first triple)."""
        order = sorted(range(len(self.classes)), key=lambda i: self._sort_key(i))
        keys = [None] * len(self.classes)
        for rank, i in enumerate(order, start=1):
            c = self.classes[i]
            keys[i] = GroupKey(self.degree, c.order, c.signature, True, c.even, rank,
                               _group_label(self.degree, c, rank))
        return keys

    def _sort_key(self, i):
        c = self.classes[i]
        sig = json.dumps([[list(k), v] for k, v in c.signature])
        return (c.order, sig, c.first or ())


def _group_label(d, c, rank):
    if c.giant == "S" or c.order == math.factorial(d):
        return f"S{d}"
    if c.giant == "A" or (d > 2 and 2 * c.order == math.factorial(d) and c.even):
        return f"A{d}"
    return f"{d}T{rank}"


# ---------------------------------------------------------------------------
# Passport
# ---------------------------------------------------------------------------

@dataclass
class Passport:
    """``(g, G, lambda)`` together with one canonical triple per class."""

    degree: int
    genus: int
    group: GroupKey
    lam: tuple
    triples: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.triples)

    @property
    def lambda_str(self) -> str:
        return ", ".join(l.exponent_str() for l in self.lam)

    def sort_key(self) -> tuple:
        return (self.genus, self.group.canonical_id or 0, lambda_key(self.lam))

    def __repr__(self) -> str:
        return (f"Passport(d={self.degree}, g={self.genus}, G={self.group.label}"
                f"[order {self.group.order}], lambda=({self.lambda_str}), size={self.size})")


# ---------------------------------------------------------------------------
# whole-degree enumeration
# ---------------------------------------------------------------------------

class _DegreeTables:
    """Per-degree lookup tables: partitions, class element lists, cycle types."""

    _cache: dict = {}

    def __init__(self, d):
        self.d = d
        self.parts = partitions_of(d)  # already in the total order
        self.pindex = {tuple(p): i for i, p in enumerate(self.parts)}
        self.type_of = {}
        classes = [[] for _ in self.parts]
        for p in _itperms(range(d)):
            i = self.pindex[_cycle_type(p)]
            self.type_of[p] = i
            classes[i].append(p)
        self.classes = classes  # each list is in increasing lexicographic order
        self.index = [d - len(p) for p in self.parts]
        # largest index among partitions at or after position i
        best = [0] * len(self.parts)
        m = 0
        for i in range(len(self.parts) - 1, -1, -1):
            m = max(m, self.index[i])
            best[i] = m
        self.max_index_after = best

    @classmethod
    def get(cls, d):
        t = cls._cache.get(d)
        if t is None:
            t = cls(d)
            cls._cache[d] = t
        return t


def _feasible_lam0(tab, i0, genera):
    d = tab.d
    e0 = tab.index[i0]
    return e0 + 2 * tab.max_index_after[i0] >= 2 * d - 2


def _enumerate_lam0(d, i0, genera=None, lam_filter=None):
    """All canonical triples with first cycle type ``parts[i0]``.

    Returns ``(rows, classes)`` where rows are ``(s1, i1, iinf, genus, cls)``
    and classes are the local group classes.
    """
    tab = _DegreeTables.get(d)
    lam0 = tab.parts[i0]
    t0 = _standard_form(lam0)
    z0 = [z for z in _centralizer_sym([t0], d) if z != tuple(range(d))]
    # block of each point under t0, for the connectivity test
    blk = [0] * d
    start = 0
    nb = 0
    for k in sorted(lam0):
        for j in range(k):
            blk[start + j] = nb
        start += k
        nb += 1
    classifier = GroupClassifier(d)
    rows = []
    e0 = tab.index[i0]
    type_of = tab.type_of
    for i1 in range(i0, len(tab.parts)):
        e1 = tab.index[i1]
        if e0 + e1 < d - 1:
            continue
        if e0 + e1 + tab.max_index_after[i1] < 2 * d - 2:
            continue
        allowed = {}
        for iinf in range(i1, len(tab.parts)):
            tot = e0 + e1 + tab.index[iinf]
            if tot % 2 or tot < 2 * d - 2:
                continue
            g = 1 - d + tot // 2
            if genera is not None and g not in genera:
                continue
            if lam_filter is not None and not lam_filter(
                    (tab.parts[i0], tab.parts[i1], tab.parts[iinf])):
                continue
            allowed[iinf] = g
        if not allowed:
            continue
        seen = set()
        known = (tab.parts[i0], tab.parts[i1])
        for s1 in tab.classes[i1]:
            if s1 in seen:
                continue
            prod = tuple([t0[j] for j in s1])
            iinf = type_of[prod]
            g = allowed.get(iinf)
            if g is None:
                continue
            # transitivity: cycles of t0 linked by s1
            par = list(range(nb))
            comps = nb
            for i in range(d):
                a = blk[i]
                while par[a] != a:
                    a = par[a]
                b = blk[s1[i]]
                while par[b] != b:
                    b = par[b]
                if a != b:
                    par[a] = b
                    comps -= 1
                    if comps == 1:
                        break
            if comps != 1:
                continue
            for z in z0:
                seen.add(_conjugate(s1, z))
            cls = classifier.classify((t0, s1), known + (tab.parts[iinf],), tag=(t0, s1))
            rows.append((s1, i1, iinf, g, cls))
        seen.clear()
    return rows, classifier.classes


def _worker(args):
    d, i0, genera, lam_filter = args
    return i0, _enumerate_lam0(d, i0, genera, lam_filter)


def check_degree(d: int, allow_large: bool = False) -> None:
    if d < 1:
        raise ValueError("degree must be positive")
    if d > DEFAULT_MAX_DEGREE:
        if not allow_large:
            raise CapacityError(
                f"degree {d} exceeds the default cap {DEFAULT_MAX_DEGREE}; "
                "pass allow_large=True (CLI: --allow-large) to proceed")
        if d > LARGE_DEGREE_LIMIT:
            raise CapacityError(f"degree {d} exceeds the hard limit {LARGE_DEGREE_LIMIT}")
        warnings.warn(f"degree {d} enumeration may take many hours", RuntimeWarning)


@dataclass
class EnumerationTask:
    mode: str = "whole-degree"
    degree: int = 1
    generators: tuple | None = None
    genera: frozenset | None = None
    lam_filter: Callable | None = None
    jobs: int = 1
    allow_large: bool = False


def enumerate_degree(d: int, genera: Iterable[int] | None = None,
                     lam_filter: Callable | None = None, jobs: int = 1,
                     allow_large: bool = False) -> list[Passport]:
    """All passports of degree ``d`` (optionally restricted by genus / cycle types).

    ``lam_filter`` receives the ordered triple of partitions and must be a
    picklable callable when ``jobs > 1``.
    """
    check_degree(d, allow_large)
    genera = frozenset(genera) if genera is not None else None
    tab = _DegreeTables.get(d)
    todo = [i0 for i0 in range(len(tab.parts)) if _feasible_lam0(tab, i0, genera)]
    if d == 1:
        todo = [0]
    tasks = [(d, i0, genera, lam_filter) for i0 in todo]
    results = []
    if jobs > 1 and len(tasks) > 1:
        # heaviest cycle types first so the pool drains evenly
        tasks.sort(key=lambda t: -math.factorial(d) // max(1, class_size(tab.parts[t[1]])))
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    return _merge(d, tab, results)


def _merge(d, tab, results):
    classifier = GroupClassifier(d)
    buckets = defaultdict(list)
    for i0, (rows, classes) in results:
        mapping = classifier.absorb(classes)
        t0 = _standard_form(tab.parts[i0])
        for s1, i1, iinf, g, cls in rows:
            buckets[(g, mapping[cls], i0, i1, iinf)].append((t0, s1))
    keys = classifier.keys()
    out = []
    for (g, cls, i0, i1, iinf), pairs in buckets.items():
        pairs.sort()
        triples = [PermutationTriple._raw(a, b) for a, b in pairs]
        lam = (tab.parts[i0], tab.parts[i1], tab.parts[iinf])
        out.append(Passport(d, g, keys[cls], lam, triples))
    out.sort(key=Passport.sort_key)
    return out


def all_group_keys(passports: Iterable[Passport]) -> list[GroupKey]:
    seen = {}
    for p in passports:
        seen[p.group.canonical_id] = p.group
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# assembling arbitrary triples; S3 canonical form
# ---------------------------------------------------------------------------

def assemble_passports(triples: Iterable[PermutationTriple]) -> list[Passport]:
    """Group canonical triples into passports by genus, cycle types and monodromy group.

    Cycle types are kept in the order given; apply ``s3_canonicalize`` to
    the results if needed.  Group ids are local to the input set.
    """
    triples = list(triples)
    if not triples:
        return []
    d = triples[0].degree
    classifier = GroupClassifier(d)
    buckets = defaultdict(list)
    for t in triples:
        if t.degree != d:
            raise ValueError("mixed degrees")
        gens = (t.sigma0._img, t.sigma1._img)
        if not _is_transitive(gens, d):
            raise ValueError(f"triple is not transitive: {t}")
        lam = t.cycle_types()
        cls = classifier.classify(gens, lam, tag=t.sort_key())
        buckets[(genus_from_types(lam), cls, lam)].append(t)
    keys = classifier.keys()
    out = []
    for (g, cls, lam), ts in buckets.items():
        ts.sort()
        out.append(Passport(d, g, keys[cls], tuple(lam), ts))
    out.sort(key=Passport.sort_key)
    return out


def s3_canonicalize(p: Passport) -> Passport:
    """The image of ``p`` under ``S3`` with cycle types in the total order.

    Among images with identical ordered cycle types the one whose sorted list
    of canonical triples is least wins.
    """
    best = None
    for action in S3_ACTIONS:
        lam = tuple(p.lam[i] for i in action[0])
        if not (partition_leq(lam[0], lam[1]) and partition_leq(lam[1], lam[2])):
            continue
        ts = sorted(canonical_triple(s3_image(t, action)) for t in p.triples)
        key = (lambda_key(lam), [t.sort_key() for t in ts])
        if best is None or key < best[0]:
            best = (key, lam, ts)
    _, lam, ts = best
    return Passport(p.degree, p.genus, p.group, tuple(Partition(l) for l in lam), ts)


# ---------------------------------------------------------------------------
# per-group enumeration
# ---------------------------------------------------------------------------

def enumerate_group(G: PermGroup, allow_large: bool = False) -> list[PermutationTriple]:
    """Canonical triples generating exactly ``G`` with cycle types in the total order."""
    d = G.degree
    check_degree(d, allow_large)
    if not _is_transitive([g._img for g in G.generators], d) and not G._symmetric:
        raise ValueError("the group is not transitive")
    if d == 1:
        return [PermutationTriple._raw((0,), (0,), (0,))]
    N = normalizer_in_sym(G, max_degree=max(d, DEFAULT_MAX_DEGREE))
    target = G.order
    giant = G._symmetric or target * 2 >= math.factorial(d)
    in_G = (lambda x: True) if G._symmetric else (lambda x: x in G.raw_elements)
    reps = classes_mod(G, N)
    reps.sort(key=lambda r: (partition_key(r.cycle_type()), r._img))
    witness = _Witness(d)
    out = []
    seen = set()
    for i, tau0 in enumerate(reps):
        lam0 = tau0.cycle_type()
        Z0 = centralizer(N, tau0)
        for tau1 in reps[i:]:
            lam1 = tau1.cycle_type()
            if not partition_leq(lam0, lam1):
                continue
            cls1 = conjugacy_class(tau1, N)
            cls1 = [c for c in cls1 if in_G(c)]
            for _, g in coset_pair_reps(tau0, cls1, Z0):
                t = PermutationTriple._raw(tau0._img, g._img)
                laminf = t.sigma_inf.cycle_type()
                if not partition_leq(lam1, laminf):
                    continue
                gens = (tau0._img, g._img)
                if not _is_transitive(gens, d):
                    continue
                if not _generates(gens, d, target, giant, witness, (lam0, lam1, laminf)):
                    continue
                c = canonical_triple(t)
                if c in seen:
                    raise AssertionError("two generating pairs are simultaneously conjugate")
                seen.add(c)
                out.append(c)
    out.sort()
    return out


def _generates(gens, d, target, giant, witness, types):
    if giant:
        kind = giant_kind(gens, d, witness, types)
        if kind is not None:
            order = math.factorial(d) // (1 if kind == "S" else 2)
            return order == target
        try:
            return len(_closure(gens, d, target)) == target
        except CapacityError:
            return False
    try:
        return len(_closure(gens, d, target)) == target
    except CapacityError:
        return False


def counts_by_genus(passports: Iterable[Passport]) -> dict[int, int]:
    c = Counter(p.genus for p in passports)
    return dict(sorted(c.items()))
