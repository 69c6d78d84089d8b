"""Permutations, small permutation groups and simultaneous conjugacy.

Conventions
-----------
Permutations act on the right: ``i^(pq) = (i^p)^q``, so in a product the left
factor is applied first.  Under this convention a permutation triple
``(s0, s1, sinf)`` satisfies ``sinf * s1 * s0 == identity``.

Public objects use 1-based points.  The module-level helpers prefixed with an
underscore work on raw 0-based image tuples and are what the enumeration
kernels use in their inner loops.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from itertools import permutations as _itperms
from typing import Iterable, Iterator, Sequence

DEFAULT_MAX_DEGREE = 9
MAX_SUPPORTED_DEGREE = 16


class CapacityError(ValueError):
    """Raised when a computation would exceed a configured size bound."""


# ---------------------------------------------------------------------------
# raw tuple kernels (0-based)
# ---------------------------------------------------------------------------

def _compose(p, q):
    return tuple([q[i] for i in p])


def _inverse(p):
    r = [0] * len(p)
    for i, j in enumerate(p):
        r[j] = i
    return tuple(r)


def _conjugate(p, t):
    """Return ``t^-1 p t``, i.e. ``p`` with every point relabelled by ``t``."""
    r = [0] * len(p)
    for i, j in enumerate(p):
        r[t[i]] = t[j]
    return tuple(r)


def _identity(n):
    return tuple(range(n))


def _cycles(p):
    n = len(p)
    seen = [False] * n
    out = []
    for i in range(n):
        if not seen[i]:
            c = []
            j = i
            while not seen[j]:
                seen[j] = True
                c.append(j)
                j = p[j]
            out.append(c)
    return out


def _cycle_type(p):
    n = len(p)
    seen = [False] * n
    out = []
    for i in range(n):
        if not seen[i]:
            k = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
                k += 1
            out.append(k)
    out.sort(reverse=True)
    return tuple(out)


def _orbits(gens, n):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in gens:
        for i in range(n):
            a, b = find(i), find(g[i])
            if a != b:
                parent[a] = b
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def _is_transitive(gens, n):
    if n <= 1:
        return True
    seen = {0}
    todo = [0]
    while todo:
        i = todo.pop()
        for g in gens:
            j = g[i]
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return len(seen) == n


def _is_primitive(gens, n):
    """Primitivity of a transitive group via minimal blocks containing {0, k}."""
    if n <= 2:
        return True
    for k in range(1, n):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        parent[k] = 0
        merged = 1
        queue = [(0, k)]
        while queue and merged < n - 1:
            a, b = queue.pop()
            for g in gens:
                ra, rb = find(g[a]), find(g[b])
                if ra != rb:
                    parent[rb] = ra
                    merged += 1
                    queue.append((ra, rb))
        if merged < n - 1:
            return False
    return True


def _closure(gens, n, cap=None):
    ident = _identity(n)
    elems = {ident}
    frontier = [ident]
    gens = [g for g in gens if g != ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple([g[i] for i in x])
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        if cap is not None and len(elems) > cap:
            raise CapacityError(f"group order exceeds the bound {cap}")
        frontier = nxt
    return elems


def _centralizer_sym(gens, n, limit=None):
    """All elements of S_n commuting with every permutation in ``gens``.

    An element of the centralizer is fixed on an orbit as soon as the image of
    one base point is fixed, so this backtracks over base-point images only.
    """
    gens = list(gens)
    orbits = []
    covered = [False] * n
    for b in range(n):
        if covered[b]:
            continue
        order = [b]
        tree = {b: None}
        covered[b] = True
        k = 0
        while k < len(order):
            x = order[k]
            k += 1
            for gi, g in enumerate(gens):
                y = g[x]
                if y not in tree:
                    tree[y] = (x, gi)
                    covered[y] = True
                    order.append(y)
        orbits.append((b, order, tree))
    size_of = {}
    for b, order, _ in orbits:
        for x in order:
            size_of[x] = len(order)

    img = [-1] * n
    used = [False] * n
    out = []

    def place(idx):
        if limit is not None and len(out) >= limit:
            return
        if idx == len(orbits):
            out.append(tuple(img))
            return
        b, order, tree = orbits[idx]
        for q in range(n):
            if used[q] or size_of[q] != len(order):
                continue
            assigned = []
            ok = True
            for x in order:
                if x == b:
                    y = q
                else:
                    px, gi = tree[x]
                    y = gens[gi][img[px]]
                if used[y]:
                    ok = False
                    break
                img[x] = y
                used[y] = True
                assigned.append(x)
            if ok:
                for x in order:
                    for g in gens:
                        if img[g[x]] != g[img[x]]:
                            ok = False
                            break
                    if not ok:
                        break
            if ok:
                place(idx + 1)
            for x in assigned:
                used[img[x]] = False
                img[x] = -1

    place(0)
    return out


def _standard_form(lam):
    """Lexicographically least permutation (image array) of cycle type ``lam``."""
    img = []
    start = 0
    for k in sorted(lam):
        for j in range(k - 1):
            img.append(start + j + 1)
        img.append(start)
        start += k
    return tuple(img)


def _class_elements(lam):
    """All permutations with cycle type ``lam``, in increasing lexicographic order."""
    n = sum(lam)
    need = Counter(lam)
    img = [-1] * n
    out = []

    def rec():
        try:
            first = img.index(-1)
        except ValueError:
            out.append(tuple(img))
            return
        free = [i for i in range(n) if img[i] == -1 and i != first]
        for k in list(need):
            if need[k] == 0:
                continue
            need[k] -= 1
            if k == 1:
                img[first] = first
                rec()
                img[first] = -1
            else:
                for rest in _itperms(free, k - 1):
                    cyc = (first,) + rest
                    for a in range(k):
                        img[cyc[a]] = cyc[(a + 1) % k]
                    rec()
                    for a in cyc:
                        img[a] = -1
            need[k] += 1

    rec()
    out.sort()
    return out


def _canonical_pair(s0, s1):
    """Lexicographically least simultaneous conjugate of ``(s0, s1)``.

    Returns ``(c0, c1, relabel)`` with ``c_i = relabel^-1 s_i relabel``.  The
    first component is forced to the standard form of its cycle type; the
    search then backtracks over the ways of matching cycles of ``s0`` to the
    blocks of that standard form, pruning on partial ``c1`` prefixes.
    """
    n = len(s0)
    cycles = _cycles(s0)
    cyc_of = [0] * n
    for ci, c in enumerate(cycles):
        for x in c:
            cyc_of[x] = ci
    lengths = sorted(len(c) for c in cycles)
    blocks = {}
    start = 0
    for k in lengths:
        blocks.setdefault(k, []).append(start)
        start += k
    block_len = [0] * n
    for k, starts in blocks.items():
        for b in starts:
            for j in range(k):
                block_len[b + j] = k
    free_blocks = {k: list(reversed(v)) for k, v in blocks.items()}
    c0 = _standard_form(lengths)

    new_of = [-1] * n
    old_of = [-1] * n
    cyc_used = [False] * len(cycles)
    cur = [0] * n
    best = [None]
    best_relabel = [None]

    def assign(q, start):
        ci = cyc_of[q]
        cyc_used[ci] = True
        k = 0
        p = q
        while True:
            new_of[p] = start + k
            old_of[start + k] = p
            k += 1
            p = s0[p]
            if p == q:
                break

    def unassign(q):
        ci = cyc_of[q]
        cyc_used[ci] = False
        for p in cycles[ci]:
            old_of[new_of[p]] = -1
            new_of[p] = -1

    version = [0]

    def rec(i, smaller, ver):
        if i == n:
            if best[0] is None or cur < best[0]:
                best[0] = list(cur)
                best_relabel[0] = tuple(new_of)
                version[0] += 1
            return
        if old_of[i] == -1:
            k = block_len[i]
            stack = free_blocks[k]
            assert stack[-1] == i
            stack.pop()
            for ci, c in enumerate(cycles):
                if cyc_used[ci] or len(c) != k:
                    continue
                for q in c:
                    assign(q, i)
                    step(i, smaller, ver)
                    unassign(q)
            stack.append(i)
        else:
            step(i, smaller, ver)

    def step(i, smaller, ver):
        target = s1[old_of[i]]
        fresh = new_of[target] == -1
        if fresh:
            k = len(cycles[cyc_of[target]])
            stack = free_blocks[k]
            start = stack.pop()
            assign(target, start)
            value = start
        else:
            value = new_of[target]
        b = best[0]
        beaten = False
        if b is not None and ver != version[0]:
            # the best candidate changed since ``smaller`` was decided
            ver = version[0]
            smaller = cur[:i] < b[:i]
            beaten = not smaller and cur[:i] != b[:i]
        if beaten:
            pass
        elif b is None or smaller:
            cur[i] = value
            rec(i + 1, smaller, ver)
        elif value < b[i]:
            cur[i] = value
            rec(i + 1, True, ver)
        elif value == b[i]:
            cur[i] = value
            rec(i + 1, False, ver)
        if fresh:
            unassign(target)
            stack.append(start)

    rec(0, False, 0)
    return c0, tuple(best[0]), best_relabel[0]


# ---------------------------------------------------------------------------
# Permutation / Partition / PermutationTriple
# ---------------------------------------------------------------------------

class Permutation:
    """A bijection of ``{1, ..., d}`` stored as an image array.

    >>> p = Permutation.from_cycles("(1,2,3)", 4)
    >>> p.images
    (2, 3, 1, 4)
    >>> str(p * p.inverse())
    '()'
    """

    __slots__ = ("_img",)

    def __init__(self, images: Sequence[int]):
        img = tuple(int(i) - 1 for i in images)
        n = len(img)
        if n < 1:
            raise ValueError("a permutation needs degree at least 1")
        if sorted(img) != list(range(n)):
            raise ValueError(f"not a permutation of 1..{n}: {list(images)}")
        self._img = img

    @classmethod
    def _raw(cls, img) -> "Permutation":
        p = object.__new__(cls)
        p._img = tuple(img)
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._raw(range(degree))

    @classmethod
    def from_cycles(cls, cycles, degree: int | None = None) -> "Permutation":
        """Build from ``"(1,4,2)(3,5)"``, ``"(1 4 2)(3 5)"`` or a list of cycles."""
        if isinstance(cycles, str):
            groups = re.findall(r"\(([^()]*)\)", cycles)
            parsed = []
            for grp in groups:
                pts = [int(t) for t in re.split(r"[,\s]+", grp.strip()) if t]
                if pts:
                    parsed.append(pts)
            cycles = parsed
        pts = [x for c in cycles for x in c]
        if len(set(pts)) != len(pts):
            raise ValueError("cycles are not disjoint")
        if degree is None:
            degree = max(pts, default=1)
        if pts and (min(pts) < 1 or max(pts) > degree):
            raise ValueError(f"cycle points out of range 1..{degree}")
        img = list(range(degree))
        for c in cycles:
            for a, b in zip(c, c[1:] + c[:1]):
                img[a - 1] = b - 1
        return cls._raw(img)

    @classmethod
    def from_json(cls, data) -> "Permutation":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data)

    @property
    def degree(self) -> int:
        return len(self._img)

    @property
    def images(self) -> tuple:
        return tuple(i + 1 for i in self._img)

    def __call__(self, i: int) -> int:
        return self._img[i - 1] + 1

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return self.inverse() ** (-k)
        r = _identity(self.degree)
        base = self._img
        while k:
            if k & 1:
                r = _compose(r, base)
            base = _compose(base, base)
            k >>= 1
        return Permutation._raw(r)

    def inverse(self) -> "Permutation":
        return Permutation._raw(_inverse(self._img))

    def conjugate(self, tau: "Permutation") -> "Permutation":
        """``tau^-1 * self * tau``."""
        _check_degrees(self, tau)
        return Permutation._raw(_conjugate(self._img, tau._img))

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        return [tuple(x + 1 for x in c) for c in _cycles(self._img)
                if include_fixed or len(c) > 1]

    def cycle_type(self) -> "Partition":
        return Partition(_cycle_type(self._img))

    def index(self) -> int:
        return index(self)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self._img))

    def sign(self) -> int:
        return -1 if self.index() % 2 else 1

    def to_json(self) -> list[int]:
        return list(self.images)

    def __str__(self) -> str:
        cs = self.cycles()
        if not cs:
            return "()"
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cs)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._img == other._img

    def __lt__(self, other: "Permutation") -> bool:
        return self._img < other._img

    def __hash__(self) -> int:
        return hash(self._img)


class Partition(tuple):
    """Weakly decreasing tuple of positive parts."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if any(p <= 0 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        return super().__new__(cls, parts)

    @property
    def parts(self) -> tuple:
        return tuple(self)

    @property
    def total(self) -> int:
        return sum(self)

    @property
    def index(self) -> int:
        """``total - len(parts)``: the index of any permutation of this cycle type."""
        return self.total - len(self)

    def exponent_str(self, sep: str = " ") -> str:
        """Exponent notation, e.g. ``(6, 1) -> '6^1 1^1'``."""
        counts = Counter(self)
        return sep.join(f"{p}^{counts[p]}" for p in sorted(counts, reverse=True))

    @classmethod
    def from_exponent_str(cls, text: str) -> "Partition":
        parts = []
        for tok in re.split(r"[\s.,_]+", text.strip()):
            if not tok:
                continue
            base, _, mult = tok.partition("^")
            parts.extend([int(base)] * int(mult or 1))
        return cls(parts)

    def __repr__(self) -> str:
        return f"Partition({list(self)})"


def partitions_of(n: int) -> list[Partition]:
    """All partitions of ``n`` in decreasing lexicographic order."""
    out = []

    def rec(rest, cap, acc):
        if rest == 0:
            out.append(Partition(acc))
            return
        for k in range(min(rest, cap), 0, -1):
            rec(rest - k, k, acc + [k])

    rec(n, n, [])
    return out


def class_size(lam: Sequence[int]) -> int:
    """Number of elements of ``S_n`` with cycle type ``lam``."""
    n = sum(lam)
    z = 1
    for k, m in Counter(lam).items():
        z *= k ** m * math.factorial(m)
    return math.factorial(n) // z


class PermutationTriple:
    """``(sigma0, sigma1, sigma_inf)`` with ``sigma_inf * sigma1 * sigma0 = 1``."""

    __slots__ = ("sigma0", "sigma1", "sigma_inf")

    def __init__(self, sigma0: Permutation, sigma1: Permutation,
                 sigma_inf: Permutation | None = None):
        _check_degrees(sigma0, sigma1)
        if sigma_inf is None:
            sigma_inf = compose(sigma1, sigma0).inverse()
        else:
            _check_degrees(sigma0, sigma_inf)
            prod = _compose(_compose(sigma_inf._img, sigma1._img), sigma0._img)
            if prod != _identity(sigma0.degree):
                raise ValueError("product condition sigma_inf*sigma1*sigma0 = 1 fails")
        self.sigma0 = sigma0
        self.sigma1 = sigma1
        self.sigma_inf = sigma_inf

    @classmethod
    def _raw(cls, s0, s1, sinf=None) -> "PermutationTriple":
        t = object.__new__(cls)
        if sinf is None:
            sinf = _inverse(_compose(s1, s0))
        t.sigma0 = Permutation._raw(s0)
        t.sigma1 = Permutation._raw(s1)
        t.sigma_inf = Permutation._raw(sinf)
        return t

    @classmethod
    def from_cycles(cls, s0: str, s1: str, sinf: str | None = None,
                    degree: int | None = None) -> "PermutationTriple":
        if degree is None:
            nums = [int(t) for t in re.findall(r"\d+", s0 + s1 + (sinf or ""))]
            degree = max(nums, default=1)
        p0 = Permutation.from_cycles(s0, degree)
        p1 = Permutation.from_cycles(s1, degree)
        pinf = Permutation.from_cycles(sinf, degree) if sinf is not None else None
        return cls(p0, p1, pinf)

    @classmethod
    def from_json(cls, data) -> "PermutationTriple":
        perms = [Permutation(x) for x in data]
        return cls(*perms)

    @property
    def degree(self) -> int:
        return self.sigma0.degree

    def __iter__(self) -> Iterator[Permutation]:
        return iter((self.sigma0, self.sigma1, self.sigma_inf))

    def __getitem__(self, s: int) -> Permutation:
        return (self.sigma0, self.sigma1, self.sigma_inf)[s]

    def cycle_types(self) -> tuple:
        return tuple(p.cycle_type() for p in self)

    def conjugate(self, tau: Permutation) -> "PermutationTriple":
        t = tau._img
        return PermutationTriple._raw(*(_conjugate(p._img, t) for p in self))

    def sort_key(self) -> tuple:
        return (self.sigma0._img, self.sigma1._img)

    def to_json(self) -> list[list[int]]:
        return [p.to_json() for p in self]

    def __eq__(self, other) -> bool:
        return (isinstance(other, PermutationTriple)
                and self.sigma0 == other.sigma0 and self.sigma1 == other.sigma1)

    def __lt__(self, other: "PermutationTriple") -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self) -> int:
        return hash(self.sort_key())

    def __repr__(self) -> str:
        return f"PermutationTriple({self.sigma0}, {self.sigma1}, {self.sigma_inf})"


def _check_degrees(p: Permutation, q: Permutation) -> None:
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} != {q.degree}")


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply ``p`` first, then ``q``."""
    _check_degrees(p, q)
    return Permutation._raw(_compose(p._img, q._img))


def inverse(p: Permutation) -> Permutation:
    return p.inverse()


def cycle_type(p: Permutation) -> Partition:
    return Partition(_cycle_type(p._img))


def index(p: Permutation) -> int:
    """``d`` minus the number of cycles (fixed points included)."""
    return p.degree - len(_cycle_type(p._img))


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

class PermGroup:
    """A subgroup of ``S_d`` given by generators, with its element set.

    The element set is materialized on first use; the full symmetric group is
    special-cased so its order and centralizers never require that.
    """

    def __init__(self, degree: int, generators: Iterable[Permutation] = (),
                 _elements=None, _symmetric: bool = False, cap: int | None = None):
        self.degree = degree
        self.generators = tuple(generators)
        for g in self.generators:
            if g.degree != degree:
                raise ValueError("generator degree mismatch")
        self._elements = _elements
        self._symmetric = _symmetric
        self._cap = cap

    @classmethod
    def symmetric(cls, degree: int) -> "PermGroup":
        gens = []
        if degree >= 2:
            gens.append(Permutation._raw((1, 0) + tuple(range(2, degree))))
            gens.append(Permutation._raw(tuple(range(1, degree)) + (0,)))
        return cls(degree, gens, _symmetric=True)

    @classmethod
    def alternating(cls, degree: int) -> "PermGroup":
        gens = []
        for k in range(2, degree):
            gens.append(Permutation.from_cycles([[1, 2, k + 1]], degree))
        return closure(gens) if gens else cls(degree, [Permutation.identity(degree)])

    @property
    def is_symmetric(self) -> bool:
        return self._symmetric or self.order == math.factorial(self.degree)

    @property
    def raw_elements(self) -> frozenset:
        if self._elements is None:
            if self._symmetric:
                cap = self._cap if self._cap is not None else _default_cap(self.degree)
                if math.factorial(self.degree) > cap:
                    raise CapacityError(f"S_{self.degree} exceeds the bound {cap}")
                self._elements = frozenset(_itperms(range(self.degree)))
            else:
                cap = self._cap if self._cap is not None else _default_cap(self.degree)
                self._elements = frozenset(
                    _closure([g._img for g in self.generators], self.degree, cap))
        return self._elements

    @property
    def elements(self) -> frozenset:
        return frozenset(Permutation._raw(e) for e in self.raw_elements)

    @property
    def order(self) -> int:
        if self._symmetric:
            return math.factorial(self.degree)
        return len(self.raw_elements)

    def __len__(self) -> int:
        return self.order

    def __contains__(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            return False
        if self._symmetric:
            return True
        return p._img in self.raw_elements

    def __iter__(self) -> Iterator[Permutation]:
        for e in sorted(self.raw_elements):
            yield Permutation._raw(e)

    def is_subgroup_closed(self) -> bool:
        els = self.raw_elements
        n = self.degree
        if _identity(n) not in els:
            return False
        return all(_inverse(x) in els for x in els) and all(
            _compose(x, g._img) in els for x in els for g in self.generators)

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order})"


def _default_cap(d: int) -> int:
    return math.factorial(min(d, DEFAULT_MAX_DEGREE))


def closure(generators: Sequence[Permutation], cap: int | None = None) -> PermGroup:
    """Materialize the group generated by ``generators``."""
    generators = list(generators)
    if not generators:
        raise ValueError("need at least one generator")
    d = generators[0].degree
    for g in generators:
        _check_degrees(generators[0], g)
    if d > MAX_SUPPORTED_DEGREE:
        raise CapacityError(f"degree {d} exceeds {MAX_SUPPORTED_DEGREE}")
    cap = _default_cap(d) if cap is None else cap
    els = _closure([g._img for g in generators], d, cap)
    return PermGroup(d, generators, _elements=frozenset(els))


def is_transitive(group: PermGroup) -> bool:
    if group._symmetric:
        return True
    return _is_transitive([g._img for g in group.generators], group.degree)


def is_primitive(group: PermGroup) -> bool:
    gens = [g._img for g in group.generators]
    if not _is_transitive(gens, group.degree):
        return False
    return _is_primitive(gens, group.degree)


def centralizer(ambient: PermGroup, g: Permutation) -> PermGroup:
    """``{h in ambient : hg = gh}``."""
    if g not in ambient:
        raise ValueError("element is not in the ambient group")
    cands = _centralizer_sym([g._img], ambient.degree)
    if not ambient._symmetric:
        cands = [c for c in cands if c in ambient.raw_elements]
    return _group_from_elements(ambient.degree, cands)


def _group_from_elements(d: int, els) -> PermGroup:
    els = frozenset(els)
    gens = _small_generating_set(els, d)
    return PermGroup(d, [Permutation._raw(x) for x in gens], _elements=els)


def _small_generating_set(els, d):
    gens = []
    have = {_identity(d)}
    for x in sorted(els):
        if x not in have:
            gens.append(x)
            have = _closure(gens, d)
            if len(have) == len(els):
                break
    if not gens:
        gens = [_identity(d)]
    return gens


def normalizer_in_sym(G: PermGroup, max_degree: int = DEFAULT_MAX_DEGREE) -> PermGroup:
    """``N_{S_d}(G)`` by a scan of ``S_d`` testing conjugated generators."""
    d = G.degree
    if d > max_degree:
        raise CapacityError(f"normalizer scan limited to degree <= {max_degree}")
    if G._symmetric or G.order == math.factorial(d):
        return PermGroup.symmetric(d)
    els = G.raw_elements
    gens = [g._img for g in G.generators]
    out = [h for h in _itperms(range(d))
           if all(_conjugate(g, h) in els for g in gens)]
    return _group_from_elements(d, out)


def _conj_orbit_reps(elements_sorted, acting, in_set=None):
    """Lexicographically least representative of each conjugation orbit.

    ``elements_sorted`` must be closed under conjugation by ``acting`` and be
    listed in increasing order, so the first member met of an orbit is its
    least one.
    """
    seen = set()
    reps = []
    for x in elements_sorted:
        if x in seen:
            continue
        reps.append(x)
        for z in acting:
            seen.add(_conjugate(x, z))
    return reps


def classes_mod(G: PermGroup, N: PermGroup) -> list[Permutation]:
    """Representatives of the orbits of ``N`` acting on ``G`` by conjugation."""
    acting = N.raw_elements if not N._symmetric else None
    if acting is None:
        # orbits of S_d on G are unions of cycle types
        seen_types = {}
        for x in sorted(G.raw_elements):
            ct = _cycle_type(x)
            if ct not in seen_types:
                seen_types[ct] = x
        return [Permutation._raw(seen_types[k]) for k in
                sorted(seen_types, key=lambda k: seen_types[k])]
    gens = [g._img for g in N.generators]
    seen = set()
    reps = []
    for x in sorted(G.raw_elements):
        if x in seen:
            continue
        reps.append(Permutation._raw(x))
        seen.add(x)
        todo = [x]
        while todo:
            y = todo.pop()
            for g in gens:
                z = _conjugate(y, g)
                if z not in seen:
                    seen.add(z)
                    todo.append(z)
    return reps


def conjugacy_class(x: Permutation, N: PermGroup) -> frozenset:
    """The ``N``-conjugacy class of ``x`` as a set of raw image tuples."""
    if N._symmetric:
        return frozenset(_class_elements(_cycle_type(x._img)))
    gens = [g._img for g in N.generators]
    seen = {x._img}
    todo = [x._img]
    while todo:
        y = todo.pop()
        for g in gens:
            z = _conjugate(y, g)
            if z not in seen:
                seen.add(z)
                todo.append(z)
    return frozenset(seen)


def coset_pair_reps(tau0: Permutation, classC1, Z0: PermGroup
                    ) -> list[tuple[Permutation, Permutation]]:
    """One pair ``(tau0, g)`` per orbit of ``Z0`` acting by conjugation on ``classC1``.

    This realizes the double cosets ``Z0 \\ N / Z_N(tau1)``: the orbit of
    ``nu tau1 nu^-1`` under ``Z0`` corresponds to the double coset of ``nu``.
    """
    raw = sorted(c._img if isinstance(c, Permutation) else tuple(c) for c in classC1)
    acting = list(Z0.raw_elements) if not Z0._symmetric else list(_itperms(range(Z0.degree)))
    reps = _conj_orbit_reps(raw, acting)
    return [(tau0, Permutation._raw(r)) for r in reps]


def simultaneous_conjugator(a: PermutationTriple, b: PermutationTriple
                            ) -> Permutation | None:
    """Some ``tau`` with ``a^tau == b``, or ``None``."""
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    if a.cycle_types() != b.cycle_types():
        return None
    ca0, ca1, ra = _canonical_pair(a.sigma0._img, a.sigma1._img)
    cb0, cb1, rb = _canonical_pair(b.sigma0._img, b.sigma1._img)
    if (ca0, ca1) != (cb0, cb1):
        return None
    tau = Permutation._raw(_compose(ra, _inverse(rb)))
    if a.conjugate(tau) != b:
        raise AssertionError("conjugator verification failed")
    return tau


def canonical_triple(a: PermutationTriple) -> PermutationTriple:
    """Lexicographically least triple (by sigma0 then sigma1 images) in the class of ``a``."""
    c0, c1, _ = _canonical_pair(a.sigma0._img, a.sigma1._img)
    return PermutationTriple._raw(c0, c1)


def canonical_conjugator(a: PermutationTriple) -> Permutation:
    """The relabelling taking ``a`` to ``canonical_triple(a)``."""
    return Permutation._raw(_canonical_pair(a.sigma0._img, a.sigma1._img)[2])


def triple_automorphisms(a: PermutationTriple) -> PermGroup:
    """``Aut(a)``: the centralizer in ``S_d`` of the group generated by ``a``."""
    els = _centralizer_sym([a.sigma0._img, a.sigma1._img], a.degree)
    return _group_from_elements(a.degree, els)


def monodromy_group(a: PermutationTriple) -> PermGroup:
    return closure([a.sigma0, a.sigma1])


# ---------------------------------------------------------------------------
# conjugacy of subgroups
# ---------------------------------------------------------------------------

def _sym_signature(d, alternating=False):
    out = []
    for lam in partitions_of(d):
        if alternating and (d - len(lam)) % 2:
            continue
        out.append((tuple(lam), class_size(lam)))
    return tuple(sorted(out))


def group_signature(group: PermGroup) -> tuple:
    """Sorted multiset of ``(cycle type, count)`` over all elements."""
    d = group.degree
    if group._symmetric:
        return _sym_signature(d)
    return _signature_of_elements(group.raw_elements)


def _signature_of_elements(els):
    c = Counter(_cycle_type(x) for x in els)
    return tuple(sorted(c.items()))


def signature_hash(signature) -> str:
    blob = json.dumps([[list(k), v] for k, v in signature]).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class GroupKey:
    """Conjugation-invariant description of a transitive group, plus a run-local id."""

    degree: int
    order: int
    signature: tuple
    transitive: bool
    even: bool
    canonical_id: int | None = None
    label: str | None = None

    @property
    def signature_hash(self) -> str:
        return signature_hash(self.signature)

    def sort_key(self) -> tuple:
        return (self.order, json.dumps([[list(k), v] for k, v in self.signature]))


def group_key(group: PermGroup, canonical_id: int | None = None) -> GroupKey:
    sig = group_signature(group)
    even = all(((len(k) and sum(k)) - len(k)) % 2 == 0 for k, _ in sig)
    return GroupKey(group.degree, group.order, sig, is_transitive(group), even,
                    canonical_id)


def _conjugators_mapping(g, h, n):
    """All ``tau`` with ``tau^-1 g tau == h`` (``g``, ``h`` raw, same cycle type)."""
    cg = sorted(_cycles(g), key=len)
    ch = sorted(_cycles(h), key=len)
    # one particular conjugator: match cycles of equal length in order
    base = [0] * n
    for a, b in zip(cg, ch):
        for x, y in zip(a, b):
            base[x] = y
    base = tuple(base)
    return [_compose(z, base) for z in _centralizer_sym([g], n)]


def subgroup_conjugator(G: PermGroup, H: PermGroup) -> Permutation | None:
    """Some ``tau`` with ``tau^-1 G tau == H``, or ``None``."""
    if G.degree != H.degree:
        raise ValueError("degree mismatch")
    n = G.degree
    if G.order != H.order:
        return None
    if G.is_symmetric and H.is_symmetric:
        return Permutation.identity(n)
    if group_signature(G) != group_signature(H):
        return None
    tau = _subgroup_conjugator_raw([g._img for g in G.generators], H.raw_elements, n)
    if tau is None:
        return None
    return Permutation._raw(tau)


def _subgroup_conjugator_raw(gens, h_elements, n):
    gens = [g for g in gens if g != _identity(n)]
    if not gens:
        return _identity(n)
    by_type = {}
    for h in h_elements:
        by_type.setdefault(_cycle_type(h), []).append(h)
    # pivot on the generator with the fewest candidate conjugators
    def cost(g):
        ct = _cycle_type(g)
        return len(by_type.get(ct, ())) * class_centralizer_order(ct)
    gens = sorted(gens, key=cost)
    g0, rest = gens[0], gens[1:]
    for h in sorted(by_type.get(_cycle_type(g0), ())):
        for tau in _conjugators_mapping(g0, h, n):
            if all(_conjugate(g, tau) in h_elements for g in rest):
                return tau
    return None


def class_centralizer_order(lam) -> int:
    z = 1
    for k, m in Counter(lam).items():
        z *= k ** m * math.factorial(m)
    return z


__all__ = [
    "CapacityError", "Permutation", "Partition", "PermutationTriple", "PermGroup",
    "GroupKey", "compose", "inverse", "cycle_type", "index", "closure",
    "is_transitive", "is_primitive", "centralizer", "normalizer_in_sym",
    "classes_mod", "conjugacy_class", "coset_pair_reps", "simultaneous_conjugator",
    "canonical_triple", "canonical_conjugator", "triple_automorphisms",
    "monodromy_group", "subgroup_conjugator", "group_signature", "group_key",
    "signature_hash", "partitions_of", "class_size",
]
