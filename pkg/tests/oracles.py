"""Exhaustive-search oracles shared by the test modules."""

import itertools
from fractions import Fraction as Q

from belyi.curves import HyperellipticModel
from belyi.perm import Permutation, partitions_of


def brute_canonical(t):
    """Least (sigma0, sigma1) image pair over all relabelings."""
    d = t.degree
    best = None
    for img in itertools.permutations(range(1, d + 1)):
        c = t.conjugate(Permutation(img))
        key = (c.sigma0.images, c.sigma1.images)
        if best is None or key < best:
            best = key
    return best


def _cycle_type(img):
    seen, out = set(), []
    for i in range(len(img)):
        if i not in seen:
            k, j = 0, i
            while j not in seen:
                seen.add(j)
                j = img[j]
                k += 1
            out.append(k)
    return tuple(sorted(out, reverse=True))


def _transitive(gens, d):
    reach, todo = {0}, [0]
    while todo:
        x = todo.pop()
        for g in gens:
            if g[x] not in reach:
                reach.add(g[x])
                todo.append(g[x])
    return len(reach) == d


def _group(gens, d):
    els = {tuple(range(d))}
    frontier = list(els)
    while frontier:
        new = []
        for e in frontier:
            for g in gens:
                h = tuple(g[e[i]] for i in range(d))
                if h not in els:
                    els.add(h)
                    new.append(h)
        frontier = new
    return frozenset(els)


def brute_force_classes(d):
    """Simultaneous-conjugacy classes of transitive triples with sorted cycle types.

    Each class is reported as its least (sigma0, sigma1) image pair together
    with its cycle types and the set of elements of its monodromy group.
    """
    order = {tuple(p): i for i, p in enumerate(partitions_of(d))}
    syms = list(itertools.permutations(range(d)))
    inv = {s: tuple(sorted(range(d), key=lambda i: s[i])) for s in syms}
    out = {}
    for s0 in syms:
        for s1 in syms:
            # sigma_inf is determined by applying sigma_inf, sigma1, sigma0 in turn giving 1
            h = tuple(s0[s1[i]] for i in range(d))
            sinf = inv[h]
            lam = (_cycle_type(s0), _cycle_type(s1), _cycle_type(sinf))
            if not order[lam[0]] <= order[lam[1]] <= order[lam[2]]:
                continue
            if not _transitive((s0, s1), d):
                continue
            best = None
            for t in syms:
                ti = inv[t]
                c0 = tuple(t[s0[ti[i]]] for i in range(d))
                c1 = tuple(t[s1[ti[i]]] for i in range(d))
                if best is None or (c0, c1) < best:
                    best = (c0, c1)
            if best not in out:
                out[best] = (lam, _group(best, d))
    return out


def conjugate_groups(G, H, d):
    if len(G) != len(H):
        return False
    for t in itertools.permutations(range(d)):
        ti = tuple(sorted(range(d), key=lambda i: t[i]))
        if all(tuple(t[g[ti[i]]] for i in range(d)) in H for g in G):
            return True
    return False


def rank(rows):
    """Rank over the rationals by fraction-exact elimination."""
    m = [[Q(x) for x in r] for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def random_model(rng, g, even):
    """Separable model whose ``u^2 + 4v`` has leading coefficient 4."""
    while True:
        deg = 2 * g + 2 if even else 2 * g + 1
        v = [rng.randint(-5, 5) for _ in range(deg)] + [1]
        u = [rng.randint(-3, 3) for _ in range(g + 1)] if rng.random() < 0.5 else []
        if even and len(u) == g + 2:
            u = u[:-1]
        try:
            return HyperellipticModel(u, v)
        except ValueError:
            continue
