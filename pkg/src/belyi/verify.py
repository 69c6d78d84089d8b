"""Ramification check for candidate Belyi maps.

A map is ``phi = N / D`` with ``N, D`` of the form ``a(x) + b(x) y`` on a
hyperelliptic (or elliptic) model, or rational functions of ``x`` in genus 0.
The divisors of ``N``, ``D`` and ``N - D`` are computed point by point, which
gives the multiplicities of the zeros of ``phi``, of ``phi - 1`` and of the
poles of ``phi``.

Affine zeros of ``G = a + b y`` lie over roots of the norm
``(a + b y)(a + b y') = a^2 - a b u - b^2 v``; its squarefree factorization
(exact over the rationals) gives the multiplicities, and local expansions
split them between the points over each root.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .curves import CurveFunction, EllipticModel, HyperellipticModel, to_mpc
from .series import (
    TruncatedSeries,
    poly_add,
    poly_eval,
    poly_eval_series,
    poly_mul,
    poly_scale,
    format_scalar,
    parse_scalar,
    poly_trim,
    series_sqrt,
)

FIBER_NAMES = ("0", "1", "inf")


class InconclusiveError(ValueError):
    """Root clustering could not decide multiplicities at the working tolerance."""


@dataclass
class BelyiMap:
    """``phi = num / den`` on ``model`` (``None`` for the projective line)."""

    model: HyperellipticModel | None
    num: CurveFunction
    den: CurveFunction

    def __post_init__(self):
        if isinstance(self.model, EllipticModel):
            self.model = self.model.as_hyperelliptic()
        if self.model is None and (self.num.b or self.den.b):
            raise ValueError("genus-0 maps cannot involve y")

    @classmethod
    def rational(cls, num: Sequence, den: Sequence) -> "BelyiMap":
        return cls(None, CurveFunction(list(num)), CurveFunction(list(den)))

    @classmethod
    def from_ansatz(cls, ansatz) -> "BelyiMap":
        num, den = ansatz.functions()
        return cls(ansatz.model, num, den)

    @property
    def exact(self) -> bool:
        cs = list(self.num.a) + list(self.num.b) + list(self.den.a) + list(self.den.b)
        if self.model is not None:
            cs += list(self.model.u) + list(self.model.v)
        return all(isinstance(c, (int, Fraction)) for c in cs)

    def evaluate(self, x, y=None):
        return self.num.evaluate(x, y) / self.den.evaluate(x, y)

    def to_json(self) -> dict:
        fn = lambda F: {"a": [format_scalar(c) for c in F.a], "b": [format_scalar(c) for c in F.b]}
        return {"model": self.model.to_json() if self.model is not None else None,
                "num": fn(self.num), "den": fn(self.den)}

    @classmethod
    def from_json(cls, data: dict) -> "BelyiMap":
        fn = lambda F: CurveFunction([parse_scalar(c) for c in F.get("a", [])],
                                     [parse_scalar(c) for c in F.get("b", [])])
        model = data.get("model")
        if model is not None:
            model = HyperellipticModel.from_json(model)
        return cls(model, fn(data["num"]), fn(data["den"]))


def load_map_fixture(path) -> tuple:
    """``(map, lambda or None, relabel)`` from a JSON file.

    The file holds ``model`` (``{"u": [...], "v": [...]}`` or null), ``num`` and
    ``den`` (``{"a": [...], "b": [...]}``, coefficients lowest degree first as
    ``"p/q"`` strings or ``[re, im]``), optionally ``lambda`` and ``relabel``.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    lam = data.get("lambda")
    return BelyiMap.from_json(data), (tuple(tuple(l) for l in lam) if lam else None), \
        bool(data.get("relabel", False))


@dataclass
class VerificationReport:
    passed: bool
    expected: tuple | None
    computed: tuple | None
    degree: int | None = None
    inconclusive: bool = False
    messages: list = field(default_factory=list)
    relabeling: tuple | None = None  # computed fiber matched to each expected fiber

    def lines(self) -> list[str]:
        out = []
        perm = self.relabeling or (0, 1, 2)
        if self.relabeling and self.relabeling != (0, 1, 2):
            out.append("fibers relabeled: " + ", ".join(
                f"computed {FIBER_NAMES[j]} as {FIBER_NAMES[i]}"
                for i, j in enumerate(perm) if i != j))
        for i, name in enumerate(FIBER_NAMES):
            comp = self.computed[perm[i]] if self.computed else None
            exp = self.expected[i] if self.expected else None
            ok = comp is not None and exp is not None and comp == exp
            out.append(f"over {name}: computed {_fmt_part(comp)} expected {_fmt_part(exp)} "
                       f"{'ok' if ok else 'MISMATCH'}")
        if self.inconclusive:
            out.append("inconclusive: " + "; ".join(self.messages))
        out.append("PASS" if self.passed else "FAIL")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def _fmt_part(p):
    if p is None:
        return "?"
    return "(" + ",".join(str(x) for x in p) + ")"


def _normalize_lam(ram) -> tuple:
    lam = getattr(ram, "lam", ram)
    return tuple(tuple(sorted((int(x) for x in l), reverse=True)) for l in lam)


def verify_ramification(phi: BelyiMap, ram, digits: int = 50,
                        relabel: bool = False, tol=None) -> VerificationReport:
    """Compare the ramification of ``phi`` over 0, 1, inf with ``ram``.

    The comparison is positional unless ``relabel`` is set, in which case any
    permutation of the three branch values is accepted and recorded in the
    report.
    """
    if not isinstance(phi, BelyiMap):
        phi = BelyiMap.from_ansatz(phi)
    expected = _normalize_lam(ram) if ram is not None else None
    try:
        computed = ramification_partitions(phi, digits, tol)
    except InconclusiveError as exc:
        return VerificationReport(False, expected, None, None, True, [str(exc)])
    degs = {sum(p) for p in computed}
    msgs = []
    if len(degs) != 1:
        msgs.append(f"fibers have different total multiplicities {sorted(degs)}")
    match = (0, 1, 2) if expected is None or computed == expected else None
    if match is None and relabel:
        perms = sorted(itertools.permutations(range(3)),
                       key=lambda q: sum(i != j for i, j in enumerate(q)))
        for perm in perms:
            if all(computed[perm[i]] == expected[i] for i in range(3)):
                match = perm
                break
    ok = len(degs) == 1 and match is not None
    return VerificationReport(ok, expected, computed, max(degs), False, msgs, match)


def ramification_partitions(phi: BelyiMap, digits: int = 50, tol=None) -> tuple:
    """Multiplicity partitions of the zeros of ``phi``, ``phi - 1`` and the poles of ``phi``."""
    if phi.model is None:
        return _genus0_partitions(phi)
    with mpmath.workdps(digits + 20):
        return _Divisors(phi, digits, tol).partitions()


# ---------------------------------------------------------------------------
# genus 0, exact
# ---------------------------------------------------------------------------

def _sympy_poly(coeffs):
    import sympy
    x = sympy.Symbol("x")
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction)
                       else sympy.nsimplify(c) for c in reversed(poly_trim(coeffs))] or [0], x)


def _multiplicity_parts(coeffs) -> list[int]:
    """Each root of the polynomial contributes its multiplicity (exact, rational input)."""
    p = _sympy_poly(coeffs)
    if p.is_zero:
        raise ValueError("zero polynomial")
    _, factors = p.sqf_list()
    out = []
    for q, k in factors:
        out += [k] * q.degree()
    return out


def _genus0_partitions(phi: BelyiMap) -> tuple:
    import sympy
    N = _sympy_poly(phi.num.a)
    D = _sympy_poly(phi.den.a)
    if D.is_zero:
        raise ValueError("zero denominator")
    g = sympy.gcd(N, D)
    N, D = sympy.div(N, g)[0], sympy.div(D, g)[0]
    if N.degree() <= 0 and D.degree() <= 0:
        raise ValueError("the map is constant")
    M = N - D
    if M.is_zero:
        raise ValueError("the map is constant")
    fibers = []
    for P, other in ((N, D), (M, D), (D, None)):
        parts = []
        if P.degree() > 0:
            for q, k in P.sqf_list()[1]:
                parts += [k] * q.degree()
        fibers.append(parts)
    # the point at infinity
    dN, dD, dM = N.degree(), D.degree(), M.degree()
    if dD > dN:
        fibers[0].append(dD - dN)
    elif dN > dD:
        fibers[2].append(dN - dD)
    elif dD > dM:
        fibers[1].append(dD - dM)
    return tuple(tuple(sorted(p, reverse=True)) for p in fibers)


# ---------------------------------------------------------------------------
# genus >= 1
# ---------------------------------------------------------------------------

def norm_poly(m: HyperellipticModel, G: CurveFunction) -> list:
    """``a^2 - a b u - b^2 v`` for ``G = a + b y``."""
    a, b = list(G.a), list(G.b)
    r = poly_mul(a, a)
    r = poly_add(r, poly_scale(poly_mul(poly_mul(a, b), m.u), -1))
    r = poly_add(r, poly_scale(poly_mul(poly_mul(b, b), m.v), -1))
    return r


def _sub(F: CurveFunction, G: CurveFunction) -> CurveFunction:
    return CurveFunction(poly_add(F.a, poly_scale(G.a, -1)), poly_add(F.b, poly_scale(G.b, -1)))


class _Divisors:
    def __init__(self, phi: BelyiMap, digits: int, tol=None):
        self.phi = phi
        self.m = phi.model
        self.digits = digits
        self.exact = phi.exact
        self.tol = mpmath.mpf(10) ** (-digits / 3) if tol is None else mpmath.mpf(tol)
        self.funcs = {"N": phi.num, "D": phi.den, "M": _sub(phi.num, phi.den)}
        self._branch_xs = None
        for k, G in self.funcs.items():
            if not G.a and not G.b:
                raise ValueError("the map is constant" if k == "M" else f"{k} is zero")

    # roots of norms with multiplicities --------------------------------------
    def _root_clusters(self, poly) -> list[tuple]:
        """``(x0, multiplicity)`` for the distinct roots of ``poly``."""
        poly = poly_trim(poly)
        if len(poly) <= 1:
            return []
        if self.exact:
            out = []
            for q, k in _sympy_poly(poly).sqf_list()[1]:
                coeffs = [mpmath.mpf(int(c.p)) / int(c.q) for c in q.all_coeffs()]
                if len(coeffs) == 2:
                    roots = [-coeffs[1] / coeffs[0]]
                else:
                    roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * mpmath.mp.prec)
                out += [(mpmath.mpc(r), k) for r in roots]
            return out
        try:
            roots = mpmath.polyroots([to_mpc(c) for c in reversed(poly)], maxsteps=2000,
                                     extraprec=4 * mpmath.mp.prec)
        except mpmath.NoConvergence as exc:
            raise InconclusiveError("root finding did not converge") from exc
        return _cluster(roots, self.tol)

    def _points_over(self, x0) -> list[tuple]:
        """``(x0, y0, is_branch)`` for the points of the curve above ``x0``."""
        m = self.m
        fx = poly_eval([to_mpc(c) for c in m.f], x0)
        ux = poly_eval([to_mpc(c) for c in m.u], x0) if m.u else 0
        scale = max(1, max(abs(to_mpc(c)) for c in m.f) * max(1, abs(x0)) ** (len(m.f) - 1))
        if abs(fx) <= self.tol * scale:
            return [(x0, -ux / 2, True)]
        r = mpmath.sqrt(fx)
        return [(x0, (-ux + r) / 2, False), (x0, (-ux - r) / 2, False)]

    def _radius(self, x0):
        """Distance from ``x0`` to the nearest other branch point, capped at 1.

        Scaling the uniformizer by this keeps the local series coefficients of
        comparable size, so relative tolerances stay meaningful near branch
        points that sit close to ``x0``.
        """
        if self._branch_xs is None:
            f = [to_mpc(c) for c in self.m.f]
            self._branch_xs = mpmath.polyroots(list(reversed(f)), maxsteps=2000,
                                               extraprec=4 * mpmath.mp.prec)
        r = mpmath.mpf(1)
        for b in self._branch_xs:
            dist = abs(b - x0)
            if dist > self.tol * max(1, abs(x0)):
                r = min(r, dist)
        return r

    def _local(self, P, prec):
        """Series ``(x(t), y(t))`` in a uniformizer at the affine point ``P``."""
        x0, y0, branch = P
        m = self.m
        f = [to_mpc(c) for c in m.f]
        u = [to_mpc(c) for c in m.u]
        r = self._radius(x0)
        if not branch:
            xs = TruncatedSeries([x0, r], 0, prec)
            fs = poly_eval_series(f, xs)
            us = poly_eval_series(u, xs) if u else TruncatedSeries.zero(prec)
            root = series_sqrt(fs, target=2 * y0 + (poly_eval(u, x0) if u else 0))
            return xs, (root - us) * mpmath.mpf(0.5)
        # branch point: w = 2y + u(x) is a uniformizer and w^2 = f(x)
        shifted = _taylor_shift(f, x0)
        shifted[0] = 0
        tau = _solve_square(shifted, 2 * prec + 2)
        c = mpmath.sqrt(r * abs(shifted[1]))
        tau = TruncatedSeries.from_dict({e: a * c ** e for e, a in tau.terms().items()}, tau.prec)
        xs = tau + x0
        w = TruncatedSeries.monomial(1, xs.prec, c)
        us = poly_eval_series(u, xs) if u else TruncatedSeries.zero(xs.prec)
        return xs, (w - us) * mpmath.mpf(0.5)

    def _valuation(self, series: TruncatedSeries) -> int:
        coeffs = [(e, abs(to_mpc(c))) for e, c in series.terms().items()]
        if not coeffs:
            raise InconclusiveError("series vanishes to the available precision")
        scale = max(1, max(c for _, c in coeffs))
        for e, c in coeffs:
            if c > self.tol * scale:
                return e
        raise InconclusiveError("series vanishes to the available precision")

    def _order_at(self, G: CurveFunction, xs, ys) -> int:
        a = [to_mpc(c) for c in G.a]
        b = [to_mpc(c) for c in G.b]
        s = None
        if a:
            s = poly_eval_series(a, xs)
        if b:
            t = poly_eval_series(b, xs) * ys
            s = t if s is None else s + t
        return self._valuation(s)

    # main -----------------------------------------------------------------
    def partitions(self) -> tuple:
        m = self.m
        # all affine candidate points with the multiplicity bounds from the norms
        roots = []
        for key, G in self.funcs.items():
            for x0, k in self._root_clusters(norm_poly(m, G)):
                roots.append((x0, k))
        xs_distinct = []
        for x0, k in roots:
            for i, (x1, k1) in enumerate(xs_distinct):
                if abs(x1 - x0) <= self.tol * max(1, abs(x0)):
                    xs_distinct[i] = (x1, max(k1, k))
                    break
            else:
                xs_distinct.append((x0, k))
        fibers = ([], [], [])
        for x0, kmax in xs_distinct:
            for P in self._points_over(x0):
                prec = 2 * kmax + 4
                xs, ys = self._local(P, prec)
                self._record(fibers, {k: self._order_at(G, xs, ys) for k, G in self.funcs.items()})
        # points at infinity
        deg_bound = 2 * max(len(G.a) + len(G.b) for G in self.funcs.values()) + 2 * m.genus + 8
        if m.is_even:
            for sign in (1, -1):
                ys = m.y_at_infinity(deg_bound, sign).map(to_mpc)
                xs = TruncatedSeries.monomial(-1, deg_bound + 2 * m.genus + 2)
                self._record(fibers, {k: self._order_at(G, xs, ys) for k, G in self.funcs.items()})
        else:
            ys = m.y_at_infinity(deg_bound, 1).map(to_mpc)
            xs = TruncatedSeries.monomial(-2, deg_bound + 4 * m.genus + 4)
            self._record(fibers, {k: self._order_at(G, xs, ys) for k, G in self.funcs.items()})
        return tuple(tuple(sorted(p, reverse=True)) for p in fibers)

    @staticmethod
    def _record(fibers, ords):
        o_phi = ords["N"] - ords["D"]
        o_one = ords["M"] - ords["D"]
        if o_phi > 0:
            fibers[0].append(o_phi)
        elif o_phi < 0:
            fibers[2].append(-o_phi)
        if o_one > 0:
            fibers[1].append(o_one)


def _cluster(roots, tol):
    out = []
    for r in roots:
        for i, (c, k, members) in enumerate(out):
            if abs(c - r) <= tol * max(1, abs(r)):
                members.append(r)
                out[i] = (sum(members) / len(members), k + 1, members)
                break
        else:
            out.append((mpmath.mpc(r), 1, [r]))
    # ambiguity: distinct clusters that are almost within tolerance
    for i, (c, _, _) in enumerate(out):
        for d, _, _ in out[:i]:
            if abs(c - d) <= 1000 * tol * max(1, abs(c)):
                raise InconclusiveError(
                    f"roots {mpmath.nstr(c, 8)} and {mpmath.nstr(d, 8)} are too close to separate")
    return [(c, k) for c, k, _ in out]


def _taylor_shift(p, x0):
    """Coefficients of ``p(x0 + t)`` in ``t``."""
    n = len(p)
    c = list(p)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            c[j] = c[j] + x0 * c[j + 1]
    return c


def _solve_square(h, prec):
    """``tau(w)`` with ``h(tau) = w^2`` where ``h(0) = 0`` and ``h'(0) != 0``."""
    h1 = h[1]
    dh = [i * c for i, c in enumerate(h)][1:]
    w2 = TruncatedSeries.monomial(2, prec)
    tau = TruncatedSeries([1 / h1], 2, 4)
    known = 4
    while True:
        known = min(2 * known, prec)
        tau = TruncatedSeries(tau.coeffs, tau.valuation, known)
        res = poly_eval_series(h, tau) - w2.truncate(known)
        tau = tau - res / poly_eval_series(dh, tau)
        if known >= prec:
            return tau
