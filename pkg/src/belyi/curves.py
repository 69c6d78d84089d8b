"""Hyperelliptic and elliptic models, Riemann-Roch bases and local expansions.

Models are ``y^2 + u(x) y = v(x)`` with ``f = u^2 + 4 v`` separable.  The
model is *odd* when ``deg f = 2g + 1`` (one point at infinity, a Weierstrass
point) and *even* when ``deg f = 2g + 2`` (two points ``inf`` and ``inf'``).
Polynomials are coefficient lists, lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .series import (
    Dual,
    TruncatedSeries,
    is_zero,
    parse_scalar,
    poly_add,
    poly_derivative,
    poly_eval,
    poly_eval_series,
    poly_mul,
    poly_scale,
    poly_to_str,
    poly_trim,
    scalar_sqrt,
    series_sqrt,
)


def to_mpc(x):
    """Any supported scalar as an ``mpc`` at the current precision."""
    if isinstance(x, Dual):
        x = x.val
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    return mpmath.mpc(x)


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


def _all_exact(*polys) -> bool:
    return all(_is_exact(c) for p in polys for c in p)


def _as_poly(p) -> list:
    return poly_trim(parse_scalar(c) for c in p)


def _poly_gcd_exact(a, b):
    a = [Fraction(c) for c in poly_trim(a)]
    b = [Fraction(c) for c in poly_trim(b)]
    while b:
        # a mod b
        a = list(a)
        while len(a) >= len(b) and a:
            q = a[-1] / b[-1]
            shift = len(a) - len(b)
            for i, c in enumerate(b):
                a[shift + i] -= q * c
            a = poly_trim(a)
        a, b = b, a
    return a


def is_separable(f: Sequence, tol=None) -> bool:
    """No repeated roots: exact gcd test for rational input, root spacing otherwise."""
    f = poly_trim(f)
    if len(f) <= 2:
        return len(f) == 2
    if _all_exact(f):
        return len(_poly_gcd_exact(f, poly_derivative(f))) == 1
    roots = mpmath.polyroots([to_mpc(c) for c in reversed(f)], maxsteps=200,
                             extraprec=2 * mpmath.mp.prec)
    tol = tol if tol is not None else mpmath.mpf(10) ** (-mpmath.mp.dps // 3)
    scale = max(1, max(abs(r) for r in roots))
    return all(abs(r - s) > tol * scale for i, r in enumerate(roots) for s in roots[:i])


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

class HyperellipticModel:
    """``y^2 + u(x) y = v(x)`` of genus ``g >= 1``."""

    def __init__(self, u: Sequence, v: Sequence, check: bool = True):
        self.u = _as_poly(u)
        self.v = _as_poly(v)
        self.f = poly_add(poly_mul(self.u, self.u), poly_scale(self.v, 4))
        n = len(self.f) - 1
        if n < 3:
            raise ValueError(f"u^2 + 4v has degree {n}; genus would be < 1")
        self.genus = (n - 1) // 2
        self.parity = "odd" if n % 2 else "even"
        g = self.genus
        if len(self.u) - 1 > g + 1 or len(self.v) - 1 > 2 * g + 2:
            raise ValueError("deg u <= g+1 and deg v <= 2g+2 are required")
        if check and not is_separable(self.f):
            raise ValueError("u^2 + 4v is not separable")

    @property
    def exact(self) -> bool:
        return _all_exact(self.u, self.v)

    @property
    def is_even(self) -> bool:
        return self.parity == "even"

    def residual(self, x, y):
        return y * y + poly_eval(self.u, x) * y - poly_eval(self.v, x)

    def coeff(self, poly, k):
        return poly[k] if k < len(poly) else 0

    def infinity_leading_values(self) -> tuple:
        """Leading coefficients of ``y / x^(g+1)`` at the two points at infinity (even model).

        They are the roots of ``Y^2 + u_{g+1} Y - v_{2g+2} = 0``, listed as
        ``(-u_{g+1} + sqrt(f_{2g+2}))/2`` then ``(-u_{g+1} - sqrt(f_{2g+2}))/2``.
        """
        if not self.is_even:
            raise ValueError("only even models have two points at infinity")
        g = self.genus
        ug = self.coeff(self.u, g + 1)
        fl = self.f[-1]
        try:
            r = scalar_sqrt(fl)
        except ValueError:
            r = mpmath.sqrt(mpmath.mpf(fl) if _is_exact(fl) else fl)
            ug = mpmath.mpf(ug) if _is_exact(ug) else ug
        half = Fraction(1, 2) if _is_exact(r) and _is_exact(ug) else mpmath.mpf(1) / 2
        return ((-ug + r) * half, (-ug - r) * half)

    def y_at_infinity(self, prec: int, sign: int = 1) -> TruncatedSeries:
        """``y`` in the local parameter at a point at infinity, terms up to ``t^(prec-1)``.

        Even model: ``t = 1/x`` and ``sign`` picks the branch whose ``y/x^(g+1)``
        starts with ``(-u_{g+1} + sign*sqrt(f_lead))/2``.  Odd model:
        ``x = t^-2`` and ``sign`` fixes the uniformizer.
        """
        g = self.genus
        f = self.f
        if self.is_even:
            N = 2 * g + 2
            rel = prec + g + 1  # relative precision needed
            F = TruncatedSeries([f[N - k] if N - k >= 0 else 0 for k in range(rel)], 0, rel)
            root = _sqrt_any(F).shift(-(g + 1))
            u_t = TruncatedSeries.from_dict({-k: c for k, c in enumerate(self.u)}, prec)
            if u_t.prec > prec:
                u_t = u_t.truncate(prec)
            return (-u_t + root * sign) * _half(root)
        N = 2 * g + 1
        rel = prec + N
        F = TruncatedSeries([f[N - k // 2] if k % 2 == 0 and N - k // 2 >= 0 else 0
                             for k in range(rel)], 0, rel)
        root = _sqrt_any(F).shift(-N)
        u_t = TruncatedSeries.from_dict({-2 * k: c for k, c in enumerate(self.u)}, prec)
        return (-u_t + root * sign) * _half(root)

    def x_at_infinity(self, prec: int) -> TruncatedSeries:
        if self.is_even:
            return TruncatedSeries.monomial(-1, prec)
        return TruncatedSeries.monomial(-2, prec)

    def __repr__(self) -> str:
        return (f"HyperellipticModel(y^2 + ({poly_to_str(self.u) if self.u else 0})*y = {poly_to_str(self.v)}, "
                f"g={self.genus}, {self.parity})")

    def to_json(self) -> dict:
        from .series import format_scalar
        return {"u": [format_scalar(c) for c in self.u], "v": [format_scalar(c) for c in self.v]}

    @classmethod
    def from_json(cls, data) -> "HyperellipticModel":
        return cls(data.get("u", []), data["v"])


def _half(s: TruncatedSeries):
    c = s.coeffs[0] if s.coeffs else 0
    if isinstance(c, Dual):
        c = c.val
    return Fraction(1, 2) if _is_exact(c) else mpmath.mpf(1) / 2


def _sqrt_any(F: TruncatedSeries, target=None) -> TruncatedSeries:
    try:
        return series_sqrt(F, target)
    except ValueError:
        if not _all_exact(F.coeffs):
            raise
        return series_sqrt(F.map(mpmath.mpf), target)


class EllipticModel:
    """``y^2 = x^3 - 27 c4 x - 54 c6``."""

    def __init__(self, c4, c6, check: bool = True):
        self.c4 = parse_scalar(c4)
        self.c6 = parse_scalar(c6)
        if check:
            disc = self.c4 ** 3 - self.c6 ** 2
            if _is_exact(disc):
                if disc == 0:
                    raise ValueError("singular model: c4^3 = c6^2")
            elif abs(disc) <= mpmath.mpf(10) ** (-mpmath.mp.dps // 2) * max(
                    1, abs(self.c4) ** 3, abs(self.c6) ** 2):
                raise ValueError("numerically singular model")

    @property
    def f(self) -> list:
        return [-54 * self.c6, -27 * self.c4, 0, 1]

    def residual(self, x, y):
        return y * y - (x * x * x - 27 * self.c4 * x - 54 * self.c6)

    def as_hyperelliptic(self) -> HyperellipticModel:
        return HyperellipticModel([], self.f, check=False)

    @classmethod
    def from_short_weierstrass(cls, a, b) -> "EllipticModel":
        """From ``y^2 = x^3 + a x + b``."""
        a, b = parse_scalar(a), parse_scalar(b)
        if _is_exact(a) and _is_exact(b):
            return cls(Fraction(-a) / 27, Fraction(-b) / 54)
        return cls(-a / 27, -b / 54)

    def __repr__(self) -> str:
        return f"EllipticModel(c4={self.c4}, c6={self.c6})"


# ---------------------------------------------------------------------------
# functions a(x) + b(x) y
# ---------------------------------------------------------------------------

@dataclass
class CurveFunction:
    a: list
    b: list = field(default_factory=list)
    pole_order: int | None = None
    label: str = ""

    def evaluate(self, x, y):
        return poly_eval(self.a, x) + poly_eval(self.b, x) * y

    def expand(self, x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
        r = poly_eval_series(self.a, x) if self.a else None
        if self.b:
            t = poly_eval_series(self.b, x) * y
            r = t if r is None else r + t
        if r is None:
            return TruncatedSeries.zero(min(x.prec, y.prec))
        return r

    def __repr__(self) -> str:
        if self.label:
            return self.label
        s = poly_to_str(self.a) if self.a else ""
        if self.b:
            s = (s + " + " if s else "") + f"({poly_to_str(self.b)})*y"
        return s or "0"


def laurent_tail(m: HyperellipticModel, j: int, infinity_leading=None, sign: int | None = None
                 ) -> list:
    """Polynomial ``P_j`` in ``x`` with ``x^j y - P_j`` holomorphic at ``inf'``.

    ``inf'`` is the point at infinity other than the base point ``inf``.  By
    default ``inf'`` is the branch where ``y/x^(g+1)`` tends to
    ``(-u_{g+1} + sqrt(f_lead))/2``; passing ``infinity_leading`` (the value
    of ``y/x^(g+1)`` at ``inf`` read off the series) selects the other root.
    """
    if not m.is_even:
        raise ValueError("Laurent tails are only needed for even models")
    if j < 0:
        raise ValueError("j must be nonnegative")
    if sign is None:
        sign = infinity_prime_sign(m, infinity_leading)
    g = m.genus
    y = m.y_at_infinity(j + 1, sign)  # exponents -(g+1) .. j
    yj = y.shift(-j)
    deg = j + g + 1
    return [yj[-k] for k in range(deg + 1)]


def infinity_prime_sign(m: HyperellipticModel, infinity_leading=None) -> int:
    """Branch sign for ``inf'``: +1 unless the base point itself is on the + branch."""
    if infinity_leading is None:
        return 1
    plus, minus = m.infinity_leading_values()
    dp = abs(_to_c(plus) - _to_c(infinity_leading))
    dm = abs(_to_c(minus) - _to_c(infinity_leading))
    if dp == dm:
        raise ValueError("cannot tell the points at infinity apart from the given leading value")
    return -1 if dp < dm else 1


def _to_c(x):
    return to_mpc(x)


def leading_ratio(x: TruncatedSeries, y: TruncatedSeries, g: int):
    """Leading coefficient of ``y / x^(g+1)`` from series at the base point."""
    return (y * x.inverse() ** (g + 1)).leading


def rr_basis(m: HyperellipticModel, pole_order: int, infinity_leading=None) -> list:
    """Basis of ``L(pole_order * inf)``, ordered by pole order at ``inf``."""
    g = m.genus
    M = pole_order
    if M < 0:
        return []
    out = [CurveFunction([1], [], 0, "1")]
    if not m.is_even:
        items = []
        for i in range(1, M // 2 + 1):
            items.append(CurveFunction([0] * i + [1], [], 2 * i, _mono(i)))
        for j in range(0, (M - 2 * g - 1) // 2 + 1 if M >= 2 * g + 1 else 0):
            items.append(CurveFunction([], [0] * j + [1], 2 * j + 2 * g + 1,
                                       (_mono(j) + "*" if j else "") + "y"))
        items.sort(key=lambda c: c.pole_order)
        return out + items
    sign = infinity_prime_sign(m, infinity_leading)
    for j in range(0, M - (g + 1) + 1):
        P = laurent_tail(m, j, sign=sign)
        out.append(CurveFunction([-c for c in P], [0] * j + [1], j + g + 1,
                                 f"{_mono(j) + '*' if j else ''}y - P{j}"))
    return out


def _mono(i):
    return "1" if i == 0 else ("x" if i == 1 else f"x^{i}")


def rr_pole_bound(d: int, s: int, g: int) -> int:
    """``t = d - s + g``: ``phi0`` can be taken in ``L(t inf)``, ``phi_inf`` in ``L((s+t) inf)``."""
    if not (1 <= s <= d) or g < 0:
        raise ValueError("need 1 <= s <= d and g >= 0")
    return d - s + g


def rr_spaces(d: int, s: int, g: int) -> tuple[int, int]:
    """Pole orders ``(t, s + t)`` of the spaces holding ``phi0`` and ``phi_inf``."""
    t = rr_pole_bound(d, s, g)
    return (t, s + t)


def expand_at_infinity(m: HyperellipticModel, func: CurveFunction, prec: int,
                       point: str = "inf", infinity_leading=None) -> TruncatedSeries:
    """Expansion of ``func`` at ``inf`` (or ``inf'`` for even models)."""
    g = m.genus
    extra = 2 * (g + 2) * (max(len(func.a), len(func.b)) + 1)
    if m.is_even:
        sp = infinity_prime_sign(m, infinity_leading)
        sign = sp if point in ("inf'", "inf_prime") else -sp
    else:
        sign = 1
    work = prec + extra
    x = m.x_at_infinity(work)
    y = m.y_at_infinity(work, sign)
    r = func.expand(x, y)
    return r.truncate(prec)


# ---------------------------------------------------------------------------
# coordinates from a basis of differentials; hyperellipticity test
# ---------------------------------------------------------------------------

def coords_from_basis(f: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``x = f1/f2`` and ``y = x'/f_g`` for an echelonized basis ``f1, ..., fg``."""
    if len(f) < 2:
        raise ValueError("need at least two basis series")
    for s in (f[1], f[-1]):
        if s.is_zero():
            raise ZeroDivisionError("basis series is zero to truncation")
    x = f[0] / f[1]
    y = x.derivative() / f[-1]
    return x, y


def hyperelliptic_monomials(g: int) -> list[tuple[int, int]]:
    """``(i, k)`` for ``x^i y^k``: ``1..x^(2g+2)``, ``y..x^(g+1) y``, ``y^2``."""
    return [(i, 0) for i in range(2 * g + 3)] + [(j, 1) for j in range(g + 2)] + [(0, 2)]


def detect_hyperelliptic(x: TruncatedSeries, y: TruncatedSeries, g: int, tol=None,
                         margin: int = 10):
    """Search for ``y^2 + u(x) y - v(x) = 0`` among the series; ``None`` if absent."""
    mons = hyperelliptic_monomials(g)
    xp = [None] * (2 * g + 3)
    one_prec = min(x.prec - x.valuation, y.prec - y.valuation)
    xp[0] = TruncatedSeries([1], 0, one_prec)
    for i in range(1, 2 * g + 3):
        xp[i] = xp[i - 1] * x
    cols = []
    for i, k in mons:
        s = xp[i]
        if k == 1:
            s = s * y
        elif k == 2:
            s = y * y
        cols.append(s)
    lo = min(c.valuation for c in cols if not c.is_zero())
    hi = min(c.prec for c in cols)
    rows = hi - lo
    if rows < len(cols) + margin:
        raise ValueError(f"series too short: {rows} usable terms, need "
                         f"{len(cols) + margin} for genus {g}")
    A = [[c[e] for c in cols] for e in range(lo, hi)]
    exact = all(_is_exact(v) for row in A for v in row)
    if exact:
        vec = _exact_kernel_vector(A)
        if vec is None:
            return None
    else:
        vec = _numeric_kernel_vector(A, tol)
        if vec is None:
            return None
    c = vec[-1]
    if (is_zero(c) if exact else abs(c) <= _tol(tol) * max(abs(v) for v in vec)):
        return None
    nx = 2 * g + 3
    a = [vec[i] / c for i in range(nx)]
    b = [vec[nx + j] / c for j in range(g + 2)]
    if not exact:
        scale = max([abs(t) for t in a + b] + [1])
        cut = _tol(tol) * scale
        a = [t if abs(t) > cut else 0 for t in a]
        b = [t if abs(t) > cut else 0 for t in b]
        a = [_clean(t) for t in a]
        b = [_clean(t) for t in b]
    v = [-t for t in a]
    try:
        return HyperellipticModel(b, v)
    except ValueError:
        return None


def _clean(t):
    if isinstance(t, mpmath.mpc) and t.imag == 0:
        return t.real
    return t


def _tol(tol):
    return mpmath.mpf(10) ** (-mpmath.mp.dps / 2) if tol is None else mpmath.mpf(tol)


def _exact_kernel_vector(A):
    """One nonzero kernel vector of a rational matrix, or ``None``."""
    rows = [[Fraction(v) for v in r] for r in A]
    n = len(rows[0])
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                q = rows[i][col]
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    fc = free[-1]
    vec = [Fraction(0)] * n
    vec[fc] = Fraction(1)
    for i, pc in enumerate(pivots):
        vec[pc] = -rows[i][fc]
    return vec


def _numeric_kernel_vector(A, tol):
    M = mpmath.matrix([[to_mpc(v) for v in row] for row in A])
    m, n = M.rows, M.cols
    norms = []
    for j in range(n):
        s = mpmath.sqrt(sum(abs(M[i, j]) ** 2 for i in range(m)))
        norms.append(s if s != 0 else mpmath.mpf(1))
        for i in range(m):
            M[i, j] = M[i, j] / norms[-1]
    U, S, V = mpmath.svd_c(M)
    svals = [S[i] for i in range(min(m, n))]
    if min(svals) >= _tol(tol) * max(svals):
        return None
    k = min(range(len(svals)), key=lambda i: svals[i])
    vec = [mpmath.conj(V[k, j]) / norms[j] for j in range(n)]
    return vec


# ---------------------------------------------------------------------------
# genus-1 local expansions
# ---------------------------------------------------------------------------

def _two_torsion_threshold():
    return mpmath.mpf(10) ** (-mpmath.mp.dps / 2)


def _on_curve_check(E, xP, yP):
    r = E.residual(xP, yP)
    rv = r.val if isinstance(r, Dual) else r
    if _is_exact(rv):
        if rv != 0:
            raise ValueError(f"point ({xP}, {yP}) is not on the curve")
    elif abs(rv) > mpmath.mpf(10) ** (-mpmath.mp.dps / 3) * max(1, abs(_v(xP)) ** 3):
        raise ValueError(f"point is off the curve (residual {mpmath.nstr(abs(rv), 5)})")


def _v(x):
    return x.val if isinstance(x, Dual) else x


def local_expand_nontorsion(E: EllipticModel, P, order: int, check: bool = True
                            ) -> TruncatedSeries:
    """``s(t)`` with ``(xP + t, yP + s)`` on ``E``, terms ``t^1 .. t^(order-1)``.

    ``s = -yP + yP sqrt(1 + (t^3 + 3 xP t^2 + (3 xP^2 - 27 c4) t) / yP^2)``.
    """
    xP, yP = P
    yv = _v(yP)
    if (yv == 0) if _is_exact(yv) else abs(yv) < _two_torsion_threshold():
        raise ValueError("P is a 2-torsion point; use local_expand_2torsion")
    if check:
        _on_curve_check(E, xP, yP)
    inv = 1 / (yP * yP) if not _is_exact(_v(yP)) else Fraction(1) / (yP * yP)
    q = TruncatedSeries([1, (3 * xP * xP - 27 * E.c4) * inv, 3 * xP * inv, inv], 0, order)
    root = series_sqrt(q, 1)
    return root * yP - yP


def local_expand_2torsion(E: EllipticModel, P, order: int) -> TruncatedSeries:
    """``x(s)`` near a point with ``yP = 0``, where ``y = s`` is the uniformizer.

    Solves ``tau^3 + 3 xP tau^2 + (3 xP^2 - 27 c4) tau = s^2`` for ``tau = x - xP``
    by Newton iteration on series (each step doubles the known terms).
    """
    xP = P[0] if isinstance(P, (tuple, list)) else P
    f1 = 3 * xP * xP - 27 * E.c4
    f1v = _v(f1)
    if (f1v == 0) if _is_exact(f1v) else abs(f1v) < _two_torsion_threshold():
        raise ValueError("xP is a multiple root: singular model")
    fx = _v(poly_eval(E.f, xP))
    if (fx != 0) if _is_exact(fx) else abs(fx) > mpmath.mpf(10) ** (-mpmath.mp.dps / 3):
        raise ValueError("P is not a 2-torsion point of the model")
    s2 = TruncatedSeries.monomial(2, order)
    G = [0, f1, 3 * xP, 1]
    dG = [f1, 6 * xP, 3]
    inv_f1 = Fraction(1) / f1 if _is_exact(f1v) else 1 / f1
    tau = TruncatedSeries.monomial(2, 4, inv_f1)
    known = 4
    while True:
        known = min(2 * known, order)
        tau = TruncatedSeries(tau.coeffs, tau.valuation, known)
        res = poly_eval_series(G, tau) - s2.truncate(known)
        tau = tau - res / poly_eval_series(dG, tau)
        if known >= order:
            break
    return (tau + xP).truncate(order)
