"""Truncated Laurent series over exact or floating coefficient domains.

A series is stored as ``valuation`` (lowest exponent carried), a coefficient
list starting at that exponent, and an absolute truncation order ``prec``:
terms of exponent ``>= prec`` are unknown.  Arithmetic never claims more
terms than its operands determine.

Coefficients may be ``int``/``Fraction``, ``mpmath`` numbers, or the
forward-mode ``Dual`` numbers used to differentiate through series code.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

class Dual:
    """Value plus gradient with respect to a fixed list of variables."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = grad  # dict: variable index -> partial derivative

    @classmethod
    def variable(cls, val, idx):
        return cls(val, {idx: 1})

    @staticmethod
    def _lift(x):
        return x if isinstance(x, Dual) else Dual(x, {})

    def __add__(self, other):
        o = Dual._lift(other)
        g = dict(self.grad)
        for k, v in o.grad.items():
            g[k] = g[k] + v if k in g else v
        return Dual(self.val + o.val, g)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, {k: -v for k, v in self.grad.items()})

    def __sub__(self, other):
        return self + (-Dual._lift(other))

    def __rsub__(self, other):
        return Dual._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.val * other, {k: v * other for k, v in self.grad.items()})
        g = {k: v * other.val for k, v in self.grad.items()}
        for k, v in other.grad.items():
            t = self.val * v
            g[k] = g[k] + t if k in g else t
        return Dual(self.val * other.val, g)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.val / other, {k: v / other for k, v in self.grad.items()})
        inv = 1 / other.val
        q = self.val * inv
        g = {k: v * inv for k, v in self.grad.items()}
        for k, v in other.grad.items():
            t = -q * v * inv
            g[k] = g[k] + t if k in g else t
        return Dual(q, g)

    def __rtruediv__(self, other):
        return Dual._lift(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("Dual supports integer powers only")
        if n < 0:
            return 1 / (self ** (-n))
        r = Dual(1, {})
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def sqrt(self):
        r = mpmath.sqrt(self.val)
        h = 1 / (2 * r)
        return Dual(r, {k: v * h for k, v in self.grad.items()})

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.val == other.val and self.grad == other.grad
        return self.val == other and not any(v != 0 for v in self.grad.values())

    __hash__ = None

    def __abs__(self):
        return abs(self.val)

    def __repr__(self):
        return f"Dual({self.val}, {self.grad})"


def is_zero(c) -> bool:
    if isinstance(c, Dual):
        return c.val == 0 and all(v == 0 for v in c.grad.values())
    return c == 0


def scalar_sqrt(c, target=None):
    """Square root in the coefficient domain; ``target`` picks the sign."""
    if isinstance(c, Dual):
        r = c.sqrt()
        if target is not None and abs(r.val - _val(target)) > abs(r.val + _val(target)):
            r = -r
        return r
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        if c < 0:
            raise ValueError(f"{c} has no rational square root")
        num, den = _isqrt_exact(c.numerator), _isqrt_exact(c.denominator)
        if num is None or den is None:
            raise ValueError(f"{c} is not the square of a rational number")
        r = Fraction(num, den)
    else:
        r = mpmath.sqrt(c)
    if target is not None and abs(r - target) > abs(r + target):
        r = -r
    return r


def _val(x):
    return x.val if isinstance(x, Dual) else x


def _isqrt_exact(n):
    import math
    r = math.isqrt(n)
    return r if r * r == n else None


def parse_scalar(x):
    """``"p/q"`` strings to Fraction, ``[re, im]`` pairs to mpc, numbers unchanged."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return mpmath.mpc(mpmath.mpf(x[0]), mpmath.mpf(x[1]))
    return x


def format_scalar(x, digits=None):
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, Dual):
        x = x.val
    c = mpmath.mpc(x)
    n = digits or mpmath.mp.dps
    return [mpmath.nstr(c.real, n), mpmath.nstr(c.imag, n)]


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

EXACT = 10 ** 9  # truncation order standing in for "no truncation"

class TruncatedSeries:
    """``sum_k c_k t^k`` for ``valuation <= k < prec``, unknown beyond ``prec``.

    Coefficients past the end of ``coeffs`` (but below ``prec``) are zero.
    """

    __slots__ = ("valuation", "coeffs", "prec")

    def __init__(self, coeffs: Sequence, valuation: int = 0, prec: int | None = None):
        coeffs = list(coeffs)
        if prec is None:
            prec = valuation + len(coeffs)
        n = prec - valuation
        if n <= 0:
            coeffs, valuation = [], prec
        elif len(coeffs) > n:
            coeffs = coeffs[:n]
        k = 0
        while k < len(coeffs) and is_zero(coeffs[k]):
            k += 1
        coeffs = coeffs[k:]
        while coeffs and is_zero(coeffs[-1]):
            coeffs.pop()
        self.coeffs = coeffs
        self.valuation = valuation + k if coeffs else prec
        self.prec = prec

    # construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, terms: dict, prec: int) -> "TruncatedSeries":
        terms = {e: v for e, v in terms.items() if e < prec}
        if not terms:
            return cls([], prec, prec)
        lo, hi = min(terms), max(terms)
        c = [0] * (hi - lo + 1)
        for e, v in terms.items():
            c[e - lo] = v
        return cls(c, lo, prec)

    @classmethod
    def monomial(cls, exponent: int, prec: int, coeff=1) -> "TruncatedSeries":
        return cls.from_dict({exponent: coeff}, prec)

    @classmethod
    def zero(cls, prec: int) -> "TruncatedSeries":
        return cls([], prec, prec)

    @classmethod
    def constant(cls, c, prec: int = None) -> "TruncatedSeries":
        return cls([c], 0, EXACT if prec is None else prec)

    # access -------------------------------------------------------------
    def __getitem__(self, e: int):
        if e >= self.prec:
            raise IndexError(f"coefficient of t^{e} is beyond the truncation order {self.prec}")
        k = e - self.valuation
        if k < 0 or k >= len(self.coeffs):
            return 0
        return self.coeffs[k]

    coefficient = __getitem__

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_exact(self) -> bool:
        return self.prec >= EXACT // 2

    @property
    def relative_precision(self) -> int:
        return self.prec - self.valuation

    @property
    def leading(self):
        if not self.coeffs:
            raise ValueError("series is zero to truncation")
        return self.coeffs[0]

    def terms(self) -> dict:
        return {self.valuation + k: c for k, c in enumerate(self.coeffs) if not is_zero(c)}

    def dense(self, start: int | None = None) -> list:
        """Coefficients from ``start`` (default: the valuation) up to ``prec - 1``."""
        if self.is_exact:
            raise ValueError("series has no truncation")
        start = self.valuation if start is None else start
        return [self[e] for e in range(start, self.prec)]

    def map(self, f) -> "TruncatedSeries":
        return TruncatedSeries([f(c) for c in self.coeffs], self.valuation, self.prec)

    def truncate(self, prec: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs, self.valuation, min(prec, self.prec))

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``t^k``."""
        return TruncatedSeries(self.coeffs, self.valuation + k, self.prec + k)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            if is_zero(other):
                return self
            other = TruncatedSeries([other], 0, EXACT)
        prec = min(self.prec, other.prec)
        parts = [s for s in (self, other) if s.coeffs]
        if not parts:
            return TruncatedSeries.zero(prec)
        lo = min(s.valuation for s in parts)
        hi = min(prec, max(s.valuation + len(s.coeffs) for s in parts))
        n = max(0, hi - lo)
        c = [0] * n
        for s in parts:
            off = s.valuation - lo
            for k, v in enumerate(s.coeffs):
                if off + k < n:
                    c[off + k] = c[off + k] + v
        return TruncatedSeries(c, lo, prec)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.valuation, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            if is_zero(other):
                return TruncatedSeries.zero(self.prec if self.is_exact else self.prec)
            return TruncatedSeries([c * other for c in self.coeffs], self.valuation, self.prec)
        if self.is_zero() or other.is_zero():
            prec = min(self.prec + (other.valuation if other.coeffs else 0),
                       other.prec + (self.valuation if self.coeffs else 0))
            return TruncatedSeries.zero(min(prec, EXACT))
        v = self.valuation + other.valuation
        prec = min(self.prec + other.valuation, other.prec + self.valuation, EXACT)
        a, b = self.coeffs, other.coeffs
        n = min(prec - v, len(a) + len(b) - 1)
        c = []
        for k in range(n):
            acc = 0
            lo = max(0, k - len(b) + 1)
            hi = min(k, len(a) - 1)
            for i in range(lo, hi + 1):
                acc = acc + a[i] * b[k - i]
            c.append(acc)
        return TruncatedSeries(c, v, prec)

    __rmul__ = __mul__

    def _need_truncation(self, what):
        if self.is_exact:
            raise ValueError(f"{what} of an untruncated series needs an explicit truncation")

    def inverse(self) -> "TruncatedSeries":
        if self.is_zero():
            raise ZeroDivisionError("series is zero to truncation")
        self._need_truncation("inverse")
        a = self.coeffs
        n = self.relative_precision
        a0 = Fraction(a[0]) if isinstance(a[0], int) else a[0]
        inv0 = 1 / a0
        b = [inv0]
        for k in range(1, n):
            acc = 0
            for i in range(1, min(k, len(a) - 1) + 1):
                acc = acc + a[i] * b[k - i]
            b.append(-acc * inv0)
        return TruncatedSeries(b, -self.valuation, -self.valuation + n)

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            if isinstance(other, int):
                other = Fraction(other)
            return TruncatedSeries([c / other for c in self.coeffs], self.valuation, self.prec)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("integer powers only")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return TruncatedSeries([1], 0, EXACT if self.is_exact else self.relative_precision)
        r = None
        b = self
        while n:
            if n & 1:
                r = b if r is None else r * b
            n >>= 1
            if n:
                b = b * b
        return r

    def derivative(self) -> "TruncatedSeries":
        c = [(self.valuation + k) * v for k, v in enumerate(self.coeffs)]
        return TruncatedSeries(c, self.valuation - 1, self.prec - 1)

    def sqrt(self, target=None) -> "TruncatedSeries":
        return series_sqrt(self, target)

    def compose_poly(self, poly: Sequence) -> "TruncatedSeries":
        return poly_eval_series(poly, self)

    # comparison / io ------------------------------------------------------
    def equals(self, other: "TruncatedSeries", tol=0) -> bool:
        d = self - other
        return all(abs(_val(c)) <= tol for c in d.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.prec == other.prec and self.valuation == other.valuation
                and self.coeffs == other.coeffs)

    __hash__ = None

    def to_json(self, digits=None) -> dict:
        return {"valuation": self.valuation, "prec": self.prec,
                "coeffs": [format_scalar(c, digits) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data) -> "TruncatedSeries":
        if isinstance(data, str):
            data = json.loads(data)
        return cls([parse_scalar(c) for c in data["coeffs"]], data["valuation"], data["prec"])

    def __repr__(self) -> str:
        parts = []
        for e, c in self.terms().items():
            parts.append(f"({_fmt(c)})*t^{e}")
        body = " + ".join(parts) if parts else "0"
        tail = "" if self.is_exact else f" + O(t^{self.prec})"
        return f"{body}{tail}"


def _fmt(c):
    if isinstance(c, Dual):
        c = c.val
    if isinstance(c, (mpmath.mpc, mpmath.mpf)):
        return mpmath.nstr(c, 8)
    return str(c)


def series_sqrt(a: TruncatedSeries, target=None) -> TruncatedSeries:
    """Square root by the coefficient recurrence ``b_n = (a_n - sum b_k b_{n-k}) / (2 b_0)``.

    ``target`` (a scalar) selects the sign of the leading coefficient.
    """
    if a.is_zero():
        raise ValueError("square root of a series that is zero to truncation")
    if a.valuation % 2:
        raise ValueError(f"odd valuation {a.valuation} has no square root")
    a._need_truncation("square root")
    n = a.relative_precision
    c = a.coeffs + [0] * (n - len(a.coeffs))
    b0 = scalar_sqrt(c[0], target)
    two_b0 = 2 * b0
    b = [b0]
    for k in range(1, n):
        acc = c[k]
        for i in range(1, k):
            acc = acc - b[i] * b[k - i]
        b.append(acc / two_b0 if not isinstance(two_b0, int) else Fraction(acc) / two_b0)
    v = a.valuation // 2
    return TruncatedSeries(b, v, v + n)


def poly_eval_series(poly: Sequence, s: TruncatedSeries) -> TruncatedSeries:
    """Horner evaluation of ``sum poly[i] s^i``."""
    poly = list(poly)
    if not poly:
        return TruncatedSeries.zero(max(s.prec, 0))
    r = TruncatedSeries([poly[-1]], 0, EXACT)
    for c in reversed(poly[:-1]):
        r = r * s + c
    if r.prec >= EXACT:
        # constant polynomial: keep the relative precision of the argument
        r = r.truncate(max(s.prec - s.valuation, 1))
    return r


# ---------------------------------------------------------------------------
# polynomials (coefficient lists, lowest degree first)
# ---------------------------------------------------------------------------

def poly_trim(p: Iterable) -> list:
    p = list(p)
    while p and is_zero(p[-1]):
        p.pop()
    return p


def poly_degree(p: Sequence) -> int:
    return len(poly_trim(p)) - 1


def poly_add(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    return poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                      for i in range(n)])


def poly_scale(p: Sequence, c) -> list:
    return poly_trim([a * c for a in p])


def poly_mul(p: Sequence, q: Sequence) -> list:
    if not p or not q:
        return []
    r = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            r[i + j] = r[i + j] + a * b
    return poly_trim(r)


def poly_eval(p: Sequence, x):
    r = 0
    for c in reversed(list(p)):
        r = r * x + c
    return r


def poly_derivative(p: Sequence) -> list:
    return poly_trim([i * c for i, c in enumerate(p)][1:])


def poly_to_str(p: Sequence, var: str = "x") -> str:
    terms = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if is_zero(c):
            continue
        cs = _fmt(c)
        if i == 0:
            terms.append(cs)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            terms.append(mono if cs == "1" else f"{cs}*{mono}")
    return " + ".join(terms) if terms else "0"


def to_fraction_poly(p: Sequence) -> list:
    return [Fraction(parse_scalar(c)) if not isinstance(c, Fraction) else c for c in p]
