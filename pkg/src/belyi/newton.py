"""Genus-1 Belyi map ansatz, Newton systems and scaling normalizations.

On ``E: y^2 = x^3 - 27 c4 x - 54 c6`` a Belyi map is written
``phi = u * phi0 / phi_inf`` with ``phi0`` and ``phi_inf`` in Riemann-Roch
spaces ``L(k inf)``.  Basis functions are indexed by their pole order at
infinity: ``k = 2i`` is ``x^i`` and ``k = 2i + 3`` is ``x^i y``; coefficient
``a_k`` belongs to ``phi0`` and ``b_k`` to ``phi_inf``.  The point at
infinity is a zero of ``phi`` of order ``s`` (the first cycle over 0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .curves import CurveFunction, EllipticModel, local_expand_nontorsion, rr_pole_bound, to_mpc
from .series import Dual, TruncatedSeries, parse_scalar

log = logging.getLogger(__name__)

FIBERS = ("0", "1", "inf")


class NewtonError(RuntimeError):
    """Base class for Newton failures."""


class SingularJacobianError(NewtonError):
    pass


class DivergenceError(NewtonError):
    pass


# ---------------------------------------------------------------------------
# ansatz
# ---------------------------------------------------------------------------

def pole_orders_upto(n: int) -> list[int]:
    """Pole orders at infinity realized on an elliptic curve: 0, 2, 3, 4, ..."""
    return [k for k in range(n + 1) if k != 1]


def basis_monomial(k: int) -> tuple[int, int]:
    """``(i, j)`` with ``x^i y^j`` of pole order ``k``."""
    if k == 1 or k < 0:
        raise ValueError(f"no function with a single pole of order {k}")
    return (k // 2, 0) if k % 2 == 0 else ((k - 3) // 2, 1)


def largest_pole_order(t: int) -> int:
    """Largest realized pole order ``<= t`` (``L(1 inf) = L(0 inf)`` in genus 1)."""
    return 0 if t <= 1 else t


@dataclass
class BelyiMapAnsatz:
    """``phi = u * phi0 / phi_inf`` with coefficients keyed by pole order."""

    model: EllipticModel
    phi0: dict            # pole order -> coefficient
    phi_inf: dict
    u: object = 1

    @property
    def deg0(self) -> int:
        return max(self.phi0)

    @property
    def deg_inf(self) -> int:
        return max(self.phi_inf)

    def coefficient(self, name: str):
        if name == "u":
            return self.u
        if name in ("c4", "c6"):
            return getattr(self.model, name)
        which, k = name[0], int(name[1:])
        if which not in "ab":
            raise KeyError(name)
        return (self.phi0 if which == "a" else self.phi_inf)[k]

    def weights(self) -> dict:
        w = {"c4": -4, "c6": -6, "u": 0}
        w.update({f"a{k}": k for k in self.phi0})
        w.update({f"b{k}": k for k in self.phi_inf})
        return w

    def functions(self) -> tuple[CurveFunction, CurveFunction]:
        """Numerator ``u * phi0`` and denominator ``phi_inf`` as ``a(x) + b(x) y``."""
        return (_to_function(self.phi0, self.u), _to_function(self.phi_inf, 1))

    def evaluate(self, x, y):
        num, den = self.functions()
        return num.evaluate(x, y) / den.evaluate(x, y)

    @classmethod
    def from_functions(cls, model: EllipticModel, num: CurveFunction, den: CurveFunction,
                       u=1) -> "BelyiMapAnsatz":
        return cls(model, _from_function(num), _from_function(den), u)


def _to_function(coeffs: dict, scale) -> CurveFunction:
    a, b = [], []
    for k, c in coeffs.items():
        i, j = basis_monomial(k)
        target = a if j == 0 else b
        while len(target) <= i:
            target.append(0)
        target[i] = target[i] + c * scale
    return CurveFunction(a, b)


def _from_function(f: CurveFunction) -> dict:
    out = {}
    for i, c in enumerate(f.a):
        if c != 0:
            out[2 * i] = c
    for i, c in enumerate(f.b):
        if c != 0:
            out[2 * i + 3] = c
    return out


@dataclass
class RamificationData:
    """Cycle types over 0, 1, inf; the point at infinity of the model sits over 0.

    ``infinity_length`` is the length of the cycle of ``sigma0`` containing 1.
    """

    lam: tuple
    infinity_length: int

    def __post_init__(self):
        self.lam = tuple(tuple(sorted(l, reverse=True)) for l in self.lam)
        d = sum(self.lam[0])
        if any(sum(l) != d for l in self.lam):
            raise ValueError("partitions must all sum to the degree")
        if self.infinity_length not in self.lam[0]:
            raise ValueError("the cycle at infinity must be a part of lambda0")

    @property
    def degree(self) -> int:
        return sum(self.lam[0])

    @classmethod
    def from_triple(cls, t) -> "RamificationData":
        s = next(len(c) for c in t.sigma0.cycles(include_fixed=True) if 1 in c)
        return cls(tuple(tuple(p) for p in t.cycle_types()), s)

    def affine_points(self) -> list[tuple[int, int]]:
        """``(fiber, e)`` for every affine ramification point, in partition order."""
        out = []
        rest0 = list(self.lam[0])
        rest0.remove(self.infinity_length)
        for e in rest0:
            out.append((0, e))
        for fiber in (1, 2):
            for e in self.lam[fiber]:
                out.append((fiber, e))
        return out


# ---------------------------------------------------------------------------
# the system
# ---------------------------------------------------------------------------

@dataclass
class NewtonSystem:
    variables: list
    equations: list
    residual_fn: Callable
    ansatz: BelyiMapAnsatz | None = None
    ram: RamificationData | None = None

    @property
    def size(self) -> tuple[int, int]:
        return (len(self.equations), len(self.variables))

    def residuals(self, values: Sequence) -> list:
        return self.residual_fn(list(values))

    def jacobian(self, values: Sequence):
        duals = [Dual.variable(v, i) for i, v in enumerate(values)]
        res = self.residual_fn(duals)
        n = len(values)
        J = mpmath.matrix(len(res), n)
        F = []
        for r, val in enumerate(res):
            if isinstance(val, Dual):
                F.append(val.val)
                for c, dv in val.grad.items():
                    J[r, c] = dv
            else:
                F.append(val)
        return F, J

    def pack(self, assignment: dict) -> list:
        missing = [v for v in self.variables if v not in assignment]
        if missing:
            raise KeyError(f"no value for {missing}")
        return [assignment[v] for v in self.variables]

    def unpack(self, values: Sequence) -> dict:
        return dict(zip(self.variables, values))


def _point_names(ram):
    names = []
    count = {}
    for fiber, e in ram.affine_points():
        count[fiber] = count.get(fiber, 0) + 1
        tag = f"{FIBERS[fiber]}_{count[fiber]}"
        names.append((fiber, e, f"x_{tag}", f"y_{tag}"))
    return names


def build_newton_system(ansatz: BelyiMapAnsatz, ram: RamificationData,
                        normalizations: Sequence = ()) -> NewtonSystem:
    """Square polynomial system whose solutions are Belyi maps with the ramification ``ram``.

    Unknowns: ``c4, c6, u``, the non-leading coefficients of ``phi0`` and
    ``phi_inf`` (leading ones stay at their ansatz values), coordinates of
    the affine ramification points, and coordinates of extra common zeros of
    ``phi0`` and ``phi_inf``.  Equations: each point lies on the curve, and
    the first ``e`` Taylor coefficients of ``phi0``, ``u phi0 - phi_inf`` or
    ``phi_inf`` vanish there (fibers 0, 1, inf); each extra zero lies on the
    curve and kills both ``phi0`` and ``phi_inf``.  ``normalizations`` are
    ``("equal", name1, name2)`` or ``("fix", name, value)`` entries removing
    the scaling freedom.
    """
    d = ram.degree
    s = ram.infinity_length
    if d == 1:
        return NewtonSystem([], [], lambda v: [], ansatz, ram)
    n0, ninf = ansatz.deg0, ansatz.deg_inf
    if ninf - n0 != s:
        raise ValueError(f"pole orders {n0}, {ninf} do not give a zero of order {s} at infinity")
    t_bound = rr_pole_bound(d, s, 1)
    if n0 > t_bound:
        raise ValueError(f"phi0 has pole order {n0} > {t_bound}")
    extra = ninf - d
    if extra < 0:
        raise ValueError("phi_inf has fewer zeros than the degree")
    a_free = sorted(k for k in ansatz.phi0 if k != n0)
    b_free = sorted(k for k in ansatz.phi_inf if k != ninf)
    variables = ["c4", "c6", "u"] + [f"a{k}" for k in a_free] + [f"b{k}" for k in b_free]
    points = _point_names(ram)
    for _, _, xn, yn in points:
        variables += [xn, yn]
    for j in range(1, extra + 1):
        variables += [f"xs_{j}", f"ys_{j}"]
    index = {v: i for i, v in enumerate(variables)}
    lead0 = ansatz.phi0[n0]
    lead_inf = ansatz.phi_inf[ninf]

    equations = []
    for fiber, e, xn, yn in points:
        equations.append(f"on_curve({xn},{yn})")
        for k in range(e):
            equations.append(f"{['phi0', 'u*phi0-phi_inf', 'phi_inf'][fiber]}[t^{k}]@{xn}")
    for j in range(1, extra + 1):
        equations += [f"on_curve(xs_{j},ys_{j})", f"phi0(xs_{j})", f"phi_inf(xs_{j})"]
    norm = []
    for item in normalizations:
        kind = item[0]
        if kind == "equal":
            norm.append(("equal", index[item[1]], index[item[2]]))
            equations.append(f"{item[1]}={item[2]}")
        elif kind == "fix":
            norm.append(("fix", index[item[1]], parse_scalar(item[2])))
            equations.append(f"{item[1]}={item[2]}")
        else:
            raise ValueError(f"unknown normalization {item!r}")
    if len(equations) != len(variables):
        raise ValueError(f"non-square system: {len(equations)} equations in "
                         f"{len(variables)} variables")

    def residual_fn(v):
        c4, c6, u = v[0], v[1], v[2]
        E = EllipticModel(c4, c6, check=False)
        phi0 = {n0: lead0}
        phi0.update({k: v[index[f"a{k}"]] for k in a_free})
        phiinf = {ninf: lead_inf}
        phiinf.update({k: v[index[f"b{k}"]] for k in b_free})
        out = []
        for fiber, e, xn, yn in points:
            xP, yP = v[index[xn]], v[index[yn]]
            out.append(E.residual(xP, yP))
            if e == 1:
                x_s = TruncatedSeries([xP], 0, 1)
                y_s = TruncatedSeries([yP], 0, 1)
            else:
                sser = local_expand_nontorsion(E, (xP, yP), e, check=False)
                x_s = TruncatedSeries([xP, 1], 0, e)
                y_s = sser + yP
            F = _combination(fiber, phi0, phiinf, u, x_s, y_s)
            out.extend(F[k] for k in range(e))
        for j in range(1, extra + 1):
            xs, ys = v[index[f"xs_{j}"]], v[index[f"ys_{j}"]]
            out.append(E.residual(xs, ys))
            out.append(_eval_coeffs(phi0, xs, ys))
            out.append(_eval_coeffs(phiinf, xs, ys))
        for kind, i, other in norm:
            out.append(v[i] - v[other] if kind == "equal" else v[i] - other)
        return out

    return NewtonSystem(variables, equations, residual_fn, ansatz, ram)


def _eval_coeffs(coeffs, x, y):
    r = 0
    for k, c in coeffs.items():
        i, j = basis_monomial(k)
        term = c * x ** i if i else c
        if j:
            term = term * y
        r = r + term
    return r


def _series_coeffs(coeffs, x_s, y_s):
    powers = [None, x_s]
    r = TruncatedSeries.zero(x_s.prec)
    for k, c in sorted(coeffs.items()):
        i, j = basis_monomial(k)
        while len(powers) <= i:
            powers.append(powers[-1] * x_s)
        term = powers[i] if i else None
        if j:
            term = y_s if term is None else term * y_s
        r = r + (c if term is None else term * c)
    return r


def _combination(fiber, phi0, phiinf, u, x_s, y_s):
    if fiber == 0:
        return _series_coeffs(phi0, x_s, y_s)
    if fiber == 2:
        return _series_coeffs(phiinf, x_s, y_s)
    return _series_coeffs(phi0, x_s, y_s) * u - _series_coeffs(phiinf, x_s, y_s)


# ---------------------------------------------------------------------------
# Newton iteration
# ---------------------------------------------------------------------------

@dataclass
class NewtonResult:
    values: list
    residual: object
    iterations: int
    history: list = field(default_factory=list)  # residual norms, initial first
    converged: bool = True

    def digits_history(self) -> list:
        return [float(-mpmath.log10(r)) if r > 0 else float("inf") for r in self.history]


def _norm(vec):
    return max((abs(x) for x in vec), default=mpmath.mpf(0))


def newton_solve(system: NewtonSystem, initial, target_digits: int = 30,
                 digits: int | None = None, max_iter: int = 50, patience: int = 3
                 ) -> NewtonResult:
    """Plain Newton iteration until the residual drops below ``10^-target_digits``.

    Works at ``digits`` decimal digits (default ``target_digits + 20``).
    Raises ``SingularJacobianError`` or ``DivergenceError``.
    """
    if isinstance(initial, dict):
        initial = system.pack(initial)
    digits = digits if digits is not None else target_digits + 20
    with mpmath.workdps(digits):
        x = [to_mpc(v) for v in initial]
        if not system.variables:
            return NewtonResult([], mpmath.mpf(0), 0, [mpmath.mpf(0)])
        target = mpmath.mpf(10) ** (-target_digits)
        F, J = system.jacobian(x)
        r = _norm(F)
        history = [r]
        best = r
        stalled = 0
        for it in range(1, max_iter + 1):
            if r < target:
                return NewtonResult(x, r, it - 1, history)
            try:
                dx = mpmath.lu_solve(J, mpmath.matrix([-f for f in F]))
            except ZeroDivisionError as exc:
                raise SingularJacobianError("Jacobian is numerically singular") from exc
            if any(not mpmath.isfinite(abs(dx[i])) for i in range(len(x))):
                raise SingularJacobianError("Jacobian is numerically singular")
            x = [x[i] + dx[i] for i in range(len(x))]
            try:
                F, J = system.jacobian(x)
            except (ZeroDivisionError, ValueError) as exc:
                raise DivergenceError(f"iteration {it} left the domain: {exc}") from exc
            r = _norm(F)
            history.append(r)
            log.debug("newton iteration %d: residual %s", it, mpmath.nstr(r, 5))
            if not mpmath.isfinite(r):
                raise DivergenceError(f"residual is not finite at iteration {it}")
            if r < best:
                best = r
                stalled = 0
            else:
                stalled += 1
                if stalled >= patience:
                    raise DivergenceError(
                        f"residual has not decreased for {patience} iterations "
                        f"(now {mpmath.nstr(r, 5)})")
        if r < target:
            return NewtonResult(x, r, max_iter, history)
        raise DivergenceError(f"no convergence after {max_iter} iterations "
                              f"(residual {mpmath.nstr(r, 5)})")


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def _mul(c, lam, k):
    if k == 0:
        return c
    return c * lam ** k


def rescale_weighted(E: EllipticModel, ansatz: BelyiMapAnsatz, lam) -> tuple:
    """Apply ``(x, y) -> (lam^-2 x, lam^-3 y)``: ``c4, c6`` pick up ``lam^-4, lam^-6``.

    A coefficient of pole order ``k`` is multiplied by ``lam^k`` so that the
    map is the same function in the new coordinates.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if isinstance(lam, int):
        lam = Fraction(lam)
    E2 = EllipticModel(_mul(E.c4, lam, -4), _mul(E.c6, lam, -6), check=False)
    phi0 = {k: _mul(c, lam, k) for k, c in ansatz.phi0.items()}
    phiinf = {k: _mul(c, lam, k) for k, c in ansatz.phi_inf.items()}
    return E2, BelyiMapAnsatz(E2, phi0, phiinf, ansatz.u)


def normalize_consecutive(ansatz: BelyiMapAnsatz, i: str, j: str):
    """The ``lam`` for which ``rescale_weighted`` makes coefficients ``i`` and ``j`` equal.

    Solves ``lam^(w_j - w_i) = c_i / c_j`` with the principal root.
    """
    w = ansatz.weights()
    ci, cj = ansatz.coefficient(i), ansatz.coefficient(j)
    if ci == 0 or cj == 0:
        raise ValueError("coefficients must be nonzero")
    dw = w[j] - w[i]
    if dw == 0:
        raise ValueError("coefficients of equal weight cannot be equalized by scaling")
    ratio = ci / cj
    if dw == 1:
        return ratio
    if dw == -1:
        return 1 / ratio
    if isinstance(ratio, Fraction):
        root = _rational_root(ratio, dw)
        if root is not None:
            return root
        ratio = to_mpc(ratio)
    lam = mpmath.exp(mpmath.log(to_mpc(ratio)) / dw)
    return lam.real if lam.imag == 0 else lam


def _rational_root(q: Fraction, n: int):
    if n < 0:
        q, n = 1 / q, -n
    if q < 0:
        return None
    num = round(q.numerator ** (1.0 / n)) if q.numerator else 0
    den = round(q.denominator ** (1.0 / n))
    for a in (num - 1, num, num + 1):
        for b in (den - 1, den, den + 1):
            if a > 0 and b > 0 and Fraction(a, b) ** n == q:
                return Fraction(a, b)
    return None
