import random
from fractions import Fraction as Q

import mpmath
import pytest

from belyi.cli import load_newton_problem
from belyi.curves import EllipticModel
from belyi.newton import (
    BelyiMapAnsatz,
    DivergenceError,
    NewtonError,
    RamificationData,
    basis_monomial,
    build_newton_system,
    newton_solve,
    normalize_consecutive,
    rescale_weighted,
)

from conftest import fixture_path

# y^2 = x^3 + 5x + 10 and phi = ((x - 5) y + 16) / 32 written as u * phi0 / phi_inf
# with the zero of order 5 at infinity moved into phi0 = 1
EXACT = dict(c4=Q(-5, 27), c6=Q(-5, 27), u=Q(32), b0=Q(16), b2=Q(0), b3=Q(-5), b4=Q(0),
             x_1_1=Q(1), y_1_1=Q(-4), x_1_2=Q(6), y_1_2=Q(16),
             x_inf_1=Q(1), y_inf_1=Q(4), x_inf_2=Q(6), y_inf_2=Q(-16))


def to_mpf(q):
    q = Q(q)
    return mpmath.mpf(q.numerator) / q.denominator


@pytest.fixture(scope="module")
def degree5():
    system, _ = load_newton_problem(fixture_path("newton_degree5.json"))
    return system


def perturbed(eps, seed=0):
    rng = random.Random(seed)
    return {k: to_mpf(v) + eps * (2 * rng.random() - 1) for k, v in EXACT.items()}


def test_system_shape(degree5):
    assert degree5.size == (15, 15)
    assert degree5.variables[:3] == ["c4", "c6", "u"]


def test_exact_solution_has_zero_residual(degree5):
    res = degree5.residuals(degree5.pack(EXACT))
    assert all(r == 0 for r in res)


def test_start_at_exact_solution_takes_no_step(degree5):
    r = newton_solve(degree5, EXACT)
    assert r.iterations == 0 and r.residual == 0


def test_small_perturbation_reconverges_quadratically(degree5):
    r = newton_solve(degree5, perturbed(mpmath.mpf(10) ** -3), target_digits=30)
    assert r.residual < mpmath.mpf(10) ** -30
    assert r.iterations <= 12
    h = r.digits_history()
    # once in the basin the number of correct digits roughly doubles
    for a, b in zip(h[1:], h[2:]):
        assert b >= 2 * a - 3
    with mpmath.workdps(60):
        for name, v in zip(degree5.variables, r.values):
            assert abs(v - to_mpf(EXACT[name])) < mpmath.mpf(10) ** -30, name


@pytest.mark.parametrize("seed", range(3))
def test_large_perturbation_diverges(degree5, seed):
    with pytest.raises(DivergenceError):
        newton_solve(degree5, perturbed(100, seed), target_digits=30)


def test_fixture_start_converges(degree5):
    _, initial = load_newton_problem(fixture_path("newton_degree5.json"))
    r = newton_solve(degree5, initial, target_digits=30)
    assert r.iterations <= 12


def test_degree7_system_is_square():
    E = EllipticModel(Q(1), Q(2))
    ansatz = BelyiMapAnsatz(E, {0: 1, 2: 1}, {0: 1, 2: 1, 3: 1, 4: 1, 5: 1, 6: 1, 7: 1, 8: 1})
    ram = RamificationData(((6, 1), (6, 1), (3, 2, 2)), 6)
    system = build_newton_system(ansatz, ram, [("fix", "b7", 1)])
    assert system.size == (25, 25)
    assert system.variables[:5] == ["c4", "c6", "u", "a0", "b0"]
    assert system.variables[-2:] == ["xs_1", "ys_1"]
    with pytest.raises(ValueError):
        build_newton_system(ansatz, ram)  # one equation short


def test_degree1_system_is_empty():
    E = EllipticModel(Q(1), Q(2))
    ram = RamificationData(((1,), (1,), (1,)), 1)
    system = build_newton_system(BelyiMapAnsatz(E, {0: 1}, {0: 1}), ram)
    assert system.size == (0, 0)
    assert newton_solve(system, []).iterations == 0


def test_ansatz_mismatch_rejected():
    E = EllipticModel(Q(1), Q(2))
    ram = RamificationData(((5,), (4, 1), (4, 1)), 5)
    with pytest.raises(ValueError):
        build_newton_system(BelyiMapAnsatz(E, {0: 1}, {0: 1, 4: 1}), ram)
    with pytest.raises(ValueError):
        RamificationData(((5,), (4, 1), (3, 1)), 5)
    with pytest.raises(ValueError):
        RamificationData(((5,), (4, 1), (4, 1)), 2)


def test_basis_monomials():
    assert [basis_monomial(k) for k in (0, 2, 3, 4, 5, 7)] == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (2, 1)]
    with pytest.raises(ValueError):
        basis_monomial(1)


# -- weighted rescaling ---------------------------------------------------------

def sample_ansatz():
    E = EllipticModel(Q(-5, 27), Q(-5, 27))
    return E, BelyiMapAnsatz(E, {0: Q(1)}, {0: Q(16), 3: Q(-5), 5: Q(1)}, Q(32))


def test_rescale_by_one_is_identity():
    E, a = sample_ansatz()
    E2, a2 = rescale_weighted(E, a, 1)
    assert (E2.c4, E2.c6) == (E.c4, E.c6)
    assert a2.phi0 == a.phi0 and a2.phi_inf == a.phi_inf
    with pytest.raises(ValueError):
        rescale_weighted(E, a, 0)


def test_rescale_then_inverse_is_identity():
    E, a = sample_ansatz()
    lam = Q(3, 7)
    E2, a2 = rescale_weighted(*rescale_weighted(E, a, lam), 1 / lam)
    assert (E2.c4, E2.c6) == (E.c4, E.c6)
    assert a2.phi_inf == a.phi_inf and a2.u == a.u


def test_rescale_preserves_the_function():
    E, a = sample_ansatz()
    rng = random.Random(11)
    with mpmath.workdps(40):
        for lam in (Q(2), Q(-3, 5), mpmath.mpc("0.3", "-1.2")):
            E2, a2 = rescale_weighted(E, a, lam)
            for _ in range(5):
                x = mpmath.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3))
                y = mpmath.sqrt(x ** 3 - 27 * to_mpf(E.c4) * x - 54 * to_mpf(E.c6))
                lm = lam if not isinstance(lam, Q) else to_mpf(lam)
                x2, y2 = x / lm ** 2, y / lm ** 3
                assert abs(E2.residual(x2, y2)) < mpmath.mpf(10) ** -30
                assert abs(a2.evaluate(x2, y2) - a.evaluate(x, y)) < mpmath.mpf(10) ** -30


def test_printed_numeric_rescaling():
    # phi = 2 / (-1 + b3 y + b5 x y) with the printed five-digit coefficients
    b3, b5 = mpmath.mpc("2.21275", "0.71897"), mpmath.mpc(0, "1.77422")
    E = EllipticModel(mpmath.mpc("0.01030", "0.00748"), mpmath.mpc("-0.00270", "0.00196"),
                      check=False)
    a = BelyiMapAnsatz(E, {0: 2}, {0: -1, 3: b3, 5: b5})
    lam = b5 / b3 ** 2
    assert abs(abs(lam) - abs(mpmath.mpc("-0.19265", "-0.26516"))) < 1e-4
    _, a2 = rescale_weighted(E, a, lam)
    b3p, b5p = a2.phi_inf[3], a2.phi_inf[5]
    assert abs(b3p ** 2 / b5p - 1) < 1e-12
    # the two rescaled values are 2^16/5^10 and -2^8/5^5 (see the ledger on labels)
    got = sorted([b3p.real, b5p.real])
    assert abs(got[0] + 2 ** 8 / 5 ** 5) < 1e-4 and abs(got[1] - 2 ** 16 / 5 ** 10) < 1e-5


def test_normalize_consecutive():
    E, a = sample_ansatz()
    # weights 3 and 5: lam^2 = b3 / b5
    with mpmath.workdps(50):
        lam = normalize_consecutive(a, "b3", "b5")
        assert abs(lam ** 2 - Q(-5)) < mpmath.mpf(10) ** -45
        _, a2 = rescale_weighted(E, a, lam)
        assert abs(a2.phi_inf[3] - a2.phi_inf[5]) < mpmath.mpf(10) ** -40
    # already equal gives 1
    b = BelyiMapAnsatz(E, {0: 1}, {0: 1, 7: Q(2), 8: Q(2)})
    assert normalize_consecutive(b, "b7", "b8") == 1
    # unequal weights 7, 8 give an exact rational
    c = BelyiMapAnsatz(E, {0: 1}, {0: 1, 7: Q(3), 8: Q(5)})
    lam = normalize_consecutive(c, "b7", "b8")
    assert lam == Q(3, 5)
    _, c2 = rescale_weighted(E, c, lam)
    assert c2.phi_inf[7] == c2.phi_inf[8]
    # c4 and c6 have weights -4 and -6
    lam = normalize_consecutive(a, "c4", "c6")
    E2, _ = rescale_weighted(E, a, lam)
    assert E2.c4 == E2.c6
    with pytest.raises(ValueError):
        normalize_consecutive(BelyiMapAnsatz(E, {0: 1}, {0: 0, 3: 1}), "b0", "b3")
    with pytest.raises(ValueError):
        normalize_consecutive(a, "u", "a0")


def test_newton_error_hierarchy():
    assert issubclass(DivergenceError, NewtonError)
