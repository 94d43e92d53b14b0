import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qflb.algebra import (Algebra, abelian, apply_basis_change, center, characteristic_sequence,
                          is_nilpotent, is_solvable, leibniz_residual, left_annihilator,
                          lower_central_series, multiply, natural_grading, product_subspace,
                          right_annihilator, series)
from qflb.catalog import FamilySpec, _extend, _nilradical, build, family_G, family_L, mu1, mu2
from qflb.exactla import Matrix, Subspace


def e(n, *idx):
    v = [Fraction(0)] * n
    for i in idx:
        v[i - 1] += 1
    return v


def random_invertible(n, rng):
    while True:
        p = Matrix([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        if p.det():
            return p


CATALOG = [mu1(6), mu2(7), family_L(6), family_L(8, 1, -1, 0), family_L(7, 1, 2, 4),
           family_G(6, 0, 2, 1), family_G(7, 1, 2, 1)]


# -- products ----------------------------------------------------------------

def test_mu1_e1_squared():
    assert multiply(mu1(6), e(6, 1), e(6, 1)) == tuple(e(6, 2))


def test_product_with_zero():
    alg = family_L(6, 1, 0, 0)
    assert not any(multiply(alg, e(6, 1, 3), [0] * 6))


def test_g121_e3_squared():
    assert multiply(family_G(7, 1, 2, 1), e(7, 3), e(7, 3)) == tuple(e(7, 2))


def test_mu2_contains_e2_plus_en():
    alg = mu2(7)
    assert alg.bracket(0, 5) == {1: 1, 6: 1}


# -- Leibniz identity --------------------------------------------------------

def test_leibniz_holds_on_tables():
    assert leibniz_residual(mu2(7)).ok
    assert leibniz_residual(family_L(8, 1, -1, 0)).ok


def test_leibniz_fails_for_idempotent():
    alg = Algebra.from_brackets(1, {(1, 1): {1: 1}})
    rep = leibniz_residual(alg)
    assert not rep.ok
    assert rep.worst[0] == (0, 0, 0)


# -- subspaces ---------------------------------------------------------------

def test_square_of_mu1():
    alg = mu1(6)
    full = Subspace.full(6)
    assert product_subspace(alg, full, full) == Subspace.span_of_basis_vectors(6, [1, 2, 3, 5])


def test_product_with_zero_subspace():
    alg = mu1(6)
    assert product_subspace(alg, Subspace.full(6), Subspace.zero(6)).dim == 0


def test_square_of_l000():
    alg = family_L(6)
    full = Subspace.full(6)
    assert product_subspace(alg, full, full) == Subspace.span_of_basis_vectors(6, [1, 2, 3, 5])


def test_series_mu1():
    prof = series(mu1(6))
    assert prof.lower_central == (6, 4, 2, 1, 0)
    assert is_nilpotent(mu1(6))


def test_abelian_series():
    alg = abelian(4)
    assert series(alg).lower_central[:2] == (4, 0)
    assert is_nilpotent(alg) and is_solvable(alg)


def test_solvable_extension_is_not_nilpotent():
    r = build(FamilySpec("R1_1m10", 6))
    assert is_solvable(r) and not is_nilpotent(r)


def test_annihilators():
    assert left_annihilator(mu1(6)).dim == 3
    assert Subspace.span_of_basis_vectors(6, [3, 4, 5]) <= left_annihilator(mu1(6))
    assert left_annihilator(family_L(6)) == Subspace.span_of_basis_vectors(6, [3, 5])
    a = abelian(3)
    assert right_annihilator(a).dim == left_annihilator(a).dim == center(a).dim == 3


# -- characteristic sequence -------------------------------------------------

def test_characteristic_sequences():
    assert characteristic_sequence(mu1(6), e(6, 1)) == (4, 1, 1)
    assert characteristic_sequence(family_L(6), e(6, 1)) == (4, 2)
    assert characteristic_sequence(abelian(3), e(3, 2)) == (1, 1, 1)


def test_characteristic_sequence_rejects_square_element():
    with pytest.raises(ValueError):
        characteristic_sequence(mu1(6), e(6, 2))


def test_characteristic_sequence_rejects_non_nilpotent():
    r = build(FamilySpec("R1_1m10", 6))
    with pytest.raises(ValueError):
        characteristic_sequence(r, e(7, 7))


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=-9, max_value=9, max_denominator=5).filter(bool))
def test_characteristic_sequence_scale_invariant(lam):
    alg = family_L(7, 1, 0, 3)
    x = [Fraction(v) for v in (1, 0, 2, 0, -1, 3, 0)]
    assert characteristic_sequence(alg, [lam * v for v in x]) == characteristic_sequence(alg, x)


# -- natural grading ---------------------------------------------------------

def test_grading_l000():
    g = natural_grading(family_L(6))
    assert g.layer_dims == (2, 2, 1, 1)
    assert g.is_naturally_graded


def test_grading_abelian_and_mu2():
    assert natural_grading(abelian(3)).is_naturally_graded
    assert natural_grading(mu2(6)).is_naturally_graded


def test_grading_rejects_non_nilpotent():
    with pytest.raises(ValueError):
        natural_grading(build(FamilySpec("R1_1m10", 6)))


# -- basis changes -----------------------------------------------------------

def test_identity_change():
    alg = family_G(7, 1, 2, 1)
    assert apply_basis_change(alg, Matrix.identity(7)) == alg


def test_singular_change_rejected():
    with pytest.raises(ValueError):
        apply_basis_change(mu1(6), Matrix.zeros(6, 6))


def test_scaling_change_on_l000():
    n, a = 6, Fraction(2)
    p = Matrix([[a ** (i + 1) if i == j else 0 for j in range(n)] for i in range(n)])
    changed = apply_basis_change(family_L(n), p)
    assert leibniz_residual(changed).ok
    # [e1', e1'] = a^2 e2 = e2'
    assert changed.bracket(0, 0) == {1: 1}
    # [e2', e1'] = a^3 e3 = e3'
    assert changed.bracket(1, 0) == {2: 1}


def _mid_table(n, c2):
    right = {1: {1: 1, n - 1: -1}, n: {n: 1}}
    for i in range(2, n - 1):
        right[i] = {i: i - 1}
    return _extend(n, _nilradical("1m10", n), right, {1: {1: -1, 2: c2, n - 1: 1}, n: {n: -1}},
                   {}, "mid")


def _normalizer(n, a):
    """e_i' = a^i e_i (i <= n-2), e_(n-1)' = a(1-a) e2 + a e_(n-1), e_n' = a^2 e_n, x' = x."""
    p = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(1, n - 1):
        p[i - 1][i - 1] = a ** i
    p[n - 2][1], p[n - 2][n - 2] = a * (1 - a), a
    p[n - 1][n - 1] = a ** 2
    p[n][n] = 1
    return Matrix(p)


@pytest.mark.parametrize("c2,a", [(3, -2), (Fraction(1, 2), 5), (-4, 1), (7, Fraction(-1, 3))])
def test_normalization_relation(c2, a):
    n = 6
    c2, a = Fraction(c2), Fraction(a)
    changed = apply_basis_change(_mid_table(n, c2), _normalizer(n, a))
    assert leibniz_residual(changed).ok
    x = n
    prod = changed.bracket(x, 0)
    assert prod.get(0) == -1 and prod.get(n - 2) == 1
    assert prod.get(1, 0) == (c2 - 1 + a) / a


def test_normalization_kills_c2():
    n = 6
    changed = apply_basis_change(_mid_table(n, Fraction(3)), _normalizer(n, Fraction(-2)))
    assert changed.bracket(n, 0) == {0: -1, n - 2: 1}


@pytest.mark.parametrize("alg", CATALOG, ids=lambda a: a.name)
def test_change_round_trip(alg):
    rng = random.Random(alg.dim)
    p = random_invertible(alg.dim, rng)
    there = apply_basis_change(alg, p)
    assert leibniz_residual(there).ok
    assert apply_basis_change(there, p.inverse()) == alg


# -- structural properties ---------------------------------------------------

@pytest.mark.parametrize("alg", CATALOG, ids=lambda a: a.name)
def test_squares_in_right_annihilator(alg):
    rng = random.Random(1)
    ann = right_annihilator(alg)
    for _ in range(10):
        x = [Fraction(rng.randint(-5, 5)) for _ in range(alg.dim)]
        y = [Fraction(rng.randint(-5, 5)) for _ in range(alg.dim)]
        assert ann.contains(multiply(alg, x, x))
        sym = [a + b for a, b in zip(multiply(alg, x, y), multiply(alg, y, x))]
        assert ann.contains(sym)


@pytest.mark.parametrize("alg", CATALOG, ids=lambda a: a.name)
def test_series_nested(alg):
    chain = lower_central_series(alg)
    for upper, lower in zip(chain, chain[1:]):
        assert lower <= upper
    prof = series(alg)
    assert list(prof.derived) == sorted(prof.derived, reverse=True)


def test_json_round_trip():
    alg = family_G(7, 1, 2, 1)
    assert Algebra.from_json(alg.to_json()) == alg
